"""Two-qubit decay scenarios: jump channels, presets, and validation.

A scenario bundles a (possibly zero) Hamiltonian H0, a list of jump channels
(J_m, gamma_m) and an initial pure state.  The derived damping kernel is

    K = (1/2) sum_m gamma_m J_m^dag J_m          (lifted to the pair space)

and the effective non-Hermitian generator for no-jump evolution is
H_eff = H0 - i K.  Channels marked with a coherent ``shift`` alpha stand for
the displaced operators J + alpha used by homodyne-style monitoring; a channel
with ``het_freq`` Omega carries the rotating displacement alpha e^{i Omega t}.
Displacements come in +/- pairs at half the original rate, which leaves the
ensemble (Lindblad) generator unchanged — `validate_scenario` can check that
on the 16x16 superoperator.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .linalg import (
    ID2, SIGMA_MINUS, SIGMA_PLUS, SIGMA_X, SIGMA_Y, SIGMA_Z,
    dag, kron2, require_finite,
)

__all__ = [
    "JumpChannel", "Scenario", "ValidationReport",
    "bell_state", "state_from_amplitudes", "local_hamiltonian",
    "preset_photon_counting", "preset_thermal", "preset_dephasing",
    "preset_rotated_thermal", "preset_common_bath",
    "with_homodyne_shift", "with_heterodyne", "with_phase_rotation",
    "scenario_from_channels", "lindblad_superoperator", "validate_scenario",
]

ID4 = np.eye(4, dtype=complex)

_LOCALITIES = ("A", "B", "joint")


def state_from_amplitudes(c_uu: complex, c_ud: complex, c_du: complex,
                          c_dd: complex) -> np.ndarray:
    """Pack amplitudes in the {uu, ud, du, dd} basis into a state vector."""
    return np.array([c_uu, c_ud, c_du, c_dd], dtype=complex)


def bell_state() -> np.ndarray:
    """(|uu> + |dd>)/sqrt(2), the default initial state."""
    s = 1.0 / np.sqrt(2.0)
    return state_from_amplitudes(s, 0.0, 0.0, s)


def local_hamiltonian(h_a: np.ndarray | None, h_b: np.ndarray | None) -> np.ndarray:
    """Lift single-qubit Hamiltonians to H_A (x) 1 + 1 (x) H_B."""
    h = np.zeros((4, 4), dtype=complex)
    if h_a is not None:
        h += kron2(np.asarray(h_a, dtype=complex), ID2)
    if h_b is not None:
        h += kron2(ID2, np.asarray(h_b, dtype=complex))
    return h


@dataclass(frozen=True)
class JumpChannel:
    """One decay channel: operator, rate, and optional coherent displacement.

    ``op`` is 2x2 for locality "A"/"B" (lifted internally) or 4x4 for "joint".
    Construction is permissive — semantic problems (negative rate, wrong
    shapes, displacement bookkeeping) are reported by `validate_scenario`
    rather than raised here, so that invalid configurations can be inspected.
    """

    id: str
    locality: str
    op: np.ndarray
    rate: float
    shift: complex | None = None
    het_freq: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "op", np.asarray(self.op, dtype=complex))

    @property
    def is_static(self) -> bool:
        return self.het_freq is None

    def shift_at(self, t: float) -> complex:
        if self.shift is None:
            return 0.0
        if self.het_freq is None:
            return complex(self.shift)
        return complex(self.shift) * np.exp(1j * self.het_freq * t)

    def operator(self, t: float = 0.0) -> np.ndarray:
        """Effective (displaced) operator at time t, before lifting."""
        a = self.shift_at(t)
        if a == 0.0:
            return self.op
        return self.op + a * np.eye(self.op.shape[0], dtype=complex)

    def rate_operator(self) -> np.ndarray:
        """Operator the closed-form decay rates are evaluated on.

        Static displacements are part of the monitoring scheme and enter the
        rate formulas literally; a rotating displacement averages out and is
        dropped.
        """
        return self.op if self.het_freq is not None else self.operator(0.0)

    def lifted(self, t: float = 0.0) -> np.ndarray:
        """Effective operator at time t on the pair space."""
        j = self.operator(t)
        if self.locality == "A":
            return kron2(j, ID2)
        if self.locality == "B":
            return kron2(ID2, j)
        return j


def _lift(locality: str, op: np.ndarray) -> np.ndarray:
    if locality == "A":
        return kron2(op, ID2)
    if locality == "B":
        return kron2(ID2, op)
    return np.asarray(op, dtype=complex)


@dataclass(frozen=True)
class Scenario:
    """Immutable bundle of Hamiltonian, channels and initial state.

    Derived quantities (damping kernel K, effective generator H_eff, lifted
    operator stack) are cached on first use.  Engines never mutate a
    scenario; transformed copies are produced by the ``with_*`` helpers.
    """

    h0: np.ndarray
    channels: tuple[JumpChannel, ...]
    initial: np.ndarray
    preset: str | None = None
    thermal_rates: tuple[float, float, float, float] | None = field(
        default=None, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "h0", np.asarray(self.h0, dtype=complex))
        object.__setattr__(self, "initial",
                           np.asarray(self.initial, dtype=complex).reshape(4))
        object.__setattr__(self, "channels", tuple(self.channels))

    @cached_property
    def k_op(self) -> np.ndarray:
        """Damping kernel K = (1/2) sum_m gamma_m J_m^dag J_m on the pair space.

        Displaced channels contribute through their effective operators; for
        the +/- displacement pairs produced by the preset transformations the
        cross terms cancel and K is time independent, so evaluating at t = 0
        is exact.
        """
        k = np.zeros((4, 4), dtype=complex)
        for ch in self.channels:
            j = ch.lifted(0.0)
            k += 0.5 * ch.rate * (dag(j) @ j)
        return k

    @cached_property
    def h_eff(self) -> np.ndarray:
        return self.h0 - 1j * self.k_op

    @cached_property
    def gamma_max(self) -> float:
        return max((ch.rate for ch in self.channels), default=0.0)

    @property
    def time_dependent(self) -> bool:
        return any(not ch.is_static for ch in self.channels)

    @cached_property
    def lifted_ops(self) -> np.ndarray:
        """Stack (M, 4, 4) of lifted effective operators at t = 0."""
        return np.stack([ch.lifted(0.0) for ch in self.channels]) \
            if self.channels else np.zeros((0, 4, 4), dtype=complex)

    @cached_property
    def rates(self) -> np.ndarray:
        return np.array([ch.rate for ch in self.channels], dtype=float)

    def lifted_at(self, t: float) -> np.ndarray:
        if not self.time_dependent:
            return self.lifted_ops
        return np.stack([ch.lifted(t) for ch in self.channels])

    def with_initial(self, psi: np.ndarray) -> "Scenario":
        psi = require_finite(psi, "initial state").reshape(4)
        return replace(self, initial=psi)


def scenario_from_channels(channels, initial=None, h0=None, preset=None,
                           thermal_rates=None) -> Scenario:
    """Assemble a scenario from explicit channels (permissive, see validate)."""
    if initial is None:
        initial = bell_state()
    if h0 is None:
        h0 = np.zeros((4, 4), dtype=complex)
    return Scenario(h0=h0, channels=tuple(channels), initial=initial,
                    preset=preset, thermal_rates=thermal_rates)


def _check_rates(*rates: float) -> None:
    for g in rates:
        if not np.isfinite(g) or g < 0:
            raise ValueError(f"decay rates must be finite and >= 0, got {g}")


def preset_photon_counting(gamma_a: float, gamma_b: float,
                           initial: np.ndarray | None = None) -> Scenario:
    """Independent zero-temperature decay: sigma_- on each qubit."""
    _check_rates(gamma_a, gamma_b)
    channels = (
        JumpChannel("decay-A", "A", SIGMA_MINUS, gamma_a),
        JumpChannel("decay-B", "B", SIGMA_MINUS, gamma_b),
    )
    return scenario_from_channels(channels, initial, preset="photon_counting",
                                  thermal_rates=(0.0, gamma_a, 0.0, gamma_b))


def preset_thermal(gamma_plus_a: float, gamma_minus_a: float,
                   gamma_plus_b: float, gamma_minus_b: float,
                   initial: np.ndarray | None = None) -> Scenario:
    """Independent finite-temperature baths: sigma_-+ channels per qubit."""
    _check_rates(gamma_plus_a, gamma_minus_a, gamma_plus_b, gamma_minus_b)
    channels = (
        JumpChannel("up-A", "A", SIGMA_PLUS, gamma_plus_a),
        JumpChannel("down-A", "A", SIGMA_MINUS, gamma_minus_a),
        JumpChannel("up-B", "B", SIGMA_PLUS, gamma_plus_b),
        JumpChannel("down-B", "B", SIGMA_MINUS, gamma_minus_b),
    )
    return scenario_from_channels(
        channels, initial, preset="thermal",
        thermal_rates=(gamma_plus_a, gamma_minus_a, gamma_plus_b, gamma_minus_b))


def preset_dephasing(v_a, v_b, gamma_a: float, gamma_b: float,
                     initial: np.ndarray | None = None) -> Scenario:
    """Pure dephasing along unit Bloch vectors: J_i = v_i . sigma."""
    _check_rates(gamma_a, gamma_b)
    channels = []
    for name, v, g in (("dephase-A", v_a, gamma_a), ("dephase-B", v_b, gamma_b)):
        v = np.asarray(v, dtype=float)
        if v.shape != (3,):
            raise ValueError(f"Bloch vector for {name} must have 3 components")
        if abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise ValueError(f"Bloch vector for {name} must be unit length "
                             f"(|v| = {np.linalg.norm(v):.12f})")
        op = v[0] * SIGMA_X + v[1] * SIGMA_Y + v[2] * SIGMA_Z
        channels.append(JumpChannel(name, name[-1], op, g))
    return scenario_from_channels(tuple(channels), initial, preset="dephasing")


def preset_rotated_thermal(u_a, u_b,
                           gamma_plus_a: float, gamma_minus_a: float,
                           gamma_plus_b: float, gamma_minus_b: float,
                           channel_rates_a=None, channel_rates_b=None,
                           initial: np.ndarray | None = None) -> Scenario:
    """Thermal baths monitored in a rotated channel basis.

    Each qubit's pair (sigma_+, sigma_-) with rates (gamma_+, gamma_-) is
    re-mixed into N >= 2 channels

        J_mu = sum_m sqrt(gamma_m / g_mu) u_{mu m} sigma_m,   m in {+, -},

    where the N x 2 matrix u has orthonormal columns (u^dag u = 1).  The
    ensemble generator is invariant for *any* positive channel rates g_mu
    (they cancel against the operator normalization), so the g_mu are free
    parameters; by default g_mu = sum_m gamma_m |u_{mu m}|^2, which keeps the
    channel operators near unit scale.
    """
    _check_rates(gamma_plus_a, gamma_minus_a, gamma_plus_b, gamma_minus_b)
    channels = []
    for qubit, u, gp, gm, crates in (
            ("A", u_a, gamma_plus_a, gamma_minus_a, channel_rates_a),
            ("B", u_b, gamma_plus_b, gamma_minus_b, channel_rates_b)):
        u = np.asarray(u, dtype=complex)
        if u.ndim != 2 or u.shape[1] != 2 or u.shape[0] < 2:
            raise ValueError(f"mixing matrix for qubit {qubit} must be N x 2 "
                             f"with N >= 2, got {u.shape}")
        gram = dag(u) @ u
        if np.max(np.abs(gram - np.eye(2))) > 1e-10:
            raise ValueError(f"mixing matrix for qubit {qubit} must have "
                             "orthonormal columns (u^dag u = 1 within 1e-10)")
        n = u.shape[0]
        if crates is None:
            crates = [gp * abs(u[mu, 0]) ** 2 + gm * abs(u[mu, 1]) ** 2
                      for mu in range(n)]
        crates = [float(g) for g in crates]
        if len(crates) != n:
            raise ValueError(f"need {n} channel rates for qubit {qubit}")
        if any(g <= 0 for g in crates):
            raise ValueError("rotated channel rates must be positive")
        for mu in range(n):
            g_mu = crates[mu]
            op = (np.sqrt(gp / g_mu) * u[mu, 0] * SIGMA_PLUS
                  + np.sqrt(gm / g_mu) * u[mu, 1] * SIGMA_MINUS)
            channels.append(JumpChannel(f"mix{mu + 1}-{qubit}", qubit, op, g_mu))
    return scenario_from_channels(
        tuple(channels), initial, preset="rotated_thermal",
        thermal_rates=(gamma_plus_a, gamma_minus_a, gamma_plus_b, gamma_minus_b))


def preset_common_bath(gamma: float,
                       initial: np.ndarray | None = None) -> Scenario:
    """Both qubits coupled to one bath: single joint channel sigma_- + sigma_-."""
    _check_rates(gamma)
    op = kron2(SIGMA_MINUS, ID2) + kron2(ID2, SIGMA_MINUS)
    channels = (JumpChannel("collective-decay", "joint", op, gamma),)
    return scenario_from_channels(channels, initial, preset="common_bath")


def with_homodyne_shift(s: Scenario, shifts) -> Scenario:
    """Split every channel (J, gamma) into (J +/- alpha, gamma/2).

    The displacement pairs leave the ensemble generator unchanged but change
    the jump statistics and the jump-conditioned concurrence.  Only local
    channels may be displaced.
    """
    shifts = [complex(a) for a in np.atleast_1d(shifts)]
    if len(shifts) == 1:
        shifts = shifts * len(s.channels)
    if len(shifts) != len(s.channels):
        raise ValueError(f"need one displacement per channel "
                         f"({len(s.channels)}), got {len(shifts)}")
    channels = []
    for ch, a in zip(s.channels, shifts):
        if ch.locality == "joint":
            raise ValueError(f"channel {ch.id!r} is non-local; displaced "
                             "monitoring is defined per qubit only")
        if ch.shift is not None:
            raise ValueError(f"channel {ch.id!r} already carries a displacement")
        for sign, tag in ((+1, "p"), (-1, "m")):
            channels.append(JumpChannel(f"{ch.id}~{tag}", ch.locality, ch.op,
                                        ch.rate / 2.0, shift=sign * a))
    return replace(s, channels=tuple(channels),
                   preset=f"{s.preset}+shift" if s.preset else None)


def with_heterodyne(s: Scenario, amplitudes, frequencies) -> Scenario:
    """Displace channels with rotating amplitudes alpha e^{i Omega t}.

    ``amplitudes`` and ``frequencies`` give one positive alpha and Omega per
    channel.  The Omega -> 0 limit reduces to the static displacement of
    `with_homodyne_shift`.  K and H_eff stay time independent because the
    +/- pair cross terms cancel at every instant.
    """
    amps = [float(a) for a in np.atleast_1d(amplitudes)]
    freqs = [float(w) for w in np.atleast_1d(frequencies)]
    if len(amps) == 1:
        amps = amps * len(s.channels)
    if len(freqs) == 1:
        freqs = freqs * len(s.channels)
    if len(amps) != len(s.channels) or len(freqs) != len(s.channels):
        raise ValueError("need one amplitude and one frequency per channel")
    if any(a <= 0 for a in amps):
        raise ValueError("heterodyne amplitudes must be positive")
    if any(w <= 0 for w in freqs):
        raise ValueError("heterodyne frequencies must be positive")
    channels = []
    for ch, a, w in zip(s.channels, amps, freqs):
        if ch.locality == "joint":
            raise ValueError(f"channel {ch.id!r} is non-local; displaced "
                             "monitoring is defined per qubit only")
        if ch.shift is not None:
            raise ValueError(f"channel {ch.id!r} already carries a displacement")
        for sign, tag in ((+1, "p"), (-1, "m")):
            channels.append(JumpChannel(f"{ch.id}~het{tag}", ch.locality, ch.op,
                                        ch.rate / 2.0, shift=sign * a,
                                        het_freq=w))
    return replace(s, channels=tuple(channels),
                   preset=f"{s.preset}+het" if s.preset else None)


def with_phase_rotation(s: Scenario, thetas) -> Scenario:
    """Rotate channel operators J -> e^{-i theta} J (monitoring phase choice)."""
    thetas = [float(t) for t in np.atleast_1d(thetas)]
    if len(thetas) == 1:
        thetas = thetas * len(s.channels)
    if len(thetas) != len(s.channels):
        raise ValueError("need one phase per channel")
    channels = tuple(
        replace(ch, op=np.exp(-1j * th) * ch.op)
        for ch, th in zip(s.channels, thetas))
    return replace(s, channels=channels)


def lindblad_superoperator(s: Scenario) -> np.ndarray:
    """16x16 generator matrix acting on column-stacked density matrices."""
    h = s.h0
    gen = -1j * (np.kron(ID4, h) - np.kron(h.T, ID4))
    for ch in s.channels:
        j = ch.lifted(0.0)
        jj = dag(j) @ j
        gen += ch.rate * (np.kron(np.conjugate(j), j)
                          - 0.5 * np.kron(ID4, jj)
                          - 0.5 * np.kron(jj.T, ID4))
    return gen


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.ok


def validate_scenario(s: Scenario, reference: Scenario | np.ndarray | None = None,
                      gen_tol: float = 1e-10) -> ValidationReport:
    """Check a scenario's structural invariants, reporting all violations.

    Never raises on bad content: every problem is returned as a human-readable
    entry.  When ``reference`` is given (a scenario or a 16x16 generator
    matrix), the ensemble generators are compared entrywise within
    ``gen_tol`` — the invariance check for displaced/rotated monitorings.
    """
    v: list[str] = []

    h0 = np.asarray(s.h0)
    if h0.shape != (4, 4):
        v.append(f"h0 must be 4x4, got {h0.shape}")
    elif not np.all(np.isfinite(h0.view(float))):
        v.append("h0 contains non-finite entries")
    elif np.max(np.abs(h0 - dag(h0))) > 1e-10:
        v.append("h0 is not Hermitian")

    psi = np.asarray(s.initial)
    if psi.shape != (4,):
        v.append(f"initial state must have 4 amplitudes, got shape {psi.shape}")
    elif not np.all(np.isfinite(psi.view(float))):
        v.append("initial state contains non-finite entries")
    else:
        n = np.linalg.norm(psi)
        if abs(n - 1.0) > 1e-9:
            v.append(f"initial state is not normalized: |psi| = {n:.12f}")

    shapes_ok = True
    for ch in s.channels:
        if ch.locality not in _LOCALITIES:
            v.append(f"channel {ch.id!r}: locality must be one of {_LOCALITIES}")
            shapes_ok = False
            continue
        want = (4, 4) if ch.locality == "joint" else (2, 2)
        if ch.op.shape != want:
            v.append(f"channel {ch.id!r}: operator shape {ch.op.shape} does "
                     f"not match locality {ch.locality!r} (want {want})")
            shapes_ok = False
        elif not np.all(np.isfinite(ch.op.view(float))):
            v.append(f"channel {ch.id!r}: operator has non-finite entries")
            shapes_ok = False
        if not np.isfinite(ch.rate) or ch.rate < 0:
            v.append(f"channel {ch.id!r}: rate {ch.rate} is negative or non-finite")
        if ch.het_freq is not None and ch.shift is None:
            v.append(f"channel {ch.id!r}: het_freq set without a displacement")

    if shapes_ok and s.channels:
        try:
            kw = np.linalg.eigvalsh(0.5 * (s.k_op + dag(s.k_op)))
            if kw[0] < -1e-10:
                v.append(f"damping kernel K has negative eigenvalue {kw[0]:.3e}")
            if np.max(np.abs(s.h_eff - (s.h0 - 1j * s.k_op))) > 1e-12:
                v.append("H_eff does not equal H0 - iK")
        except np.linalg.LinAlgError as exc:  # pragma: no cover - defensive
            v.append(f"could not diagonalize K: {exc}")

    if reference is not None and shapes_ok:
        ref_gen = (lindblad_superoperator(reference)
                   if isinstance(reference, Scenario) else np.asarray(reference))
        diff = np.max(np.abs(lindblad_superoperator(s) - ref_gen))
        if diff > gen_tol:
            v.append(f"ensemble generator deviates from reference by {diff:.3e} "
                     f"(> {gen_tol:.1e})")

    return ValidationReport(ok=not v, violations=tuple(v))
