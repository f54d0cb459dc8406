"""Jump-counting (photodetection-style) trajectory unraveling.

Between detector clicks the state follows the damped propagator
exp(-i H_eff dt) with H_eff = H0 - i K and is renormalized; a click on
channel m replaces psi by J_m psi / |J_m psi|.  Sampling is first order in
dt: each step draws a single uniform and compares it against the cumulative
click probabilities dp_m = gamma_m |J_m psi|^2 dt, so dt must keep
sum_m dp_m small (enforced hard bound 0.1 per step; the default step keeps
it at 0.01 for every basis state).

Reproducibility: trajectory k of a run with master seed s draws all its
randomness from the dedicated substream SeedSequence(s, spawn_key=(k,)).
Trajectories are therefore independent of batch layout and worker count, and
an ensemble is bit-stable for a given (seed, n_traj).
"""

from __future__ import annotations

import concurrent.futures
from dataclasses import dataclass, field

import numpy as np

from .entanglement import concurrence_batch
from .errors import NumericalError, StepSizeError
from .linalg import expm
from .models import Scenario

__all__ = ["JumpEvent", "TrajectoryRecord", "default_dt",
           "survival_probability", "step_qj", "run_trajectory", "run_ensemble",
           "trajectory_rng"]

MAX_STEP_PROB = 0.1
TARGET_STEP_PROB = 0.01
_BATCH = 512  # fixed internal batch width; keeps results worker-independent


@dataclass(frozen=True)
class JumpEvent:
    time: float
    channel_id: str


@dataclass
class TrajectoryRecord:
    """One trajectory sampled on a uniform grid."""
    seed: int
    index: int
    times: np.ndarray
    concurrences: np.ndarray
    events: tuple[JumpEvent, ...] = ()
    states: np.ndarray | None = field(default=None, repr=False)


def trajectory_rng(master_seed: int, k: int) -> np.random.Generator:
    """Independent generator for trajectory k of a run seeded with master_seed."""
    return np.random.default_rng(np.random.SeedSequence(master_seed,
                                                        spawn_key=(k,)))


def default_dt(s: Scenario, target: float = TARGET_STEP_PROB) -> float:
    """Largest step keeping every basis state's total click probability <= target.

    The total click probability of basis state |k> per unit time is twice the
    k-th diagonal entry of the damping kernel K.
    """
    diag = np.real(np.diag(s.k_op))
    peak = 2.0 * float(np.max(diag)) if diag.size else 0.0
    if peak <= 0.0:
        return np.inf
    return target / peak


def survival_probability(s: Scenario, psi: np.ndarray, t: float) -> float:
    """No-click probability |exp(-i H_eff t) psi|^2 over a span t."""
    if s.time_dependent:
        raise ValueError("survival probability with rotating displacements "
                         "is not defined by a static propagator")
    if t < 0:
        raise ValueError("time span must be non-negative")
    psi = np.asarray(psi, dtype=complex).reshape(4)
    phi = expm(-1j * s.h_eff * t) @ psi
    return float(np.real(np.vdot(phi, phi)))


def _grid(t_max: float, dt: float | None, record_grid: float | None,
          s: Scenario) -> tuple[int, int, float]:
    """(records, substeps per record, actual step) honoring dt as an upper bound."""
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    if record_grid is None:
        record_grid = t_max / 100.0
    if dt is None:
        dt = min(default_dt(s), record_grid)
    if not 0 < dt <= record_grid <= t_max + 1e-12:
        raise ValueError("need 0 < dt <= record_grid <= t_max")
    n_rec = int(round(t_max / record_grid))
    if abs(n_rec * record_grid - t_max) > 1e-9 * max(1.0, t_max):
        raise ValueError("record_grid must divide t_max")
    n_sub = max(1, int(np.ceil(record_grid / dt - 1e-9)))
    return n_rec, n_sub, record_grid / n_sub


def step_qj(psi: np.ndarray, s: Scenario, t: float, dt: float,
            rng: np.random.Generator,
            propagator: np.ndarray | None = None
            ) -> tuple[np.ndarray, JumpEvent | None]:
    """Advance one normalized state by dt; reference single-state stepper.

    Draws exactly one uniform.  ``propagator`` may carry the precomputed
    no-click propagator exp(-i H_eff dt) to avoid recomputing it per call.
    """
    psi = np.asarray(psi, dtype=complex).reshape(4)
    if propagator is None:
        propagator = expm(-1j * s.h_eff * dt)
    ops = s.lifted_at(t)
    jpsi = ops @ psi
    dp = s.rates * np.einsum("mi,mi->m", np.conjugate(jpsi), jpsi).real * dt
    total = float(dp.sum())
    if total > MAX_STEP_PROB:
        raise StepSizeError(f"total click probability {total:.3g} > "
                            f"{MAX_STEP_PROB} in one step; reduce dt")
    u = rng.random()
    if u < total:
        m = int(np.searchsorted(np.cumsum(dp), u, side="right"))
        m = min(m, len(dp) - 1)
        norm = np.linalg.norm(jpsi[m])
        if norm <= 1e-150:
            raise NumericalError(
                f"click selected on channel {s.channels[m].id!r} whose "
                "operator annihilates the current state")
        return jpsi[m] / norm, JumpEvent(time=t + dt,
                                         channel_id=s.channels[m].id)
    phi = propagator @ psi
    return phi / np.linalg.norm(phi), None


def _run_batch(s: Scenario, seeds: list[int], indices: list[int],
               t_max: float, dt: float | None, record_grid: float | None,
               keep_states: bool) -> list[TrajectoryRecord]:
    """Vectorized kernel evolving a batch of trajectories in lockstep.

    Each row consumes randomness only from its own substream, so the result
    for trajectory k is independent of the batch it happens to share.
    """
    n_rec, n_sub, h = _grid(t_max, dt, record_grid, s)
    n_steps = n_rec * n_sub
    b = len(seeds)
    times = (t_max / n_rec) * np.arange(n_rec + 1)

    prop = expm(-1j * s.h_eff * h)
    static = not s.time_dependent
    ops = s.lifted_at(0.0)
    rates = s.rates

    uniforms = np.empty((b, n_steps))
    for i, (seed, k) in enumerate(zip(seeds, indices)):
        uniforms[i] = trajectory_rng(seed, k).random(n_steps)

    psi = np.broadcast_to(s.initial / np.linalg.norm(s.initial), (b, 4)).copy()
    conc = np.empty((b, n_rec + 1))
    conc[:, 0] = concurrence_batch(psi)
    states = None
    if keep_states:
        states = np.empty((b, n_rec + 1, 4), dtype=complex)
        states[:, 0] = psi
    events: list[list[JumpEvent]] = [[] for _ in range(b)]

    step = 0
    for rec in range(1, n_rec + 1):
        for _ in range(n_sub):
            t = step * h
            if not static:
                ops = s.lifted_at(t)
            jpsi = np.einsum("mij,bj->mbi", ops, psi)
            dp = (rates[:, None]
                  * np.einsum("mbi,mbi->mb", np.conjugate(jpsi), jpsi).real * h)
            cum = np.cumsum(dp, axis=0)
            total = cum[-1]
            worst = float(total.max()) if b else 0.0
            if worst > MAX_STEP_PROB:
                raise StepSizeError(f"total click probability {worst:.3g} > "
                                    f"{MAX_STEP_PROB} in one step; reduce dt")
            u = uniforms[:, step]
            psi = psi @ prop.T
            clicked = np.nonzero(u < total)[0]
            if clicked.size:
                sel = (u[None, :] >= cum).sum(axis=0)
                t_click = t + h
                for k in clicked:
                    m = int(sel[k])
                    phi = jpsi[m, k]
                    norm = np.linalg.norm(phi)
                    if norm <= 1e-150:
                        raise NumericalError(
                            f"click selected on channel {s.channels[m].id!r} "
                            "whose operator annihilates the current state")
                    psi[k] = phi
                    events[k].append(JumpEvent(time=float(t_click),
                                               channel_id=s.channels[m].id))
            psi /= np.linalg.norm(psi, axis=1, keepdims=True)
            step += 1
        conc[:, rec] = concurrence_batch(psi)
        if keep_states:
            states[:, rec] = psi

    return [TrajectoryRecord(seed=seeds[i], index=indices[i], times=times,
                             concurrences=conc[i], events=tuple(events[i]),
                             states=states[i] if keep_states else None)
            for i in range(b)]


def run_trajectory(s: Scenario, t_max: float, dt: float | None = None,
                   seed: int = 0, index: int = 0,
                   record_grid: float | None = None,
                   keep_states: bool = False) -> TrajectoryRecord:
    """Single trajectory, deterministic for a given (seed, index)."""
    return _run_batch(s, [seed], [index], t_max, dt, record_grid,
                      keep_states)[0]


def _ensemble_chunk(args):
    s, seed, k0, k1, t_max, dt, record_grid, keep_states = args
    out = []
    for b0 in range(k0, k1, _BATCH):
        b1 = min(b0 + _BATCH, k1)
        out.extend(_run_batch(s, [seed] * (b1 - b0), list(range(b0, b1)),
                              t_max, dt, record_grid, keep_states))
    return out


def run_ensemble(s: Scenario, t_max: float, n_traj: int,
                 dt: float | None = None, seed: int = 0,
                 record_grid: float | None = None, keep_states: bool = False,
                 workers: int = 1) -> list[TrajectoryRecord]:
    """Ensemble of trajectories with per-trajectory substreams.

    Worker processes split the index range on fixed batch boundaries, so the
    returned records are identical for any ``workers`` value.
    """
    if n_traj <= 0:
        raise ValueError("n_traj must be positive")
    if workers <= 1 or n_traj <= _BATCH:
        return _ensemble_chunk((s, seed, 0, n_traj, t_max, dt, record_grid,
                                keep_states))
    n_batches = -(-n_traj // _BATCH)
    per_worker = -(-n_batches // workers)
    tasks = []
    for w in range(workers):
        k0 = w * per_worker * _BATCH
        k1 = min(k0 + per_worker * _BATCH, n_traj)
        if k0 >= k1:
            break
        tasks.append((s, seed, k0, k1, t_max, dt, record_grid, keep_states))
    with concurrent.futures.ProcessPoolExecutor(max_workers=len(tasks)) as ex:
        chunks = list(ex.map(_ensemble_chunk, tasks))
    out: list[TrajectoryRecord] = []
    for c in chunks:
        out.extend(c)
    return out
