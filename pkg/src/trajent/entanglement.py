"""Wootters concurrence and entanglement of formation for two qubits.

For a pure state psi = sum_{s,s'} c_ss' |s,s'> the preconcurrence is the
complex bilinear

    prec(psi) = 2 (c_ud* c_du* - c_uu* c_dd*),

equal to the expectation <sigma_y (x) sigma_y . T> of the spin-flip operation
(T is complex conjugation in the product basis).  Its modulus is the
concurrence.  Mixed states go through the standard square-root construction:
C(rho) = max(0, l1 - l2 - l3 - l4) where the l_i are the descending
eigenvalues of sqrt(sqrt(rho) rho_tilde sqrt(rho)).

Entanglement of formation is reported in nats throughout.
"""

from __future__ import annotations

import numpy as np

from .linalg import SYSY, dag, herm_eig4, require_finite

__all__ = [
    "preconcurrence", "concurrence_pure", "concurrence_op_form",
    "concurrence_batch", "eof_from_concurrence", "concurrence_mixed",
    "spin_flip",
]

_NORM_TOL = 1e-6


def _check_state(psi: np.ndarray) -> np.ndarray:
    psi = require_finite(psi, "state").reshape(4)
    n = np.linalg.norm(psi)
    if abs(n - 1.0) > _NORM_TOL:
        raise ValueError(f"state is not normalized: |psi| = {n:.9f}")
    return psi


def preconcurrence(psi: np.ndarray) -> complex:
    """Complex preconcurrence of a normalized pure two-qubit state."""
    psi = _check_state(psi)
    c = np.conjugate(psi)
    return complex(2.0 * (c[1] * c[2] - c[0] * c[3]))


def concurrence_pure(psi: np.ndarray) -> float:
    """Concurrence |prec(psi)| of a normalized pure state."""
    return abs(preconcurrence(psi))


def concurrence_op_form(psi: np.ndarray) -> float:
    """Concurrence through the operator form |<sigma_y(x)sigma_y . T>|.

    Numerically redundant with :func:`concurrence_pure`; kept as an
    independent evaluation path for cross-checks.
    """
    psi = _check_state(psi)
    return abs(complex(np.vdot(psi, SYSY @ np.conjugate(psi))))


def concurrence_batch(states: np.ndarray) -> np.ndarray:
    """Concurrences of a stack of normalized states, shape (..., 4)."""
    c = np.conjugate(np.asarray(states, dtype=complex))
    return np.abs(2.0 * (c[..., 1] * c[..., 2] - c[..., 0] * c[..., 3]))


def eof_from_concurrence(c: float) -> float:
    """Entanglement of formation (nats) as a function of concurrence.

    f(c) = h((1 + sqrt(1 - c^2)) / 2) with h the natural-log binary entropy;
    monotone and convex on [0, 1], f(0) = 0, f(1) = ln 2.
    """
    c = float(c)
    if not np.isfinite(c):
        raise ValueError("concurrence must be finite")
    if c < -1e-9 or c > 1.0 + 1e-9:
        raise ValueError(f"concurrence {c} outside [0, 1]")
    c = min(max(c, 0.0), 1.0)
    x = 0.5 * (1.0 + np.sqrt(max(0.0, 1.0 - c * c)))
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return float(-x * np.log(x) - (1.0 - x) * np.log(1.0 - x))


def spin_flip(rho: np.ndarray) -> np.ndarray:
    """rho_tilde = (sigma_y (x) sigma_y) rho* (sigma_y (x) sigma_y)."""
    rho = np.asarray(rho, dtype=complex)
    return SYSY @ np.conjugate(rho) @ SYSY


def concurrence_mixed(rho: np.ndarray, eig_floor: float = -1e-8) -> float:
    """Wootters concurrence of a two-qubit density matrix.

    The lambda_i are the square roots of the eigenvalues of the Hermitian
    product sqrt(rho) rho_tilde sqrt(rho), taken here as the singular values
    of its factor A = sqrt(rho) (sigma_y(x)sigma_y) sqrt(rho)* (note
    A A^dag equals the Hermitian product).  Going through the SVD keeps the
    error of the small lambda_i at machine precision even for rank-deficient
    rho, where square-rooting near-zero eigenvalues would lose half the
    digits.  Eigenvalues of rho in [eig_floor, 0) are clipped to zero before
    the square root; anything below ``eig_floor`` is an error.
    """
    rho = require_finite(rho, "density matrix").reshape(4, 4)
    w, v = herm_eig4(rho)
    if w[-1] < eig_floor:
        raise ValueError(f"density matrix has negative eigenvalue {w[-1]:.3e}")
    w = np.clip(w, 0.0, None)
    sqrt_rho = (v * np.sqrt(w)) @ dag(v)
    a = sqrt_rho @ SYSY @ np.conjugate(sqrt_rho)
    lam = np.linalg.svd(a, compute_uv=False)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))
