"""Small dense complex linear algebra for the two-qubit state space.

Everything in this package lives in C^2 or C^4 = C^2 (x) C^2 with the product
basis ordered {uu, ud, du, dd}; qubit A is the left tensor factor.  States are
flat complex128 arrays, operators are (2,2) or (4,4) arrays.  The routines here
are deliberately small and allocation-light because the trajectory engines call
them in tight loops.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "ID2", "SIGMA_X", "SIGMA_Y", "SIGMA_Z", "SIGMA_PLUS", "SIGMA_MINUS",
    "SYSY", "UP", "DOWN",
    "ConvergenceError", "kron2", "dag", "det2", "trace2", "trace4",
    "expm", "herm_eig4", "ptrace_a", "ptrace_b", "frobenius",
    "require_finite", "normalized",
]

UP = 0
DOWN = 1

ID2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)   # |u><d|
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |d><u|

# sigma_y (x) sigma_y, the spin-flip kernel entering the concurrence.
SYSY = np.kron(SIGMA_Y, SIGMA_Y)


class ConvergenceError(RuntimeError):
    """A fixed-budget iterative routine failed to reach its tolerance."""


def require_finite(a: np.ndarray, what: str = "array") -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError(f"{what} contains NaN or Inf entries")
    return a


def kron2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product with qubit A as the left factor (basis {uu,ud,du,dd})."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def dag(a: np.ndarray) -> np.ndarray:
    return np.conjugate(np.asarray(a).T)


def det2(m: np.ndarray) -> complex:
    """Determinant of a 2x2 matrix, written out to avoid LU overhead."""
    m = np.asarray(m)
    return complex(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])


def trace2(m: np.ndarray) -> complex:
    m = np.asarray(m)
    return complex(m[0, 0] + m[1, 1])


def trace4(m: np.ndarray) -> complex:
    m = np.asarray(m)
    return complex(m[0, 0] + m[1, 1] + m[2, 2] + m[3, 3])


def frobenius(m: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(m)))


def normalized(psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    n = np.linalg.norm(psi)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return psi / n


def expm(m: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with a truncated Taylor series.

    Valid for general (non-Hermitian) matrices; the trajectory engines use it
    for the non-unitary no-jump propagator exp(-i H_eff dt).  The argument is
    scaled by 2**-s until its Frobenius norm is at most 0.5, the series is
    summed until the next term falls below ``tol * 1e-2`` relative to the
    running sum, and the result is squared back up.

    Raises
    ------
    ConvergenceError
        If the scaling or series budget is exhausted before reaching ``tol``.
    """
    m = require_finite(m, "expm argument")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expm expects a square matrix, got shape {m.shape}")
    if tol <= 0:
        raise ValueError("tol must be positive")

    norm = frobenius(m)
    s = 0
    while norm > 0.5:
        norm /= 2.0
        s += 1
        if s > 64:
            raise ConvergenceError("expm: scaling budget exhausted (norm too large)")
    a = m / (2.0 ** s)

    dim = m.shape[0]
    result = np.eye(dim, dtype=complex)
    term = np.eye(dim, dtype=complex)
    for k in range(1, 61):
        term = term @ a / k
        result = result + term
        if frobenius(term) < tol * 1e-2 * max(1.0, frobenius(result)):
            break
    else:
        raise ConvergenceError("expm: Taylor series did not converge within 60 terms")

    for _ in range(s):
        result = result @ result
    return result


def herm_eig4(m: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Returns ``(w, v)`` with real eigenvalues ``w`` sorted in descending order
    and the matching orthonormal eigenvectors in the columns of ``v``.  The
    input must be Hermitian within ``tol`` (entrywise); it is symmetrized
    before being handed to LAPACK so roundoff-level asymmetry cannot leak into
    the spectrum.
    """
    m = require_finite(m, "herm_eig4 argument")
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"herm_eig4 expects a square matrix, got shape {m.shape}")
    asym = np.max(np.abs(m - dag(m)))
    if asym > tol:
        raise ValueError(f"matrix is not Hermitian: max |m - m^dag| = {asym:.3e} > {tol:.1e}")
    w, v = np.linalg.eigh(0.5 * (m + dag(m)))
    return w[::-1].copy(), v[:, ::-1].copy()


def ptrace_b(rho: np.ndarray) -> np.ndarray:
    """Reduced state of qubit A (trace out the right factor)."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    return np.trace(r, axis1=1, axis2=3)


def ptrace_a(rho: np.ndarray) -> np.ndarray:
    """Reduced state of qubit B (trace out the left factor)."""
    r = np.asarray(rho).reshape(2, 2, 2, 2)
    return np.trace(r, axis1=0, axis2=2)
