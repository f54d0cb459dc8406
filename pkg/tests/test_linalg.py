"""Linear-algebra kernel tests: constants, expm, eigendecomposition, ptrace."""

import numpy as np
import pytest

from trajent.linalg import (
    ID2, SIGMA_MINUS, SIGMA_PLUS, SIGMA_X, SIGMA_Y, SIGMA_Z, SYSY,
    ConvergenceError, dag, det2, expm, frobenius, herm_eig4, kron2,
    normalized, ptrace_a, ptrace_b, require_finite, trace2, trace4,
)


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_pauli_constants():
    assert np.array_equal(SIGMA_PLUS, [[0, 1], [0, 0]])
    assert np.array_equal(SIGMA_MINUS, [[0, 0], [1, 0]])
    # sigma_- |u> = |d> with |u> the first basis vector
    assert np.array_equal(SIGMA_MINUS @ [1, 0], [0, 1])
    assert np.allclose(SIGMA_X @ SIGMA_X, ID2)
    assert np.allclose(SIGMA_Y @ SIGMA_Y, ID2)
    assert np.allclose(SIGMA_Z @ SIGMA_Z, ID2)
    assert np.allclose(SIGMA_X @ SIGMA_Y - SIGMA_Y @ SIGMA_X, 2j * SIGMA_Z)


def test_sysy_antidiagonal():
    # hand expansion of sigma_y (x) sigma_y in the {uu, ud, du, dd} basis
    want = np.array([
        [0, 0, 0, -1],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [-1, 0, 0, 0],
    ], dtype=complex)
    assert np.array_equal(SYSY, want)


def test_kron_mixed_product():
    rng = np.random.default_rng(11)
    for _ in range(50):
        a, b, c, d = (random_complex(rng, (2, 2)) for _ in range(4))
        lhs = kron2(a, b) @ kron2(c, d)
        rhs = kron2(a @ c, b @ d)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_basis_ordering_left_factor_is_a():
    # kron2 puts qubit A on the left: (sigma_z (x) 1)|du> = -|du>
    op = kron2(SIGMA_Z, ID2)
    du = np.array([0, 0, 1, 0], dtype=complex)
    assert np.allclose(op @ du, -du)
    op_b = kron2(ID2, SIGMA_Z)
    assert np.allclose(op_b @ du, du)


def test_det2_trace_helpers():
    rng = np.random.default_rng(5)
    for _ in range(20):
        m = random_complex(rng, (2, 2))
        assert abs(det2(m) - np.linalg.det(m)) < 1e-12
        assert abs(trace2(m) - np.trace(m)) < 1e-14
        m4 = random_complex(rng, (4, 4))
        assert abs(trace4(m4) - np.trace(m4)) < 1e-13
        assert np.array_equal(dag(m), m.conj().T)


def test_expm_zero_and_diagonal():
    assert np.allclose(expm(np.zeros((4, 4))), np.eye(4))
    d = np.diag([0.3, -1.2, 0.0, 2.5]).astype(complex)
    assert np.max(np.abs(expm(d) - np.diag(np.exp(np.diag(d))))) < 1e-12


def test_expm_inverse_identity():
    rng = np.random.default_rng(2)
    for _ in range(30):
        m = random_complex(rng, (4, 4))
        m *= 10.0 / max(1.0, frobenius(m))  # norms up to 10
        prod = expm(m) @ expm(-m)
        assert np.max(np.abs(prod - np.eye(4))) < 1e-9


def test_expm_group_property():
    rng = np.random.default_rng(3)
    m = random_complex(rng, (4, 4))
    m /= frobenius(m)
    assert np.max(np.abs(expm(2.0 * m) - expm(m) @ expm(m))) < 1e-11


def test_expm_against_rk4():
    # independent route: integrate dX/dt = M X with classical RK4
    rng = np.random.default_rng(4)
    for _ in range(5):
        m = random_complex(rng, (4, 4))
        m *= 2.0 / frobenius(m)
        x = np.eye(4, dtype=complex)
        n, h = 2000, 1.0 / 2000
        for _ in range(n):
            k1 = m @ x
            k2 = m @ (x + 0.5 * h * k1)
            k3 = m @ (x + 0.5 * h * k2)
            k4 = m @ (x + h * k3)
            x = x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        assert np.max(np.abs(expm(m) - x)) < 1e-6


def test_expm_collective_damping_kernel():
    # K for the collective channel sigma_-(x)1 + 1(x)sigma_- at gamma = 1 has
    # eigenvectors uu, (ud+du)/sqrt2, (ud-du)/sqrt2, dd with eigenvalues
    # 1, 1, 0, 0; exp(-tK) damps uu and the symmetric combination only.
    j = kron2(SIGMA_MINUS, ID2) + kron2(ID2, SIGMA_MINUS)
    k = 0.5 * dag(j) @ j
    t = 0.7
    p = expm(-t * k)
    s2 = 1 / np.sqrt(2)
    plus = np.array([0, s2, s2, 0], dtype=complex)
    minus = np.array([0, s2, -s2, 0], dtype=complex)
    uu = np.array([1, 0, 0, 0], dtype=complex)
    dd = np.array([0, 0, 0, 1], dtype=complex)
    assert np.max(np.abs(p @ uu - np.exp(-t) * uu)) < 1e-12
    assert np.max(np.abs(p @ plus - np.exp(-t) * plus)) < 1e-12
    assert np.max(np.abs(p @ minus - minus)) < 1e-12
    assert np.max(np.abs(p @ dd - dd)) < 1e-12


def test_expm_rejects_bad_input():
    with pytest.raises(ValueError):
        expm(np.ones((2, 3)))
    with pytest.raises(ValueError):
        expm(np.array([[np.nan, 0], [0, 0]]))
    with pytest.raises(ConvergenceError):
        expm(1e20 * np.eye(2))


def test_herm_eig4_reconstruction():
    rng = np.random.default_rng(7)
    for _ in range(40):
        a = random_complex(rng, (4, 4))
        m = a + dag(a)
        w, v = herm_eig4(m)
        assert np.all(np.diff(w) <= 1e-12)  # descending
        assert np.max(np.abs(dag(v) @ v - np.eye(4))) < 1e-10
        assert np.max(np.abs((v * w) @ dag(v) - m)) < 1e-9


def test_herm_eig4_known_spectrum():
    m = np.diag([3.0, -1.0, 2.0, 0.0]).astype(complex)
    w, v = herm_eig4(m)
    assert np.allclose(w, [3.0, 2.0, 0.0, -1.0])
    assert abs(abs(v[0, 0]) - 1.0) < 1e-12


def test_herm_eig4_rejects_non_hermitian():
    m = np.array([[0, 1], [0, 0]], dtype=complex)
    with pytest.raises(ValueError):
        herm_eig4(m)


def test_ptrace_product_state():
    rng = np.random.default_rng(8)
    for _ in range(20):
        a = normalized(random_complex(rng, 2))
        b = normalized(random_complex(rng, 2))
        psi = kron2(a.reshape(2, 1), b.reshape(2, 1)).reshape(4)
        rho = np.outer(psi, psi.conj())
        assert np.max(np.abs(ptrace_b(rho) - np.outer(a, a.conj()))) < 1e-12
        assert np.max(np.abs(ptrace_a(rho) - np.outer(b, b.conj()))) < 1e-12


def test_ptrace_preserves_trace():
    rng = np.random.default_rng(9)
    a = random_complex(rng, (4, 4))
    rho = a @ dag(a)
    rho /= np.trace(rho)
    assert abs(np.trace(ptrace_a(rho)) - 1.0) < 1e-12
    assert abs(np.trace(ptrace_b(rho)) - 1.0) < 1e-12


def test_require_finite_and_normalized():
    with pytest.raises(ValueError):
        require_finite(np.array([1.0, np.inf]))
    with pytest.raises(ValueError):
        normalized(np.zeros(4))
    v = normalized(np.array([3.0, 4.0]))
    assert abs(np.linalg.norm(v) - 1.0) < 1e-15
