"""Diffusive unraveling engine: noise contracts, steppers, decay rates."""

import numpy as np
import pytest

from trajent.diffusion import (complex_wiener_increments, run_ensemble_qsd,
                               run_trajectory_qsd, step_heterodyne,
                               step_homodyne, wiener_increments)
from trajent.ensemble import average, fit_rate_series
from trajent.errors import StepSizeError
from trajent.models import (preset_dephasing, preset_photon_counting,
                            state_from_amplitudes, with_heterodyne,
                            with_phase_rotation)
from trajent.quantum_jump import trajectory_rng

V_XY = np.array([1.0, 1.0, 0.0]) / np.sqrt(2.0)


def _mean(recs):
    c = np.array([r.concurrences for r in recs])
    return recs[0].times, c.mean(axis=0), c.std(axis=0, ddof=1) / np.sqrt(len(recs))


def test_real_increment_moments():
    rng = np.random.default_rng(61)
    dw = wiener_increments(rng, 100_000, 2, 0.01)
    assert dw.shape == (100_000, 2)
    assert np.max(np.abs(dw.mean(axis=0))) < 4 * np.sqrt(0.01 / 100_000)
    assert np.max(np.abs(dw.var(axis=0) / 0.01 - 1.0)) < 0.05


def test_complex_increment_moments_and_order():
    rng = np.random.default_rng(62)
    dxi = complex_wiener_increments(rng, 100_000, 2, 0.01)
    assert abs(np.mean(np.abs(dxi) ** 2) / 0.01 - 1.0) < 0.05
    assert abs(np.mean(dxi ** 2)) < 4 * 0.01 / np.sqrt(100_000)
    # channel m consumes its normal pair before channel m+1
    z = np.random.default_rng(63).standard_normal(4)
    got = complex_wiener_increments(np.random.default_rng(63), 1, 2, 2.0)[0]
    assert got[0] == z[0] + 1j * z[1]
    assert got[1] == z[2] + 1j * z[3]


def test_steppers_return_unit_norm():
    s = preset_photon_counting(1.0, 0.6)
    rng = np.random.default_rng(64)
    for _ in range(25):
        psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        psi /= np.linalg.norm(psi)
        for stepper in (step_homodyne, step_heterodyne):
            out = stepper(psi, s, 0.005, rng)
            assert abs(np.linalg.norm(out) - 1.0) < 1e-12


def test_reference_stepper_matches_batch():
    s = preset_photon_counting(1.0, 0.6)
    for kind, stepper in (("homodyne", step_homodyne),
                          ("heterodyne", step_heterodyne)):
        rec = run_trajectory_qsd(kind, s, 0.5, dt=0.005, seed=71, index=2,
                                 record_grid=0.05, keep_states=True)
        rng = trajectory_rng(71, 2)
        psi = s.initial.copy()
        states = [psi]
        for _ in range(100):
            psi = stepper(psi, s, 0.005, rng)
            states.append(psi)
        for k in range(11):
            assert np.allclose(states[10 * k], rec.states[k], atol=1e-10)


def test_homodyne_decay_rate():
    s = preset_photon_counting(1.0, 1.0)
    recs = run_ensemble_qsd("homodyne", s, 1.5, 400, dt=0.005, seed=101,
                            record_grid=0.05)
    t, m, se = _mean(recs)
    fit = fit_rate_series(t, m, se)
    assert abs(fit.rate - 1.0) < 0.1


def test_heterodyne_decay_rate():
    s = preset_photon_counting(1.0, 1.0)
    recs = run_ensemble_qsd("heterodyne", s, 1.5, 400, dt=0.005, seed=103,
                            record_grid=0.05)
    t, m, se = _mean(recs)
    fit = fit_rate_series(t, m, se)
    assert abs(fit.rate - 1.0) < 0.1


def test_dephasing_phase_steers_decay():
    psi = state_from_amplitudes(1, 0, 0, -1j) / np.sqrt(2)
    s = preset_dephasing(V_XY, V_XY, 1.0, 1.0, initial=psi)
    recs = run_ensemble_qsd("homodyne", s, 0.8, 400, dt=0.0025, seed=107,
                            record_grid=0.025)
    t, m, se = _mean(recs)
    assert abs(fit_rate_series(t, m, se).rate - 4.0) < 0.4
    # quarter-turn detector phase switches the decay off entirely: every
    # trajectory keeps C = 1 to machine precision
    quarter = with_phase_rotation(s, np.pi / 2)
    recs = run_ensemble_qsd("homodyne", quarter, 0.8, 400, dt=0.0025, seed=109,
                            record_grid=0.025)
    c = np.array([r.concurrences for r in recs])
    assert np.max(np.abs(c - 1.0)) < 1e-12


def test_worker_count_invisible():
    s = preset_photon_counting(1.0, 1.0)
    one = run_ensemble_qsd("homodyne", s, 0.5, 600, dt=0.005, seed=113,
                           record_grid=0.05, workers=1)
    two = run_ensemble_qsd("homodyne", s, 0.5, 600, dt=0.005, seed=113,
                           record_grid=0.05, workers=2)
    for ra, rb in zip(one, two):
        assert np.array_equal(ra.concurrences, rb.concurrences)


def test_scenario_and_step_validation():
    s = preset_photon_counting(1.0, 1.0)
    rotating = with_heterodyne(s, 0.5, 3.0)
    with pytest.raises(ValueError, match="static"):
        run_trajectory_qsd("homodyne", rotating, 1.0, dt=0.005)
    with pytest.raises(StepSizeError):
        run_trajectory_qsd("homodyne", s, 1.0, dt=0.02, record_grid=0.1)
    with pytest.raises(ValueError, match="kind"):
        run_trajectory_qsd("photon", s, 1.0, dt=0.005)
    with pytest.raises(ValueError):
        run_ensemble_qsd("homodyne", s, 1.0, 0)
