import math

import numpy as np
import pytest

from wignerosc.fock_dynamics import OscillatorParams, PhasePoint, classical_trajectory
from wignerosc.gaussian_states import (
    GaussianState,
    ThermalBath,
    fidelity,
    reduce_mode,
    thermal_state,
)
from wignerosc.open_dynamics import (
    EvolutionRecord,
    backflow_intervals,
    drift_and_diffusion,
    evolve_coupled,
    rising_intervals,
    thermalize_closed_form,
)

PARAMS = OscillatorParams(gamma=0.1)
PARAMS_FREE = OscillatorParams(gamma=0.0)
BATH = ThermalBath(0.1, 4.0)


def figure_initial(displacement=(1.0, 1.0, 1.0, 1.0), block=4.0):
    cov = np.zeros((4, 4))
    cov[:2, :2] = block * np.eye(2)
    cov[2:, 2:] = block * np.eye(2)
    return GaussianState(np.asarray(displacement, dtype=float), cov)


class TestClosedForm:
    def test_identity_at_zero(self):
        state = GaussianState([1.0, 1.0], np.eye(2))
        out = thermalize_closed_form(state, BATH, 0.0)
        assert np.allclose(out.cov, state.cov)
        assert np.allclose(out.mean, state.mean)

    def test_half_life(self):
        state = GaussianState([1.0, 1.0], np.eye(2))
        t = math.log(2.0) / BATH.decay_rate
        out = thermalize_closed_form(state, BATH, t)
        assert np.allclose(out.cov, 5.0 * np.eye(2), atol=1e-12)
        assert np.allclose(out.mean, [1 / math.sqrt(2)] * 2, atol=1e-12)

    def test_asymptote(self):
        state = GaussianState([1.0, -2.0], np.eye(2))
        out = thermalize_closed_form(state, BATH, 50.0 / BATH.decay_rate)
        assert np.allclose(out.cov, 9.0 * np.eye(2), atol=1e-10)
        assert np.allclose(out.mean, 0.0, atol=1e-10)

    def test_rejects_negative_time(self):
        with pytest.raises(ValueError):
            thermalize_closed_form(thermal_state(1.0), BATH, -0.5)


class TestDriftDiffusion:
    def test_hamiltonian_flow_matches_trajectories(self):
        # with no bath, integrating z' = A z must land on the closed-form flow
        for params in (PARAMS_FREE, OscillatorParams(gamma=0.3)):
            drift, diffusion = drift_and_diffusion(params, ThermalBath(0.0, 0.0))
            assert np.allclose(diffusion, 0.0)
            rng = np.random.default_rng(31)
            z = rng.normal(size=4)
            start = PhasePoint(*z)
            t_final, h = 1.7, 1e-3
            current = z.copy()
            for _ in range(int(round(t_final / h))):
                k1 = drift @ current
                k2 = drift @ (current + 0.5 * h * k1)
                k3 = drift @ (current + 0.5 * h * k2)
                k4 = drift @ (current + h * k3)
                current = current + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            target = classical_trajectory(start, t_final, params).as_array()
            assert np.allclose(current, target, atol=1e-9)

    def test_flow_derivative_matches_trajectory(self):
        drift, _ = drift_and_diffusion(PARAMS, ThermalBath(0.0, 0.0))
        z = np.array([0.7, -0.2, 0.4, 1.1])
        eps = 1e-6
        plus = classical_trajectory(PhasePoint(*z), eps, PARAMS).as_array()
        minus = classical_trajectory(PhasePoint(*z), -eps, PARAMS).as_array()
        assert np.allclose((plus - minus) / (2 * eps), drift @ z, atol=1e-8)

    def test_damped_block_structure(self):
        drift, diffusion = drift_and_diffusion(PARAMS_FREE, BATH)
        sigma = 3.0 * np.eye(4)
        rhs = drift @ sigma + sigma @ drift.T + diffusion
        expected_mode1 = -BATH.decay_rate * 3.0 * np.eye(2) + BATH.decay_rate * 9.0 * np.eye(2)
        assert np.allclose(rhs[:2, :2], expected_mode1, atol=1e-13)
        assert np.allclose(rhs[2:, 2:], 0.0, atol=1e-13)

    def test_bath_acts_on_first_mode_only(self):
        drift, diffusion = drift_and_diffusion(PARAMS, BATH)
        free_drift, _ = drift_and_diffusion(PARAMS, ThermalBath(0.0, 0.0))
        assert np.allclose((drift - free_drift)[2:, :], 0.0)
        assert np.allclose(diffusion[2:, :], 0.0)
        assert np.allclose(diffusion[:, 2:], 0.0)


class TestEvolveCoupled:
    def test_uncoupled_matches_closed_form_entrywise(self):
        initial = figure_initial(displacement=(0.0, 0.0, 0.0, 0.0))
        times = np.linspace(0.0, 6.0 / BATH.decay_rate, 121)
        record = evolve_coupled(initial, PARAMS_FREE, BATH, times)
        start = reduce_mode(initial, 1)
        for t, state in zip(record.times, record.states):
            ref = thermalize_closed_form(start, BATH, t)
            part = reduce_mode(state, 1)
            assert np.max(np.abs(part.cov - ref.cov)) < 1e-6
            assert np.max(np.abs(part.mean - ref.mean)) < 1e-6

    def test_uncoupled_displaced_invariants(self):
        # the oscillator phase keeps turning, so compare the pieces the
        # bath controls: |d|, the isotropic spread, and both witness tracks
        initial = figure_initial()
        times = np.linspace(0.0, 6.0 / BATH.decay_rate, 121)
        record = evolve_coupled(initial, PARAMS_FREE, BATH, times)
        start = reduce_mode(initial, 1)
        asymptote = thermal_state(BATH.mean_occupation)
        for t, state, f in zip(record.times, record.states, record.fidelity_track):
            ref = thermalize_closed_form(start, BATH, t)
            part = reduce_mode(state, 1)
            assert np.linalg.norm(part.mean) == pytest.approx(
                np.linalg.norm(ref.mean), abs=1e-8
            )
            assert part.cov[0, 0] == pytest.approx(ref.cov[0, 0], abs=1e-8)
            assert abs(part.cov[0, 1]) < 1e-8
            assert f == pytest.approx(fidelity(ref, asymptote), abs=1e-10)

    def test_uncoupled_fidelity_monotone(self):
        initial = figure_initial()
        times = np.linspace(0.0, 6.0 / BATH.decay_rate, 601)
        record = evolve_coupled(initial, PARAMS_FREE, BATH, times)
        assert record.backflow_intervals == []
        assert np.all(np.diff(record.fidelity_track) >= -1e-12)
        assert record.fidelity_track[-1] > 0.99

    def test_coupled_backflow_appears(self):
        initial = figure_initial()
        times = np.arange(0.0, 6.0 + 1e-9, 0.005) / BATH.decay_rate
        record = evolve_coupled(initial, PARAMS, BATH, times)
        assert len(record.backflow_intervals) == 2
        diffs = np.diff(record.fidelity_track)
        assert diffs.min() < -1e-6 and diffs.max() > 0

    def test_coherence_rises_during_backflow(self):
        initial = figure_initial()
        times = np.arange(0.0, 6.0 + 1e-9, 0.005) / BATH.decay_rate
        record = evolve_coupled(initial, PARAMS, BATH, times)
        rises = rising_intervals(record.times, record.coherence_track)
        assert rises
        step = times[1] - times[0]
        for a, b in rises:
            assert any(
                a <= hi + step and lo <= b + step for lo, hi in record.backflow_intervals
            )

    def test_asymptotic_thermalization(self):
        times = np.linspace(0.0, 12.0 / BATH.decay_rate, 241)
        asymptote = thermal_state(BATH.mean_occupation)
        for gamma in (0.0, 0.1, 0.25):
            params = OscillatorParams(gamma=gamma)
            record = evolve_coupled(figure_initial(), params, BATH, times)
            final = fidelity(reduce_mode(record.states[-1], 1), asymptote)
            assert final >= 1.0 - 1e-3

    def test_physicality_along_the_way(self):
        from wignerosc.gaussian_states import symplectic_nu

        times = np.linspace(0.0, 6.0 / BATH.decay_rate, 121)
        record = evolve_coupled(figure_initial(), PARAMS, BATH, times)
        for state in record.states:
            for mode in (1, 2):
                assert symplectic_nu(state, mode) >= 1.0 - 1e-6

    def test_closed_system_purity_and_beat(self):
        # no bath: spread determinant conserved, fidelity beat at pi/gamma
        gamma = 0.25
        params = OscillatorParams(gamma=gamma)
        bath = ThermalBath(0.0, 4.0)
        period = math.pi / gamma
        times = np.linspace(0.0, 2 * period, 401)
        record = evolve_coupled(figure_initial(), params, bath, times)
        dets = [np.linalg.det(s.cov) for s in record.states]
        assert np.max(np.abs(np.asarray(dets) - dets[0])) < 1e-8
        track = record.fidelity_track
        assert track.max() - track.min() > 1e-3
        shift = 200  # grid points per period
        assert np.max(np.abs(track[shift:] - track[:-shift])) < 1e-6

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            evolve_coupled(figure_initial(), PARAMS, BATH, [1.0, 2.0])
        with pytest.raises(ValueError):
            evolve_coupled(figure_initial(), PARAMS, BATH, [0.0, 2.0, 1.0])
        with pytest.raises(ValueError):
            evolve_coupled(reduce_mode(figure_initial(), 1), PARAMS, BATH, [0.0, 1.0])

    def test_step_cap_enforced(self):
        with pytest.raises(ValueError):
            evolve_coupled(figure_initial(), PARAMS, BATH, [0.0, 1.0], max_step=0.5)


class TestIntervalDetection:
    def test_monotone_track_is_clean(self):
        times = np.linspace(0, 5, 50)
        assert backflow_intervals(times, np.linspace(0.1, 0.9, 50)) == []

    def test_single_dip(self):
        assert backflow_intervals([0, 1, 2, 3], [0.2, 0.4, 0.3, 0.5]) == [(1.0, 2.0)]

    def test_adjacent_dips_merge(self):
        out = backflow_intervals([0, 1, 2, 3, 4], [0.5, 0.4, 0.3, 0.35, 0.3])
        assert out == [(0.0, 2.0), (3.0, 4.0)]

    def test_tolerance_filters_noise(self):
        track = [0.5, 0.5 - 1e-12, 0.6]
        assert backflow_intervals([0, 1, 2], track) == []

    def test_rising_mirror(self):
        assert rising_intervals([0, 1, 2, 3], [0.5, 0.3, 0.4, 0.4]) == [(1.0, 2.0)]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            backflow_intervals([0, 1, 2], [0.1, 0.2])


class TestEvolutionRecord:
    def test_validation(self):
        with pytest.raises(ValueError):
            EvolutionRecord(
                times=np.array([0.0, 0.0]),
                states=[thermal_state(1.0)] * 2,
                fidelity_track=np.zeros(2),
                coherence_track=np.zeros(2),
            )
        with pytest.raises(ValueError):
            EvolutionRecord(
                times=np.array([0.0, 1.0]),
                states=[thermal_state(1.0)],
                fidelity_track=np.zeros(2),
                coherence_track=np.zeros(2),
            )
