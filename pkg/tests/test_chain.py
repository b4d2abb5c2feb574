"""Domain types, frame transformations, and density-matrix construction."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chainqsd import (
    AmplitudeTrajectory,
    ChainConfig,
    Lorentzian,
    LorentzianSquared,
    Markovian,
    Ohmic,
    density_matrix,
    environment_population,
    site_populations,
    subsample,
    to_lab_frame,
    total_population,
    validate_spectral_density,
)
from chainqsd.errors import ClampWarning, FrameError, ScenarioError


def _traj(times, amps, frame="tilde"):
    return AmplitudeTrajectory(
        times=np.asarray(times, dtype=float),
        amplitudes=np.asarray(amps, dtype=complex),
        frame=frame,
    )


class TestChainConfig:
    def test_defaults_single_excitation_on_first_site(self):
        cfg = ChainConfig(n_qubits=3, coupling=1.0, omega_e=10.0)
        np.testing.assert_allclose(cfg.initial_amplitudes, [1.0, 0.0, 0.0])

    def test_derived_quantities(self):
        cfg = ChainConfig(n_qubits=4, coupling=0.5, omega_e=7.0, omega_g=2.0)
        assert cfg.omega_eg == 5.0
        assert cfg.inverse_coupling == pytest.approx(4.0)
        # global phase rate: omega_e plus one ground energy per remaining qubit
        assert cfg.phase_frequency == pytest.approx(7.0 + 3 * 2.0)

    def test_rejects_zero_qubits(self):
        with pytest.raises(ScenarioError):
            ChainConfig(n_qubits=0, coupling=1.0, omega_e=10.0)

    def test_rejects_zero_coupling(self):
        with pytest.raises(ScenarioError):
            ChainConfig(n_qubits=2, coupling=0.0, omega_e=10.0)

    def test_rejects_non_unit_initial_norm(self):
        with pytest.raises(ScenarioError):
            ChainConfig(
                n_qubits=2,
                coupling=1.0,
                omega_e=10.0,
                initial_amplitudes=(0.5, 0.5),
            )

    def test_accepts_spread_initial_state(self):
        amps = np.array([1.0, 1.0j]) / np.sqrt(2.0)
        cfg = ChainConfig(n_qubits=2, coupling=1.0, omega_e=10.0, initial_amplitudes=amps)
        assert np.sum(np.abs(cfg.initial_amplitudes) ** 2) == pytest.approx(1.0)


class TestSpectralDensity:
    def test_markovian_requires_positive_rate(self):
        with pytest.raises(ScenarioError):
            validate_spectral_density(Markovian(gamma_m=0.0))

    def test_lorentzian_requires_positive_width(self):
        with pytest.raises(ScenarioError):
            validate_spectral_density(Lorentzian(g=1.0, gamma=-0.1))

    def test_ohmic_requires_positive_cutoff_and_exponent(self):
        with pytest.raises(ScenarioError):
            validate_spectral_density(Ohmic(g=1.0, s_param=0.0, omega_c=8.0, omega_eg=10.0))
        with pytest.raises(ScenarioError):
            validate_spectral_density(Ohmic(g=1.0, s_param=1.5, omega_c=0.0, omega_eg=10.0))

    def test_wide_lorentzian_warns_not_raises(self):
        # the flat-spectrum extension needs width << center frequency
        with pytest.warns(ClampWarning):
            validate_spectral_density(Lorentzian(g=1.0, gamma=3.0), omega_eg=10.0)

    def test_narrow_lorentzian_passes_silently(self):
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error")
            validate_spectral_density(Lorentzian(g=1.0, gamma=0.03), omega_eg=10.0)


class TestLabFrame:
    def test_markovian_single_qubit_population(self):
        # constant tilde amplitude maps to pure exponential decay in the lab
        cfg = ChainConfig(n_qubits=1, coupling=1.0, omega_e=10.0)
        t = np.linspace(0.0, 100.0, 501)
        traj = _traj(t, np.ones((t.size, 1)))
        lab = to_lab_frame(traj, cfg, Markovian(gamma_m=0.01))
        pops = site_populations(lab)
        np.testing.assert_allclose(pops[:, 0], np.exp(-0.02 * t), atol=1e-12)

    def test_identity_when_phases_vanish(self):
        cfg = ChainConfig(
            n_qubits=2,
            coupling=1.0,
            omega_e=0.0,
            omega_g=0.0,
            initial_amplitudes=(1.0, 0.0),
        )
        t = np.linspace(0.0, 5.0, 11)
        amps = np.stack([np.cos(t), 1j * np.sin(t)], axis=1)
        lab = to_lab_frame(_traj(t, amps), cfg, Lorentzian(g=1.0, gamma=0.03))
        np.testing.assert_allclose(lab.amplitudes, amps, atol=1e-15)

    def test_interior_moduli_frame_independent(self):
        cfg = ChainConfig(n_qubits=2, coupling=1.0, omega_e=10.0)
        t = np.linspace(0.0, 20.0, 101)
        amps = np.stack([np.cos(0.3 * t), np.sin(0.3 * t) * np.exp(1j * t)], axis=1)
        tilde = _traj(t, amps)
        lab = to_lab_frame(tilde, cfg, Markovian(gamma_m=0.05))
        np.testing.assert_allclose(
            np.abs(lab.amplitudes[:, 0]), np.abs(amps[:, 0]), atol=1e-12
        )
        # damped site carries the extra decay factor
        np.testing.assert_allclose(
            np.abs(lab.amplitudes[:, 1]),
            np.abs(amps[:, 1]) * np.exp(-0.05 * t),
            atol=1e-12,
        )

    def test_nonmarkovian_moduli_all_frame_independent(self):
        cfg = ChainConfig(n_qubits=2, coupling=1.0, omega_e=10.0)
        t = np.linspace(0.0, 20.0, 101)
        amps = np.stack([np.cos(0.3 * t), np.sin(0.3 * t) * np.exp(1j * t)], axis=1)
        lab = to_lab_frame(_traj(t, amps), cfg, Lorentzian(g=1.0, gamma=0.03))
        np.testing.assert_allclose(np.abs(lab.amplitudes), np.abs(amps), atol=1e-12)

    def test_rejects_lab_frame_input(self):
        cfg = ChainConfig(n_qubits=1, coupling=1.0, omega_e=10.0)
        t = np.linspace(0.0, 1.0, 5)
        lab = _traj(t, np.ones((5, 1)), frame="lab")
        with pytest.raises(FrameError):
            to_lab_frame(lab, cfg, Markovian(gamma_m=0.01))


class TestDensityMatrix:
    def test_basis_state(self):
        t = np.array([0.0])
        traj = _traj(t, [[1.0, 0.0]], frame="lab")
        series = density_matrix(traj)
        np.testing.assert_allclose(series.matrices[0], [[1.0, 0.0], [0.0, 0.0]])

    def test_trace_equals_total_population(self):
        rng = np.random.default_rng(7)
        t = np.linspace(0.0, 3.0, 4)
        amps = rng.normal(size=(4, 3)) + 1j * rng.normal(size=(4, 3))
        amps *= 0.4
        traj = _traj(t, amps, frame="lab")
        series = density_matrix(traj)
        traces = np.trace(series.matrices, axis1=1, axis2=2).real
        np.testing.assert_allclose(traces, total_population(traj), atol=1e-14)

    def test_rank_one_spectrum(self):
        rng = np.random.default_rng(11)
        v = rng.normal(size=5) + 1j * rng.normal(size=5)
        v /= np.linalg.norm(v)
        traj = _traj(np.array([0.0]), v[None, :], frame="lab")
        mat = density_matrix(traj).matrices[0]
        vals = np.linalg.eigvalsh(mat)
        np.testing.assert_allclose(vals[:-1], 0.0, atol=1e-12)
        assert vals[-1] == pytest.approx(1.0, abs=1e-12)

    def test_requires_lab_frame(self):
        traj = _traj(np.array([0.0]), [[1.0]], frame="tilde")
        with pytest.raises(FrameError):
            density_matrix(traj)

    @given(
        st.lists(
            st.tuples(
                st.floats(-1.0, 1.0, allow_nan=False),
                st.floats(-1.0, 1.0, allow_nan=False),
            ),
            min_size=2,
            max_size=6,
        )
    )
    def test_projector_identity(self, parts):
        # rank-1 construction: matrix squared equals trace times matrix
        v = np.array([complex(a, b) for a, b in parts])
        norm = np.linalg.norm(v)
        if norm > 1.0:
            v /= norm  # keep trace within the physical range
        traj = _traj(np.array([0.0]), v[None, :], frame="lab")
        mat = density_matrix(traj).matrices[0]
        tau = np.trace(mat).real
        np.testing.assert_allclose(mat @ mat, tau * mat, atol=1e-10)


class TestEnvironmentPopulation:
    def test_zero_at_start(self):
        t = np.array([0.0, 1.0])
        traj = _traj(t, [[1.0], [0.9]], frame="lab")
        env = environment_population(traj)
        assert env[0] == pytest.approx(0.0, abs=1e-15)
        assert env[1] == pytest.approx(1 - 0.81, abs=1e-12)

    def test_clamps_small_overshoot(self):
        t = np.array([0.0, 1.0])
        amps = np.array([[1.0], [np.sqrt(1.0 + 5e-9)]])
        env = environment_population(_traj(t, amps, frame="lab"))
        assert env[1] == 0.0

    def test_flags_large_overshoot(self):
        t = np.array([0.0, 1.0])
        amps = np.array([[1.0], [np.sqrt(1.0 + 5e-4)]])
        with pytest.warns(ClampWarning):
            environment_population(_traj(t, amps, frame="lab"), tol=1e-6)

    def test_requires_lab_frame(self):
        traj = _traj(np.array([0.0]), [[1.0]], frame="tilde")
        with pytest.raises(FrameError):
            environment_population(traj)

    def test_full_decay_limit(self):
        # damped single qubit hands the whole excitation to the reservoir
        from chainqsd import InversionSettings, solve_laplace

        cfg = ChainConfig(n_qubits=1, coupling=1.0, omega_e=10.0)
        grid = np.linspace(0.0, 600.0, 2049)
        traj = solve_laplace(
            cfg,
            Lorentzian(g=1.0, gamma=0.03),
            InversionSettings(t_grid=grid, method="bromwich-fft"),
        )
        env = environment_population(to_lab_frame(traj, cfg, Lorentzian(g=1.0, gamma=0.03)))
        assert env[-1] > 0.999


class TestSubsample:
    def test_exact_subset(self):
        t = np.linspace(0.0, 10.0, 101)
        amps = np.exp(-0.1 * t)[:, None].astype(complex)
        traj = _traj(t, amps)
        sub = subsample(traj, t[::10])
        np.testing.assert_array_equal(sub.times, t[::10])
        np.testing.assert_array_equal(sub.amplitudes, amps[::10])

    def test_rejects_off_grid_times(self):
        t = np.linspace(0.0, 10.0, 101)
        traj = _traj(t, np.ones((101, 1)))
        with pytest.raises(ScenarioError):
            subsample(traj, np.array([0.05]))
