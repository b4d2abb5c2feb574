"""State-distance measures built for decaying traces.

The closed forms for rank-1 inputs used as oracles here:
  trace:      spectrum of the rank-2 difference, solved as a 2x2 problem
  hellinger:  Tr(sqrt(rho) sqrt(sigma)) = Tr(rho sigma) / sqrt(tr_rho tr_sigma)
  bures:      sqrt(2) [ (tr_rho + tr_sigma)/2 - sqrt(Tr(rho sigma)) ]^(1/2)
"""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chainqsd import (
    MEASURES,
    bures_distance,
    fidelities,
    hellinger_distance,
    matrix_abs,
    psd_sqrt,
    qsd_many,
    qsd_series,
    trace_distance,
    trace_distance_radical,
)
from chainqsd.errors import InvalidDensityError, ScenarioError


def _rank1(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def _random_state(rng, n, trace):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    v *= np.sqrt(trace) / np.linalg.norm(v)
    return _rank1(v)


def _random_mixed(rng, n, trace=1.0):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    m = a @ a.conj().T
    return m * (trace / np.trace(m).real)


class TestMatrixPrimitives:
    def test_abs_of_sign_diagonal(self):
        got = matrix_abs(np.diag([3.0, -4.0]))
        np.testing.assert_allclose(got, np.diag([3.0, 4.0]), atol=1e-14)

    def test_abs_of_zero(self):
        np.testing.assert_allclose(matrix_abs(np.zeros((3, 3))), 0.0)

    @given(st.integers(0, 2**32 - 1))
    def test_abs_defining_identity(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        m = matrix_abs(a)
        np.testing.assert_allclose(m @ m, a.conj().T @ a, atol=1e-10)
        np.testing.assert_allclose(m, m.conj().T, atol=1e-12)

    def test_sqrt_of_scaled_identity(self):
        got = psd_sqrt(np.eye(2) / 2.0)
        np.testing.assert_allclose(got, np.eye(2) / np.sqrt(2.0), atol=1e-14)

    def test_sqrt_of_rank_one(self):
        rng = np.random.default_rng(5)
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        m = _rank1(v)
        tau = np.trace(m).real
        np.testing.assert_allclose(psd_sqrt(m), m / np.sqrt(tau), atol=1e-12)

    def test_sqrt_of_zero(self):
        np.testing.assert_allclose(psd_sqrt(np.zeros((2, 2))), 0.0)

    def test_sqrt_squares_back(self):
        rng = np.random.default_rng(6)
        m = _random_mixed(rng, 5)
        r = psd_sqrt(m)
        np.testing.assert_allclose(r @ r, m, atol=1e-10)

    def test_sqrt_rejects_indefinite_input(self):
        with pytest.raises(InvalidDensityError):
            psd_sqrt(np.diag([1.0, -0.5]))

    def test_sqrt_repairs_solver_noise(self):
        # tiny negative eigenvalue from round-off is clipped, not fatal
        m = np.diag([1.0, -1e-10])
        got = psd_sqrt(m)
        assert got[1, 1] == 0.0


class TestTraceDistance:
    def test_equal_inputs(self):
        rng = np.random.default_rng(1)
        for tau in (0.0, 0.3, 0.77, 1.0):
            rho = _random_state(rng, 4, tau) if tau else np.zeros((4, 4))
            assert trace_distance(rho, rho) <= 1e-10

    def test_orthogonal_pure_states(self):
        assert trace_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])) == pytest.approx(1.0)

    def test_radical_route_matches(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            b = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            rho = (a + a.conj().T) / 2
            sigma = (b + b.conj().T) / 2
            d1 = trace_distance(rho, sigma)
            d2 = trace_distance_radical(rho, sigma)
            assert abs(d1 - d2) <= 1e-10 * max(1.0, d1)

    def test_singular_value_oracle(self):
        rng = np.random.default_rng(3)
        rho = _random_state(rng, 5, 0.8)
        sigma = _random_state(rng, 5, 0.5)
        want = 0.5 * np.sum(np.linalg.svd(rho - sigma, compute_uv=False))
        assert trace_distance(rho, sigma) == pytest.approx(want, abs=1e-12)

    def test_symmetry(self):
        rng = np.random.default_rng(4)
        rho = _random_state(rng, 3, 0.9)
        sigma = _random_mixed(rng, 3, 0.4)
        assert trace_distance(rho, sigma) == trace_distance(sigma, rho)

    def test_dimension_mismatch(self):
        with pytest.raises(ScenarioError):
            trace_distance(np.eye(2), np.eye(3))


class TestHellinger:
    def test_equal_inputs_exactly_zero(self):
        rng = np.random.default_rng(8)
        for tau in (0.3, 1.0):
            rho = _random_state(rng, 4, tau)
            assert hellinger_distance(rho, rho) == 0.0

    def test_vanishing_traces_vanish(self):
        # the naive normalized form would insist on sqrt(2) here
        rng = np.random.default_rng(9)
        rho = _random_state(rng, 3, 1e-10)
        sigma = _random_state(rng, 3, 1e-10)
        assert hellinger_distance(rho, sigma) < 1e-4

    def test_unit_trace_reduction(self):
        rng = np.random.default_rng(10)
        for _ in range(25):
            rho = _random_mixed(rng, 4, 1.0)
            sigma = _random_mixed(rng, 4, 1.0)
            overlap = np.trace(psd_sqrt(rho) @ psd_sqrt(sigma)).real
            want = np.sqrt(2.0) * np.sqrt(max(1.0 - overlap, 0.0))
            assert hellinger_distance(rho, sigma) == pytest.approx(want, abs=1e-12)

    def test_rank_one_closed_form(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            rho = _random_state(rng, 5, rng.uniform(0.1, 1.0))
            sigma = _random_state(rng, 5, rng.uniform(0.1, 1.0))
            tr, ts = np.trace(rho).real, np.trace(sigma).real
            overlap = np.trace(rho @ sigma).real / np.sqrt(tr * ts)
            want = np.sqrt(max(tr + ts - 2.0 * overlap, 0.0))
            assert hellinger_distance(rho, sigma) == pytest.approx(want, abs=1e-10)

    def test_symmetry(self):
        rng = np.random.default_rng(12)
        rho = _random_mixed(rng, 4, 0.6)
        sigma = _random_mixed(rng, 4, 0.9)
        assert hellinger_distance(rho, sigma) == pytest.approx(
            hellinger_distance(sigma, rho), abs=1e-14
        )


class TestBures:
    def test_equal_inputs_exactly_zero(self):
        rng = np.random.default_rng(13)
        for tau in (0.2, 1.0):
            rho = _random_state(rng, 4, tau)
            assert bures_distance(rho, rho) == 0.0
            mixed = _random_mixed(rng, 4, tau)
            assert bures_distance(mixed, mixed) == 0.0

    def test_pure_state_overlap_form(self):
        rng = np.random.default_rng(14)
        for _ in range(25):
            v = rng.normal(size=4) + 1j * rng.normal(size=4)
            w = rng.normal(size=4) + 1j * rng.normal(size=4)
            v /= np.linalg.norm(v)
            w /= np.linalg.norm(w)
            fid = abs(np.vdot(v, w)) ** 2
            want = np.sqrt(2.0) * np.sqrt(1.0 - np.sqrt(fid))
            got = bures_distance(_rank1(v), _rank1(w))
            assert got == pytest.approx(want, abs=1e-10)

    def test_vanishing_traces_vanish(self):
        rng = np.random.default_rng(15)
        rho = _random_state(rng, 3, 1e-10)
        sigma = _random_state(rng, 3, 1e-10)
        assert bures_distance(rho, sigma) < 1e-4

    def test_symmetry(self):
        rng = np.random.default_rng(16)
        rho = _random_mixed(rng, 4, 0.7)
        sigma = _random_mixed(rng, 4, 0.5)
        assert bures_distance(rho, sigma) == pytest.approx(
            bures_distance(sigma, rho), abs=1e-12
        )


class TestFidelities:
    def test_identical_pure_state(self):
        rho = np.diag([1.0, 0.0])
        assert fidelities(rho, rho) == pytest.approx((1.0, 1.0, 1.0))

    def test_orthogonal_states(self):
        f = fidelities(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
        assert f == pytest.approx((0.0, 0.0, 0.0), abs=1e-14)

    def test_first_is_square_of_second(self):
        rng = np.random.default_rng(17)
        rho = _random_mixed(rng, 4, 0.8)
        sigma = _random_mixed(rng, 4, 0.6)
        f1, f2, _ = fidelities(rho, sigma)
        assert f1 == pytest.approx(f2 * f2, rel=1e-12)

    def test_third_rank_one_product(self):
        rng = np.random.default_rng(18)
        v = rng.normal(size=3) + 1j * rng.normal(size=3)
        w = rng.normal(size=3) + 1j * rng.normal(size=3)
        rho, sigma = _rank1(v), _rank1(w)
        _, _, f3 = fidelities(rho, sigma)
        assert f3 == pytest.approx(abs(np.vdot(v, w)) ** 2, rel=1e-12)


class TestSeries:
    def _batch(self):
        rng = np.random.default_rng(19)
        times = np.linspace(0.0, 1.0, 6)
        rhos = np.stack([_random_state(rng, 3, 0.9) for _ in times])
        sigmas = np.stack([_random_state(rng, 3, 0.8) for _ in times])
        # shared initial state at t=0
        sigmas[0] = rhos[0]
        return times, rhos, sigmas

    def test_matches_scalar_calls(self):
        times, rhos, sigmas = self._batch()
        got = qsd_many(times, rhos, sigmas, MEASURES)
        scalar = {
            "trace": trace_distance,
            "hellinger": hellinger_distance,
            "bures": bures_distance,
        }
        for name, fn in scalar.items():
            for j in range(len(times)):
                assert got[name].values[j] == pytest.approx(
                    fn(rhos[j], sigmas[j]), abs=1e-12
                )
        for j in range(len(times)):
            f1, f2, f3 = fidelities(rhos[j], sigmas[j])
            assert got["fidelity-f1"].values[j] == pytest.approx(f1, abs=1e-12)
            assert got["fidelity-f2"].values[j] == pytest.approx(f2, abs=1e-12)
            assert got["fidelity-f3"].values[j] == pytest.approx(f3, abs=1e-12)

    def test_zero_at_shared_initial_state(self):
        times, rhos, sigmas = self._batch()
        for measure in ("trace", "hellinger", "bures"):
            series = qsd_series(times, rhos, sigmas, measure)
            assert series.values[0] <= 1e-10
            assert np.all(series.values >= -1e-12)

    def test_unknown_measure_rejected(self):
        times, rhos, sigmas = self._batch()
        with pytest.raises(ScenarioError):
            qsd_series(times, rhos, sigmas, "wasserstein")

    def test_length_mismatch_rejected(self):
        times, rhos, sigmas = self._batch()
        with pytest.raises(ScenarioError):
            qsd_series(times[:-1], rhos, sigmas, "trace")
