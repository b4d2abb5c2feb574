"""Reference dynamics: the chain with a memoryless drain on the last site.

The co-rotating equations of motion have a time-dependent coefficient on
the last site, which turns stiff once the decay factor grows.  The solver
therefore integrates the constant-coefficient lab-frame system with the
global free phase removed (populations are unaffected by that phase) and
reattaches the frame factors afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .chain import TILDE, AmplitudeTrajectory, ChainConfig, Markovian
from .errors import HalfLifeNotFoundError, ScenarioError, SolverError

__all__ = ["OdeSettings", "solve_markovian", "half_life", "coupling_matrix"]


@dataclass(frozen=True)
class OdeSettings:
    """Controls for the adaptive integrator.

    ``n_samples`` points are placed uniformly on [0, t_end]; accuracy is
    governed by the tolerances, not by the sampling density.
    """

    t_end: float
    n_samples: int = 4096
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    dt_max: float = np.inf

    def __post_init__(self) -> None:
        if self.t_end <= 0:
            raise ScenarioError("t_end must be positive")
        if self.n_samples < 2:
            raise ScenarioError("n_samples must be at least 2")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_samples)


def coupling_matrix(cfg: ChainConfig) -> np.ndarray:
    """Nearest-neighbour hopping generator, -i*(J/2) on the off-diagonals."""
    n = cfg.n_qubits
    mat = np.zeros((n, n), dtype=complex)
    half_j = 0.5 * cfg.coupling
    for i in range(n - 1):
        mat[i, i + 1] = -1j * half_j
        mat[i + 1, i] = -1j * half_j
    return mat


def solve_markovian(
    cfg: ChainConfig, sd: Markovian, settings: OdeSettings
) -> AmplitudeTrajectory:
    """Integrate the memoryless-drain dynamics; returns the co-rotating
    (tilde-frame) amplitudes on the sampling grid."""
    if not isinstance(sd, Markovian):
        raise ScenarioError("solve_markovian needs a memoryless reservoir")
    gen = coupling_matrix(cfg)
    gen[-1, -1] -= sd.gamma_m

    times = settings.times
    sol = solve_ivp(
        lambda _t, y: gen @ y,
        (0.0, settings.t_end),
        cfg.initial_amplitudes.astype(complex),
        method="DOP853",
        t_eval=times,
        rtol=settings.rel_tol,
        atol=settings.abs_tol,
        max_step=settings.dt_max,
    )
    if not sol.success:
        raise SolverError(f"markovian integration failed: {sol.message}")

    amps = sol.y.T.copy()
    # drift-removed lab frame -> tilde frame: only the damped site differs
    amps[:, -1] *= np.exp(sd.gamma_m * times)
    return AmplitudeTrajectory(
        times,
        amps,
        TILDE,
        meta={"solver": "dop853", "rel_tol": settings.rel_tol, "abs_tol": settings.abs_tol},
    )


def _refine_peak(times: np.ndarray, values: np.ndarray, idx: int) -> tuple[float, float]:
    """Parabolic refinement of a local maximum through three grid points."""
    if idx <= 0 or idx >= len(values) - 1:
        return float(times[idx]), float(values[idx])
    y0, y1, y2 = values[idx - 1], values[idx], values[idx + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom >= 0 or abs(denom) < 1e-300:
        return float(times[idx]), float(values[idx])
    shift = 0.5 * (y0 - y2) / denom
    shift = float(np.clip(shift, -1.0, 1.0))
    h = times[idx + 1] - times[idx]
    peak = y1 - 0.25 * (y0 - y2) * shift
    return float(times[idx] + shift * h), float(peak)


def _crossing(t0: float, v0: float, t1: float, v1: float, target: float) -> float:
    if v0 == v1:
        return float(t0)
    return float(t0 + (t1 - t0) * (v0 - target) / (v0 - v1))


def half_life(traj: AmplitudeTrajectory, site: int = 1) -> float:
    """First time the running envelope of a site population falls to half
    its initial value.

    The envelope is the piecewise-linear interpolation through successive
    local maxima of the population; for a monotone signal this reduces to
    the direct crossing of the signal itself.  The population must start
    at its global maximum.

    Raises:
        HalfLifeNotFoundError: if the envelope never crosses within the
            trajectory's window.
    """
    if not 1 <= site <= traj.n_sites:
        raise ScenarioError(f"site {site} outside 1..{traj.n_sites}")
    pop = np.abs(traj.amplitudes[:, site - 1]) ** 2
    times = traj.times
    p0 = float(pop[0])
    if p0 <= 0 or p0 < np.max(pop) * (1.0 - 1e-9):
        raise ScenarioError("population must start at its global maximum")
    target = 0.5 * p0

    interior = np.flatnonzero(
        (pop[1:-1] >= pop[:-2]) & (pop[1:-1] >= pop[2:]) & ((pop[1:-1] > pop[:-2]) | (pop[1:-1] > pop[2:]))
    ) + 1
    # solver-noise wiggles in a long-dead tail are not envelope nodes
    interior = interior[pop[interior] >= 1e-3 * p0]

    if interior.size < 2:
        below = np.flatnonzero(pop <= target)
        below = below[below > 0]
        if below.size == 0:
            raise HalfLifeNotFoundError("population stays above half its initial value")
        j = int(below[0])
        return _crossing(times[j - 1], pop[j - 1], times[j], pop[j], target)

    nodes = [(float(times[0]), p0)]
    nodes += [_refine_peak(times, pop, int(i)) for i in interior]
    for (ta, va), (tb, vb) in zip(nodes[:-1], nodes[1:]):
        if va >= target >= vb:
            return _crossing(ta, va, tb, vb, target)

    # decaying tail after the last maximum: follow the raw signal
    last = int(interior[-1])
    tail = np.flatnonzero(pop[last:] <= target)
    if tail.size > 0:
        j = last + int(tail[0])
        return _crossing(times[j - 1], pop[j - 1], times[j], pop[j], target)
    raise HalfLifeNotFoundError("population envelope stays above half within the window")
