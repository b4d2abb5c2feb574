"""Dynamics with a structured reservoir, via two independent backends.

The co-rotating amplitudes obey a linear Volterra integro-differential
system: nearest-neighbour hopping everywhere, plus a memory integral on
the last site.  Backend one marches that system directly in time with a
product-integration history rule.  Backend two solves the same system in
the transform domain, where the chain telescopes into a closed form per
site, and inverts numerically.  The two share no code beyond the kernel
evaluations, so their agreement is a meaningful check of both.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .chain import TILDE, AmplitudeTrajectory, ChainConfig, Markovian, SpectralDensity
from .errors import (
    ConvergenceError,
    PoleProximityWarning,
    ScenarioError,
    SolverError,
)
from .kernels import KernelEval, kernel_for
from .markovian import coupling_matrix

__all__ = [
    "VolterraSettings",
    "InversionSettings",
    "a_m",
    "f1_of_s",
    "f_i_of_s",
    "laplace_amplitudes",
    "invert_laplace",
    "solve_volterra",
    "solve_laplace",
    "solve_nonmarkovian",
]

QUADRATURES = ("product-integration", "trapezoid")
INVERSION_METHODS = ("dehoog", "bromwich-fft")
BACKENDS = ("volterra", "laplace")

_POLE_FLOOR = 1e-14


# ---------------------------------------------------------------------------
# transform-domain closed form
# ---------------------------------------------------------------------------

def a_m(s, k: float, m: int):
    """Polynomial family generated by eliminating the chain site by site.

    Evaluated with the three-term recurrence A_{m+1} = iks·A_m − A_{m−1},
    A_0 = 0, A_1 = 1.  The equivalent explicit form (a ratio of powers of
    the two roots of the characteristic quadratic) loses digits when the
    roots nearly coincide; the recurrence does not, and m stays small here.
    """
    if m < 0:
        raise ScenarioError("index m must be non-negative")
    if k <= 0:
        raise ScenarioError("inverse coupling k must be positive")
    s_arr = np.asarray(s, dtype=complex)
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    prev = np.zeros_like(s_arr)
    cur = np.ones_like(s_arr)
    if m == 0:
        cur = prev
    else:
        iks = 1j * k * s_arr
        for _ in range(m - 1):
            prev, cur = cur, iks * cur - prev
    return complex(cur[0]) if scalar else cur


def _a_table(s: np.ndarray, k: float, m_max: int) -> list[np.ndarray]:
    table = [np.zeros_like(s), np.ones_like(s)]
    iks = 1j * k * s
    for _ in range(m_max - 1):
        table.append(iks * table[-1] - table[-2])
    return table[: m_max + 1]


def f1_of_s(s, cfg: ChainConfig, kernel: KernelEval):
    """Transform of the first site's co-rotating amplitude.

    The memory enters only through the last site's self-energy B(s); the
    rest of the chain contributes the A_m polynomials.  The denominator
    used here, ik[s+B]A_N − A_{N−1}, was fixed against the time-domain
    backend for N = 1 and N = 2 before being trusted for larger chains.
    """
    s_arr = np.asarray(s, dtype=complex)
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)

    n = cfg.n_qubits
    k = cfg.inverse_coupling
    c0 = cfg.initial_amplitudes
    ik = 1j * k
    sb = s_arr + kernel.b_of_s(s_arr)
    a_tab = _a_table(s_arr, k, n)

    num = ik * c0[n - 1] * np.ones_like(s_arr)
    if n >= 2:
        num = num - (k ** 2) * sb * a_tab[1] * c0[n - 2]
    for m in range(1, n - 1):
        num = num + ik * (ik * sb * a_tab[n - m] - a_tab[n - 1 - m]) * c0[m - 1]
    den = ik * sb * a_tab[n] - a_tab[n - 1]

    scale = np.abs(ik * sb * a_tab[n]) + np.abs(a_tab[n - 1])
    near_pole = np.abs(den) < _POLE_FLOOR * np.maximum(scale, 1.0)
    if np.any(near_pole):
        warnings.warn(
            f"{int(np.sum(near_pole))} evaluation point(s) fall near a zero "
            "of the transform denominator",
            PoleProximityWarning,
            stacklevel=2,
        )
    out = num / den
    return complex(out[0]) if scalar else out


def f_i_of_s(s, i: int, f1, cfg: ChainConfig):
    """Transform of site i's amplitude, expressed through the first site's."""
    if not 2 <= i <= cfg.n_qubits:
        raise ScenarioError(f"site index {i} outside 2..{cfg.n_qubits}")
    s_arr = np.asarray(s, dtype=complex)
    scalar = s_arr.ndim == 0
    s_arr = np.atleast_1d(s_arr)
    f1_arr = np.atleast_1d(np.asarray(f1, dtype=complex))

    k = cfg.inverse_coupling
    c0 = cfg.initial_amplitudes
    a_tab = _a_table(s_arr, k, i)
    out = a_tab[i] * f1_arr
    ik = 1j * k
    for n_idx in range(1, i):
        out = out - ik * a_tab[i - n_idx] * c0[n_idx - 1]
    return complex(out[0]) if scalar else out


def laplace_amplitudes(s, cfg: ChainConfig, kernel: KernelEval) -> np.ndarray:
    """All N site transforms at once; shape (N, len(s))."""
    s_arr = np.atleast_1d(np.asarray(s, dtype=complex))
    f1 = np.atleast_1d(f1_of_s(s_arr, cfg, kernel))
    rows = [f1]
    for i in range(2, cfg.n_qubits + 1):
        rows.append(np.atleast_1d(f_i_of_s(s_arr, i, f1, cfg)))
    return np.vstack(rows)


# ---------------------------------------------------------------------------
# numerical inversion
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class InversionSettings:
    """Controls for the transform-inversion backend.

    ``contour_shift`` is the abscissa of the integration line and must sit
    right of every singularity; the reservoirs handled here put all of
    them in Re(s) <= 0, so any positive value is admissible.  Zero selects
    the automatic choice 2/t_end.  ``n_nodes`` is the number of transform
    evaluations per decade (accelerated-series method) or the transform
    sample budget (fft method, rounded up to a power of two).
    """

    t_grid: np.ndarray
    method: str = "dehoog"
    contour_shift: float = 0.0
    n_nodes: int = 129
    tol: float = 1e-10
    oversample: int = 8
    check_aliasing: bool = False
    aliasing_tol: float = 1e-4

    def __post_init__(self) -> None:
        grid = np.asarray(self.t_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ScenarioError("t_grid must be a 1-d array with at least 2 points")
        if grid[0] < 0 or np.any(np.diff(grid) <= 0):
            raise ScenarioError("t_grid must be non-negative and strictly increasing")
        object.__setattr__(self, "t_grid", grid)
        if self.contour_shift < 0:
            raise ScenarioError("contour_shift must sit right of the imaginary axis")
        shift = self.contour_shift if self.contour_shift > 0 else 2.0 / grid[-1]
        object.__setattr__(self, "contour_shift", float(shift))
        if self.method not in INVERSION_METHODS:
            raise ScenarioError(f"unknown inversion method {self.method!r}")
        if self.n_nodes < 9:
            raise ScenarioError("n_nodes must be at least 9")
        if not 0 < self.tol < 1:
            raise ScenarioError("tol must be in (0, 1)")
        if self.oversample < 1:
            raise ScenarioError("oversample must be at least 1")


def _cf_coeffs(fp: np.ndarray) -> np.ndarray:
    """Continued-fraction coefficients of the power series with the given
    leading coefficients, via the quotient-difference rhombus rules."""
    npts = len(fp)
    m_deg = (npts - 1) // 2
    e = np.zeros((npts, m_deg + 1), dtype=complex)
    q = np.zeros((npts, m_deg), dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        q[0, 0] = fp[1] / (fp[0] / 2.0)
        q[1 : 2 * m_deg, 0] = fp[2 : 2 * m_deg + 1] / fp[1 : 2 * m_deg]
        for r in range(1, m_deg + 1):
            n_e = 2 * (m_deg - r) + 1
            e[0:n_e, r] = q[1 : n_e + 1, r - 1] - q[0:n_e, r - 1] + e[1 : n_e + 1, r - 1]
            if r < m_deg:
                rq = r + 1
                n_q = 2 * (m_deg - rq) + 2
                q[0:n_q, rq - 1] = (
                    q[1 : n_q + 1, rq - 2] * e[1 : n_q + 1, rq - 1] / e[0:n_q, rq - 1]
                )
    d = np.zeros(npts, dtype=complex)
    d[0] = fp[0] / 2.0
    d[1 : 2 * m_deg : 2] = -q[0, :m_deg]
    d[2 : 2 * m_deg + 1 : 2] = -e[0, 1 : m_deg + 1]
    return d


def _cf_eval(d: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Evaluate the continued fraction at each z by the forward recurrence,
    with the square-root convergence acceleration on the final level."""
    m2 = len(d) - 1
    a_prev = np.zeros_like(z)
    a_cur = np.full_like(z, d[0])
    b_prev = np.ones_like(z)
    b_cur = np.ones_like(z)
    for i in range(1, m2):
        a_prev, a_cur = a_cur, a_cur + d[i] * z * a_prev
        b_prev, b_cur = b_cur, b_cur + d[i] * z * b_prev
    brem = (1.0 + (d[m2 - 1] - d[m2]) * z) / 2.0
    # divergence shows up as non-finite output, which the caller turns into
    # a solver error; keep the numpy noise off that path
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        rem = -brem * (1.0 - np.sqrt(1.0 + d[m2] * z / brem ** 2))
        a_last = a_cur + rem * a_prev
        b_last = b_cur + rem * b_prev
        return a_last / b_last


def _invert_dehoog(
    f_multi: Callable[[np.ndarray], np.ndarray],
    settings: InversionSettings,
    initial_values: np.ndarray | None,
) -> np.ndarray:
    times = settings.t_grid
    m_deg = (settings.n_nodes - 1) // 2
    npts = 2 * m_deg + 1

    probe = np.atleast_2d(f_multi(np.array([settings.contour_shift + 1.0 + 0j])))
    n_comp = probe.shape[0]
    out = np.zeros((n_comp, len(times)), dtype=complex)

    positive = times > 0
    if np.any(~positive):
        if initial_values is not None:
            out[:, ~positive] = np.asarray(initial_values, dtype=complex)[:, None]
        else:
            # initial-value limit s·F(s), with one Richardson step to kill
            # the next-order term
            s_probe = 1e7 / times[-1]
            u1 = s_probe * np.atleast_2d(f_multi(np.array([s_probe + 0j])))[:, 0]
            u2 = 2 * s_probe * np.atleast_2d(f_multi(np.array([2 * s_probe + 0j])))[:, 0]
            out[:, ~positive] = (2.0 * u2 - u1)[:, None]

    tpos = times[positive]
    if tpos.size == 0:
        return out
    decades = np.floor(np.log10(tpos)).astype(int)
    for dec in np.unique(decades):
        sel = decades == dec
        ts = tpos[sel]
        t_half_period = 2.0 * np.max(ts)
        gamma = settings.contour_shift - np.log(settings.tol) / (2.0 * t_half_period)
        p_up = gamma + 1j * np.pi * np.arange(npts) / t_half_period
        nodes = np.concatenate([p_up, np.conj(p_up)])
        vals = np.atleast_2d(f_multi(nodes))
        if not np.all(np.isfinite(vals)):
            raise SolverError("transform evaluation returned non-finite values")
        z = np.exp(1j * np.pi * ts / t_half_period)
        scale = np.exp(gamma * ts) / (2.0 * t_half_period)
        idx = np.flatnonzero(positive)[sel]
        for c in range(n_comp):
            fp = vals[c, :npts]
            fm = vals[c, npts:]
            if np.max(np.abs(fp)) == 0 and np.max(np.abs(fm)) == 0:
                continue
            total = _cf_eval(_cf_coeffs(fp), z) + _cf_eval(_cf_coeffs(fm), np.conj(z))
            if not np.all(np.isfinite(total)):
                raise SolverError(
                    "accelerated transform series failed to converge; "
                    "try more nodes or the fft method"
                )
            out[c, idx] = scale * total
    return out


def _invert_fft(
    f_multi: Callable[[np.ndarray], np.ndarray],
    settings: InversionSettings,
    initial_values: np.ndarray | None,
    initial_slopes: np.ndarray | None,
    contour_shift: float | None = None,
) -> np.ndarray:
    times_out = settings.t_grid
    dt_out = times_out[1] - times_out[0]
    if times_out[0] != 0.0 or np.max(np.abs(np.diff(times_out) - dt_out)) > 1e-9 * dt_out:
        raise ScenarioError("fft inversion needs a uniform grid starting at 0")

    # evaluate on an oversampled internal grid: the frequency window scales
    # as 1/dt, and the truncated transform tail is what limits accuracy
    ratio = settings.oversample
    n_t = ratio * (len(times_out) - 1) + 1
    times = np.linspace(0.0, times_out[-1], n_t)
    dt = dt_out / ratio
    m_fft = 1 << int(np.ceil(np.log2(max(8 * (n_t - 1), settings.n_nodes))))
    t_half_period = m_fft * dt / 2.0
    alpha = settings.contour_shift if contour_shift is None else contour_shift
    gamma = alpha + np.log(1.0 / settings.tol) / (2.0 * t_half_period)
    d_om = np.pi / t_half_period

    k = np.arange(-m_fft // 2, m_fft // 2)
    s_nodes = gamma + 1j * k * d_om
    vals = np.atleast_2d(f_multi(s_nodes))
    if not np.all(np.isfinite(vals)):
        raise SolverError("transform evaluation returned non-finite values")
    n_comp = vals.shape[0]

    # subtract the slowest-decaying part of F so the truncated frequency
    # window carries a rapidly decaying remainder; add it back exactly
    if initial_values is None:
        s_probe = 1e7 / times[-1]
        u1 = s_probe * np.atleast_2d(f_multi(np.array([s_probe + 0j])))[:, 0]
        u2 = 2 * s_probe * np.atleast_2d(f_multi(np.array([2 * s_probe + 0j])))[:, 0]
        f0 = 2.0 * u2 - u1
    else:
        f0 = np.asarray(initial_values, dtype=complex)
    if initial_slopes is None:
        s_probe = 1e7 / times[-1]
        v1 = s_probe * (
            s_probe * np.atleast_2d(f_multi(np.array([s_probe + 0j])))[:, 0] - f0
        )
        v2 = 2 * s_probe * (
            2 * s_probe * np.atleast_2d(f_multi(np.array([2 * s_probe + 0j])))[:, 0] - f0
        )
        f0p = 2.0 * v2 - v1
    else:
        f0p = np.asarray(initial_slopes, dtype=complex)

    mu = 4.0 / times[-1]
    beta = f0p + mu * f0
    sub = (
        f0[:, None] / (s_nodes + mu)[None, :]
        + beta[:, None] / ((s_nodes + mu) ** 2)[None, :]
    )
    g_nodes = vals - sub

    spectrum = np.fft.ifftshift(g_nodes, axes=1)
    series = m_fft * np.fft.ifft(spectrum, axis=1)[:, :n_t]
    out = np.exp(gamma * times)[None, :] / (m_fft * dt) * series
    out = out + (f0[:, None] + beta[:, None] * times[None, :]) * np.exp(-mu * times)[None, :]
    out = out[:, ::ratio]

    if settings.check_aliasing and contour_shift is None and n_comp > 0:
        redo = _invert_fft(f_multi, settings, f0, f0p, contour_shift=2 * alpha)
        gap = float(np.max(np.abs(redo - out)))
        if gap > settings.aliasing_tol:
            raise SolverError(
                f"fft inversion is aliasing-limited: doubling the contour "
                f"shift moves the result by {gap:.2e}"
            )
    return out


def invert_laplace(f_of_s: Callable, settings: InversionSettings) -> np.ndarray:
    """Numerically invert a transform onto ``settings.t_grid``.

    ``f_of_s`` must be analytic right of the contour; it may accept numpy
    arrays (preferred) or scalars.  Returns complex values; take the real
    part only if the original is known to be real.
    """

    def f_multi(s: np.ndarray) -> np.ndarray:
        vals = np.asarray(f_of_s(s))
        if vals.shape != s.shape:
            vals = np.array([f_of_s(si) for si in s], dtype=complex)
        return vals[None, :]

    if settings.method == "dehoog":
        return _invert_dehoog(f_multi, settings, None)[0]
    return _invert_fft(f_multi, settings, None, None)[0]


# ---------------------------------------------------------------------------
# time-domain march
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VolterraSettings:
    """Controls for the time-domain backend.

    ``dt`` should be small enough that halving it moves the populations by
    less than ``convergence_tol``; set ``check_convergence`` to have the
    solver verify that by rerunning at half step (doubling the cost).
    """

    dt: float
    t_end: float
    quadrature: str = "product-integration"
    check_convergence: bool = False
    convergence_tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.dt <= 0 or self.t_end <= 0:
            raise ScenarioError("dt and t_end must be positive")
        if self.t_end / self.dt < 8:
            raise ScenarioError("need at least 8 steps; decrease dt")
        if self.quadrature not in QUADRATURES:
            raise ScenarioError(f"unknown quadrature {self.quadrature!r}")


def _history_weights(
    kernel: KernelEval, dt: float, n_steps: int, quadrature: str
) -> tuple[np.ndarray, complex, np.ndarray, np.ndarray]:
    """Lag-weight arrays for the memory integral I(t_n) = ∫ R(u) y(t_n−u) du.

    Returns (c_lag, w_end, w_zero, w_one) so that
    I(t_n) = w_end·y_n + Σ_{q=1}^{n−1} c_lag[q]·y_{n−q} + w_zero[n]·y_0 − w_one[n]·y_1.
    """
    if quadrature == "trapezoid":
        r_grid = np.asarray(kernel.r_of_t(dt * np.arange(n_steps + 1)), dtype=complex)
        c_lag = dt * r_grid
        c_lag[0] = 0.0
        w_end = complex(dt * r_grid[0] / 2.0)
        w_zero = dt * r_grid / 2.0
        w_one = np.zeros(n_steps + 1, dtype=complex)
        return c_lag, w_end, w_zero, w_one

    # product integration: R integrated exactly (Gauss) against a piecewise
    # quadratic interpolant of y, one extra panel so the boundary
    # corrections stay in range at the final step
    n_panels = n_steps + 1
    nodes, wts = leggauss(7)
    xi = 0.5 * (nodes + 1.0)
    u = dt * (np.arange(n_panels)[:, None] + xi[None, :])
    r_vals = np.asarray(kernel.r_of_t(u.ravel()), dtype=complex).reshape(n_panels, 7)
    half_w = 0.5 * dt * wts
    g0 = r_vals @ half_w
    g1 = (r_vals * xi[None, :]) @ half_w
    g2 = (r_vals * (xi ** 2)[None, :]) @ half_w

    c_lag = np.zeros(n_steps + 1, dtype=complex)
    c_lag[1] = (2.0 * g1[0] - g2[0]) + (g0[1] - g2[1]) + 0.5 * (g2[2] - g1[2])
    c_lag[2] = (
        0.5 * (g2[3] - g1[3])
        + (g0[2] - g2[2])
        + 0.5 * (g2[1] + g1[1])
        + 0.5 * (g2[0] - g1[0])
    )
    q = np.arange(3, n_steps)
    c_lag[3:n_steps] = (
        0.5 * (g2[q + 1] - g1[q + 1]) + (g0[q] - g2[q]) + 0.5 * (g2[q - 1] + g1[q - 1])
    )
    w_end = complex(
        0.5 * (g2[0] - 3.0 * g1[0] + 2.0 * g0[0]) + 0.5 * (g2[1] - g1[1])
    )
    w_zero = np.zeros(n_steps + 1, dtype=complex)
    w_zero[1:] = 0.5 * (g2[:n_steps] + g1[:n_steps])
    w_one = 0.5 * (g2[: n_steps + 1] - g1[: n_steps + 1])
    return c_lag, w_end, w_zero, w_one


def _taylor_start(
    gen: np.ndarray, kernel: KernelEval, c0: np.ndarray, order: int = 5
) -> list[np.ndarray]:
    """Derivatives of y at t=0 up to the given order, from the equation of
    motion and the kernel's derivatives at zero."""
    r_d = kernel.r_derivs_at_zero(max(order - 2, 0))
    derivs = [c0.astype(complex)]
    for p in range(1, order + 1):
        nxt = gen @ derivs[p - 1]
        mem = 0.0 + 0.0j
        for q_idx in range(p - 1):
            mem -= r_d[q_idx] * derivs[p - 2 - q_idx][-1]
        nxt[-1] += mem
        derivs.append(nxt)
    return derivs


def _march(
    cfg: ChainConfig,
    kernel: KernelEval,
    dt: float,
    n_steps: int,
    quadrature: str,
) -> np.ndarray:
    gen = coupling_matrix(cfg)
    n_sites = cfg.n_qubits
    c_lag, w_end, w_zero, w_one = _history_weights(kernel, dt, n_steps, quadrature)
    c_rev = np.ascontiguousarray(c_lag[::-1])
    len_c = n_steps + 1

    y = np.zeros((n_steps + 1, n_sites), dtype=complex)
    y_last = np.zeros(n_steps + 1, dtype=complex)
    f = np.zeros((n_steps + 1, n_sites), dtype=complex)

    derivs = _taylor_start(gen, kernel, cfg.initial_amplitudes)
    for j in range(4):
        tj = j * dt
        acc_y = np.zeros(n_sites, dtype=complex)
        acc_f = np.zeros(n_sites, dtype=complex)
        fact = 1.0
        for p, d_p in enumerate(derivs):
            if p > 0:
                fact *= p
            acc_y += d_p * tj ** p / fact
            if p >= 1:
                acc_f += d_p * tj ** (p - 1) / (fact / max(p, 1))
        y[j] = acc_y
        f[j] = acc_f
        y_last[j] = acc_y[-1]

    dt24 = dt / 24.0
    for n in range(3, n_steps):
        lag = np.dot(c_rev[len_c - n - 1 : len_c - 1], y_last[1 : n + 1])
        lag += w_zero[n + 1] * y_last[0] - w_one[n + 1] * y_last[1]

        y_p = y[n] + dt24 * (55.0 * f[n] - 59.0 * f[n - 1] + 37.0 * f[n - 2] - 9.0 * f[n - 3])
        f_p = gen @ y_p
        f_p[-1] -= w_end * y_p[-1] + lag
        y_new = y[n] + dt24 * (9.0 * f_p + 19.0 * f[n] - 5.0 * f[n - 1] + f[n - 2])
        f_new = gen @ y_new
        f_new[-1] -= w_end * y_new[-1] + lag

        y[n + 1] = y_new
        y_last[n + 1] = y_new[-1]
        f[n + 1] = f_new

    if not np.all(np.isfinite(y)):
        raise SolverError("time-domain march produced non-finite amplitudes")
    return y


def solve_volterra(
    cfg: ChainConfig, sd: SpectralDensity, settings: VolterraSettings
) -> AmplitudeTrajectory:
    """March the memory equations of motion; returns co-rotating amplitudes
    on the uniform step grid."""
    if isinstance(sd, Markovian):
        raise ScenarioError("time-domain memory march needs a structured reservoir")
    kernel = kernel_for(sd, cfg.omega_eg)
    n_steps = int(np.ceil(settings.t_end / settings.dt - 1e-12))
    dt_eff = settings.t_end / n_steps

    y = _march(cfg, kernel, dt_eff, n_steps, settings.quadrature)
    meta = {
        "solver": "volterra",
        "quadrature": settings.quadrature,
        "dt": dt_eff,
    }
    if settings.check_convergence:
        y_half = _march(cfg, kernel, dt_eff / 2.0, 2 * n_steps, settings.quadrature)
        gap = float(np.max(np.abs(np.abs(y_half[::2]) ** 2 - np.abs(y) ** 2)))
        meta["convergence_gap"] = gap
        if gap > settings.convergence_tol:
            raise ConvergenceError(
                f"halving dt moved populations by {gap:.2e} "
                f"(> {settings.convergence_tol:.1e}); decrease dt"
            )
    times = dt_eff * np.arange(n_steps + 1)
    return AmplitudeTrajectory(times, y, TILDE, meta=meta)


def solve_laplace(
    cfg: ChainConfig, sd: SpectralDensity, settings: InversionSettings
) -> AmplitudeTrajectory:
    """Evaluate the closed-form transforms and invert them numerically."""
    if isinstance(sd, Markovian):
        raise ScenarioError("transform backend needs a structured reservoir")
    kernel = kernel_for(sd, cfg.omega_eg)

    def f_multi(s: np.ndarray) -> np.ndarray:
        return laplace_amplitudes(s, cfg, kernel)

    c0 = cfg.initial_amplitudes.astype(complex)
    if settings.method == "dehoog":
        amps = _invert_dehoog(f_multi, settings, initial_values=c0)
    else:
        gen = coupling_matrix(cfg)
        slopes = gen @ c0
        amps = _invert_fft(f_multi, settings, c0, slopes)
    meta = {"solver": "laplace", "method": settings.method, "n_nodes": settings.n_nodes}
    return AmplitudeTrajectory(settings.t_grid.copy(), amps.T, TILDE, meta=meta)


def solve_nonmarkovian(
    cfg: ChainConfig,
    sd: SpectralDensity,
    backend: str = "volterra",
    settings: VolterraSettings | InversionSettings | None = None,
) -> AmplitudeTrajectory:
    """Dispatch to one of the two independent backends."""
    if backend not in BACKENDS:
        raise ScenarioError(f"unknown backend {backend!r}")
    if backend == "volterra":
        if settings is None:
            raise ScenarioError("volterra backend needs VolterraSettings")
        if not isinstance(settings, VolterraSettings):
            raise ScenarioError("backend 'volterra' takes VolterraSettings")
        return solve_volterra(cfg, sd, settings)
    if settings is None or not isinstance(settings, InversionSettings):
        raise ScenarioError("backend 'laplace' takes InversionSettings")
    return solve_laplace(cfg, sd, settings)
