"""Reservoir memory kernels and their Laplace transforms.

Each structured reservoir is described by three coupled views that the
rest of the package consumes:

* ``j_of_omega`` -- the spectral density on the positive frequency axis,
* ``r_of_t``     -- the memory kernel, i.e. the Fourier transform of the
  spectral density against the qubit transition frequency,
* ``b_of_s``     -- the Laplace transform of the kernel, which is what the
  closed-form amplitude solution needs.

The three views are tied together by quadrature identities that the test
suite checks at random points; none of them is derived numerically from
another at runtime.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gamma as _gamma_func

from .chain import Lorentzian, LorentzianSquared, Markovian, Ohmic, SpectralDensity
from .errors import BranchCutWarning, ScenarioError, SolverError

__all__ = ["KernelEval", "kernel_for", "upper_incomplete_gamma"]

_EPS = 1e-16
_CUT_WARN = 1e-6          # how close to the negative real axis triggers a warning
_NEAR_CUT = 3.0 * np.pi / 4.0
_SERIES_RADIUS = 2.0      # below this |z| the power series is always used
_ASYMPTOTIC_RADIUS = 40.0  # near the cut, beyond this the asymptotic series wins


# ---------------------------------------------------------------------------
# complex upper incomplete gamma, principal branch
# ---------------------------------------------------------------------------

def _zpow(p: float, z: np.ndarray) -> np.ndarray:
    """Principal-branch z**p via exp(p*Log z)."""
    return np.exp(p * np.log(z))


def _gamma_cf(a: float, z: np.ndarray, max_iter: int = 20000) -> np.ndarray:
    """Continued-fraction evaluation (modified Lentz), good away from the
    negative real axis for moderate-to-large |z|."""
    tiny = 1e-300
    b = z + 1.0 - a
    c = np.full(z.shape, 1.0 / tiny, dtype=complex)
    d = np.where(b == 0, tiny, b).astype(complex)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(z.shape, dtype=bool)
    for n in range(1, max_iter + 1):
        an = -n * (n - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(d == 0, tiny, d)
        d = 1.0 / d
        c = b + an / c
        c = np.where(c == 0, tiny, c)
        delta = c * d
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) >= _EPS
        if not active.any():
            break
    else:
        raise SolverError("incomplete-gamma continued fraction failed to converge")
    return np.exp(-z + a * np.log(z)) * h


def _lower_series(a: float, z: np.ndarray, max_iter: int = 2000) -> np.ndarray:
    """Power-series sum S with gamma_lower(a, z) = z**a * S."""
    term = np.full(z.shape, 1.0 / a, dtype=complex)
    total = term.copy()
    absz = np.abs(z)
    for n in range(1, max_iter + 1):
        term = term * (-z) / n * ((a + n - 1.0) / (a + n))
        total += term
        if n > np.max(absz) and np.all(np.abs(term) <= _EPS * np.abs(total)):
            break
    else:
        raise SolverError("incomplete-gamma power series failed to converge")
    return total


def _gamma_series_lifted(a: float, z: np.ndarray) -> np.ndarray:
    """Power series at a lifted order in (0, 1], then recurrence steps back
    down to ``a``.  The workhorse for small |z| at any angle; each downward
    step amplifies roundoff by about |z|, so it is kept off large arguments."""
    m = 0 if a > 0 else int(math.floor(-a)) + 1
    abar = a + m
    if abar <= 0:  # only possible through float pathologies
        raise SolverError(f"parameter lift failed for a={a}")
    result = _gamma_func(abar) - _zpow(abar, z) * _lower_series(abar, z)
    emz = np.exp(-z)
    for j in range(1, m + 1):
        b = abar - j
        if b == 0:
            raise ScenarioError(
                "upper_incomplete_gamma does not support non-positive integer order"
            )
        result = (result - _zpow(b, z) * emz) / b
    return result


def _gamma_series_direct(a: float, z: np.ndarray) -> np.ndarray:
    """Power series at the original (non-integer) order.  Near the branch
    cut the terms do not alternate and the subtraction against the complete
    gamma is benign, so this stays accurate out to moderately large |z|
    without the recurrence lift's roundoff amplification."""
    return _gamma_func(a) - _zpow(a, z) * _lower_series(a, z)


def _gamma_asymptotic(a: float, z: np.ndarray) -> np.ndarray:
    """Large-|z| expansion; only used near the cut where |z| is large enough
    that the smallest term is far below double precision."""
    total = np.ones(z.shape, dtype=complex)
    term = np.ones(z.shape, dtype=complex)
    k = 1
    while k < 2 * int(np.min(np.abs(z))):
        new = term * (a - k) / z
        if np.any(np.abs(new) >= np.abs(term)):
            break
        term = new
        total += term
        if np.all(np.abs(term) <= _EPS * np.abs(total)):
            break
        k += 1
    return np.exp((a - 1.0) * np.log(z) - z) * total


def upper_incomplete_gamma(a: float, z):
    """Upper incomplete gamma for real order ``a`` and complex ``z`` on the
    principal branch (cut along the negative real axis).

    Supports negative non-integer orders, which is what the Ohmic kernel
    transform needs.  Region switching: continued fraction away from the
    cut at moderate |z|, power series with a parameter lift otherwise, and
    the asymptotic expansion for large |z| near the cut.

    Args:
        a: real order; non-positive integers are rejected.
        z: complex argument(s), scalar or array; z = 0 is rejected for
           a <= 0 where the integral diverges.

    Warns:
        BranchCutWarning: when arg(z) is within 1e-6 of +-pi.
    """
    if float(a) == int(a) and a <= 0:
        raise ScenarioError(
            "upper_incomplete_gamma does not support non-positive integer order"
        )
    z_arr = np.asarray(z, dtype=complex)
    scalar = z_arr.ndim == 0
    zf = np.atleast_1d(z_arr).copy().reshape(-1)
    out = np.empty(zf.shape, dtype=complex)

    zero = zf == 0
    if zero.any():
        if a <= 0:
            raise ScenarioError("upper_incomplete_gamma diverges at z=0 for a <= 0")
        out[zero] = _gamma_func(a)

    argz = np.angle(zf[~zero])
    if np.any((np.pi - np.abs(argz)) < _CUT_WARN):
        warnings.warn(
            "incomplete-gamma argument within 1e-6 of the branch cut; "
            "results there depend on the side from which the cut is approached",
            BranchCutWarning,
            stacklevel=2,
        )

    absz = np.abs(zf)
    near_cut = np.abs(np.angle(zf)) > _NEAR_CUT
    use_cf = ~zero & ~near_cut & (absz >= _SERIES_RADIUS)
    use_asym = ~zero & near_cut & (absz > _ASYMPTOTIC_RADIUS)
    use_direct = ~zero & near_cut & ~use_asym & (absz >= _SERIES_RADIUS)
    use_lift = ~zero & ~use_cf & ~use_asym & ~use_direct

    if use_cf.any():
        out[use_cf] = _gamma_cf(a, zf[use_cf])
    if use_lift.any():
        out[use_lift] = _gamma_series_lifted(a, zf[use_lift])
    if use_direct.any():
        out[use_direct] = _gamma_series_direct(a, zf[use_direct])
    if use_asym.any():
        out[use_asym] = _gamma_asymptotic(a, zf[use_asym])

    if scalar:
        return complex(out[0])
    return out.reshape(z_arr.shape)


# ---------------------------------------------------------------------------
# kernel families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelEval:
    """Callable views of one reservoir's memory structure.

    All three callables accept scalars or numpy arrays.  ``r_derivs_at_zero``
    returns ``[R(0), R'(0), ..., R^(order)(0)]`` and exists so time-domain
    solvers can Taylor-start without numerical differentiation.
    """

    kind: str
    r_of_t: Callable[[np.ndarray], np.ndarray]
    b_of_s: Callable[[np.ndarray], np.ndarray]
    j_of_omega: Callable[[np.ndarray], np.ndarray]
    r_derivs_at_zero: Callable[[int], np.ndarray]


def _lorentzian_kernel(sd: Lorentzian, omega_eg: float | None) -> KernelEval:
    g2 = sd.g ** 2
    lam = 0.5 * sd.gamma + 1j * sd.delta_c

    def r_of_t(t):
        return g2 * np.exp(-lam * np.asarray(t, dtype=complex))

    def b_of_s(s):
        return g2 / (np.asarray(s, dtype=complex) + lam)

    def j_of_omega(omega):
        if omega_eg is None:
            raise ScenarioError(
                "lorentzian spectral density needs the transition frequency "
                "to place its peak on the absolute frequency axis"
            )
        omega = np.asarray(omega, dtype=float)
        omega_c = omega_eg + sd.delta_c
        half = 0.5 * sd.gamma
        return (g2 / np.pi) * half / ((omega - omega_c) ** 2 + half ** 2)

    def r_derivs(order: int) -> np.ndarray:
        return np.array([g2 * (-lam) ** q for q in range(order + 1)], dtype=complex)

    return KernelEval(sd.kind, r_of_t, b_of_s, j_of_omega, r_derivs)


def _lorentzian_squared_kernel(sd: LorentzianSquared, omega_eg: float | None) -> KernelEval:
    g2 = sd.g ** 2
    lam = 0.5 * sd.gamma + 1j * sd.delta_c
    half_gamma = 0.5 * sd.gamma

    def r_of_t(t):
        t = np.asarray(t, dtype=complex)
        return g2 * (1.0 + half_gamma * t) * np.exp(-lam * t)

    def b_of_s(s):
        s = np.asarray(s, dtype=complex)
        return g2 * (s + sd.gamma + 1j * sd.delta_c) / (s + lam) ** 2

    def j_of_omega(omega):
        if omega_eg is None:
            raise ScenarioError(
                "lorentzian_squared spectral density needs the transition "
                "frequency to place its peak on the absolute frequency axis"
            )
        omega = np.asarray(omega, dtype=float)
        omega_c = omega_eg + sd.delta_c
        half = 0.5 * sd.gamma
        return (2.0 * g2 / np.pi) * half ** 3 / ((omega - omega_c) ** 2 + half ** 2) ** 2

    def r_derivs(order: int) -> np.ndarray:
        out = []
        for q in range(order + 1):
            val = (-lam) ** q
            if q >= 1:
                val = val + q * half_gamma * (-lam) ** (q - 1)
            out.append(g2 * val)
        return np.array(out, dtype=complex)

    return KernelEval(sd.kind, r_of_t, b_of_s, j_of_omega, r_derivs)


def _ohmic_kernel(sd: Ohmic) -> KernelEval:
    g2 = sd.g ** 2
    s_exp = sd.s_param
    w_c = sd.omega_c
    w_eg = sd.omega_eg
    norm = 1.0 / (w_c ** 2 * _gamma_func(1.0 + s_exp))
    power = -1.0 - s_exp

    def r_of_t(t):
        t = np.asarray(t, dtype=complex)
        return g2 * np.exp(1j * w_eg * t) * np.exp(power * np.log1p(1j * w_c * t))

    def b_of_s(s):
        s = np.asarray(s, dtype=complex)
        k = (s - 1j * w_eg) / w_c
        z = -1j * k
        front = -g2 * np.exp(0.5j * np.pi * (1.0 - s_exp)) / w_c
        return front * np.exp(-1j * k) * _zpow(s_exp, k) * upper_incomplete_gamma(-s_exp, z)

    def j_of_omega(omega):
        omega = np.asarray(omega, dtype=float)
        with np.errstate(invalid="ignore"):
            val = norm * g2 * w_c * (omega / w_c) ** s_exp * np.exp(-omega / w_c)
        return np.where(omega > 0, val, 0.0)

    def r_derivs(order: int) -> np.ndarray:
        # derivatives of exp(i*w_eg*t) * (1 + i*w_c*t)^power at t = 0
        out = []
        for q in range(order + 1):
            total = 0.0 + 0.0j
            for j in range(q + 1):
                ff = 1.0
                for step in range(j):
                    ff *= power - step
                total += math.comb(q, j) * (1j * w_eg) ** (q - j) * ff * (1j * w_c) ** j
            out.append(g2 * total)
        return np.array(out, dtype=complex)

    return KernelEval(sd.kind, r_of_t, b_of_s, j_of_omega, r_derivs)


def kernel_for(sd: SpectralDensity, omega_eg: float | None = None) -> KernelEval:
    """Build the kernel views for a structured reservoir.

    Args:
        sd: reservoir parameters; the memoryless reservoir is rejected
            because it has no finite-width kernel.
        omega_eg: transition frequency, needed only for the spectral-density
            view of the Lorentzian families (their kernel and transform are
            functions of the detuning alone).
    """
    if isinstance(sd, Markovian):
        raise ScenarioError("memoryless reservoir has no memory kernel")
    if isinstance(sd, Lorentzian):
        return _lorentzian_kernel(sd, omega_eg)
    if isinstance(sd, LorentzianSquared):
        return _lorentzian_squared_kernel(sd, omega_eg)
    if isinstance(sd, Ohmic):
        if omega_eg is not None and abs(omega_eg - sd.omega_eg) > 1e-12:
            raise ScenarioError(
                "ohmic reservoir was built for a different transition frequency"
            )
        return _ohmic_kernel(sd)
    raise ScenarioError(f"unknown reservoir type: {sd!r}")
