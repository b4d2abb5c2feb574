"""State-distance measures that stay meaningful when trace leaks away.

For an excitation that can escape into the environment, the chain's
reduced state has Tr ρ < 1, and textbook unit-trace distance formulas
misbehave: a pair of fully decayed states would sit at "distance" √2
from each other despite being physically identical.  The variants here
carry the traces explicitly so that equal states are at distance zero
regardless of how much has leaked, and fully decayed pairs converge to
zero distance.

Everything below works on arbitrary mixed states via dense
eigendecompositions; nothing assumes the rank-1 structure the chain
solvers happen to produce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, svd

from .errors import InvalidDensityError, NumericalConsistencyError, ScenarioError

__all__ = [
    "MEASURES",
    "QsdSeries",
    "matrix_abs",
    "psd_sqrt",
    "trace_distance",
    "trace_distance_radical",
    "hellinger_distance",
    "bures_distance",
    "fidelities",
    "qsd_series",
    "qsd_many",
]

MEASURES = (
    "trace",
    "hellinger",
    "bures",
    "fidelity-f1",
    "fidelity-f2",
    "fidelity-f3",
)

# eigenvalues in [-_CLIP_FLOOR, 0) are solver roundoff and get clipped;
# anything below -_REJECT_FLOOR is a genuinely bad input
_CLIP_FLOOR = 1e-9
_REJECT_FLOOR = 1e-6
_SERIES_CLAMP = 1e-12


@dataclass(frozen=True)
class QsdSeries:
    """One distance (or fidelity) measure evaluated along a time grid."""

    times: np.ndarray
    values: np.ndarray
    measure: str

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if times.shape != values.shape or times.ndim != 1:
            raise ScenarioError("times and values must be matching 1-d arrays")
        if self.measure not in MEASURES:
            raise ScenarioError(f"unknown measure {self.measure!r}")
        if np.min(values, initial=0.0) < -_SERIES_CLAMP:
            raise ScenarioError("measure values must be non-negative")
        values = np.where(values < 0.0, 0.0, values)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)


def _as_square(mat: np.ndarray, name: str) -> np.ndarray:
    arr = np.asarray(mat, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ScenarioError(f"{name} must be a square matrix")
    return arr


def matrix_abs(mat: np.ndarray) -> np.ndarray:
    """|A| = sqrt(A†A), for arbitrary square A, via singular values."""
    arr = _as_square(mat, "matrix")
    _u, sing, vh = svd(arr)
    return vh.conj().T @ (sing[:, None] * vh)


def _psd_eigen(mat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a nominally PSD Hermitian matrix, with the
    roundoff-negative eigenvalues repaired."""
    arr = _as_square(mat, "state")
    herm = 0.5 * (arr + arr.conj().T)
    vals, vecs = eigh(herm)
    scale = max(float(np.max(np.abs(vals), initial=0.0)), 1.0)
    if float(np.min(vals, initial=0.0)) < -_REJECT_FLOOR * scale:
        raise InvalidDensityError(
            f"matrix has eigenvalue {np.min(vals):.3e}, far below zero"
        )
    vals = np.clip(vals, 0.0, None)
    # null-space noise sits at eps * lambda_max and the square roots
    # taken downstream would amplify it to sqrt(eps); eigenvalues this
    # small are indistinguishable from zero anyway
    vals[vals < 1e-13 * np.max(vals, initial=0.0)] = 0.0
    return vals, vecs


def psd_sqrt(mat: np.ndarray) -> np.ndarray:
    """Hermitian square root of a PSD matrix.

    Eigenvalues in [-1e-9, 0) are treated as roundoff and clipped; a
    clearly negative spectrum raises InvalidDensityError.
    """
    vals, vecs = _psd_eigen(mat)
    return vecs @ (np.sqrt(vals)[:, None] * vecs.conj().T)


def _check_pair(rho: np.ndarray, sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    r = _as_square(rho, "rho")
    s = _as_square(sigma, "sigma")
    if r.shape != s.shape:
        raise ScenarioError(f"dimension mismatch: {r.shape} vs {s.shape}")
    return r, s


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Half the trace norm of the difference, valid for any pair of
    Hermitian matrices whatever their traces."""
    r, s = _check_pair(rho, sigma)
    diff = r - s
    diff = 0.5 * (diff + diff.conj().T)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(diff))))


def trace_distance_radical(rho: np.ndarray, sigma: np.ndarray) -> float:
    """The same distance through the expanded four-term radical
    ½ Tr √(ρ†ρ + σ†σ − ρ†σ − σ†ρ).

    Algebraically the radicand is (ρ−σ)†(ρ−σ), so this must agree with
    trace_distance; it is kept as an independent route for validation.
    """
    r, s = _check_pair(rho, sigma)
    radicand = (
        r.conj().T @ r + s.conj().T @ s - r.conj().T @ s - s.conj().T @ r
    )
    vals, _ = _psd_eigen(radicand)
    return 0.5 * float(np.sum(np.sqrt(vals)))


def hellinger_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """√(Tr ρ + Tr σ − 2 Tr(√ρ √σ)).

    At unit traces this is the usual Hellinger distance; for decaying
    states the explicit trace terms make equal states distance zero and
    send the distance to zero as both states empty out.

    Evaluated as the Frobenius norm of √ρ − √σ, which expands to exactly
    the expression above but cannot lose the cancellation when the
    states are close (equal inputs give exactly zero).
    """
    r, s = _check_pair(rho, sigma)
    return float(np.linalg.norm(psd_sqrt(r) - psd_sqrt(s)))


def _bures_cross(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Tr √(√ρ σ √ρ), the trace fidelity radical."""
    root = psd_sqrt(rho)
    inner = root @ sigma @ root
    vals, _ = _psd_eigen(inner)
    return float(np.sum(np.sqrt(vals)))


def bures_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """√2 · [½(Tr ρ + Tr σ) − Tr √(√ρ σ √ρ)]^{1/2}, the Bures form with
    the mean trace in place of 1 so it closes at non-unit traces.

    Identical inputs return exactly zero; the bracket cancels only to
    roundoff, and the outer square root would otherwise inflate that
    residual to ~1e-8.
    """
    r, s = _check_pair(rho, sigma)
    if np.array_equal(r, s):
        return 0.0
    bracket = 0.5 * float(np.real(np.trace(r) + np.trace(s))) - _bures_cross(r, s)
    if bracket < -_CLIP_FLOOR:
        raise NumericalConsistencyError(
            f"mean trace minus fidelity radical is {bracket:.3e}; "
            "inputs are inconsistent with PSD states"
        )
    return float(np.sqrt(2.0 * max(bracket, 0.0)))


def fidelities(rho: np.ndarray, sigma: np.ndarray) -> tuple[float, float, float]:
    """The three common fidelity variants: the squared radical, the
    radical itself, and the bare trace product."""
    r, s = _check_pair(rho, sigma)
    cross = _bures_cross(r, s)
    f1 = cross ** 2
    f2 = cross
    f3 = float(np.real(np.trace(r @ s)))
    return f1, f2, f3


_MEASURE_INDEX = {m: i for i, m in enumerate(MEASURES)}


def qsd_many(
    times: np.ndarray,
    rhos: np.ndarray,
    sigmas: np.ndarray,
    measures: tuple[str, ...] | list[str],
) -> dict[str, QsdSeries]:
    """Evaluate several measures along paired state trajectories in one
    pass (the square roots are shared between measures)."""
    for m in measures:
        if m not in _MEASURE_INDEX:
            raise ScenarioError(f"unknown measure {m!r}")
    times = np.asarray(times, dtype=float)
    rhos = np.asarray(rhos, dtype=complex)
    sigmas = np.asarray(sigmas, dtype=complex)
    if rhos.shape != sigmas.shape or rhos.ndim != 3 or len(times) != rhos.shape[0]:
        raise ScenarioError("state series must have matching (n_times, d, d) shapes")

    want = set(measures)
    need_cross_b = want & {"bures", "fidelity-f1", "fidelity-f2"}
    need_hell = "hellinger" in want
    out = {m: np.zeros(len(times)) for m in want}
    for j in range(len(times)):
        r = rhos[j]
        s = sigmas[j]
        if "trace" in want:
            out["trace"][j] = trace_distance(r, s)
        if need_hell or need_cross_b:
            tr_r = float(np.real(np.trace(r)))
            tr_s = float(np.real(np.trace(s)))
            root_r = psd_sqrt(r)
        if need_hell:
            out["hellinger"][j] = np.linalg.norm(root_r - psd_sqrt(s))
        if need_cross_b:
            vals, _ = _psd_eigen(root_r @ s @ root_r)
            cross_b = float(np.sum(np.sqrt(vals)))
            if "bures" in want:
                if np.array_equal(r, s):
                    out["bures"][j] = 0.0
                else:
                    bracket = 0.5 * (tr_r + tr_s) - cross_b
                    if bracket < -_CLIP_FLOOR:
                        raise NumericalConsistencyError(
                            f"fidelity radical exceeds mean trace by {-bracket:.3e} "
                            f"at t={times[j]:.6g}"
                        )
                    out["bures"][j] = np.sqrt(2.0 * max(bracket, 0.0))
            if "fidelity-f1" in want:
                out["fidelity-f1"][j] = cross_b ** 2
            if "fidelity-f2" in want:
                out["fidelity-f2"][j] = cross_b
        if "fidelity-f3" in want:
            out["fidelity-f3"][j] = float(np.real(np.trace(rhos[j] @ sigmas[j])))
    return {m: QsdSeries(times, out[m], m) for m in measures}


def qsd_series(
    times: np.ndarray, rhos: np.ndarray, sigmas: np.ndarray, measure: str
) -> QsdSeries:
    """Single-measure convenience wrapper around qsd_many."""
    return qsd_many(times, rhos, sigmas, (measure,))[measure]
