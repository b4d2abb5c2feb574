"""Batch orchestration: scenario documents, pipeline runs, half-life
calibration, and on-disk run records.

A scenario bundles one chain, one memoryless reference rate, and any
number of tagged structured reservoirs.  Running it produces the
reference trajectory, one trajectory per reservoir, and the requested
state-distance series between each reservoir's state and the reference
state on a shared time grid.  Records are written as a human-editable
``meta`` document plus one delimited table per series, in full
round-trip precision, so that rerunning a scenario reproduces the file
set byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from .chain import (
    LAB,
    AmplitudeTrajectory,
    ChainConfig,
    Lorentzian,
    LorentzianSquared,
    Markovian,
    Ohmic,
    SpectralDensity,
    density_matrix,
    environment_population,
    site_populations,
    subsample,
    to_lab_frame,
    total_population,
    validate_spectral_density,
)
from .errors import CalibrationError, HalfLifeNotFoundError, ScenarioError, SolverError
from .markovian import OdeSettings, half_life, solve_markovian
from .nonmarkovian import (
    BACKENDS,
    INVERSION_METHODS,
    QUADRATURES,
    InversionSettings,
    VolterraSettings,
    solve_laplace,
    solve_volterra,
)
from .qsd import MEASURES, QsdSeries, qsd_many

_TAG_PATTERN = re.compile(r"[a-z0-9][a-z0-9_-]*")
_REFERENCE_TAG = "markovian"

# Default marching steps per reservoir family.  The early-time kernel of
# the ohmic family is sharply peaked, which roughly doubles the local
# error constant; it gets half the step.
_DEFAULT_DT = {"ohmic": 0.002}
_FALLBACK_DT = 0.004

_SOLVER_KEYS = {
    "dt": float,
    "quadrature": str,
    "check_convergence": bool,
    "convergence_tol": float,
    "method": str,
    "n_nodes": int,
    "contour_shift": float,
    "oversample": int,
    "tol": float,
}

_CALIBRATION_TARGETS = ("markovian-half-life",)


@dataclass(frozen=True)
class CalibrationSpec:
    """How to tune one reservoir parameter to match the reference decay."""

    free_parameter: str
    bracket: tuple[float, float]
    rel_tol: float = 0.05
    target: str = "markovian-half-life"

    def __post_init__(self) -> None:
        if self.target not in _CALIBRATION_TARGETS:
            raise ScenarioError(f"unknown calibration target {self.target!r}")
        lo, hi = self.bracket
        if not (0.0 < lo < hi):
            raise ScenarioError(f"calibration bracket must satisfy 0 < lo < hi, got {self.bracket}")
        if not (0.0 < self.rel_tol < 1.0):
            raise ScenarioError("calibration rel_tol must lie in (0, 1)")


@dataclass
class Scenario:
    """One batch job: chain + reference rate + tagged reservoirs."""

    chain: ChainConfig
    markovian_gamma: float
    reservoirs: tuple[tuple[str, SpectralDensity], ...]
    measures: tuple[str, ...]
    t_end: float
    n_samples: int = 4096
    backend: str = "volterra"
    solver: dict = field(default_factory=dict)
    calibration: CalibrationSpec | None = None

    def __post_init__(self) -> None:
        if self.markovian_gamma <= 0:
            raise ScenarioError("markovian_gamma must be positive")
        if not self.reservoirs:
            raise ScenarioError("a scenario needs at least one reservoir")
        tags = [tag for tag, _ in self.reservoirs]
        for tag in tags:
            if not _TAG_PATTERN.fullmatch(tag):
                raise ScenarioError(
                    f"reservoir tag {tag!r} must match {_TAG_PATTERN.pattern}"
                )
            if tag == _REFERENCE_TAG:
                raise ScenarioError(
                    f"tag {_REFERENCE_TAG!r} is reserved for the reference trajectory"
                )
        if len(set(tags)) != len(tags):
            raise ScenarioError("reservoir tags must be unique")
        for tag, sd in self.reservoirs:
            validate_spectral_density(sd, self.chain.omega_eg)
        for m in self.measures:
            if m not in MEASURES:
                raise ScenarioError(f"unknown measure {m!r}; known: {', '.join(MEASURES)}")
        if len(set(self.measures)) != len(self.measures):
            raise ScenarioError("measures must be unique")
        if self.t_end <= 0:
            raise ScenarioError("t_end must be positive")
        if self.n_samples < 2:
            raise ScenarioError("n_samples must be at least 2")
        if self.backend not in BACKENDS:
            raise ScenarioError(f"unknown backend {self.backend!r}; known: {', '.join(BACKENDS)}")
        for key, value in self.solver.items():
            if key not in _SOLVER_KEYS:
                raise ScenarioError(
                    f"unknown solver option {key!r}; known: {', '.join(sorted(_SOLVER_KEYS))}"
                )
            want = _SOLVER_KEYS[key]
            bad = isinstance(value, bool) is not (want is bool)
            if want is float and not bad and isinstance(value, (int, float)):
                self.solver[key] = float(value)
                continue
            if bad or not isinstance(value, want):
                raise ScenarioError(f"solver option {key!r} must be of type {want.__name__}")
        if "quadrature" in self.solver and self.solver["quadrature"] not in QUADRATURES:
            raise ScenarioError(f"unknown quadrature {self.solver['quadrature']!r}")
        if "method" in self.solver and self.solver["method"] not in INVERSION_METHODS:
            raise ScenarioError(f"unknown inversion method {self.solver['method']!r}")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_samples)

    def reservoir(self, tag: str) -> SpectralDensity:
        for t, sd in self.reservoirs:
            if t == tag:
                return sd
        raise ScenarioError(f"no reservoir tagged {tag!r}")


def _sd_to_dict(sd: SpectralDensity) -> dict:
    if isinstance(sd, Markovian):
        return {"kind": sd.kind, "gamma_m": float(sd.gamma_m)}
    if isinstance(sd, (Lorentzian, LorentzianSquared)):
        return {
            "kind": sd.kind,
            "g": float(sd.g),
            "gamma": float(sd.gamma),
            "delta_c": float(sd.delta_c),
        }
    if isinstance(sd, Ohmic):
        return {
            "kind": sd.kind,
            "g": float(sd.g),
            "s_param": float(sd.s_param),
            "omega_c": float(sd.omega_c),
            "omega_eg": float(sd.omega_eg),
        }
    raise ScenarioError(f"unknown reservoir type: {sd!r}")


def _sd_from_dict(d: dict, default_omega_eg: float) -> SpectralDensity:
    d = dict(d)
    kind = d.pop("kind", None)
    try:
        if kind == "markovian":
            return Markovian(gamma_m=float(d.pop("gamma_m")), **_none_left(d, kind))
        if kind == "lorentzian":
            return Lorentzian(
                g=float(d.pop("g")),
                gamma=float(d.pop("gamma")),
                delta_c=float(d.pop("delta_c", 0.0)),
                **_none_left(d, kind),
            )
        if kind == "lorentzian_squared":
            return LorentzianSquared(
                g=float(d.pop("g")),
                gamma=float(d.pop("gamma")),
                delta_c=float(d.pop("delta_c", 0.0)),
                **_none_left(d, kind),
            )
        if kind == "ohmic":
            return Ohmic(
                g=float(d.pop("g")),
                s_param=float(d.pop("s_param")),
                omega_c=float(d.pop("omega_c")),
                omega_eg=float(d.pop("omega_eg", default_omega_eg)),
                **_none_left(d, kind),
            )
    except KeyError as exc:
        raise ScenarioError(f"reservoir kind {kind!r} is missing field {exc.args[0]!r}") from exc
    raise ScenarioError(f"unknown reservoir kind {kind!r}")


def _none_left(d: dict, kind: str) -> dict:
    if d:
        raise ScenarioError(f"unknown fields for reservoir kind {kind!r}: {sorted(d)}")
    return {}


def scenario_to_dict(sc: Scenario) -> dict:
    """Canonical plain-data form: defaults filled in, floats everywhere.
    Two scenarios that behave identically serialize identically."""
    cfg = sc.chain
    out = {
        "chain": {
            "n_qubits": int(cfg.n_qubits),
            "coupling": float(cfg.coupling),
            "omega_e": float(cfg.omega_e),
            "omega_g": float(cfg.omega_g),
            "initial_amplitudes": [
                [float(a.real), float(a.imag)] for a in cfg.initial_amplitudes
            ],
        },
        "markovian_gamma": float(sc.markovian_gamma),
        "reservoirs": [dict(_sd_to_dict(sd), tag=tag) for tag, sd in sc.reservoirs],
        "measures": list(sc.measures),
        "time": {"t_end": float(sc.t_end), "n_samples": int(sc.n_samples)},
        "backend": sc.backend,
        "solver": {k: sc.solver[k] for k in sorted(sc.solver)},
    }
    if sc.calibration is not None:
        cal = sc.calibration
        out["calibration"] = {
            "target": cal.target,
            "free_parameter": cal.free_parameter,
            "bracket": [float(cal.bracket[0]), float(cal.bracket[1])],
            "rel_tol": float(cal.rel_tol),
        }
    return out


def _require_keys(d: dict, allowed: set[str], where: str) -> None:
    extra = set(d) - allowed
    if extra:
        raise ScenarioError(f"unknown keys in {where}: {sorted(extra)}")


def scenario_from_dict(doc: dict) -> Scenario:
    """Build a scenario from plain data (parsed configuration document)."""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a mapping")
    _require_keys(
        doc,
        {"chain", "markovian_gamma", "reservoirs", "measures", "time", "backend",
         "solver", "calibration"},
        "scenario",
    )
    for key in ("chain", "markovian_gamma", "reservoirs", "time"):
        if key not in doc:
            raise ScenarioError(f"scenario is missing required key {key!r}")

    ch = doc["chain"]
    if not isinstance(ch, dict):
        raise ScenarioError("chain must be a mapping")
    _require_keys(
        ch, {"n_qubits", "coupling", "omega_e", "omega_g", "initial_amplitudes"}, "chain"
    )
    init = ch.get("initial_amplitudes")
    if init is not None:
        parsed = []
        for entry in init:
            if isinstance(entry, (list, tuple)):
                if len(entry) != 2:
                    raise ScenarioError("initial amplitude entries are numbers or [re, im] pairs")
                parsed.append(complex(float(entry[0]), float(entry[1])))
            else:
                parsed.append(complex(float(entry), 0.0))
        init = np.asarray(parsed, dtype=complex)
    try:
        cfg = ChainConfig(
            n_qubits=int(ch["n_qubits"]),
            coupling=float(ch["coupling"]),
            omega_e=float(ch["omega_e"]),
            omega_g=float(ch.get("omega_g", 0.0)),
            initial_amplitudes=init,
        )
    except KeyError as exc:
        raise ScenarioError(f"chain is missing field {exc.args[0]!r}") from exc

    res_docs = doc["reservoirs"]
    if not isinstance(res_docs, list):
        raise ScenarioError("reservoirs must be a list")
    reservoirs = []
    for rd in res_docs:
        if not isinstance(rd, dict) or "tag" not in rd:
            raise ScenarioError("every reservoir needs a 'tag' field")
        rd = dict(rd)
        tag = rd.pop("tag")
        reservoirs.append((str(tag), _sd_from_dict(rd, cfg.omega_eg)))

    tdoc = doc["time"]
    if not isinstance(tdoc, dict):
        raise ScenarioError("time must be a mapping with t_end and n_samples")
    _require_keys(tdoc, {"t_end", "n_samples"}, "time")

    measures = doc.get("measures", list(MEASURES))
    if not isinstance(measures, list):
        raise ScenarioError("measures must be a list")

    cal = None
    if doc.get("calibration") is not None:
        cd = doc["calibration"]
        if not isinstance(cd, dict):
            raise ScenarioError("calibration must be a mapping")
        _require_keys(cd, {"target", "free_parameter", "bracket", "rel_tol"}, "calibration")
        try:
            bracket = cd["bracket"]
            if not (isinstance(bracket, list) and len(bracket) == 2):
                raise ScenarioError("calibration bracket must be a [lo, hi] pair")
            cal = CalibrationSpec(
                free_parameter=str(cd["free_parameter"]),
                bracket=(float(bracket[0]), float(bracket[1])),
                rel_tol=float(cd.get("rel_tol", 0.05)),
                target=str(cd.get("target", "markovian-half-life")),
            )
        except KeyError as exc:
            raise ScenarioError(f"calibration is missing field {exc.args[0]!r}") from exc

    solver = doc.get("solver") or {}
    if not isinstance(solver, dict):
        raise ScenarioError("solver must be a mapping")

    return Scenario(
        chain=cfg,
        markovian_gamma=float(doc["markovian_gamma"]),
        reservoirs=tuple(reservoirs),
        measures=tuple(str(m) for m in measures),
        t_end=float(tdoc["t_end"]),
        n_samples=int(tdoc.get("n_samples", 4096)),
        backend=str(doc.get("backend", "volterra")),
        solver=dict(solver),
        calibration=cal,
    )


def load_scenario(path: str | Path) -> Scenario:
    """Parse a scenario document from disk (YAML syntax)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"cannot parse scenario file {path}: {exc}") from exc
    return scenario_from_dict(doc)


def scenario_hash(sc: Scenario) -> str:
    """Content hash of the canonical scenario form (stable across runs,
    processes, and cosmetic reformatting of the input document)."""
    blob = json.dumps(scenario_to_dict(sc), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# running


@dataclass
class ReservoirResult:
    """Outcome for a single tagged reservoir; either a trajectory plus
    distance series, or an error message (other reservoirs unaffected)."""

    tag: str
    trajectory: AmplitudeTrajectory | None
    qsd: dict[str, QsdSeries]
    diagnostics: dict
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class RunRecord:
    """Everything a finished scenario run produced, on one time grid."""

    scenario: Scenario
    scenario_hash: str
    times: np.ndarray
    reference: AmplitudeTrajectory
    results: tuple[ReservoirResult, ...]
    diagnostics: dict

    def result(self, tag: str) -> ReservoirResult:
        for r in self.results:
            if r.tag == tag:
                return r
        raise ScenarioError(f"no result tagged {tag!r}")

    @property
    def failed_tags(self) -> tuple[str, ...]:
        return tuple(r.tag for r in self.results if not r.ok)


def _with_times(traj: AmplitudeTrajectory, times: np.ndarray) -> AmplitudeTrajectory:
    return AmplitudeTrajectory(times.copy(), traj.amplitudes, traj.frame, dict(traj.meta))


def _population_diagnostics(traj: AmplitudeTrajectory) -> dict:
    total = total_population(traj)
    env_raw = 1.0 - total
    overshoot = max(
        float(np.max(-env_raw, initial=0.0)), float(np.max(env_raw - 1.0, initial=0.0))
    )
    return {
        "population_min": float(np.min(total)),
        "population_max": float(np.max(total)),
        "env_overshoot": max(overshoot, 0.0),
    }


def _solve_reference(sc: Scenario, backend_unused: str) -> AmplitudeTrajectory:
    sd = Markovian(sc.markovian_gamma)
    settings = OdeSettings(t_end=sc.t_end, n_samples=sc.n_samples)
    traj = solve_markovian(sc.chain, sd, settings)
    return _with_times(to_lab_frame(traj, sc.chain, sd), sc.times)


def _solve_lab(
    cfg: ChainConfig,
    sd: SpectralDensity,
    t_end: float,
    n_samples: int,
    backend: str,
    solver: dict,
) -> AmplitudeTrajectory:
    """One reservoir's lab-frame trajectory on linspace(0, t_end, n_samples)."""
    times = np.linspace(0.0, t_end, n_samples)
    if isinstance(sd, Markovian):
        # memoryless entries bypass the structured-reservoir backends
        traj = solve_markovian(cfg, sd, OdeSettings(t_end=t_end, n_samples=n_samples))
        return _with_times(to_lab_frame(traj, cfg, sd), times)
    if backend == "volterra":
        spacing = t_end / (n_samples - 1)
        dt_target = solver.get("dt", _DEFAULT_DT.get(sd.kind, _FALLBACK_DT))
        refine = max(1, int(math.ceil(spacing / dt_target - 1e-12)))
        settings = VolterraSettings(
            dt=spacing / refine,
            t_end=t_end,
            quadrature=solver.get("quadrature", "product-integration"),
            check_convergence=solver.get("check_convergence", False),
            convergence_tol=solver.get("convergence_tol", 1e-6),
        )
        traj = subsample(solve_volterra(cfg, sd, settings), times)
    else:
        settings = InversionSettings(
            t_grid=times,
            method=solver.get("method", "bromwich-fft"),
            contour_shift=solver.get("contour_shift", 0.0),
            n_nodes=solver.get("n_nodes", 129),
            tol=solver.get("tol", 1e-10),
            oversample=solver.get("oversample", 8),
        )
        traj = solve_laplace(cfg, sd, settings)
    return _with_times(to_lab_frame(traj, cfg, sd), times)


def _solve_tagged(sc: Scenario, sd: SpectralDensity, backend: str) -> AmplitudeTrajectory:
    return _solve_lab(sc.chain, sd, sc.t_end, sc.n_samples, backend, sc.solver)


def _run_one(
    sc: Scenario, tag: str, sd: SpectralDensity, backend: str, sigma: np.ndarray
) -> ReservoirResult:
    try:
        traj = _solve_tagged(sc, sd, backend)
        diag = {"status": "ok", "solver_meta": dict(traj.meta)}
        diag.update(_population_diagnostics(traj))
        qsd: dict[str, QsdSeries] = {}
        if sc.measures:
            rho = density_matrix(traj).matrices
            qsd = qsd_many(traj.times, rho, sigma, sc.measures)
        return ReservoirResult(tag, traj, qsd, diag)
    except Exception as exc:  # crash isolation: record, don't propagate
        diag = {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}
        return ReservoirResult(tag, None, {}, diag, error=diag["error"])


def run_scenario(sc: Scenario, backend: str | None = None) -> RunRecord:
    """Execute every pipeline of a scenario.

    The reference trajectory is always computed; each reservoir then runs
    independently (concurrently, failures isolated per tag).  ``backend``
    overrides the scenario's own solver choice.

    Raises:
        SolverError: only if the reference itself cannot be computed.
    """
    eff_backend = backend or sc.backend
    if eff_backend not in BACKENDS:
        raise ScenarioError(f"unknown backend {eff_backend!r}")
    reference = _solve_reference(sc, eff_backend)
    ref_diag = {"solver_meta": dict(reference.meta)}
    ref_diag.update(_population_diagnostics(reference))
    sigma = density_matrix(reference).matrices

    with ThreadPoolExecutor(max_workers=min(len(sc.reservoirs), 8)) as pool:
        futures = [
            pool.submit(_run_one, sc, tag, sd, eff_backend, sigma)
            for tag, sd in sc.reservoirs
        ]
        results = tuple(f.result() for f in futures)

    diagnostics = {
        "backend": eff_backend,
        "reference": ref_diag,
        "reservoirs": {r.tag: r.diagnostics for r in results},
    }
    return RunRecord(
        scenario=sc,
        scenario_hash=scenario_hash(sc),
        times=sc.times,
        reference=reference,
        results=results,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# calibration


def envelope_half_life(
    cfg: ChainConfig,
    sd: SpectralDensity,
    t_end: float,
    n_samples: int = 4097,
    backend: str = "laplace",
    solver: dict | None = None,
) -> float:
    """First-site excitation half-life for one chain/reservoir pairing.

    Raises:
        HalfLifeNotFoundError: decay does not reach half within t_end.
    """
    traj = _solve_lab(cfg, sd, t_end, n_samples, backend, solver or {})
    return half_life(traj, site=1)


def calibrate(
    sd: SpectralDensity,
    reference_half_life: float,
    free_parameter: str,
    bracket: tuple[float, float],
    rel_tol: float = 0.05,
    *,
    cfg: ChainConfig,
    t_end: float,
    n_samples: int = 4097,
    backend: str = "laplace",
    solver: dict | None = None,
    max_iter: int = 60,
) -> SpectralDensity:
    """Tune one reservoir parameter until the first-site half-life matches
    the reference within ``rel_tol``, by bisection over ``bracket``.

    The half-life is assumed monotone in the parameter across the bracket;
    the endpoints are evaluated up front and must straddle the target.  A
    decay that never reaches half within the window counts as an infinite
    half-life, which keeps under-damped endpoints on the correct side.

    Raises:
        CalibrationError: endpoints do not straddle the target, or the
            bracket collapses before reaching the tolerance.
    """
    if reference_half_life <= 0 or not math.isfinite(reference_half_life):
        raise CalibrationError("reference half-life must be finite and positive")
    if not hasattr(sd, free_parameter):
        raise CalibrationError(
            f"reservoir kind {sd.kind!r} has no parameter {free_parameter!r}"
        )
    lo, hi = float(bracket[0]), float(bracket[1])
    if not (0.0 < lo < hi):
        raise CalibrationError(f"bracket must satisfy 0 < lo < hi, got {bracket}")

    def measure(value: float) -> float:
        trial = replace(sd, **{free_parameter: value})
        try:
            return envelope_half_life(
                cfg, trial, t_end=t_end, n_samples=n_samples, backend=backend, solver=solver
            )
        except HalfLifeNotFoundError:
            return math.inf

    def within(hl: float) -> bool:
        return abs(hl - reference_half_life) <= rel_tol * reference_half_life

    current = float(getattr(sd, free_parameter))
    if lo <= current <= hi and within(measure(current)):
        return sd

    hl_lo = measure(lo)
    hl_hi = measure(hi)
    f_lo = hl_lo - reference_half_life
    f_hi = hl_hi - reference_half_life
    if within(hl_lo):
        return replace(sd, **{free_parameter: lo})
    if within(hl_hi):
        return replace(sd, **{free_parameter: hi})
    if (f_lo > 0) == (f_hi > 0):
        raise CalibrationError(
            f"bracket does not straddle the target half-life {reference_half_life:.6g}: "
            f"{free_parameter}={lo:.6g} gives {hl_lo:.6g}, "
            f"{free_parameter}={hi:.6g} gives {hl_hi:.6g}"
        )

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        hl_mid = measure(mid)
        if within(hl_mid):
            return replace(sd, **{free_parameter: mid})
        if ((hl_mid - reference_half_life) > 0) == (f_lo > 0):
            lo, f_lo = mid, hl_mid - reference_half_life
        else:
            hi = mid
        if (hi - lo) < 1e-12 * max(hi, 1.0):
            break
    raise CalibrationError(
        f"bisection on {free_parameter!r} collapsed to [{lo:.9g}, {hi:.9g}] without "
        f"matching the target half-life {reference_half_life:.6g} to {rel_tol:.0%}; "
        "the half-life may not be monotone here, or the time grid is too coarse"
    )


def reference_half_life_for(sc: Scenario) -> float:
    """Half-life of the scenario's own memoryless reference."""
    traj = _solve_reference(sc, sc.backend)
    return half_life(traj, site=1)


# ---------------------------------------------------------------------------
# analysis helpers


def windowed_variance(times: np.ndarray, values: np.ndarray, window: float) -> np.ndarray:
    """Rolling variance over a centred window (truncated at the edges).

    The grid must be uniform; the window is given in time units.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.ndim != 1 or times.size != values.size or times.size < 2:
        raise ScenarioError("windowed_variance needs matching 1-D series")
    dt = times[1] - times[0]
    if not np.allclose(np.diff(times), dt, rtol=1e-6, atol=1e-12 * max(times[-1], 1.0)):
        raise ScenarioError("windowed_variance needs a uniform time grid")
    if window <= 0:
        raise ScenarioError("window must be positive")
    half = max(1, int(round(window / (2.0 * dt))))
    n = values.size
    c1 = np.concatenate([[0.0], np.cumsum(values)])
    c2 = np.concatenate([[0.0], np.cumsum(values**2)])
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half, n - 1)
    cnt = (hi - lo + 1).astype(float)
    mean = (c1[hi + 1] - c1[lo]) / cnt
    second = (c2[hi + 1] - c2[lo]) / cnt
    return np.maximum(second - mean**2, 0.0)


def variance_spike_window(
    times: np.ndarray,
    values: np.ndarray,
    window: float,
    rel_threshold: float = 0.25,
) -> tuple[float, float]:
    """Contiguous interval around the strongest rolling-variance peak where
    the rolling variance stays above ``rel_threshold`` times its maximum."""
    wv = windowed_variance(times, values, window)
    peak = int(np.argmax(wv))
    if wv[peak] <= 0.0:
        raise ScenarioError("series is constant; no variance spike exists")
    thr = rel_threshold * wv[peak]
    i0 = peak
    while i0 > 0 and wv[i0 - 1] >= thr:
        i0 -= 1
    i1 = peak
    while i1 < wv.size - 1 and wv[i1 + 1] >= thr:
        i1 += 1
    return float(times[i0]), float(times[i1])


def intervals_overlap(a: tuple[float, float], b: tuple[float, float]) -> bool:
    """Closed-interval overlap test."""
    return a[0] <= b[1] and b[0] <= a[1]


def decay_time(times: np.ndarray, values: np.ndarray) -> float:
    """Last time at which a series still exceeds half its maximum."""
    values = np.asarray(values, dtype=float)
    m = float(np.max(values))
    if m <= 0.0:
        raise ScenarioError("series never rises above zero; no decay time")
    above = np.nonzero(values > 0.5 * m)[0]
    return float(np.asarray(times, dtype=float)[above[-1]])


def derivative_sign_changes(times: np.ndarray, values: np.ndarray, atol: float = 0.0) -> int:
    """Number of sign flips of the finite-difference slope, ignoring
    differences at or below ``atol`` (plateau noise)."""
    values = np.asarray(values, dtype=float)
    d = np.diff(values)
    signs = np.sign(d)
    signs[np.abs(d) <= atol] = 0.0
    signs = signs[signs != 0.0]
    if signs.size < 2:
        return 0
    return int(np.sum(signs[1:] != signs[:-1]))


# ---------------------------------------------------------------------------
# records on disk


_META_NAME = "meta"
_FORMAT = "chainqsd-run/1"


def _fmt(x: float) -> str:
    return repr(float(x))


def _plain(obj):
    """Recursively strip numpy types so the meta document stays plain YAML."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    return obj


def _write_table(path: Path, header: list[str], columns: list[np.ndarray]) -> None:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def _read_table(path: Path) -> tuple[list[str], np.ndarray]:
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != len(header):
        raise ScenarioError(f"{path.name}: column count does not match header")
    return header, data


def _amplitude_columns(traj: AmplitudeTrajectory) -> tuple[list[str], list[np.ndarray]]:
    header = ["t"]
    cols: list[np.ndarray] = [traj.times]
    for i in range(traj.n_sites):
        header += [f"re_c{i + 1}", f"im_c{i + 1}"]
        cols += [traj.amplitudes[:, i].real, traj.amplitudes[:, i].imag]
    return header, cols


def _emit_trajectory(out: Path, tag: str, traj: AmplitudeTrajectory) -> list[Path]:
    paths = []
    header, cols = _amplitude_columns(traj)
    p = out / f"amplitudes_{tag}.csv"
    _write_table(p, header, cols)
    paths.append(p)

    pops = site_populations(traj)
    p = out / f"population_{tag}.csv"
    _write_table(p, ["t", "value"], [traj.times, pops[:, 0]])
    paths.append(p)

    env = environment_population(traj)
    p = out / f"env_population_{tag}.csv"
    _write_table(p, ["t", "value"], [traj.times, env])
    paths.append(p)
    return paths


def emit(record: RunRecord, out_dir: str | Path) -> list[Path]:
    """Write a run record as a `meta` document plus one table per series.

    Rerunning the same scenario and emitting again produces byte-identical
    files; reading the directory back reconstructs the record.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    meta = _plain({
        "format": _FORMAT,
        "scenario": scenario_to_dict(record.scenario),
        "scenario_hash": record.scenario_hash,
        "diagnostics": record.diagnostics,
    })
    meta_path = out / _META_NAME
    meta_path.write_text(
        yaml.safe_dump(meta, sort_keys=True, default_flow_style=False),
        encoding="utf-8",
        newline="\n",
    )
    written.append(meta_path)

    written += _emit_trajectory(out, _REFERENCE_TAG, record.reference)
    for res in record.results:
        if not res.ok:
            continue  # flagged in meta; other tags keep their files
        written += _emit_trajectory(out, res.tag, res.trajectory)
        for measure in record.scenario.measures:
            series = res.qsd[measure]
            p = out / f"qsd_{measure}_{res.tag}.csv"
            _write_table(p, ["t", "value"], [series.times, series.values])
            written.append(p)
    return written


def _read_trajectory(out: Path, tag: str, meta_entry: dict) -> AmplitudeTrajectory:
    header, data = _read_table(out / f"amplitudes_{tag}.csv")
    n_sites = (len(header) - 1) // 2
    if header != ["t"] + [f"{p}_c{i + 1}" for i in range(n_sites) for p in ("re", "im")]:
        raise ScenarioError(f"amplitudes_{tag}.csv has an unexpected header")
    amps = data[:, 1::2] + 1j * data[:, 2::2]
    return AmplitudeTrajectory(
        data[:, 0], amps, LAB, dict(meta_entry.get("solver_meta", {}))
    )


def read_record(run_dir: str | Path) -> RunRecord:
    """Reconstruct a run record from an emitted directory.

    Raises:
        ScenarioError: missing/garbled files, or a meta document whose
            scenario no longer matches its recorded hash.
    """
    out = Path(run_dir)
    meta_path = out / _META_NAME
    if not meta_path.is_file():
        raise ScenarioError(f"{run_dir} has no {_META_NAME} document")
    meta = yaml.safe_load(meta_path.read_text(encoding="utf-8"))
    if not isinstance(meta, dict) or meta.get("format") != _FORMAT:
        raise ScenarioError(f"{meta_path} is not a {_FORMAT} document")
    sc = scenario_from_dict(meta["scenario"])
    stored = meta.get("scenario_hash", "")
    if scenario_hash(sc) != stored:
        raise ScenarioError(
            "scenario echo does not match its recorded hash; the meta document "
            "was edited after the run"
        )
    diagnostics = meta.get("diagnostics", {})

    reference = _read_trajectory(out, _REFERENCE_TAG, diagnostics.get("reference", {}))
    results = []
    for tag, _ in sc.reservoirs:
        entry = diagnostics.get("reservoirs", {}).get(tag, {})
        if entry.get("status") == "failed":
            results.append(ReservoirResult(tag, None, {}, entry, error=entry.get("error")))
            continue
        traj = _read_trajectory(out, tag, entry)
        qsd = {}
        for measure in sc.measures:
            header, data = _read_table(out / f"qsd_{measure}_{tag}.csv")
            if header != ["t", "value"]:
                raise ScenarioError(f"qsd_{measure}_{tag}.csv has an unexpected header")
            qsd[measure] = QsdSeries(data[:, 0], data[:, 1], measure)
        results.append(ReservoirResult(tag, traj, qsd, entry))

    return RunRecord(
        scenario=sc,
        scenario_hash=stored,
        times=reference.times.copy(),
        reference=reference,
        results=tuple(results),
        diagnostics=diagnostics,
    )


def records_equal(a: RunRecord, b: RunRecord) -> bool:
    """Exact equality of two records (hashes, grids, every sample)."""
    if a.scenario_hash != b.scenario_hash or a.diagnostics != b.diagnostics:
        return False
    if not np.array_equal(a.times, b.times):
        return False
    if not np.array_equal(a.reference.amplitudes, b.reference.amplitudes):
        return False
    if len(a.results) != len(b.results):
        return False
    for ra, rb in zip(a.results, b.results):
        if ra.tag != rb.tag or ra.error != rb.error or set(ra.qsd) != set(rb.qsd):
            return False
        if (ra.trajectory is None) != (rb.trajectory is None):
            return False
        if ra.trajectory is not None and not np.array_equal(
            ra.trajectory.amplitudes, rb.trajectory.amplitudes
        ):
            return False
        for m in ra.qsd:
            if not np.array_equal(ra.qsd[m].values, rb.qsd[m].values):
                return False
    return True


def compare_dirs(dir_a: str | Path, dir_b: str | Path, tol: float) -> list[str]:
    """Table-level diff of two emitted run directories.

    Returns human-readable difference descriptions; an empty list means
    every table matches within ``tol`` (time stamps must match exactly).
    """
    a, b = Path(dir_a), Path(dir_b)
    names_a = {p.name for p in a.glob("*.csv")}
    names_b = {p.name for p in b.glob("*.csv")}
    diffs = []
    for name in sorted(names_a - names_b):
        diffs.append(f"{name}: only in {a}")
    for name in sorted(names_b - names_a):
        diffs.append(f"{name}: only in {b}")
    for name in sorted(names_a & names_b):
        try:
            header_a, data_a = _read_table(a / name)
            header_b, data_b = _read_table(b / name)
        except (ScenarioError, ValueError) as exc:
            diffs.append(f"{name}: unreadable ({exc})")
            continue
        if header_a != header_b:
            diffs.append(f"{name}: headers differ")
            continue
        if data_a.shape != data_b.shape:
            diffs.append(f"{name}: {data_a.shape[0]} vs {data_b.shape[0]} rows")
            continue
        if not np.array_equal(data_a[:, 0], data_b[:, 0]):
            diffs.append(f"{name}: time grids differ")
            continue
        gap = float(np.max(np.abs(data_a[:, 1:] - data_b[:, 1:])))
        if gap > tol:
            diffs.append(f"{name}: max abs difference {gap:.3e} exceeds {tol:.3e}")
    return diffs
