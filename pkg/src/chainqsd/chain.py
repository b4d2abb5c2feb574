"""Chain geometry, reservoir parameter sets, and trajectory containers.

The physical setting is a nearest-neighbour XX chain restricted to the
single-excitation sector.  A state is a complex amplitude per site,
``c_i(t)``; the last site leaks into a reservoir.  Two frames are used:

* ``lab``   -- amplitudes carry the free phase ``exp(-i*(w_e+(N-1)*w_g)*t)``
  (and, for a memoryless reservoir, the decay factor on the last site).
* ``tilde`` -- the co-rotating frame the solvers integrate in.

Populations of sites 1..N-1 are identical in both frames; only the last
site differs, and only when the reservoir is memoryless.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ClampWarning, FrameError, ScenarioError

LAB = "lab"
TILDE = "tilde"

# Ratio gamma/omega_c above which the Lorentzian-family spectral densities
# stop being well approximated by their full-line normalization.
NARROWNESS_THRESHOLD = 0.1


@dataclass(frozen=True)
class Markovian:
    """Memoryless reservoir acting on the last site at rate ``gamma_m``."""

    gamma_m: float
    kind: str = field(default="markovian", init=False, repr=False)


@dataclass(frozen=True)
class Lorentzian:
    """Lorentzian spectral density: coupling ``g``, width ``gamma``,
    detuning ``delta_c`` of the reservoir peak from the qubit transition."""

    g: float
    gamma: float
    delta_c: float = 0.0
    kind: str = field(default="lorentzian", init=False, repr=False)


@dataclass(frozen=True)
class LorentzianSquared:
    """Squared-Lorentzian spectral density (sharper peak, same knobs)."""

    g: float
    gamma: float
    delta_c: float = 0.0
    kind: str = field(default="lorentzian_squared", init=False, repr=False)


@dataclass(frozen=True)
class Ohmic:
    """Ohmic-family spectral density ``~ (w/w_c)^s * exp(-w/w_c)`` with an
    exact overall normalization; ``omega_eg`` is the qubit transition
    frequency the kernel rotates against."""

    g: float
    s_param: float
    omega_c: float
    omega_eg: float
    kind: str = field(default="ohmic", init=False, repr=False)


SpectralDensity = Union[Markovian, Lorentzian, LorentzianSquared, Ohmic]

RESERVOIR_KINDS = ("markovian", "lorentzian", "lorentzian_squared", "ohmic")


def validate_spectral_density(sd: SpectralDensity, omega_eg: float | None = None) -> None:
    """Sanity-check reservoir parameters; raises ScenarioError on nonsense.

    Warns (does not fail) when a Lorentzian-family width is not small
    compared to the reservoir centre frequency, since the normalization
    then picks up support at negative frequencies.
    """
    if isinstance(sd, Markovian):
        if sd.gamma_m <= 0:
            raise ScenarioError("markovian reservoir needs gamma_m > 0")
        return
    if isinstance(sd, (Lorentzian, LorentzianSquared)):
        if sd.gamma <= 0:
            raise ScenarioError(f"{sd.kind} reservoir needs gamma > 0")
        if omega_eg is not None:
            omega_c = omega_eg + sd.delta_c
            if omega_c <= 0 or sd.gamma / omega_c > NARROWNESS_THRESHOLD:
                warnings.warn(
                    f"{sd.kind}: width gamma={sd.gamma} is not small against the "
                    f"reservoir centre frequency {omega_c}; the spectral density "
                    "leaks below w=0 and its normalization is only approximate",
                    ClampWarning,
                    stacklevel=2,
                )
        return
    if isinstance(sd, Ohmic):
        if sd.s_param <= 0:
            raise ScenarioError("ohmic reservoir needs s_param > 0")
        if sd.omega_c <= 0:
            raise ScenarioError("ohmic reservoir needs omega_c > 0")
        return
    raise ScenarioError(f"unknown reservoir type: {sd!r}")


@dataclass
class ChainConfig:
    """An N-site chain with uniform nearest-neighbour coupling.

    Args:
        n_qubits: number of sites, N >= 1.
        coupling: hopping strength between neighbours (J > 0).
        omega_e: excited-level frequency of each qubit.
        omega_g: ground-level frequency (default 0).
        initial_amplitudes: length-N complex vector with unit norm;
            defaults to the excitation sitting on site 1.
    """

    n_qubits: int
    coupling: float
    omega_e: float
    omega_g: float = 0.0
    initial_amplitudes: np.ndarray | None = None

    def __post_init__(self) -> None:
        if self.n_qubits < 1:
            raise ScenarioError("n_qubits must be >= 1")
        if self.coupling <= 0:
            raise ScenarioError("coupling must be positive")
        if self.initial_amplitudes is None:
            amps = np.zeros(self.n_qubits, dtype=complex)
            amps[0] = 1.0
            self.initial_amplitudes = amps
        else:
            amps = np.asarray(self.initial_amplitudes, dtype=complex).reshape(-1)
            if amps.size != self.n_qubits:
                raise ScenarioError(
                    f"initial_amplitudes has length {amps.size}, expected {self.n_qubits}"
                )
            norm = float(np.sum(np.abs(amps) ** 2))
            if abs(norm - 1.0) > 1e-9:
                raise ScenarioError(
                    f"initial amplitudes must have unit norm, got {norm!r}"
                )
            self.initial_amplitudes = amps

    @property
    def omega_eg(self) -> float:
        """Transition frequency of a single qubit."""
        return self.omega_e - self.omega_g

    @property
    def phase_frequency(self) -> float:
        """Frequency of the global phase separating lab and tilde frames."""
        return self.omega_e + (self.n_qubits - 1) * self.omega_g

    @property
    def inverse_coupling(self) -> float:
        """Convenience constant 2/J used throughout the Laplace algebra."""
        return 2.0 / self.coupling


@dataclass
class AmplitudeTrajectory:
    """Site amplitudes on a time grid: ``amplitudes[j, i] = c_{i+1}(t_j)``."""

    times: np.ndarray
    amplitudes: np.ndarray
    frame: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.frame not in (LAB, TILDE):
            raise FrameError(f"unknown frame {self.frame!r}")
        if self.amplitudes.shape[0] != self.times.size:
            raise ScenarioError("time grid and amplitude rows disagree")

    @property
    def n_sites(self) -> int:
        return self.amplitudes.shape[1]


@dataclass
class DensityMatrixSeries:
    """Rank-one density matrices built from a lab-frame trajectory."""

    times: np.ndarray
    matrices: np.ndarray  # shape (n_times, N, N)


def site_populations(traj: AmplitudeTrajectory) -> np.ndarray:
    """|c_i(t)|^2 for every site, shape (n_times, N)."""
    return np.abs(traj.amplitudes) ** 2


def total_population(traj: AmplitudeTrajectory) -> np.ndarray:
    """Excitation left on the chain at each time."""
    return np.sum(np.abs(traj.amplitudes) ** 2, axis=1)


def to_lab_frame(
    traj: AmplitudeTrajectory, cfg: ChainConfig, sd: SpectralDensity
) -> AmplitudeTrajectory:
    """Attach the global free phase (and the memoryless decay factor on the
    last site) to a tilde-frame trajectory.

    Raises:
        FrameError: if the input is already in the lab frame.
    """
    if traj.frame != TILDE:
        raise FrameError("to_lab_frame expects a tilde-frame trajectory")
    phase = np.exp(-1j * cfg.phase_frequency * traj.times)
    amps = traj.amplitudes * phase[:, None]
    if isinstance(sd, Markovian):
        amps[:, -1] *= np.exp(-sd.gamma_m * traj.times)
    return AmplitudeTrajectory(traj.times, amps, LAB, dict(traj.meta))


def density_matrix(traj: AmplitudeTrajectory) -> DensityMatrixSeries:
    """Outer products c c^dagger along the trajectory (lab frame required:
    the matrices must carry whatever trace decay the reservoir causes)."""
    if traj.frame != LAB:
        raise FrameError("density_matrix expects a lab-frame trajectory")
    amps = traj.amplitudes
    mats = amps[:, :, None] * amps.conj()[:, None, :]
    return DensityMatrixSeries(traj.times, mats)


def environment_population(traj: AmplitudeTrajectory, tol: float = 1e-6) -> np.ndarray:
    """Excitation that has left the chain: 1 - sum_i |c_i(t)|^2.

    Values are clamped to [0, 1]; clamping beyond ``tol`` signals solver
    inaccuracy and raises a ClampWarning.
    """
    if traj.frame != LAB:
        raise FrameError("environment_population expects a lab-frame trajectory")
    env = 1.0 - total_population(traj)
    overshoot = max(float(np.max(-env, initial=0.0)), float(np.max(env - 1.0, initial=0.0)))
    if overshoot > tol:
        warnings.warn(
            f"environment population clamped by {overshoot:.3e} (> {tol:.0e}); "
            "the solver output is not trustworthy at this resolution",
            ClampWarning,
            stacklevel=2,
        )
    return np.clip(env, 0.0, 1.0)


def subsample(traj: AmplitudeTrajectory, times: np.ndarray) -> AmplitudeTrajectory:
    """Restrict a trajectory to a coarser grid that must be an exact subset
    of the trajectory's own grid (no interpolation, ever)."""
    times = np.asarray(times, dtype=float)
    right = np.clip(np.searchsorted(traj.times, times), 0, traj.times.size - 1)
    left = np.clip(right - 1, 0, traj.times.size - 1)
    # searchsorted alone is one-sided: a requested time a rounding error above
    # its grid point would map to the next point, a full step away
    idx = np.where(
        np.abs(traj.times[left] - times) <= np.abs(traj.times[right] - times),
        left,
        right,
    )
    grid_dt = max(traj.times[-1] - traj.times[0], 1.0)
    if not np.allclose(traj.times[idx], times, rtol=0.0, atol=1e-9 * grid_dt):
        raise ScenarioError("requested grid is not a subset of the solver grid")
    return AmplitudeTrajectory(traj.times[idx], traj.amplitudes[idx], traj.frame, dict(traj.meta))
