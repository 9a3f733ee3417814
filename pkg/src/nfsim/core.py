"""Physical constants, configuration types, time grid and input pulse.

Units convention: times in ns, rates in 1/ns, angular frequencies in rad/ns,
lengths in meters.  User-facing detunings and spectral axes are expressed in
units of the natural linewidth gamma.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .switching import SwitchSchedule


class ConfigurationError(ValueError):
    """Invalid configuration values or files."""


class NumericalInstabilityError(RuntimeError):
    """Solver produced NaN/overflow."""


class TruncationWarning(UserWarning):
    """Field has not decayed by the end of the record."""


@dataclass(frozen=True)
class NuclearConstants:
    """57Fe nuclear transition constants.

    gamma: spontaneous decay rate, 1/ns (lifetime 141 ns).
    cg_a: Clebsch-Gordan coefficient of the two Delta m = 0 lines.
    k_xray: wave number of the 14.4 keV transition, 1/m.
    n_electronic: electronic x-ray refractive index of the crystal.
    """

    gamma: float = 1.0 / 141.0
    cg_a: float = math.sqrt(2.0 / 3.0)
    k_xray: float = 2.0 * math.pi / 0.0861e-9
    n_electronic: complex = 1.0 + 9.13e-8j

    def __post_init__(self):
        if self.gamma <= 0:
            raise ConfigurationError("gamma must be positive")
        if not 0 < self.cg_a <= 1:
            raise ConfigurationError("cg_a must be in (0, 1]")
        if self.n_electronic.imag < 0:
            raise ConfigurationError("medium must be absorptive (Im n >= 0)")


@dataclass(frozen=True)
class PulseConfig:
    """Gaussian input pulse exp(-((t - t0)/tau)^2), peak normalized to 1."""

    t0: float = 0.67
    tau: float = 0.1

    def __post_init__(self):
        if self.tau <= 0:
            raise ConfigurationError("tau must be positive")
        if self.t0 < 4.0 * self.tau:
            raise ConfigurationError("t0 must be >= 4 tau (pulse inside grid)")


@dataclass(frozen=True)
class GridConfig:
    """Uniform time grid and slab count per target."""

    dt: float = 0.005
    t_end: float = 1500.0
    n_slabs: int = 128

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError("dt must be positive")
        n = self.t_end / self.dt
        if abs(n - round(n)) > 1e-9 * max(1.0, n) or round(n) < 2:
            raise ConfigurationError("t_end/dt must be an integer >= 2")
        if self.n_slabs < 8:
            raise ConfigurationError("n_slabs must be >= 8")

    @property
    def n_samples(self):
        return int(round(self.t_end / self.dt)) + 1


@dataclass(frozen=True)
class TargetConfig:
    """One resonant target: optical depth, geometry, detuning, schedule."""

    xi: float = 15.0
    thickness_L: float = 10e-6
    delta_over_gamma: float = 80.0
    include_electronic: bool = False
    schedule: SwitchSchedule = field(default_factory=SwitchSchedule)

    def __post_init__(self):
        if self.xi < 0:
            raise ConfigurationError("xi must be >= 0")
        if self.thickness_L <= 0:
            raise ConfigurationError("thickness_L must be positive")
        if self.delta_over_gamma < 0:
            raise ConfigurationError("delta_over_gamma must be >= 0")


@dataclass(frozen=True)
class SpectrumGridConfig:
    """Spectrum evaluation grid in units of gamma."""

    omega_min: float = -200.0
    omega_max: float = 200.0
    omega_step: float = 0.05

    def __post_init__(self):
        if self.omega_step <= 0:
            raise ConfigurationError("omega_step must be positive")
        if self.omega_max <= self.omega_min:
            raise ConfigurationError("omega_max must exceed omega_min")

    def grid(self):
        n = int(round((self.omega_max - self.omega_min) / self.omega_step))
        return self.omega_min + np.arange(n + 1) * self.omega_step


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one run."""

    constants: NuclearConstants = field(default_factory=NuclearConstants)
    pulse: PulseConfig = field(default_factory=PulseConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    targets: tuple = (TargetConfig(),)
    spectrum_grid: SpectrumGridConfig = field(default_factory=SpectrumGridConfig)

    def __post_init__(self):
        targets = tuple(self.targets)
        object.__setattr__(self, "targets", targets)
        if len(targets) > 2:
            raise ConfigurationError("at most two targets supported")
        deltas = {t.delta_over_gamma for t in targets}
        if len(deltas) > 1:
            raise ConfigurationError(
                "targets must share delta_over_gamma (same isotope)"
            )
        if self.grid.dt > self.pulse.tau / 10.0:
            raise ConfigurationError("dt must resolve the pulse (dt <= tau/10)")
        for t in targets:
            dang = angular_detuning(t.delta_over_gamma, self.constants)
            if dang > 0 and self.grid.dt > 0.02 / dang:
                raise ConfigurationError(
                    "dt too coarse for the hyperfine phase (dt <= 0.02/Delta)"
                )


@dataclass(frozen=True)
class FieldRecord:
    """Complex field envelope on a uniform time grid at one plane."""

    t_start: float
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)
        if self.dt <= 0:
            raise ConfigurationError("dt must be positive")
        if samples.size < 2:
            raise ConfigurationError("need at least two samples")
        if not np.all(np.isfinite(samples)):
            raise ConfigurationError("field samples must be finite")

    def times(self):
        return self.t_start + np.arange(self.samples.size) * self.dt

    def with_samples(self, samples):
        return FieldRecord(self.t_start, self.dt, samples)


def build_time_grid(grid):
    """Sample times t_i = i dt, i = 0..t_end/dt."""
    return np.arange(grid.n_samples) * grid.dt


def gaussian_input(pulse, grid):
    """The boundary-condition pulse as a FieldRecord on the given grid."""
    if grid.dt > pulse.tau / 10.0:
        raise ConfigurationError("grid does not resolve the pulse (dt > tau/10)")
    t = build_time_grid(grid)
    return FieldRecord(0.0, grid.dt, np.exp(-(((t - pulse.t0) / pulse.tau) ** 2)))


def angular_detuning(delta_over_gamma, constants):
    """Convert a detuning in units of gamma to rad/ns."""
    return delta_over_gamma * constants.gamma
