"""Modeling of nonreciprocal microwave devices built from optomechanical circuits.

Subpackages by task:

* :mod:`mechcirc.device` -- cavity and mechanical mode parameters, couplings
* :mod:`mechcirc.effective` -- linearized couplings and renormalized mechanics
* :mod:`mechcirc.scattering` -- frequency-domain scattering and noise transfer
* :mod:`mechcirc.oracles` -- closed-form two-port and conversion results
* :mod:`mechcirc.noise` -- thermal noise, amplifier chains, added noise
* :mod:`mechcirc.timedomain` -- mean-field time integration
* :mod:`mechcirc.optimize` -- pump searches and calibration recipes
* :mod:`mechcirc.cli` -- command-line front end
"""

from .device import CavityMode, DeviceModel, MechanicalMode, TuningCurve
from .effective import EffectiveModel, PumpConfiguration, build_effective
from .errors import (
    CalibrationError,
    ConfigError,
    ConvergenceError,
    DomainError,
    FitError,
    MechcircError,
    ModelValidityError,
    NumericalError,
    ReferredNoiseOverflowError,
)
from .scattering import ScatteringResult, scattering_matrix, solve_grid

__version__ = "0.1.0"

__all__ = [
    "CavityMode",
    "DeviceModel",
    "MechanicalMode",
    "TuningCurve",
    "EffectiveModel",
    "PumpConfiguration",
    "build_effective",
    "ScatteringResult",
    "scattering_matrix",
    "solve_grid",
    "MechcircError",
    "DomainError",
    "FitError",
    "ModelValidityError",
    "NumericalError",
    "ConvergenceError",
    "CalibrationError",
    "ReferredNoiseOverflowError",
    "ConfigError",
    "__version__",
]
