"""Entanglement entropy of Dirac modes near a Schwarzschild horizon.

Numerical building blocks (binary entropy, tortoise coordinates, angular
and radial mode problems, regularised projection kernels) and the studies
that measure the logarithmic growth of the entropic difference.
"""

from .entropy import ETA, IDENTITY, QUADRATIC, SpectralFunction, eta, u_functional
from .errors import HorizonLabError
from .geometry import BlackHole
from .opalpha import Interval
from .studies import (ScalingStudyConfig, bh_entropy, mode_entropy, scaling_study_limiting,
                      widom_prediction)

__version__ = "0.1.0"

__all__ = ["ETA", "IDENTITY", "QUADRATIC", "SpectralFunction", "eta", "u_functional",
           "HorizonLabError", "BlackHole", "Interval", "ScalingStudyConfig", "bh_entropy",
           "mode_entropy", "scaling_study_limiting", "widom_prediction"]
