"""Crouch-Grossman time stepping for 2D Euler vorticity on the torus, with a
verification harness for its error laws and geometric invariants."""

from .errors import (BlowUp, ConfigError, MeanNotZero, NoConvergence, NonContractive,
                     StepRejected)
from .torus import GridSpec

__all__ = ["GridSpec", "MeanNotZero", "NonContractive", "NoConvergence", "StepRejected",
           "BlowUp", "ConfigError"]
__version__ = "0.1.0"
