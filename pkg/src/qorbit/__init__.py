"""Exact combinatorics and spectral models for q-deformed twisted orbit spaces."""

from .rootsys import RootSystem, build_root_system, fold
from .twistdata import TwistingDatum, WeightFunction

__all__ = ["RootSystem", "TwistingDatum", "WeightFunction", "build_root_system", "fold"]
__version__ = "0.1.0"
