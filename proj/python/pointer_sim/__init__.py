"""Two-level system in a spin environment: exact evolution, phase-only
approximation, pointer-state selection, and diagnostics."""

from ._pointer_sim import *  # noqa: F401,F403
from ._pointer_sim import __doc__  # noqa: F401

__version__ = "0.1.0"
