"""Robust sparse recovery: CR-L1, ROMMP and reference oracles."""

from ._robustcs import *  # noqa: F401,F403
from ._robustcs import __version__  # noqa: F401
