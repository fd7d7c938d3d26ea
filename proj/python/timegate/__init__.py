"""Pulsed-OPO heralded single photon simulator and tomography toolkit."""

from ._timegate import *  # noqa: F401,F403
from ._timegate import __doc__  # noqa: F401
