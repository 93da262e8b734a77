"""Photon-pair correlation analysis for binary SPAD frame streams."""

from spadcorr._core import *  # noqa: F401,F403
from spadcorr._core import __doc__  # noqa: F401
