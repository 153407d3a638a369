"""Cooperative UWB localization toolkit (Python bindings)."""

from ._uwbcoop import *  # noqa: F401,F403
from ._uwbcoop import __doc__  # noqa: F401

__version__ = "0.1.0"
