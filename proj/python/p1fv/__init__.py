"""Finite volume solver for a coupled temperature / radiative intensity model."""

from ._p1fv import *  # noqa: F401,F403
from ._p1fv import __doc__  # noqa: F401
