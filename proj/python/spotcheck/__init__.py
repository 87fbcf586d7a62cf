"""Confidence bounds for spot-checking experiments."""

from ._spotcheck import *  # noqa: F401,F403
from ._spotcheck import SpotcheckError

__all__ = ["SpotcheckError"]
