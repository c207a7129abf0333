"""Multiple SLE particle systems, Loewner flows and their Burgers limit."""

from ._msle import *  # noqa: F401,F403
from ._msle import NumericalError, Measure  # noqa: F401
