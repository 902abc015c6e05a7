"""EM for isotropic Gaussian location mixtures.

Thin wrapper over the compiled core. Center sets are plain (M, d) numpy
arrays; models carry their own mixing weights.
"""

from ._mixem import *  # noqa: F401,F403
from ._mixem import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"
