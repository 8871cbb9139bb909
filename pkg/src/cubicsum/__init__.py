"""Evaluation and verification of cubic exponential sums.

Modules: :mod:`numkit` (primitives), :mod:`diophantine`, :mod:`gauss`,
:mod:`airy` (cubic oscillatory integrals), :mod:`transform` (the
transformation formulas), :mod:`oracle` (direct summation) and :mod:`cli`.
"""

from .numkit import CubicPhase, normalize
from .gauss import RationalFrame

__all__ = ["CubicPhase", "normalize", "RationalFrame"]
__version__ = "0.1.0"
