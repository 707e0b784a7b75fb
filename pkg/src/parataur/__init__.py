"""Exact-arithmetic analysis of parametric timed automata.

Models are timed automata whose guard and invariant atoms compare one
clock against a sum of parameters plus an integer, with optional bounds
on the parameters.  The package classifies models into decidable
subclasses, decides reachability/cycle/maximal-run properties on those,
runs budgeted symbolic semi-procedures on the rest, and compiles
two-counter machines into clock encodings for ground truth.
"""

from .errors import (
    EmptyInitialError,
    MalformedBoundsError,
    ModelSyntaxError,
    NotAZoneError,
    NotLUError,
    OpenBoundsError,
    ParataurError,
    UnboundedError,
    UnboundedUniversalityError,
    UnknownIdentifierError,
    ZoneShapeError,
)
from .model import (
    MAX_LOWER_MIN_UPPER,
    MIN_LOWER_MAX_UPPER,
    Classification,
    Edge,
    GuardAtom,
    Interval,
    Location,
    ParamValuation,
    Pta,
    Ta,
    classify,
    extreme_valuation,
    instantiate,
    instantiate_extreme,
    parse_model,
    serialize,
    serialize_ta,
)
from .symbolic import Budget, SymbolicState, explore, initial_state, reach_project, succ

__version__ = "0.1.0"

__all__ = [
    "Budget",
    "Classification",
    "Edge",
    "EmptyInitialError",
    "GuardAtom",
    "Interval",
    "Location",
    "MalformedBoundsError",
    "MAX_LOWER_MIN_UPPER",
    "MIN_LOWER_MAX_UPPER",
    "ModelSyntaxError",
    "NotAZoneError",
    "NotLUError",
    "OpenBoundsError",
    "ParamValuation",
    "ParataurError",
    "Pta",
    "SymbolicState",
    "Ta",
    "UnboundedError",
    "UnboundedUniversalityError",
    "UnknownIdentifierError",
    "ZoneShapeError",
    "classify",
    "explore",
    "extreme_valuation",
    "initial_state",
    "instantiate",
    "instantiate_extreme",
    "parse_model",
    "reach_project",
    "serialize",
    "serialize_ta",
    "succ",
    "__version__",
]
