"""Deciding, constructing and verifying LOCC conversions between bipartite pure states."""

from .errors import (
    InfeasibleTarget,
    LOCCError,
    NotAContraction,
    NotDoublyStochastic,
    PreconditionError,
    RankViolation,
)
from .states import BipartiteState, apply_local, from_amplitudes, proportional, schmidt
from .synthesis import (
    InstrumentElement,
    Protocol,
    feasibility,
    full_pipeline,
    lo_popescu,
    synth_pure,
)
from .verify import simulate, verify

__version__ = "0.1.0"
