"""Exact draw probabilities for balls moved between urns."""

from .engine import (
    BoundsInterval,
    SchemeState,
    TransferStep,
    UrnComposition,
    bounds,
    chain_run,
    multi_transfer,
    prob_type,
    scheme_a,
    transfer,
)
from .scheme import SchemeConfig, bundled_scheme, parse_scheme

__version__ = "0.1.0"
