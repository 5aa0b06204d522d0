"""
Block-level rates seen by the outer decoder when a [[2,1,1]] block turns
every detected flip into an erasure.
"""
from typing import NamedTuple

from core.exceptions import ConfigurationError


class EffectiveRates(NamedTuple):
    p_pauli: float
    p_erasure: float


def effective_rates_211(p: float) -> EffectiveRates:
    """
    One flipped qubit (probability 2p(1-p)) is detected and erased; two
    flipped qubits (p^2) pass as a logical flip.  The Pauli rate is
    conditioned on the block not being erased.
    """
    p = float(p)
    if not 0 <= p < 1:
        raise ConfigurationError(f"p must lie in [0, 1), got {p}")
    p_erasure = 2 * p * (1 - p)
    return EffectiveRates(p * p / (1 - p_erasure), p_erasure)
