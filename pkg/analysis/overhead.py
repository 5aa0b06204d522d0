"""
Leading-order logical rates used for overhead estimates.

Everything is summed in log space (gammaln/logsumexp) so lattice sizes
around 100 neither overflow the binomials nor underflow p**L.
"""
from typing import NamedTuple

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy

from core.exceptions import ConfigurationError
from .models import PauliRounding


class OverheadBound(NamedTuple):
    value: float
    bound: float


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _check(L, p):
    if int(L) != L or L < 1:
        raise ConfigurationError(f"L must be a positive integer, got {L}")
    if not 0 <= p < 1:
        raise ConfigurationError(f"p must lie in [0, 1), got {p}")
    return int(L), float(p)


def log_overhead_bcc(L: int, p: float) -> float:
    L, p = _check(L, p)
    half = L // 2
    return 2 * np.log(L) + _log_binom(L, half) + xlogy(half, p)


def overhead_bcc(L: int, p: float) -> float:
    """L^2 C(L, floor(L/2)) p^floor(L/2): minimal-weight logical chains on the plain cluster."""
    return float(np.exp(log_overhead_bcc(L, p)))


def log_overhead_211(L: int, p: float, pauli_rounding=PauliRounding.FLOOR) -> OverheadBound:
    L, p = _check(L, p)
    if str(pauli_rounding) not in PauliRounding.values:
        raise ConfigurationError(f"unknown Pauli rounding {pauli_rounding!r}")
    erasures = np.arange(L + 1)
    remaining = L - erasures
    if pauli_rounding == PauliRounding.CEIL:
        paulis = (remaining + 1) // 2
    else:
        paulis = remaining // 2
    terms = (_log_binom(L, erasures) + _log_binom(remaining, paulis)
             + erasures * np.log(2.0) + xlogy(erasures + 2 * paulis, p))
    value = 2 * np.log(L) + logsumexp(terms)
    bound = 3 * np.log(L) + 2 * _log_binom(L, L // 2) + xlogy(L, p)
    return OverheadBound(float(value), float(bound))


def overhead_211(L: int, p: float, pauli_rounding=PauliRounding.FLOOR) -> OverheadBound:
    """
    Logical rate of the [[2,1,1]] scheme from N erasures (weight p each, two
    ways per block) plus enough Pauli errors to break the remaining L-N,
    together with the cruder bound L^3 C(L, floor(L/2))^2 p^L.
    """
    value, bound = log_overhead_211(L, p, pauli_rounding)
    return OverheadBound(float(np.exp(value)), float(np.exp(bound)))
