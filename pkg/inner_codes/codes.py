"""
The six inner codes placed on every vertex of the bcc cluster state.

Each code is pure data: X-type checks readable from destructive X-basis
measurement, the logical X support, the Z-side data used only by the
circuit checker, and the physical CZ pattern that realises one logical
CZ between two blocks (pattern[i, j] = 1 means a CZ between qubit i of
one block and qubit j of the other; every pattern is symmetric).
"""
import logging
from dataclasses import dataclass
from types import MappingProxyType
from typing import NamedTuple

import numpy as np

from core.exceptions import ConfigurationError
from core.utils import as_bits, gf2_span, in_span
from .models import CodeFamily, CodeId

logger = logging.getLogger(__name__)


def _bits(*rows, s):
    if not rows:
        return np.zeros((0, s), dtype=np.uint8)
    return np.array(rows, dtype=np.uint8).reshape(len(rows), s)


def _frozen(arr):
    arr = np.array(arr, dtype=np.uint8)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class InnerCode:
    name: str
    s: int
    family: str
    x_checks: np.ndarray
    logical_x_support: np.ndarray
    z_logical_support: np.ndarray
    z_checks: np.ndarray
    cz_pattern: np.ndarray
    # x_checks rows that are gauge-fixed rather than carried through the logical CZ
    gauge_fixed: tuple = ()

    def __post_init__(self):
        for field in ("x_checks", "logical_x_support", "z_logical_support", "z_checks", "cz_pattern"):
            object.__setattr__(self, field, _frozen(getattr(self, field)))

    @property
    def label(self) -> str:
        return CodeId(self.name).label

    @property
    def detects_all_single_z(self) -> bool:
        if self.x_checks.shape[0] == 0:
            return False
        # column j of the check matrix is the syndrome of Z on qubit j
        return bool(self.x_checks.any(axis=0).all())

    @property
    def gates_per_logical_cz(self) -> int:
        return int(self.cz_pattern.sum())

    def __repr__(self):
        return f"InnerCode({self.name!r}, s={self.s})"


class InnerDecode(NamedTuple):
    detected: bool
    logical_flip: int


# ──────────────────────────────────────────
# Registry
# ──────────────────────────────────────────
def _make_codes():
    identity = lambda s: np.eye(s, dtype=np.uint8)  # noqa: E731
    swap_23 = identity(4)[[0, 2, 1, 3]]

    codes = [
        InnerCode(
            name=CodeId.CUBIC, s=1, family=CodeFamily.TYPE_I,
            x_checks=_bits(s=1),
            logical_x_support=[1],
            z_logical_support=[1],
            z_checks=_bits(s=1),
            cz_pattern=identity(1),
        ),
        InnerCode(
            name=CodeId.C211, s=2, family=CodeFamily.TYPE_II,
            x_checks=_bits((1, 1), s=2),
            logical_x_support=[1, 0],
            z_logical_support=[1, 1],
            z_checks=_bits(s=2),
            # four CZs: every qubit of one block with every qubit of the other
            cz_pattern=np.ones((2, 2), dtype=np.uint8),
        ),
        InnerCode(
            name=CodeId.C311_1, s=3, family=CodeFamily.TYPE_II,
            x_checks=_bits((1, 1, 0), (0, 1, 1), s=3),
            logical_x_support=[1, 0, 0],
            z_logical_support=[1, 1, 1],
            z_checks=_bits(s=3),
            cz_pattern=np.ones((3, 3), dtype=np.uint8),
        ),
        InnerCode(
            name=CodeId.C311_2, s=3, family=CodeFamily.TYPE_II,
            x_checks=_bits((1, 1, 1), s=3),
            logical_x_support=[1, 0, 0],
            z_logical_support=[1, 0, 1],
            z_checks=_bits((0, 1, 1), s=3),
            # v1-u1, v1-u3, v2-u2, v3-u1: the drawn v1-u1, v2-u3, v3-u2, v3-u3
            # with both sides relabelled i -> i+1 (mod 3)
            cz_pattern=[[1, 0, 1], [0, 1, 0], [1, 0, 0]],
        ),
        InnerCode(
            name=CodeId.C4112, s=4, family=CodeFamily.TYPE_I,
            # X1X2 gauge-fixed as a check; its partner Z1Z3 is then not a stabilizer
            x_checks=_bits((1, 1, 0, 0), (1, 1, 1, 1), s=4),
            logical_x_support=[1, 0, 1, 0],
            z_logical_support=[1, 1, 0, 0],
            z_checks=_bits((1, 1, 1, 1), s=4),
            # transversal up to exchanging qubits 2 and 3
            cz_pattern=swap_23,
            gauge_fixed=(0,),
        ),
        InnerCode(
            name=CodeId.C713, s=7, family=CodeFamily.TYPE_I,
            x_checks=_bits(
                (1, 1, 1, 1, 0, 0, 0),
                (1, 0, 1, 0, 1, 0, 1),
                (0, 0, 1, 1, 0, 1, 1),
                s=7,
            ),
            logical_x_support=[1] * 7,
            z_logical_support=[1] * 7,
            z_checks=_bits(
                (1, 1, 1, 1, 0, 0, 0),
                (1, 0, 1, 0, 1, 0, 1),
                (0, 0, 1, 1, 0, 1, 1),
                s=7,
            ),
            cz_pattern=identity(7),
        ),
    ]
    for code in codes:
        validate_code(code)
    return MappingProxyType({str(code.name): code for code in codes})


def validate_code(code: InnerCode) -> None:
    """
    Structural checks on one code; raises ConfigurationError on the first
    violated property.
    """
    s = code.s
    if code.x_checks.shape[1:] != (s,) or code.z_checks.shape[1:] != (s,):
        raise ConfigurationError(f"{code.name}: check width must equal s={s}")
    if code.cz_pattern.shape != (s, s) or (code.cz_pattern != code.cz_pattern.T).any():
        raise ConfigurationError(f"{code.name}: CZ pattern must be a symmetric s x s matrix")

    # X-type checks always commute with each other; Z-side data must commute with them
    if (code.x_checks @ code.z_checks.T % 2).any():
        raise ConfigurationError(f"{code.name}: X and Z checks anticommute")
    if (code.x_checks @ code.z_logical_support % 2).any():
        raise ConfigurationError(f"{code.name}: logical Z anticommutes with an X check")
    if (code.z_checks @ code.logical_x_support % 2).any():
        raise ConfigurationError(f"{code.name}: logical X anticommutes with a Z check")
    if code.x_checks.shape[0] and in_span(code.logical_x_support, code.x_checks):
        raise ConfigurationError(f"{code.name}: logical X lies in the check span")
    if int(code.logical_x_support @ code.z_logical_support) % 2 != 1:
        raise ConfigurationError(f"{code.name}: logical X and Z must anticommute")
    if s > 1 and not code.detects_all_single_z:
        raise ConfigurationError(f"{code.name}: some single Z error goes undetected")

    # the CZ pattern maps X-bar to Z-bar and X checks into Z checks
    image = code.logical_x_support @ code.cz_pattern % 2
    if not _in_z_span(image ^ code.z_logical_support, code.z_checks):
        raise ConfigurationError(f"{code.name}: CZ pattern does not realise a logical CZ")
    for idx, row in enumerate(code.x_checks):
        if idx in code.gauge_fixed:
            continue
        if not _in_z_span(row @ code.cz_pattern % 2, code.z_checks):
            raise ConfigurationError(f"{code.name}: CZ pattern maps an X check outside the stabilizer")


def _in_z_span(vector, z_checks):
    if z_checks.shape[0] == 0:
        return not np.asarray(vector).any()
    return in_span(vector, z_checks)


_REGISTRY = None


def builtin_codes():
    """Immutable id -> InnerCode mapping of the six inner codes."""
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = _make_codes()
    return _REGISTRY


def get_code(code_id) -> InnerCode:
    try:
        return builtin_codes()[str(code_id)]
    except KeyError:
        known = ", ".join(builtin_codes())
        raise ConfigurationError(f"unknown inner code {code_id!r} (known: {known})") from None


# ──────────────────────────────────────────
# Syndromes and logical readout
# ──────────────────────────────────────────
def inner_syndrome(code: InnerCode, z_flips) -> np.ndarray:
    flips = as_bits(z_flips, code.s)
    return (code.x_checks @ flips % 2).astype(np.uint8)


def inner_decode(code: InnerCode, z_flips) -> InnerDecode:
    """Detect-and-erase: any nonzero syndrome marks the block; nothing is corrected."""
    flips = as_bits(z_flips, code.s)
    detected = bool((code.x_checks @ flips % 2).any())
    return InnerDecode(detected, int(code.logical_x_support @ flips) % 2)


def decode_blocks(code: InnerCode, flips: np.ndarray):
    """
    Vectorised inner_decode over a (blocks, s) flip array.

    Returns (detected, logical_flip) as uint8 vectors.
    """
    flips = np.asarray(flips, dtype=np.uint8)
    if code.x_checks.shape[0]:
        detected = (flips @ code.x_checks.T % 2).any(axis=1)
    else:
        detected = np.zeros(flips.shape[0], dtype=bool)
    logical = flips @ code.logical_x_support % 2
    return detected.astype(np.uint8), logical.astype(np.uint8)


def z_reduction_table(code: InnerCode) -> np.ndarray:
    """
    For every s-bit Z pattern (as an integer), the minimum-weight pattern in
    its coset modulo the inner Z checks, ties broken towards the lowest qubit
    indices.
    """
    s = code.s
    patterns = ((np.arange(2 ** s)[:, None] >> np.arange(s)) & 1).astype(np.uint8)
    span = gf2_span(code.z_checks) if code.z_checks.shape[0] else np.zeros((1, s), dtype=np.uint8)
    table = np.empty((2 ** s, s), dtype=np.uint8)
    for idx, pattern in enumerate(patterns):
        candidates = pattern ^ span
        table[idx] = min(candidates, key=lambda c: (int(c.sum()), tuple(np.flatnonzero(c))))
    return table
