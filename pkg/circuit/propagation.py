"""
Pauli-frame propagation through the CZ schedule and the C-detectability
checker.

A fault is convertible when its end-of-circuit Z pattern, up to cluster
and inner stabilizers, leaves no block with a trivial inner syndrome and a
flipped logical outcome, and the outer decoder, given only the induced
erasures, removes it at zero cost without a logical failure for every
zero-cost completion of those erasures.
"""
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np

from core.exceptions import ConfigurationError
from core.utils import dump_json
from decoder.pipeline import decode_and_judge, erased_cycle_crosses_cut, inner_stage
from inner_codes.codes import get_code, z_reduction_table
from inner_codes.models import CodeId
from lattice.geometry import build_lattice
from lattice.models import Direction
from noise_models.samplers import PauliFrame, two_qubit_paulis
from .models import FaultKind, ScheduleVariant, Verdict
from .schedules import expand_pattern, matching_orders, schedule_for

logger = logging.getLogger(__name__)

VALIDATION_SIZE = 4
# dual block along x whose neighbours, in block order, are S < W < E < N
CENTER_COORD = (1, 2, 2)
MAX_GENERATORS = 12


# ──────────────────────────────────────────
# Propagation
# ──────────────────────────────────────────
def conjugate_step(frame: PauliFrame, gates: np.ndarray) -> None:
    """CZ on every (a, b) row: X on one end toggles Z on the other."""
    a, b = gates[:, 0], gates[:, 1]
    frame.z[a] ^= frame.x[b]
    frame.z[b] ^= frame.x[a]


def propagate(frame: PauliFrame, schedule, from_step: int = 0) -> PauliFrame:
    """Conjugate a copy of `frame` through steps from_step+1 .. end."""
    if not 0 <= from_step <= schedule.n_steps:
        raise ConfigurationError(f"from_step must lie in [0, {schedule.n_steps}], got {from_step}")
    out = frame.copy()
    for gates in schedule.steps[from_step:]:
        conjugate_step(out, gates)
    return out


# ──────────────────────────────────────────
# Canonical patterns
# ──────────────────────────────────────────
def z_pattern(frame: PauliFrame, code) -> Dict[int, np.ndarray]:
    """Nonzero Z rows of a frame, keyed by block."""
    z = frame.z.reshape(-1, code.s)
    return {int(b): z[b].copy() for b in np.flatnonzero(z.any(axis=1))}


def _generators(layout, support):
    nbrs = layout.neighbors
    counts = (np.isin(nbrs, support) & (nbrs >= 0)).sum(axis=1)
    chosen = np.flatnonzero(counts >= 2)
    hits = {int(b): int(counts[b]) for b in np.union1d(chosen, support)}
    ranked = sorted(hits, key=lambda b: (-hits[b], b))
    return sorted(ranked[:MAX_GENERATORS])


def _candidates(layout, code, pattern, extra=()):
    """
    All products of the local cluster stabilizers with `pattern`; `extra`
    blocks widen the neighbourhood the stabilizers are taken from.
    """
    support = sorted(b for b, bits in pattern.items() if np.any(bits))
    region = sorted(set(support) | {int(b) for b in extra})
    generators = _generators(layout, region)
    blocks = sorted(set(region) | {int(n) for g in generators for n in layout.neighbors[g] if n >= 0})
    position = {b: i for i, b in enumerate(blocks)}

    s = code.s
    base = np.zeros((len(blocks), s), dtype=np.uint8)
    for b in support:
        base[position[b]] = pattern[b]
    image = (code.logical_x_support @ code.cz_pattern % 2).astype(np.uint8)
    effect = np.zeros((len(generators), len(blocks), s), dtype=np.uint8)
    for g_index, g in enumerate(generators):
        for n in layout.neighbors[g]:
            if n >= 0:
                effect[g_index, position[int(n)]] ^= image

    m = len(generators)
    coeffs = ((np.arange(2 ** m)[:, None] >> np.arange(m)) & 1).astype(np.uint8)
    products = np.tensordot(coeffs, effect, axes=(1, 0)) % 2
    return blocks, (products ^ base[None]).astype(np.uint8)


def _reduce(code, candidates):
    weights = 1 << np.arange(code.s)
    return z_reduction_table(code)[(candidates * weights).sum(axis=-1)]


def canonicalize(layout, code, pattern: Dict[int, np.ndarray]) -> Dict[int, np.ndarray]:
    """
    Minimum-weight representative of a Z pattern modulo cluster and inner
    stabilizers; ties go to the lexicographically least (block, qubit) list.
    """
    if not any(np.any(bits) for bits in pattern.values()):
        return {}
    blocks, candidates = _candidates(layout, code, pattern)
    reduced = _reduce(code, candidates)
    weights = reduced.sum(axis=(1, 2))
    best = np.flatnonzero(weights == weights.min())

    def key(index):
        rows, qubits = np.nonzero(reduced[index])
        return tuple((blocks[r], int(q)) for r, q in zip(rows, qubits))

    choice = min(best, key=key)
    return {blocks[r]: reduced[choice, r] for r in range(len(blocks)) if reduced[choice, r].any()}


def has_weight_profile(layout, code, pattern, profile: Dict[int, int]) -> bool:
    """
    Whether some cluster-stabilizer-equivalent form of `pattern` carries
    exactly `profile[b]` Z errors on every block b (and none elsewhere).
    """
    blocks, candidates = _candidates(layout, code, pattern, extra=profile)
    target = np.array([profile.get(b, 0) for b in blocks])
    return bool((candidates.sum(axis=-1) == target).all(axis=1).any())


def block_signature(code, bits) -> Tuple[Tuple[int, ...], int]:
    bits = np.asarray(bits, dtype=np.uint8)
    syndrome = tuple(int(v) for v in code.x_checks @ bits % 2)
    return syndrome, int(code.logical_x_support @ bits % 2)


def locally_convertible(layout, code, pattern) -> bool:
    """Some stabilizer-equivalent pattern leaves no undetected logical flip."""
    if not pattern:
        return True
    _, candidates = _candidates(layout, code, pattern)
    if code.x_checks.shape[0]:
        detected = (candidates @ code.x_checks.T % 2).any(axis=-1)
    else:
        detected = np.zeros(candidates.shape[:2], dtype=bool)
    flipped = (candidates @ code.logical_x_support % 2).astype(bool)
    return bool((~(flipped & ~detected).any(axis=1)).any())


# ──────────────────────────────────────────
# Faults
# ──────────────────────────────────────────
_PAULI_BITS = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_BITS_PAULI = {bits: name for name, bits in _PAULI_BITS.items()}


@dataclass(frozen=True)
class Neighborhood:
    layout: object
    center: int
    west: int
    labels: Dict[int, str] = field(hash=False, compare=False)

    def label(self, block: int) -> str:
        if block in self.labels:
            return self.labels[block]
        return "(" + ",".join(str(int(c)) for c in self.layout.coords[block]) + ")"


def representative_neighborhood(layout) -> Neighborhood:
    center = layout.block_at(CENTER_COORD)
    labels = {center: "C"}
    for direction in Direction:
        neighbour = int(layout.neighbors[center, direction])
        if neighbour >= 0:
            labels[neighbour] = direction.label
    west = int(layout.neighbors[center, Direction.W])
    return Neighborhood(layout, center, west, labels)


@dataclass(frozen=True)
class Fault:
    kind: str
    step: int
    # (block, qubit, pauli letter)
    paulis: Tuple[Tuple[int, int, str], ...]

    def frame(self, n_qubits, s) -> PauliFrame:
        frame = PauliFrame.zeros(n_qubits)
        for block, qubit, pauli in self.paulis:
            xbit, zbit = _PAULI_BITS[pauli]
            frame.x[block * s + qubit] ^= xbit
            frame.z[block * s + qubit] ^= zbit
        return frame

    def describe(self, hood: Neighborhood) -> str:
        return " ".join(f"{p}_{hood.label(b)}{q + 1}" for b, q, p in self.paulis)


def enumerate_faults(schedule, hood: Neighborhood) -> List[Fault]:
    s = schedule.code.s
    faults = []
    for block in (hood.center, hood.west):
        for qubit in range(s):
            for boundary in range(schedule.n_steps + 1):
                for pauli in "XYZ":
                    faults.append(Fault(FaultKind.SINGLE, boundary, ((block, qubit, pauli),)))

    for step_index, step in enumerate(schedule.local_steps, start=1):
        for gate in step:
            partner = int(hood.layout.neighbors[hood.center, gate.direction])
            if partner < 0:
                continue
            for label in range(1, 16):
                xa, za, xb, zb = (int(v) for v in two_qubit_paulis(label))
                paulis = []
                if xa or za:
                    paulis.append((hood.center, gate.dual_qubit, _BITS_PAULI[(xa, za)]))
                if xb or zb:
                    paulis.append((partner, gate.primal_qubit, _BITS_PAULI[(xb, zb)]))
                faults.append(Fault(FaultKind.TWO_QUBIT, step_index, tuple(paulis)))
    return faults


@dataclass
class FaultReport:
    fault: str
    kind: str
    step: int
    literal: Dict[str, List[int]]
    canonical: Dict[str, List[int]]
    signature: Dict[str, dict]
    locally_convertible: bool
    decoder_convertible: bool

    @property
    def verdict(self) -> str:
        if self.locally_convertible and self.decoder_convertible:
            return Verdict.CONVERTIBLE
        return Verdict.NOT_CONVERTIBLE

    def to_dict(self) -> dict:
        return {
            "fault": self.fault,
            "kind": str(self.kind),
            "step": self.step,
            "literal": self.literal,
            "canonical": self.canonical,
            "signature": self.signature,
            "verdict": str(self.verdict),
        }


def format_pattern(pattern: Dict[str, List[int]]) -> str:
    if not pattern:
        return "I"
    return ", ".join(f"Z_{label}" + "".join(str(q + 1) for q in qubits) for label, qubits in pattern.items())


def _labelled(hood, pattern):
    return {hood.label(b): [int(q) for q in np.flatnonzero(bits)] for b, bits in sorted(pattern.items())}


def analyse_fault(fault: Fault, schedule, hood: Neighborhood, engine=None) -> FaultReport:
    layout, code = hood.layout, schedule.code
    end = propagate(fault.frame(schedule.n_qubits, code.s), schedule, from_step=fault.step)
    literal = z_pattern(end, code)
    canonical = canonicalize(layout, code, literal)

    signature = {}
    for block, bits in sorted(canonical.items()):
        syndrome, flip = block_signature(code, bits)
        signature[hood.label(block)] = {"syndrome": list(syndrome), "logical_flip": flip}

    primal_flips = end.z.reshape(-1, code.s)[layout.primal_blocks]
    readout = inner_stage(layout, code, primal_flips)
    decision = decode_and_judge(layout, readout, engine=engine)

    return FaultReport(
        fault=fault.describe(hood),
        kind=fault.kind,
        step=fault.step,
        literal=_labelled(hood, literal),
        canonical=_labelled(hood, canonical),
        signature=signature,
        locally_convertible=locally_convertible(layout, code, literal),
        decoder_convertible=decoder_convertible(layout, readout, decision),
    )


def decoder_convertible(layout, readout, decision) -> bool:
    """
    The decoder removes the fault at zero cost, and every other zero-cost
    completion of the same erasures agrees with it on the logical cut.
    """
    if decision.failure or decision.weight != 0:
        return False
    return not erased_cycle_crosses_cut(layout, readout.erased)


# ──────────────────────────────────────────
# Reports
# ──────────────────────────────────────────
@dataclass
class DetectabilityReport:
    code: str
    variant: str
    n_steps: int
    faults: List[FaultReport]

    @property
    def failures(self) -> List[FaultReport]:
        return [f for f in self.faults if f.verdict != Verdict.CONVERTIBLE]

    @property
    def passed(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        if self.passed:
            return "PASS (all 1- and 2-qubit faults convertible)"
        return f"FAIL ({len(self.failures)} of {len(self.faults)} faults not convertible)"

    def as_text(self, only_failures=False) -> str:
        rows = self.failures if only_failures else self.faults
        header = f"{'fault':<18} {'step':>4}  {'literal':<36} {'effective':<36} verdict"
        lines = [f"{self.code} / {self.variant}: {self.n_steps} steps", header, "-" * len(header)]
        for report in rows:
            lines.append(
                f"{report.fault:<18} {report.step:>4}  {format_pattern(report.literal):<36} "
                f"{format_pattern(report.canonical):<36} {Verdict(report.verdict).label}"
            )
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "code": self.code,
            "variant": self.variant,
            "n_steps": self.n_steps,
            "passed": self.passed,
            "summary": self.summary(),
            "faults": [f.to_dict() for f in self.faults],
        }

    def to_json(self, path=None) -> str:
        return dump_json(self.to_dict(), path)


def detectability_check(code, schedule=None, layout=None, variant=ScheduleVariant.FIG5,
                        engine=None) -> DetectabilityReport:
    """
    Inject every single-qubit Pauli at every step boundary on a dual and a
    primal block, and every two-qubit Pauli after every gate of the dual
    block, on the small validation torus.
    """
    code = get_code(code) if isinstance(code, str) else code
    layout = layout or build_lattice(VALIDATION_SIZE)
    schedule = schedule or schedule_for(code, layout, variant)
    hood = representative_neighborhood(layout)

    reports = [analyse_fault(f, schedule, hood, engine) for f in enumerate_faults(schedule, hood)]
    report = DetectabilityReport(str(code.name), str(schedule.variant), schedule.n_steps, reports)
    logger.info("%s/%s detectability: %s", code.name, schedule.variant, report.summary())
    return report


@lru_cache(maxsize=None)
def search_local_pattern(code):
    """First candidate gate order for [[3,1,1]]_2 that passes the checker."""
    code = get_code(code) if isinstance(code, str) else code
    if str(code.name) != CodeId.C311_2:
        raise ConfigurationError(f"schedule search is only provided for {CodeId.C311_2.value}")
    layout = build_lattice(VALIDATION_SIZE)
    for tried, local_steps in enumerate(matching_orders(code), start=1):
        schedule = expand_pattern(code, layout, local_steps, ScheduleVariant.SEARCH)
        if detectability_check(code, schedule=schedule, layout=layout).passed:
            logger.info("schedule search for %s: candidate %d passes", code.name, tried)
            return schedule.local_steps
    raise ConfigurationError(f"no candidate order for {code.name} passes the detectability check")
