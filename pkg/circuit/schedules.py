"""
Gate schedules for the logical CZs of the concatenated cluster state.

A schedule is stored as a local pattern on one dual block: every step is a
set of gates (direction, dual qubit, primal qubit), and all dual blocks run
the same pattern at the same time.  Since every primal block plays each of
the four directions for exactly one dual block, a pattern whose steps use
each dual qubit and each primal qubit at most once is collision-free on the
whole lattice.
"""
import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from core.exceptions import ConfigurationError, InvariantError
from inner_codes.models import CodeFamily, CodeId
from lattice.models import Direction
from .models import ScheduleVariant

logger = logging.getLogger(__name__)

# step order of the four directions in every local pattern
DIRECTIONS = (Direction.W, Direction.E, Direction.N, Direction.S)


class LocalGate(NamedTuple):
    direction: int
    dual_qubit: int
    primal_qubit: int


@dataclass(frozen=True, eq=False)
class GateSchedule:
    code: object
    variant: str
    local_steps: tuple
    # per step: (gates, 2) array of physical (dual qubit, primal qubit) ids
    steps: tuple
    n_qubits: int

    @property
    def n_steps(self) -> int:
        return len(self.local_steps)

    @property
    def n_gates(self) -> int:
        return sum(step.shape[0] for step in self.steps)

    @cached_property
    def idle_qubits(self) -> tuple:
        """Qubits not touched by any gate, one array per step."""
        idle = []
        for step in self.steps:
            busy = np.zeros(self.n_qubits, dtype=bool)
            busy[step.ravel()] = True
            idle.append(np.flatnonzero(~busy))
        return tuple(idle)

    def gates_per_position(self) -> np.ndarray:
        """CZ count per primal-qubit position over the whole schedule."""
        counts = np.zeros(self.code.s, dtype=np.int64)
        for step in self.local_steps:
            for gate in step:
                counts[gate.primal_qubit] += 1
        return counts

    def to_dict(self) -> dict:
        return {
            "code": str(self.code.name),
            "variant": str(self.variant),
            "n_steps": self.n_steps,
            "steps": [
                [
                    {
                        "direction": Direction(gate.direction).label,
                        "dual_qubit": gate.dual_qubit,
                        "primal_qubit": gate.primal_qubit,
                    }
                    for gate in step
                ]
                for step in self.local_steps
            ],
        }


# ──────────────────────────────────────────
# Local patterns
# ──────────────────────────────────────────
def _pattern_edges(code):
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(code.cz_pattern))]


def _transversal(code):
    # Type I: one permutation of the block per direction
    pairs = _pattern_edges(code)
    return [[LocalGate(k, i, j) for i, j in pairs] for k in DIRECTIONS]


def _c211_fig5(code):
    straight = [(0, 0), (1, 1)]
    crossed = [(0, 1), (1, 0)]
    return (
        [[LocalGate(k, i, j) for i, j in straight] for k in DIRECTIONS]
        + [[LocalGate(k, i, j) for i, j in crossed] for k in DIRECTIONS]
    )


def _c211_natural(code):
    steps = []
    for k in DIRECTIONS:
        steps.append([LocalGate(k, 0, 0), LocalGate(k, 1, 1)])
        steps.append([LocalGate(k, 0, 1), LocalGate(k, 1, 0)])
    return steps


def _c311_1(code):
    # three rounds of transversal gates, each round shifting the partner by one
    return [
        [LocalGate(k, i, (i + r) % 3) for i in range(3)]
        for r in range(3)
        for k in DIRECTIONS
    ]


def _c311_2(code):
    first = [(0, 0), (1, 1)]
    second = [(0, 2), (2, 0)]
    return _round_major([first, second])


def _round_major(matchings):
    return [[LocalGate(k, i, j) for i, j in m] for m in matchings for k in DIRECTIONS]


def _direction_major(matchings):
    return [[LocalGate(k, i, j) for i, j in m] for k in DIRECTIONS for m in matchings]


_LOCAL_PATTERNS = {
    (CodeId.C211, ScheduleVariant.FIG5): _c211_fig5,
    (CodeId.C211, ScheduleVariant.NATURAL): _c211_natural,
    (CodeId.C311_1, ScheduleVariant.FIG5): _c311_1,
    (CodeId.C311_2, ScheduleVariant.FIG5): _c311_2,
}


def local_pattern(code, variant=ScheduleVariant.FIG5):
    variant = str(variant)
    builder = _LOCAL_PATTERNS.get((str(code.name), variant))
    if builder is None and variant == ScheduleVariant.FIG5 and code.family == CodeFamily.TYPE_I:
        builder = _transversal
    if builder is None:
        raise ConfigurationError(f"no {variant!r} schedule for code {code.name}")
    return tuple(tuple(step) for step in builder(code))


def matching_orders(code):
    """
    Candidate local patterns for a code without a published order: every
    split of its CZ pattern into matchings, in every order, run round-major
    and direction-major.  Fewest steps first.
    """
    edges = _pattern_edges(code)
    partitions = sorted(_matching_partitions(edges), key=lambda p: (len(p), p))
    for partition in partitions:
        for order in itertools.permutations(partition):
            yield _round_major(order)
            if len(order) > 1:
                yield _direction_major(order)


def _matching_partitions(edges):
    if not edges:
        yield []
        return
    first, rest = edges[0], edges[1:]
    for partition in _matching_partitions(rest):
        for idx, group in enumerate(partition):
            if all(first[0] != i and first[1] != j for i, j in group):
                yield partition[:idx] + [sorted(group + [first])] + partition[idx + 1:]
        yield [[first]] + partition


# ──────────────────────────────────────────
# Expansion onto a layout
# ──────────────────────────────────────────
def expand_pattern(code, layout, local_steps, variant=ScheduleVariant.FIG5) -> GateSchedule:
    s = code.s
    duals = layout.dual_blocks
    steps = []
    for step in local_steps:
        rows = []
        for gate in step:
            primals = layout.neighbors[duals, gate.direction]
            keep = primals >= 0
            rows.append(np.stack([duals[keep] * s + gate.dual_qubit,
                                  primals[keep] * s + gate.primal_qubit], axis=1))
        gates = np.concatenate(rows) if rows else np.empty((0, 2), dtype=np.int64)
        gates.setflags(write=False)
        steps.append(gates)
    schedule = GateSchedule(
        code=code,
        variant=ScheduleVariant(str(variant)),
        local_steps=tuple(tuple(LocalGate(*g) for g in step) for step in local_steps),
        steps=tuple(steps),
        n_qubits=layout.n_blocks * s,
    )
    validate_schedule(schedule, layout)
    return schedule


def validate_schedule(schedule: GateSchedule, layout) -> None:
    code = schedule.code
    for index, step in enumerate(schedule.local_steps, start=1):
        duals = [g.dual_qubit for g in step]
        primals = [g.primal_qubit for g in step]
        if len(set(duals)) != len(duals) or len(set(primals)) != len(primals):
            raise InvariantError(f"step {index} uses a qubit twice in the local pattern")

    for direction in DIRECTIONS:
        realised = np.zeros((code.s, code.s), dtype=np.int64)
        for step in schedule.local_steps:
            for gate in step:
                if gate.direction == direction:
                    realised[gate.dual_qubit, gate.primal_qubit] += 1
        if (realised != code.cz_pattern).any():
            raise InvariantError(
                f"direction {Direction(direction).label} does not realise the CZ pattern of {code.name}"
            )

    for index, gates in enumerate(schedule.steps, start=1):
        if np.unique(gates).size != gates.size:
            raise InvariantError(f"step {index} gates a qubit twice")
    expected = layout.cz_edges.shape[0] * int(code.cz_pattern.sum())
    if schedule.n_gates != expected:
        raise InvariantError(f"schedule has {schedule.n_gates} gates, expected {expected}")


def schedule_for(code, layout, variant=ScheduleVariant.FIG5) -> GateSchedule:
    """Collision-free schedule realising every logical CZ of the layout once."""
    if str(variant) == ScheduleVariant.SEARCH:
        from .propagation import search_local_pattern
        local_steps = search_local_pattern(code)
    else:
        local_steps = local_pattern(code, variant)
    schedule = expand_pattern(code, layout, local_steps, variant)
    logger.debug("%s/%s schedule: %d steps, %d gates", code.name, variant,
                 schedule.n_steps, schedule.n_gates)
    return schedule
