"""
Effective-error tables in the reference row layout.

Row k belongs to the k-th gate on the first qubit of the centre block and
holds three faults: X_C, X_C Z_D and Z_D, with D the direction of the gate.
A CZ maps X_C just before it onto X_C Z_D just after it, so a row shows the
same two effective errors whichever side of the gate its faults sit on.
The reference tables put some rows before their gate and the rest after;
ROWS_BEFORE_GATE lists the former per code (Type I codes share one entry).
"""
import re
from typing import Dict, List, NamedTuple

from inner_codes.codes import get_code
from inner_codes.models import CodeFamily, CodeId
from lattice.geometry import build_lattice
from lattice.models import Direction
from .models import FaultKind, ScheduleVariant
from .propagation import (
    VALIDATION_SIZE, Fault, FaultReport, Neighborhood, analyse_fault, format_pattern, has_weight_profile,
    propagate, representative_neighborhood, z_pattern,
)
from .schedules import schedule_for

CENTER_QUBIT = 0

ROWS_BEFORE_GATE = {
    str(CodeFamily.TYPE_I): frozenset({2, 3, 4}),
    str(CodeId.C211): frozenset({2, 3, 4, 8}),
    str(CodeId.C311_1): frozenset({2, 3, 4, 5, 6, 12}),
}

_ENTRY = re.compile(r"Z_([A-Z])(\d*)")


class TableRow(NamedTuple):
    step: int
    direction: str
    # step boundary the row's faults are injected at
    boundary: int
    faults: Dict[str, Fault]
    reports: Dict[str, FaultReport]


def rows_before_gate(code) -> frozenset:
    if str(code.name) in ROWS_BEFORE_GATE:
        return ROWS_BEFORE_GATE[str(code.name)]
    if code.family == CodeFamily.TYPE_I:
        return ROWS_BEFORE_GATE[str(CodeFamily.TYPE_I)]
    return frozenset()


def row_faults(schedule, hood: Neighborhood, step: int) -> Dict[str, Fault]:
    """The X_C, X_C Z_D and Z_D faults of row `step`, or {} when C1 is idle at that step."""
    gate = next((g for g in schedule.local_steps[step - 1] if g.dual_qubit == CENTER_QUBIT), None)
    if gate is None:
        return {}
    partner = int(hood.layout.neighbors[hood.center, gate.direction])
    label = Direction(gate.direction).label
    boundary = step - 1 if step in rows_before_gate(schedule.code) else step
    x = (hood.center, gate.dual_qubit, "X")
    z = (partner, gate.primal_qubit, "Z")
    return {
        "X_C": Fault(FaultKind.SINGLE, boundary, (x,)),
        f"X_CZ_{label}": Fault(FaultKind.TWO_QUBIT, boundary, (x, z)),
        f"Z_{label}": Fault(FaultKind.SINGLE, boundary, (z,)),
    }


def effective_error_table(code, variant=ScheduleVariant.FIG5, layout=None, engine=None) -> List[TableRow]:
    code = get_code(code) if isinstance(code, str) else code
    layout = layout or build_lattice(VALIDATION_SIZE)
    schedule = schedule_for(code, layout, variant)
    hood = representative_neighborhood(layout)

    rows = []
    for step in range(1, schedule.n_steps + 1):
        faults = row_faults(schedule, hood, step)
        if not faults:
            continue
        direction = next(name for name in faults if name.startswith("Z_"))[2:]
        reports = {name: analyse_fault(fault, schedule, hood, engine) for name, fault in faults.items()}
        rows.append(TableRow(step, direction, faults["X_C"].step, faults, reports))
    return rows


def parse_entry(text: str) -> Dict[str, int]:
    """
    "Z_W12, Z_E" -> {"W": 2, "E": 1}: Z errors per block label.  The digits
    only count qubits.  An empty entry is the identity.
    """
    return {label: len(qubits) or 1 for label, qubits in _ENTRY.findall(text)}


def entry_matches(schedule, hood: Neighborhood, fault: Fault, text: str) -> bool:
    """Whether the effective error of `fault` can be written as the table entry `text`."""
    code = schedule.code
    end = propagate(fault.frame(schedule.n_qubits, code.s), schedule, from_step=fault.step)
    blocks = {label: block for block, label in hood.labels.items()}
    profile = {blocks[label]: weight for label, weight in parse_entry(text).items()}
    return has_weight_profile(hood.layout, code, z_pattern(end, code), profile)


def as_text(code_name, rows: List[TableRow]) -> str:
    lines = [f"{code_name}: effective errors per gate of C1", f"{'step':>4}  {'fault':<8} effective"]
    for row in rows:
        for name, report in row.reports.items():
            lines.append(f"{row.step:>4}  {name:<8} {format_pattern(report.canonical)}")
    return "\n".join(lines)
