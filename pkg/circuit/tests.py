import json
import os
import tempfile
from io import StringIO
from unittest import mock

import numpy as np
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase

from core.commands import CHECK_FAILED
from core.exceptions import ConfigurationError, InvariantError
from decoder.pipeline import BlockReadout, decode_and_judge
from inner_codes.codes import get_code
from inner_codes.models import CodeId
from lattice.geometry import build_lattice
from lattice.models import Boundary, Direction
from noise_models.samplers import PauliFrame
from .models import FaultKind, ScheduleVariant, Verdict
from .propagation import (
    Fault, analyse_fault, canonicalize, decoder_convertible, detectability_check, propagate,
    representative_neighborhood, search_local_pattern, z_pattern,
)
from .schedules import LocalGate, expand_pattern, local_pattern, schedule_for
from .tables import effective_error_table, entry_matches, parse_entry, row_faults, rows_before_gate

# reference rows: (step, direction, X_C, X_C Z_D, Z_D)
TYPE_I_TABLE = [
    (1, "W", "Z_W", "", "Z_W"),
    (2, "E", "Z_W", "Z_W,Z_E", "Z_E"),
    (3, "N", "Z_W,Z_E", "Z_W,Z_E,Z_N", "Z_N"),
    (4, "S", "Z_W,Z_E,Z_N", "Z_W,Z_E,Z_N,Z_S", "Z_S"),
]

C211_TABLE = [
    (1, "W", "Z_W", "", "Z_W"),
    (2, "E", "Z_W", "Z_W,Z_E", "Z_E"),
    (3, "N", "Z_W,Z_E", "Z_W,Z_E,Z_N", "Z_N"),
    (4, "S", "Z_W,Z_E,Z_N", "Z_W,Z_E,Z_N,Z_S", "Z_S"),
    (5, "W", "Z_E,Z_N,Z_S", "Z_W,Z_E,Z_N,Z_S", "Z_W"),
    (6, "E", "Z_N,Z_S", "Z_E,Z_N,Z_S", "Z_E"),
    (7, "N", "Z_S", "Z_N,Z_S", "Z_N"),
    (8, "S", "Z_S", "", "Z_S"),
]

C311_1_TABLE = [
    (1, "W", "Z_W", "", "Z_W"),
    (2, "E", "Z_W", "Z_W,Z_E", "Z_E"),
    (3, "N", "Z_W,Z_E", "Z_W,Z_E,Z_N", "Z_N"),
    (4, "S", "Z_W,Z_E,Z_N", "Z_W,Z_E,Z_N,Z_S", "Z_S"),
    (5, "W", "Z_W,Z_E,Z_N,Z_S", "Z_W12,Z_E,Z_N,Z_S", "Z_W"),
    (6, "E", "Z_W12,Z_E,Z_N,Z_S", "Z_W12,Z_E12,Z_N,Z_S", "Z_E"),
    (7, "N", "Z_W,Z_E,Z_N,Z_S12", "Z_W,Z_E,Z_N12,Z_S12", "Z_N"),
    (8, "S", "Z_W,Z_E,Z_N,Z_S", "Z_W,Z_E,Z_N,Z_S12", "Z_S"),
    (9, "W", "Z_E,Z_N,Z_S", "Z_W,Z_E,Z_N,Z_S", "Z_W"),
    (10, "E", "Z_S,Z_N", "Z_E,Z_N,Z_S", "Z_E"),
    (11, "N", "Z_S", "Z_S,Z_N", "Z_N"),
    (12, "S", "Z_S", "", "Z_S"),
]


class CircuitMixin:
    """Validation torus, its labelled neighbourhood, and a schedule per code."""

    def setUp(self):
        super().setUp()
        self.layout = build_lattice(4)
        self.hood = representative_neighborhood(self.layout)

    def schedule(self, code_id, variant=ScheduleVariant.FIG5):
        return schedule_for(get_code(code_id), self.layout, variant)

    def effective_after(self, schedule, step, paulis):
        fault = Fault(FaultKind.SINGLE if len(paulis) == 1 else FaultKind.TWO_QUBIT, step, tuple(paulis))
        return analyse_fault(fault, schedule, self.hood)


class ScheduleTests(CircuitMixin, SimpleTestCase):

    def test_step_counts(self):
        self.assertEqual(self.schedule("211").n_steps, 8)
        self.assertEqual(self.schedule("211", ScheduleVariant.NATURAL).n_steps, 8)
        self.assertEqual(self.schedule("311_1").n_steps, 12)
        self.assertEqual(self.schedule("311_2").n_steps, 8)
        for code_id in ("cubic", "4112", "713"):
            self.assertEqual(self.schedule(code_id).n_steps, 4)

    def test_gate_counts(self):
        edges = self.layout.cz_edges.shape[0]
        self.assertEqual(self.schedule("211").n_gates, 4 * edges)
        self.assertEqual(self.schedule("311_1").n_gates, 9 * edges)
        self.assertEqual(self.schedule("311_2").n_gates, 4 * edges)
        self.assertEqual(self.schedule("713").n_gates, 7 * edges)

    def test_gates_per_position(self):
        self.assertEqual(self.schedule("211").gates_per_position().tolist(), [8, 8])
        self.assertEqual(self.schedule("311_1").gates_per_position().tolist(), [12, 12, 12])
        self.assertEqual(self.schedule("311_2").gates_per_position().tolist(), [8, 4, 4])
        self.assertEqual(self.schedule("4112").gates_per_position().tolist(), [4, 4, 4, 4])

    def test_type_i_qubits_see_one_gate_per_step(self):
        schedule = self.schedule("4112")
        for gates in schedule.steps:
            self.assertEqual(gates.size, schedule.n_qubits)

    def test_collision_free_for_every_code_and_size(self):
        for L in (2, 3, 4):
            for boundary in Boundary.values:
                layout = build_lattice(L, boundary)
                for code_id in ("cubic", "211", "311_1", "311_2", "4112", "713"):
                    schedule = schedule_for(get_code(code_id), layout)
                    for gates in schedule.steps:
                        self.assertEqual(np.unique(gates).size, gates.size)

    def test_idle_qubits(self):
        schedule = self.schedule("311_2")
        idle = schedule.idle_qubits[0]
        self.assertEqual(idle.size, self.layout.n_blocks)
        self.assertEqual(set((idle % 3).tolist()), {2})
        self.assertEqual(self.schedule("211").idle_qubits[3].size, 0)

    def test_natural_only_for_211(self):
        with self.assertRaises(ConfigurationError):
            self.schedule("713", ScheduleVariant.NATURAL)
        with self.assertRaises(ConfigurationError):
            search_local_pattern("211")

    def test_broken_patterns_are_rejected(self):
        code = get_code("211")
        steps = local_pattern(code)
        with self.assertRaises(InvariantError):
            expand_pattern(code, self.layout, steps[:-1])
        clash = ((LocalGate(Direction.W, 0, 0), LocalGate(Direction.E, 0, 1)),) + steps[1:]
        with self.assertRaises(InvariantError):
            expand_pattern(code, self.layout, clash)

    def test_json_export(self):
        doc = self.schedule("211").to_dict()
        self.assertEqual(doc["n_steps"], 8)
        self.assertEqual([g["direction"] for g in doc["steps"][0]], ["W", "W"])
        self.assertEqual([(g["dual_qubit"], g["primal_qubit"]) for g in doc["steps"][4]], [(0, 1), (1, 0)])
        json.dumps(doc)


class PropagationTests(CircuitMixin, SimpleTestCase):

    def test_z_only_frames_are_unchanged(self):
        schedule = self.schedule("211")
        rng = np.random.default_rng(1)
        frame = PauliFrame(np.zeros(schedule.n_qubits), rng.integers(0, 2, schedule.n_qubits))
        out = propagate(frame, schedule)
        np.testing.assert_array_equal(out.z, frame.z)
        self.assertFalse(out.x.any())

    def test_linearity(self):
        schedule = self.schedule("311_1")
        rng = np.random.default_rng(2)
        n = schedule.n_qubits
        for step in (0, 5, 12):
            a = PauliFrame(rng.integers(0, 2, n), rng.integers(0, 2, n))
            b = PauliFrame(rng.integers(0, 2, n), rng.integers(0, 2, n))
            both = propagate(a ^ b, schedule, step)
            split = propagate(a, schedule, step) ^ propagate(b, schedule, step)
            np.testing.assert_array_equal(both.x, split.x)
            np.testing.assert_array_equal(both.z, split.z)

    def test_input_frame_is_not_mutated(self):
        schedule = self.schedule("211")
        frame = PauliFrame.zeros(schedule.n_qubits)
        frame.x[self.hood.center * 2] = 1
        propagate(frame, schedule)
        self.assertFalse(frame.z.any())

    def test_step_out_of_range(self):
        schedule = self.schedule("211")
        with self.assertRaises(ConfigurationError):
            propagate(PauliFrame.zeros(schedule.n_qubits), schedule, 9)

    def test_logical_x_before_gates_is_a_stabilizer(self):
        for code_id in ("211", "311_1", "311_2", "713"):
            code = get_code(code_id)
            schedule = self.schedule(code_id)
            frame = PauliFrame.zeros(schedule.n_qubits)
            frame.x[self.hood.center * code.s + np.flatnonzero(code.logical_x_support)] = 1
            pattern = z_pattern(propagate(frame, schedule), code)
            self.assertEqual(canonicalize(self.layout, code, pattern), {})

    def test_canonicalize_is_idempotent(self):
        code = get_code("211")
        schedule = self.schedule("211")
        for step in range(9):
            report = self.effective_after(schedule, step, [(self.hood.center, 0, "X")])
            first = canonicalize(self.layout, code, self._unlabel(report.canonical, code))
            again = canonicalize(self.layout, code, first)
            self.assertEqual({b: v.tolist() for b, v in first.items()},
                             {b: v.tolist() for b, v in again.items()})

    def _unlabel(self, labelled, code):
        blocks = {label: block for block, label in self.hood.labels.items()}
        pattern = {}
        for label, qubits in labelled.items():
            bits = np.zeros(code.s, dtype=np.uint8)
            bits[qubits] = 1
            pattern[blocks[label]] = bits
        return pattern


class EffectiveErrorTableTests(CircuitMixin, SimpleTestCase):

    def assertTable(self, code_id, table):
        schedule = self.schedule(code_id)
        for step, direction, *entries in table:
            faults = row_faults(schedule, self.hood, step)
            self.assertEqual(list(faults), ["X_C", f"X_CZ_{direction}", f"Z_{direction}"], f"{code_id} step {step}")
            for (name, fault), text in zip(faults.items(), entries):
                self.assertTrue(entry_matches(schedule, self.hood, fault, text),
                                f"{code_id} step {step}: {name} should give {text or 'I'}")

    def test_type_i_rows(self):
        self.assertTable("cubic", TYPE_I_TABLE)

    def test_211_rows(self):
        self.assertTable("211", C211_TABLE)

    def test_311_1_rows(self):
        self.assertTable("311_1", C311_1_TABLE)

    def test_rows_sit_on_either_side_of_their_gate(self):
        rows = effective_error_table("211")
        self.assertEqual([row.direction for row in rows], list("WENSWENS"))
        self.assertEqual([row.boundary for row in rows], [1, 1, 2, 3, 5, 6, 7, 7])
        self.assertEqual(rows_before_gate(get_code("713")), frozenset({2, 3, 4}))
        self.assertEqual(rows_before_gate(get_code("311_2")), frozenset())

    def test_wrong_entries_do_not_match(self):
        schedule = self.schedule("211")
        faults = row_faults(schedule, self.hood, 4)
        self.assertFalse(entry_matches(schedule, self.hood, faults["X_C"], "Z_W,Z_E,Z_N,Z_S"))
        self.assertFalse(entry_matches(schedule, self.hood, faults["X_C"], "Z_W,Z_E,Z_S"))
        self.assertFalse(entry_matches(schedule, self.hood, faults["X_CZ_S"], ""))

    def test_parse_entry(self):
        self.assertEqual(parse_entry("Z_W12, Z_E"), {"W": 2, "E": 1})
        self.assertEqual(parse_entry(""), {})

    def test_211_x_after_the_first_gate(self):
        report = self.effective_after(self.schedule("211"), 1, [(self.hood.center, 0, "X")])
        self.assertEqual(report.canonical, {"W": [0]})

    def test_211_x_at_row_4(self):
        schedule = self.schedule("211")
        fault = row_faults(schedule, self.hood, 4)["X_C"]
        self.assertEqual(fault.step, 3)
        report = analyse_fault(fault, schedule, self.hood)
        self.assertEqual(report.canonical, {"W": [0], "E": [0], "N": [0]})

    def test_311_1_x_with_west_z_at_row_5(self):
        schedule = self.schedule("311_1")
        fault = row_faults(schedule, self.hood, 5)["X_CZ_W"]
        west = int(self.layout.neighbors[self.hood.center, Direction.W])
        self.assertEqual(fault.paulis, ((self.hood.center, 0, "X"), (west, 1, "Z")))
        report = analyse_fault(fault, schedule, self.hood)
        self.assertEqual(report.canonical, {"W": [0, 1], "E": [0], "N": [0], "S": [0]})
        self.assertEqual(report.verdict, Verdict.CONVERTIBLE)

    def test_x_with_partner_z_equals_x_one_gate_earlier(self):
        for code_id in ("211", "311_1"):
            schedule = self.schedule(code_id)
            for step, local in enumerate(schedule.local_steps, start=1):
                gate = next(g for g in local if g.dual_qubit == 0)
                partner = int(self.layout.neighbors[self.hood.center, gate.direction])
                pair = self.effective_after(
                    schedule, step, [(self.hood.center, 0, "X"), (partner, gate.primal_qubit, "Z")]
                )
                earlier = self.effective_after(schedule, step - 1, [(self.hood.center, 0, "X")])
                self.assertEqual(pair.canonical, earlier.canonical, f"{code_id} gate {step}")

    def test_natural_order_leaves_logical_flips(self):
        schedule = self.schedule("211", ScheduleVariant.NATURAL)
        report = self.effective_after(schedule, 4, [(self.hood.center, 0, "X")])
        self.assertEqual(report.canonical, {"S": [0, 1], "N": [0, 1]})
        self.assertEqual(report.verdict, Verdict.NOT_CONVERTIBLE)
        self.assertEqual(report.signature["S"], {"syndrome": [0], "logical_flip": 1})


class DetectabilityTests(SimpleTestCase):

    def test_211_shipped_order_passes(self):
        report = detectability_check("211")
        self.assertTrue(report.passed)
        self.assertEqual(report.summary(), "PASS (all 1- and 2-qubit faults convertible)")

    def test_211_natural_order_fails_on_an_x_fault(self):
        report = detectability_check("211", variant=ScheduleVariant.NATURAL)
        self.assertFalse(report.passed)
        self.assertTrue(report.summary().startswith("FAIL"))
        self.assertTrue(any(f.fault.startswith("X_C") for f in report.failures))
        self.assertIn("X_C1", report.as_text(only_failures=True))

    def test_type_i_codes(self):
        self.assertTrue(detectability_check("4112").passed)
        self.assertTrue(detectability_check("713").passed)
        # no X checks: every flip is silent
        self.assertFalse(detectability_check("cubic").passed)

    def test_311_orders(self):
        self.assertTrue(detectability_check("311_1").passed)
        self.assertTrue(detectability_check("311_2").passed)

    def test_fault_enumeration_size(self):
        report = detectability_check("211")
        singles = [f for f in report.faults if f.kind == FaultKind.SINGLE]
        pairs = [f for f in report.faults if f.kind == FaultKind.TWO_QUBIT]
        # two blocks x two qubits x nine boundaries x three Paulis
        self.assertEqual(len(singles), 2 * 2 * 9 * 3)
        # sixteen gates on the centre block x fifteen Paulis
        self.assertEqual(len(pairs), 16 * 15)

    def test_search_returns_a_passing_order(self):
        steps = search_local_pattern(CodeId.C311_2)
        layout = build_lattice(4)
        schedule = expand_pattern(get_code("311_2"), layout, steps, ScheduleVariant.SEARCH)
        self.assertTrue(detectability_check("311_2", schedule=schedule, layout=layout).passed)

    def test_json_report(self):
        doc = json.loads(detectability_check("211", variant=ScheduleVariant.NATURAL).to_json())
        self.assertFalse(doc["passed"])
        self.assertEqual(doc["code"], "211")
        self.assertEqual(doc["variant"], "natural")
        verdicts = {f["verdict"] for f in doc["faults"]}
        self.assertEqual(verdicts, {"convertible", "not_convertible"})


class DecoderConvertibleTests(CircuitMixin, SimpleTestCase):

    def test_erased_pair_straddling_the_cut(self):
        layout = build_lattice(2)
        pair = [int(layout.primal_ordinal[layout.block_at(c)]) for c in ((0, 1, 1), (2, 1, 1))]
        flips = np.zeros(layout.n_primal, dtype=np.uint8)
        flips[pair[1]] = 1
        erased = np.zeros(layout.n_primal, dtype=bool)
        erased[pair] = True
        readout = BlockReadout(flips, erased)
        decision = decode_and_judge(layout, readout, engine="blossom")
        self.assertEqual(decision.weight, 0)
        self.assertFalse(decoder_convertible(layout, readout, decision))

    def test_local_erasures_keep_their_verdict(self):
        schedule = self.schedule("211")
        report = self.effective_after(schedule, 2, [(self.hood.center, 0, "X")])
        self.assertTrue(report.decoder_convertible)
        with mock.patch("circuit.propagation.erased_cycle_crosses_cut", return_value=True):
            report = self.effective_after(schedule, 2, [(self.hood.center, 0, "X")])
        self.assertFalse(report.decoder_convertible)
        self.assertEqual(report.verdict, Verdict.NOT_CONVERTIBLE)


class DetectabilityCommandTests(SimpleTestCase):

    def test_pass(self):
        out = StringIO()
        call_command("detectability", scheme="211", stdout=out)
        self.assertIn("PASS (all 1- and 2-qubit faults convertible)", out.getvalue())

    def test_fail_lists_faults_writes_json_and_exits_nonzero(self):
        out = StringIO()
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "natural.json")
            with self.assertRaises(CommandError) as ctx:
                call_command("detectability", scheme="211", schedule="natural", json_path=path, stdout=out)
            with open(path) as fh:
                doc = json.load(fh)
        self.assertEqual(ctx.exception.returncode, CHECK_FAILED)
        self.assertTrue(str(ctx.exception).startswith("FAIL"))
        self.assertFalse(doc["passed"])
        self.assertIn("X_C1", out.getvalue())

    def test_table(self):
        out = StringIO()
        call_command("detectability", scheme="211", table=True, stdout=out)
        text = out.getvalue()
        self.assertIn("211: effective errors per gate of C1", text)
        self.assertIn("X_CZ_W", text)
        self.assertIn("   8  Z_S      Z_S2", text)

    def test_unknown_scheme(self):
        with self.assertRaises(CommandError):
            call_command("detectability", scheme="513")
