import itertools

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ConfigurationError, InputError
from .codes import (
    builtin_codes, decode_blocks, get_code, inner_decode, inner_syndrome,
    validate_code, z_reduction_table,
)


class RegistryTests(SimpleTestCase):

    def test_six_codes(self):
        self.assertEqual(set(builtin_codes()), {"cubic", "211", "311_1", "311_2", "4112", "713"})

    def test_registry_is_read_only(self):
        with self.assertRaises(TypeError):
            builtin_codes()["extra"] = get_code("211")
        with self.assertRaises(ValueError):
            get_code("211").x_checks[0, 0] = 0

    def test_lookup_constants(self):
        c211 = get_code("211")
        self.assertEqual(c211.s, 2)
        self.assertEqual(c211.x_checks.tolist(), [[1, 1]])
        self.assertEqual(c211.logical_x_support.tolist(), [1, 0])

        c311 = get_code("311_2")
        self.assertEqual(c311.s, 3)
        self.assertEqual(c311.x_checks.tolist(), [[1, 1, 1]])
        self.assertEqual(c311.logical_x_support.tolist(), [1, 0, 0])

        cubic = get_code("cubic")
        self.assertEqual(cubic.s, 1)
        self.assertEqual(cubic.x_checks.shape[0], 0)
        self.assertEqual(cubic.logical_x_support.tolist(), [1])

    def test_311_2_pattern_is_the_drawn_circuit_relabelled(self):
        drawn = [(1, 1), (2, 3), (3, 2), (3, 3)]
        pattern = np.zeros((3, 3), dtype=np.uint8)
        for v, u in drawn:
            pattern[v % 3, u % 3] = 1
        self.assertEqual(get_code("311_2").cz_pattern.tolist(), pattern.tolist())

    def test_4112_uses_gauge_fixed_convention(self):
        code = get_code("4112")
        self.assertEqual(code.x_checks.tolist(), [[1, 1, 0, 0], [1, 1, 1, 1]])
        self.assertEqual(code.logical_x_support.tolist(), [1, 0, 1, 0])
        self.assertEqual(code.z_logical_support.tolist(), [1, 1, 0, 0])

    def test_unknown_code(self):
        with self.assertRaises(ConfigurationError):
            get_code("913")

    def test_every_code_validates(self):
        for code in builtin_codes().values():
            validate_code(code)

    def test_logical_operators_anticommute(self):
        for code in builtin_codes().values():
            self.assertEqual(int(code.logical_x_support @ code.z_logical_support) % 2, 1, code.name)

    def test_gates_per_logical_cz(self):
        expected = {"cubic": 1, "211": 4, "311_1": 9, "311_2": 4, "4112": 4, "713": 7}
        for name, gates in expected.items():
            self.assertEqual(get_code(name).gates_per_logical_cz, gates, name)


class SyndromeTests(SimpleTestCase):

    def test_211_syndromes(self):
        code = get_code("211")
        self.assertEqual(inner_syndrome(code, [1, 0]).tolist(), [1])
        self.assertEqual(inner_syndrome(code, [1, 1]).tolist(), [0])

    def test_713_detects_qubit_five(self):
        code = get_code("713")
        flips = np.zeros(7, dtype=np.uint8)
        flips[4] = 1
        syndrome = inner_syndrome(code, flips)
        self.assertTrue(syndrome.any())
        self.assertEqual(syndrome[1], 1)

    def test_length_mismatch(self):
        with self.assertRaises(InputError):
            inner_syndrome(get_code("211"), [1, 0, 0])
        with self.assertRaises(InputError):
            inner_decode(get_code("713"), [1])


class InnerDecodeTests(SimpleTestCase):

    def test_examples(self):
        self.assertEqual(tuple(inner_decode(get_code("211"), [1, 1])), (False, 1))
        self.assertEqual(tuple(inner_decode(get_code("4112"), [1, 0, 0, 0])), (True, 1))
        for code in builtin_codes().values():
            self.assertEqual(tuple(inner_decode(code, np.zeros(code.s))), (False, 0))

    def test_every_single_z_detected(self):
        for code in builtin_codes().values():
            if code.name == "cubic":
                continue
            for q in range(code.s):
                flips = np.zeros(code.s, dtype=np.uint8)
                flips[q] = 1
                self.assertTrue(inner_decode(code, flips).detected, (code.name, q))

    def test_211_enumeration(self):
        code = get_code("211")
        detected = {f for f in itertools.product((0, 1), repeat=2) if inner_decode(code, f).detected}
        self.assertEqual(detected, {(0, 1), (1, 0)})
        self.assertEqual(inner_decode(code, (1, 1)).logical_flip, 1)

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(7)
        for code in builtin_codes().values():
            flips = rng.integers(0, 2, size=(64, code.s), dtype=np.uint8)
            detected, logical = decode_blocks(code, flips)
            for row, d, lf in zip(flips, detected, logical):
                self.assertEqual(inner_decode(code, row), (bool(d), int(lf)))


class ReductionTableTests(SimpleTestCase):

    def test_steane_weight_four_reduces_to_zero(self):
        code = get_code("713")
        table = z_reduction_table(code)
        # Z1Z2Z3Z4 is a Z check
        self.assertFalse(table[0b0001111].any())

    def test_table_preserves_syndrome_and_logical(self):
        for code in builtin_codes().values():
            table = z_reduction_table(code)
            for idx, row in enumerate(table):
                original = (idx >> np.arange(code.s)) & 1
                self.assertEqual(tuple(inner_decode(code, original)), tuple(inner_decode(code, row)))
                self.assertLessEqual(row.sum(), original.sum())
