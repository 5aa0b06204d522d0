import itertools
import json
import os
import tempfile
from io import StringIO
from types import SimpleNamespace
from unittest import mock

import numpy as np
import pandas as pd
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase

from circuit.schedules import schedule_for
from core.exceptions import ConfigurationError, FitError
from inner_codes.codes import get_code
from lattice.geometry import build_lattice
from montecarlo.results import COLUMNS, load_results
from noise_models.samplers import NoiseSpec
from .biased import biased_factor, biased_rates, biased_threshold, gates_per_position, is_uniform
from .models import PauliRounding, ThresholdSource
from .overhead import log_overhead_211, overhead_211, overhead_bcc
from .rates import effective_rates_211
from .references import BIASED_THRESHOLDS, PHENOMENOLOGICAL_THRESHOLDS, reference_threshold
from .scaling import fit_suppression, fit_threshold, overhead_ratio
from .serializers import FitReportSerializer
from .utils import threshold_points

TRUE_P_TH = 0.03
TRUE_NU = 1.0
TRUE_A = (0.3, 4.0, 10.0, 20.0)
SIZES = (5, 7, 9, 11)
RATES = np.linspace(0.026, 0.034, 9)


def ansatz(p, L, p_th=TRUE_P_TH, nu=TRUE_NU, A=TRUE_A):
    x = (np.asarray(p) - p_th) * np.asarray(L, dtype=float) ** (1 / nu)
    return sum(a * x ** i for i, a in enumerate(A))


def synthetic_points(noise=0.0, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for L, p in itertools.product(SIZES, RATES):
        exact = ansatz(p, L)
        sigma = noise * exact if noise else 0.002
        rows.append((p, L, exact + (rng.normal(0, sigma) if noise else 0.0), sigma))
    return pd.DataFrame(rows, columns=["p", "L", "p_L", "sigma"])


def write_rows(path, rows):
    pd.DataFrame(rows, columns=COLUMNS).to_csv(path, index=False, float_format="%.10g")


def result_rows(scheme, model, points, trials):
    rows = []
    for p, L, p_L in points:
        failures = int(round(p_L * trials))
        rows.append({
            "scheme": scheme, "model": model, "p": p, "L": L, "boundary": "torus",
            "trials": trials, "failures": failures, "p_L": failures / trials,
            "ci_low": 0.0, "ci_high": 1.0, "master_seed": 1,
        })
    return rows


class EffectiveRatesTests(SimpleTestCase):

    def test_examples(self):
        self.assertEqual(effective_rates_211(0.0), (0.0, 0.0))
        rates = effective_rates_211(0.1)
        self.assertAlmostEqual(rates.p_erasure, 0.18)
        self.assertAlmostEqual(rates.p_pauli, 0.01 / 0.82)

    def test_matches_enumeration(self):
        rng = np.random.default_rng(11)
        for p in rng.uniform(0, 0.5, 100):
            erased = silent = 0.0
            for a, b in itertools.product((0, 1), repeat=2):
                weight = (p if a else 1 - p) * (p if b else 1 - p)
                if a ^ b:
                    erased += weight
                elif a and b:
                    silent += weight
            rates = effective_rates_211(p)
            self.assertAlmostEqual(rates.p_erasure, erased, places=14)
            self.assertAlmostEqual(rates.p_pauli, silent / (1 - erased), places=14)

    def test_out_of_range(self):
        for p in (-0.1, 1.0):
            with self.assertRaises(ConfigurationError):
                effective_rates_211(p)


class ReferenceTests(SimpleTestCase):

    def test_lookup(self):
        self.assertEqual(reference_threshold("cubic"), PHENOMENOLOGICAL_THRESHOLDS["cubic"])
        self.assertEqual(reference_threshold("211", "circuit_level")[0], 0.00664)
        with self.assertRaises(ConfigurationError):
            reference_threshold("513")
        with self.assertRaises(ConfigurationError):
            reference_threshold("cubic", "erasure_pauli")


class ThresholdFitTests(SimpleTestCase):

    def test_exact_recovery(self):
        result = fit_threshold(synthetic_points(), resamples=0)
        self.assertAlmostEqual(result.p_th, TRUE_P_TH, delta=1e-5)
        self.assertAlmostEqual(result.nu, TRUE_NU, delta=1e-3)
        np.testing.assert_allclose(result.A, TRUE_A, rtol=1e-2, atol=1e-3)
        self.assertLess(result.chi2, 1e-4)
        self.assertEqual(result.n_points, len(SIZES) * len(RATES))

    def test_noisy_recovery_with_bootstrap_errors(self):
        result = fit_threshold(synthetic_points(noise=0.01, seed=3), resamples=20, seed=1)
        self.assertLess(abs(result.p_th - TRUE_P_TH), 0.0005)
        self.assertGreater(result.errors["p_th"], 0)
        self.assertGreater(result.errors["nu"], 0)
        self.assertEqual(len(result.errors["A"]), 4)

    def test_bootstrap_is_seeded(self):
        points = synthetic_points(noise=0.01, seed=4)
        first = fit_threshold(points, resamples=5, seed=2)
        second = fit_threshold(points, resamples=5, seed=2)
        self.assertEqual(first.errors, second.errors)

    def test_needs_enough_points(self):
        points = synthetic_points()
        with self.assertRaises(FitError) as ctx:
            fit_threshold(points.loc[points["L"].isin([5, 7])], resamples=0)
        self.assertEqual(ctx.exception.diagnostics["distinct_L"], 2)
        with self.assertRaises(FitError):
            fit_threshold(points.loc[points["p"].isin(RATES[:3])], resamples=0)

    def test_threshold_outside_range(self):
        edge = (SimpleNamespace(x=np.array([0.02, 1.0]), success=True, fun=0.0, message=""), np.zeros(4), 0.0)
        with mock.patch("analysis.scaling._search", return_value=edge):
            with self.assertRaises(FitError) as ctx:
                fit_threshold(synthetic_points(), resamples=0)
        self.assertEqual(ctx.exception.diagnostics["p_th"], 0.02)

    def test_report(self):
        result = fit_threshold(synthetic_points(), resamples=0, scheme="cubic", model="phenomenological")
        report = FitReportSerializer(result).data
        for key in ("p_th", "nu", "A", "errors", "n_points", "chi2"):
            self.assertIn(key, report)
        # too few resamples for a spread
        self.assertIsNone(report["errors"]["p_th"])
        self.assertEqual(report["reference"]["p_th"], 0.02936)
        self.assertEqual(report["reference"]["nu"], 0.92)
        json.dumps(report)


class ThresholdPointsTests(SimpleTestCase):

    def test_pooling_and_weights(self):
        rows = result_rows("cubic", "phenomenological", [(0.02, 5, 0.1), (0.02, 5, 0.2), (0.03, 5, 0.0)], 100)
        rows += result_rows("211", "phenomenological", [(0.02, 5, 0.5)], 100)
        frame = pd.DataFrame(rows, columns=COLUMNS)
        points = threshold_points(frame, "cubic", "phenomenological")
        self.assertEqual(len(points), 2)
        pooled = points.loc[points["p"] == 0.02].iloc[0]
        self.assertAlmostEqual(pooled["p_L"], 0.15)
        self.assertAlmostEqual(pooled["sigma"], np.sqrt(0.15 * 0.85 / 200))
        self.assertTrue((points["sigma"] > 0).all())
        self.assertTrue(threshold_points(frame, "713", "phenomenological").empty)


class SuppressionTests(SimpleTestCase):
    L = np.array([3, 5, 7, 9, 11])

    def test_exact_recovery(self):
        a, b, c = -1.0, -1.2, 0.001
        fit = fit_suppression(self.L, np.exp(a + b * self.L + c * self.L ** 3), p=1e-3)
        self.assertAlmostEqual(fit.a, a, places=8)
        self.assertAlmostEqual(fit.b, b, places=8)
        self.assertAlmostEqual(fit.c, c, places=8)
        self.assertEqual(fit.sizes, (3, 5, 7, 9, 11))

    def test_size_for_target(self):
        fit = fit_suppression(self.L, np.exp(-1.0 - 0.8 * self.L))
        self.assertAlmostEqual(fit.size_for(np.exp(-5.0)), 5.0, places=6)
        with self.assertRaises(FitError):
            # increasing curve never comes down to the target
            fit_suppression(self.L, np.exp(-8.0 + 0.5 * self.L)).size_for(np.exp(-20.0))

    def test_zero_rates_are_dropped(self):
        rates = np.exp(-1.0 - 0.8 * self.L)
        rates[-2:] = 0.0
        with self.assertRaises(FitError):
            fit_suppression(self.L, rates)

    def test_overhead_ratio(self):
        cubic = fit_suppression(self.L, np.exp(-1.0 - 0.8 * self.L), p=1e-3)
        other = fit_suppression(self.L, np.exp(-1.0 - 1.0 * self.L), p=1e-3)
        self.assertAlmostEqual(overhead_ratio("cubic", cubic, cubic, np.exp(-5.0), 1).ratio, 1.0)
        result = overhead_ratio("211", other, cubic, np.exp(-6.0), 2)
        self.assertAlmostEqual(result.size, 5.0, places=6)
        self.assertAlmostEqual(result.reference_size, 6.25, places=6)
        self.assertAlmostEqual(result.ratio, 2 * 25 / 6.25 ** 2, places=6)
        self.assertEqual(result.warnings, [])

    def test_extrapolation_warning(self):
        cubic = fit_suppression(self.L, np.exp(-1.0 - 0.8 * self.L))
        with self.assertLogs("analysis.scaling", level="WARNING"):
            result = overhead_ratio("cubic", cubic, cubic, np.exp(-30.0), 1)
        self.assertTrue(result.warnings)
        self.assertTrue(result.to_dict()["extrapolated"])


class BiasedTests(SimpleTestCase):

    def test_factors(self):
        expected = {
            "211": [20 / 3] * 2,
            "311_1": [28 / 3] * 3,
            "311_2": [20 / 3, 4, 4],
            "cubic": [4],
            "4112": [4] * 4,
            "713": [4] * 7,
        }
        for code, factor in expected.items():
            np.testing.assert_allclose(biased_factor(code), factor, err_msg=code)
        self.assertFalse(is_uniform(biased_factor("311_2")))
        self.assertTrue(is_uniform(biased_factor("211")))

    def test_schedule_agrees_with_pattern(self):
        layout = build_lattice(4)
        for name in ("211", "311_1", "311_2", "4112"):
            code = get_code(name)
            np.testing.assert_array_equal(gates_per_position(code, schedule_for(code, layout)),
                                          gates_per_position(code))

    def test_rates_with_overrides(self):
        uniform = biased_rates("211", NoiseSpec("biased_z", 0.003))
        np.testing.assert_allclose(uniform, [0.02, 0.02])
        overridden = biased_rates("cubic", NoiseSpec("biased_z", 0.003, {"cz": 0.0}))
        np.testing.assert_allclose(overridden, [4 / 3 * 0.003])

    def test_uniform_codes_divide_exactly(self):
        for code in ("cubic", "211", "311_1", "4112", "713"):
            p_th, _ = PHENOMENOLOGICAL_THRESHOLDS[code]
            result = biased_threshold(code)
            self.assertEqual(result.method, "exact")
            self.assertEqual(result.source, ThresholdSource.REFERENCE)
            self.assertAlmostEqual(result.threshold * result.factor[0], p_th, places=12)
        self.assertAlmostEqual(biased_threshold("211").threshold, 0.012051, places=6)
        self.assertAlmostEqual(biased_threshold("4112").threshold, 0.0104875, places=7)
        self.assertAlmostEqual(biased_threshold("cubic", 0.04, 0.001).error, 0.00025)

    def test_references_within_quoted_uncertainty(self):
        for code in ("cubic", "211", "4112", "713"):
            value, error = BIASED_THRESHOLDS[code]
            self.assertLess(abs(biased_threshold(code).threshold - value), max(3 * error, 0.0002), code)

    def test_non_uniform_bisection(self):
        crossing = 0.0118
        with mock.patch("analysis.biased._excess", side_effect=lambda code, p, *args: p - crossing) as excess:
            result = biased_threshold("311_2", iterations=10)
        self.assertEqual(result.method, "bisection")
        self.assertEqual(excess.call_count, 10)
        self.assertAlmostEqual(result.threshold, crossing, delta=2e-5)
        self.assertLess(result.error, 1e-5)
        # bracket: the two uniform extremes
        lo, hi = 0.0566 / (20 / 3), 0.0566 / 4
        self.assertTrue(all(lo <= p <= hi for p, _ in result.crossings))

    def test_rejects_bad_inputs(self):
        with self.assertRaises(ConfigurationError):
            biased_threshold("cubic", 0.0)
        with self.assertRaises(ConfigurationError):
            biased_threshold("311_2", sizes=(9, 5))


class OverheadTests(SimpleTestCase):

    def test_plain_cluster_examples(self):
        self.assertAlmostEqual(overhead_bcc(3, 0.01), 0.27)
        self.assertAlmostEqual(overhead_bcc(2, 0.01), 0.08)
        self.assertEqual(overhead_bcc(4, 0.0), 0.0)
        values = [overhead_bcc(7, p) for p in (1e-2, 1e-3, 1e-4, 1e-5)]
        self.assertEqual(values, sorted(values, reverse=True))

    def test_211_examples(self):
        p = 0.02
        self.assertAlmostEqual(overhead_211(1, p).value, 1 + 2 * p)
        self.assertEqual(overhead_211(1, 0.0).value, 1.0)
        self.assertEqual(overhead_211(4, 0.0).value, 0.0)
        self.assertAlmostEqual(overhead_211(2, p).value, 4 * (2 * p * p + 4 * p + 4 * p * p))
        self.assertAlmostEqual(overhead_211(2, p, PauliRounding.CEIL).value, 4 * (2 * p * p + 4 * p ** 3 + 4 * p * p))

    def test_bounds_are_ordered(self):
        for p in (1e-4, 1e-3):
            for L in range(4, 41):
                value, bound = overhead_211(L, p, PauliRounding.CEIL)
                self.assertLessEqual(value, bound, (L, p))
                self.assertLessEqual(bound, overhead_bcc(L, p), (L, p))

    def test_floor_rounding_exceeds_the_bound(self):
        value, bound = overhead_211(6, 1e-3)
        self.assertGreater(value, bound)

    def test_decreasing_in_size(self):
        for rounding, p in itertools.product(PauliRounding.values, (1e-3, 1e-2)):
            values = [overhead_211(L, p, rounding).value for L in range(6, 41, 2)]
            self.assertTrue(all(b < a for a, b in zip(values, values[1:])), (rounding, p))

    def test_large_sizes_stay_finite(self):
        value, bound = log_overhead_211(100, 1e-3)
        self.assertTrue(np.isfinite(value) and np.isfinite(bound))
        self.assertGreater(overhead_bcc(100, 1e-3), 0.0)

    def test_rejects_bad_inputs(self):
        with self.assertRaises(ConfigurationError):
            overhead_bcc(0, 0.01)
        with self.assertRaises(ConfigurationError):
            overhead_211(3, 1.0)
        with self.assertRaises(ConfigurationError):
            overhead_211(3, 0.01, "round")


class FitCommandTests(SimpleTestCase):

    def test_synthetic_csv(self):
        points = [(p, L, ansatz(p, L)) for L, p in itertools.product(SIZES, RATES)]
        with tempfile.TemporaryDirectory() as tmp:
            path, report = os.path.join(tmp, "results.csv"), os.path.join(tmp, "fit.json")
            write_rows(path, result_rows("cubic", "phenomenological", points, 10 ** 7))
            out = StringIO()
            call_command("fit", in_path=path, scheme="cubic", model="phenomenological",
                         json_path=report, resamples=4, stdout=out)
            with open(report) as fh:
                data = json.load(fh)
        self.assertIn("p_th = ", out.getvalue())
        self.assertIn("nu = ", out.getvalue())
        self.assertAlmostEqual(data["p_th"], TRUE_P_TH, delta=1e-4)
        self.assertAlmostEqual(data["nu"], TRUE_NU, delta=0.02)
        self.assertEqual(data["n_points"], 36)

    def test_insufficient_data_exits_2(self):
        points = [(p, L, ansatz(p, L)) for L, p in itertools.product((5, 7), RATES)]
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "results.csv")
            write_rows(path, result_rows("cubic", "phenomenological", points, 1000))
            for scheme in ("cubic", "211"):
                with self.assertRaises(CommandError) as ctx:
                    call_command("fit", in_path=path, scheme=scheme, model="phenomenological", stdout=StringIO())
                self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_file_has_no_data(self):
        with self.assertRaises(CommandError) as ctx:
            call_command("fit", in_path="/nonexistent/dir/results.csv", scheme="cubic",
                         model="phenomenological", stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)


class BiasedCommandTests(SimpleTestCase):

    def test_uniform_scheme(self):
        out = StringIO()
        call_command("biased", scheme="211", stdout=out)
        text = out.getvalue()
        self.assertIn("20/3", text)
        self.assertIn("1.205%", text)
        self.assertIn("exact", text)

    def test_fit_report_overrides_reference(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "fit.json")
            with open(path, "w") as fh:
                json.dump({"p_th": 0.04, "errors": {"p_th": 0.001}}, fh)
            out = StringIO()
            call_command("biased", scheme="cubic", fit_report=path, json_path=os.path.join(tmp, "b.json"),
                         stdout=out)
            with open(os.path.join(tmp, "b.json")) as fh:
                rows = json.load(fh)
        self.assertIn("1% ± 0.025", out.getvalue())
        self.assertEqual(rows[0]["source"], "fit")

    def test_fit_report_needs_scheme(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "fit.json")
            with open(path, "w") as fh:
                json.dump({"p_th": 0.04}, fh)
            with self.assertRaises(CommandError) as ctx:
                call_command("biased", fit_report=path, stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)

    def test_all_schemes(self):
        out = StringIO()
        with mock.patch("analysis.biased._excess", side_effect=lambda code, p, *args: p - 0.0118):
            call_command("biased", stdout=out)
        text = out.getvalue()
        self.assertIn("6 biased thresholds", text)
        self.assertIn("bisection", text)


class OverheadCommandTests(SimpleTestCase):

    def test_leading_order(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "overhead.csv")
            call_command("overhead", scheme="211", p=1e-3, target=1e-6, out=path, stdout=StringIO())
            row = pd.read_csv(path, dtype={"scheme": str}).iloc[0]
        self.assertEqual(row["L_scheme"], 4)
        self.assertEqual(row["L_reference"], 6)
        self.assertAlmostEqual(row["ratio"], 2 * 16 / 36)
        self.assertAlmostEqual(row["reference_ratio"], 0.68)
        self.assertEqual(row["source"], "leading_order")

    def test_from_results(self):
        points = {"cubic": -0.8, "211": -1.0}
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "results.csv")
            rows = []
            for scheme, slope in points.items():
                curve = [(1e-3, L, np.exp(-1.0 + slope * L)) for L in (3, 5, 7, 9)]
                rows += result_rows(scheme, "circuit_level", curve, 10 ** 8)
            write_rows(path, rows)
            self.assertEqual(len(load_results(path)), 8)
            out = StringIO()
            call_command("overhead", scheme="211", p=1e-3, target=float(np.exp(-6.0)), in_path=path, stdout=out)
        self.assertIn("overhead ratio 1.28", out.getvalue())

    def test_other_schemes_need_results(self):
        with self.assertRaises(CommandError) as ctx:
            call_command("overhead", scheme="713", p=1e-3, target=1e-6, stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, 2)
