import json
import os
import tempfile
from io import StringIO
from types import SimpleNamespace

import numpy as np
from django.core.management import CommandError, call_command
from django.test import SimpleTestCase, override_settings

from core.exceptions import ConfigurationError
from decoder.pipeline import inner_stage
from inner_codes.codes import get_code
from noise_models.samplers import NoiseSpec, sample_phenomenological_flips
from .engine import TrialConfig, TrialStats, run_chunk, run_point, run_trial, wilson_interval
from .models import Backend, BiasedPath
from .results import COLUMNS, append_result, completed_points, load_results, point_key, result_row
from .serializers import RunConfigSerializer
from .tasks import run_trial_chunk


def _config(code="cubic", model="phenomenological", p=0.0, L=3, trials=20, seed=7, **kwargs):
    return TrialConfig(code, NoiseSpec(model, p), L, trials=trials, master_seed=seed, **kwargs)


class WilsonTests(SimpleTestCase):

    def test_zero_failures(self):
        low, high = wilson_interval(0, 1000)
        self.assertEqual(low, 0.0)
        self.assertLess(high, 0.004)

    def test_bounds_bracket_the_rate(self):
        for failures, trials in [(0, 1), (1, 1), (3, 10), (500, 1000), (999, 1000)]:
            stats = TrialStats.from_counts(trials, failures)
            self.assertLessEqual(0.0, stats.ci_low)
            self.assertLessEqual(stats.ci_low, stats.p_L)
            self.assertLessEqual(stats.p_L, stats.ci_high)
            self.assertLessEqual(stats.ci_high, 1.0)

    def test_needs_a_trial(self):
        with self.assertRaises(ConfigurationError):
            wilson_interval(0, 0)


class TrialConfigTests(SimpleTestCase):

    def test_validation(self):
        with self.assertRaises(ConfigurationError):
            _config(trials=0)
        with self.assertRaises(ConfigurationError):
            _config(L=1)
        with self.assertRaises(ConfigurationError):
            _config(code="513")
        with self.assertRaises(ConfigurationError):
            _config(code="211", model="erasure_pauli", p=0.05)

    def test_dict_round_trip_keeps_the_point(self):
        config = TrialConfig("311_2", NoiseSpec("biased_z", 0.01, {"cz": 0.02}), 4, trials=9,
                             master_seed=3, biased_path=BiasedPath.CIRCUIT)
        again = TrialConfig.from_dict(json.loads(json.dumps(config.to_dict())))
        self.assertEqual(again.key, config.key)
        self.assertEqual(again.noise.rate_for("cz"), 0.02)
        self.assertEqual(again.biased_path, BiasedPath.CIRCUIT)


class RunTrialTests(SimpleTestCase):

    def test_zero_noise_never_fails(self):
        cases = [
            ("cubic", "phenomenological"), ("713", "phenomenological"), ("211", "circuit_level"),
            ("311_2", "circuit_level"), ("311_2", "biased_z"), ("cubic", "erasure_pauli"),
        ]
        for code, model in cases:
            config = _config(code, model, 0.0, L=3)
            self.assertFalse(any(run_trial(config, t) for t in range(5)), f"{code}/{model}")
        circuit = _config("211", "biased_z", 0.0, L=3, biased_path=BiasedPath.CIRCUIT)
        self.assertFalse(run_trial(circuit, 0))

    def test_rough_boundary(self):
        config = _config("211", "circuit_level", 0.0, L=3, boundary="periodic_xy_rough_z")
        self.assertFalse(run_trial(config, 0))

    def test_trials_are_reproducible(self):
        config = _config("211", "circuit_level", 0.01, L=3)
        self.assertEqual([run_trial(config, t) for t in range(30)],
                         [run_trial(config, t) for t in range(30)])

    def test_supercritical_cubic_fails_often(self):
        stats = run_point(_config("cubic", "phenomenological", 0.06, L=5, trials=400))
        self.assertGreater(stats.p_L, 0.2)

    def test_subcritical_cubic_is_suppressed(self):
        small = run_point(_config("cubic", "phenomenological", 0.015, L=3, trials=2000))
        large = run_point(_config("cubic", "phenomenological", 0.015, L=7, trials=2000))
        self.assertLess(large.p_L, small.p_L)


class ConversionIdentityTests(SimpleTestCase):
    """A [[2,1,1]] block is erased with probability 2p(1-p) and silently flipped with p^2."""

    BLOCKS = 1_000_000

    def test_block_outcome_frequencies(self):
        fake = SimpleNamespace(n_primal=self.BLOCKS)
        code = get_code("211")
        for seed, p in enumerate((0.02, 0.05, 0.08)):
            flips = sample_phenomenological_flips(fake, code, p, np.random.default_rng(seed))
            readout = inner_stage(fake, code, flips)
            silent = readout.logical_flip.astype(bool) & ~readout.erased
            for observed, expected in ((readout.erased, 2 * p * (1 - p)), (silent, p * p)):
                rate = observed.mean()
                sigma = np.sqrt(expected * (1 - expected) / self.BLOCKS)
                self.assertLessEqual(abs(rate - expected), 5 * sigma)

    def test_211_matches_cubic_with_injected_rates(self):
        for p in (0.05, 0.07, 0.09):
            direct = run_point(_config("211", "phenomenological", p, L=5, trials=1500, seed=1))
            injected = run_point(_config("cubic", "erasure_pauli", p, L=5, trials=1500, seed=2))
            self.assertLessEqual(direct.ci_low, injected.ci_high)
            self.assertLessEqual(injected.ci_low, direct.ci_high)


class RunPointTests(SimpleTestCase):

    def test_zero_noise_point(self):
        stats = run_point(_config(trials=1000))
        self.assertEqual(stats.failures, 0)
        self.assertLess(stats.ci_high, 0.004)

    def test_independent_of_chunking_and_backend(self):
        config = _config("211", "phenomenological", 0.1, L=3, trials=60)
        serial = run_point(config, chunk_size=60)
        self.assertEqual(run_point(config, chunk_size=7).failures, serial.failures)
        self.assertEqual(run_point(config, threads=3, chunk_size=11).failures, serial.failures)
        self.assertEqual(run_point(config, backend=Backend.CELERY, chunk_size=25).failures, serial.failures)
        self.assertEqual(sum(run_chunk(config, a, b) for a, b in [(0, 13), (13, 60)]), serial.failures)

    @override_settings(BCC_CHUNK_SIZE=5)
    def test_chunk_size_from_settings(self):
        config = _config("cubic", "phenomenological", 0.04, L=3, trials=23)
        self.assertEqual(run_point(config).failures, run_point(config, chunk_size=23).failures)

    def test_celery_task(self):
        config = _config("cubic", "phenomenological", 0.04, L=3, trials=10)
        self.assertEqual(run_trial_chunk.apply(args=(config.to_dict(), 0, 10)).get(),
                         run_chunk(config, 0, 10))

    def test_seed_changes_the_sample(self):
        counts = {run_point(_config("cubic", "phenomenological", 0.08, L=3, trials=200, seed=s)).failures
                  for s in range(4)}
        self.assertGreater(len(counts), 1)


class ResultsTests(SimpleTestCase):

    def test_append_and_resume_keys(self):
        config = _config(p=0.0275)
        row = result_row(config, TrialStats.from_counts(20, 3))
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "nested", "results.csv")
            self.assertTrue(load_results(path).empty)
            append_result(path, row)
            append_result(path, result_row(_config(p=0.03), TrialStats.from_counts(20, 4)))
            frame = load_results(path)
            with open(path) as fh:
                header = fh.readline().strip()
        self.assertEqual(header, ",".join(COLUMNS))
        self.assertEqual(len(frame), 2)
        self.assertIn(point_key(*config.key), completed_points(frame))
        self.assertEqual(frame.loc[0, "scheme"], "cubic")

    def test_numeric_scheme_ids_stay_text(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "results.csv")
            config = _config("211", p=0.05)
            append_result(path, result_row(config, TrialStats.from_counts(20, 0)))
            self.assertIn(point_key(*config.key), completed_points(load_results(path)))

    def test_resume_lookup_keeps_budget_and_seed(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "results.csv")
            config = _config(p=0.02, trials=20, seed=9)
            append_result(path, result_row(config, TrialStats.from_counts(20, 1)))
            done = completed_points(load_results(path))
        self.assertEqual(done[point_key(*config.key)], (20, 9))


class RunConfigSerializerTests(SimpleTestCase):

    def test_range_grid(self):
        serializer = RunConfigSerializer(data={
            "scheme": "cubic", "model": "phenomenological",
            "p": {"min": 0.02, "max": 0.036, "steps": 9}, "L": [5, 7, 9], "trials": 10,
        })
        self.assertTrue(serializer.is_valid(), serializer.errors)
        configs = serializer.trial_configs(1)
        self.assertEqual(len(configs), 27)
        self.assertAlmostEqual(configs[-1].noise.p, 0.036)

    def test_several_schemes(self):
        serializer = RunConfigSerializer(data={
            "schemes": ["211", "713"], "model": "circuit_level", "p": [0.005], "L": [3], "trials": 5,
        })
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual([c.code for c in serializer.trial_configs(1)], ["211", "713"])

    def test_rejections(self):
        base = {"scheme": "cubic", "model": "phenomenological", "p": [0.01], "L": [3], "trials": 5}
        bad = [
            {"p": [0.9]},
            {"p": []},
            {"p": {"min": 0.03, "max": 0.01, "steps": 3}},
            {"L": [1]},
            {"trials": 0},
            {"scheme": "513"},
            {"model": "thermal"},
            {"scheme": "211", "model": "erasure_pauli"},
            {"per_location_overrides": {"cz": 0.1}},
        ]
        for change in bad:
            serializer = RunConfigSerializer(data={**base, **change})
            self.assertFalse(serializer.is_valid(), change)
        missing = dict(base)
        del missing["scheme"]
        self.assertFalse(RunConfigSerializer(data=missing).is_valid())


class SimulateCommandTests(SimpleTestCase):

    def _run(self, tmp, config, **options):
        path = os.path.join(tmp, "run.json")
        with open(path, "w") as fh:
            json.dump(config, fh)
        out = StringIO()
        call_command("simulate", config=path, stdout=out, **options)
        return out.getvalue()

    def test_grid_resume_and_byte_stability(self):
        config = {"scheme": "cubic", "model": "phenomenological", "p": [0.0, 0.02, 0.04],
                  "L": [3, 4], "trials": 30, "master_seed": 5}
        with tempfile.TemporaryDirectory() as tmp:
            first, second = os.path.join(tmp, "a.csv"), os.path.join(tmp, "b.csv")
            self.assertIn("6 new rows", self._run(tmp, config, out=first))
            self.assertIn("0 new rows", self._run(tmp, config, out=first))
            self._run(tmp, config, out=second, threads=2)
            with open(first, "rb") as a, open(second, "rb") as b:
                self.assertEqual(a.read(), b.read())
            frame = load_results(first)
        self.assertEqual(len(frame), 6)
        self.assertTrue((frame.loc[frame["p"] == 0.0, "failures"] == 0).all())
        self.assertTrue((frame["master_seed"] == 5).all())

    def test_rerun_with_new_budget_warns_on_skipped_points(self):
        config = {"scheme": "cubic", "model": "phenomenological", "p": [0.02], "L": [3],
                  "trials": 10, "master_seed": 5}
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "a.csv")
            self._run(tmp, config, out=out)
            self.assertNotIn("different trials budget", self._run(tmp, config, out=out))
            with self.assertLogs("montecarlo.management.commands.simulate", level="WARNING") as logs:
                text = self._run(tmp, {**config, "trials": 40}, out=out)
            frame = load_results(out)
        self.assertIn("0 new rows", text)
        self.assertIn("1 skipped points were stored with a different trials budget or seed", text)
        self.assertIn("requested trials=40", logs.output[0])
        self.assertEqual(frame["trials"].tolist(), [10])

    def test_yaml_config_and_output_key(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, "yaml.csv")
            path = os.path.join(tmp, "run.yaml")
            with open(path, "w") as fh:
                fh.write(f"scheme: '211'\nmodel: phenomenological\np: 0.05\nL: [3]\ntrials: 10\noutput: {out}\n")
            call_command("simulate", config=path, stdout=StringIO())
            self.assertEqual(len(load_results(out)), 1)

    def test_bad_config_exits_2(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(CommandError) as ctx:
                self._run(tmp, {"scheme": "cubic", "model": "phenomenological", "p": [0.9],
                                "L": [3], "trials": 5}, out=os.path.join(tmp, "x.csv"))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_config_exits_3(self):
        with self.assertRaises(CommandError) as ctx:
            call_command("simulate", config="/nonexistent/run.json", out="/tmp/unused.csv")
        self.assertEqual(ctx.exception.returncode, 3)
