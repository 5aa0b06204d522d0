import json
import os
import tempfile
from io import StringIO

import numpy as np
from django.core.management import CommandError
from django.test import SimpleTestCase, override_settings
from rest_framework import serializers

from .commands import ENVIRONMENT_ERROR, USER_ERROR, SimulationCommand, flatten_error, translate_errors
from .exceptions import ConfigurationError, FitError, InputError, InvariantError
from .utils import as_bits, dump_json, gf2_span, in_span, load_structured


class BitsTests(SimpleTestCase):

    def test_as_bits(self):
        np.testing.assert_array_equal(as_bits([1, 0, 3]), [1, 0, 1])
        with self.assertRaises(InputError):
            as_bits([1, 0], length=3)

    def test_span(self):
        rows = [[1, 1, 0], [0, 1, 1]]
        self.assertEqual(len(gf2_span(rows)), 4)
        self.assertTrue(in_span([1, 0, 1], rows))
        self.assertTrue(in_span([0, 0, 0], rows))
        self.assertFalse(in_span([1, 0, 0], rows))


class StructuredFileTests(SimpleTestCase):

    def _write(self, tmp, name, text):
        path = os.path.join(tmp, name)
        with open(path, "w") as fh:
            fh.write(text)
        return path

    def test_json_and_yaml(self):
        with tempfile.TemporaryDirectory() as tmp:
            self.assertEqual(load_structured(self._write(tmp, "a.json", '{"L": [3]}')), {"L": [3]})
            self.assertEqual(load_structured(self._write(tmp, "a.yml", "scheme: '211'\n")), {"scheme": "211"})

    def test_rejections(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ConfigurationError):
                load_structured(self._write(tmp, "bad.json", "{L: "))
            with self.assertRaises(ConfigurationError):
                load_structured(self._write(tmp, "list.yaml", "- 1\n- 2\n"))
        with self.assertRaises(OSError):
            load_structured("/nonexistent/run.json")

    def test_dump_numpy(self):
        text = dump_json({"n": np.int64(3), "x": np.float32(0.5), "v": np.arange(2)})
        self.assertEqual(json.loads(text), {"n": 3, "x": 0.5, "v": [0, 1]})
        with self.assertRaises(TypeError):
            dump_json({"s": {1, 2}})


class TranslateErrorsTests(SimpleTestCase):

    def _code(self, exc):
        @translate_errors
        def fail():
            raise exc
        with self.assertRaises(CommandError) as ctx:
            fail()
        return ctx.exception.returncode

    def test_exit_codes(self):
        for exc in (ConfigurationError("x"), InputError("x"), FitError("x", {"n": 1}),
                    serializers.ValidationError({"p": ["bad"]})):
            self.assertEqual(self._code(exc), USER_ERROR)
        with self.assertLogs("core.commands", level="ERROR"):
            self.assertEqual(self._code(FileNotFoundError("gone")), ENVIRONMENT_ERROR)

    def test_invariant_errors_are_not_user_errors(self):
        @translate_errors
        def fail():
            raise InvariantError("odd parity")
        with self.assertRaises(InvariantError):
            fail()

    def test_messages(self):
        self.assertEqual(flatten_error({"p": ["too big"], "L": {"0": ["small"]}}), "p: too big; L: 0: small")
        self.assertEqual(str(FitError("no fit", {"distinct_L": 2})), "no fit (distinct_L=2)")


class SimulationCommandTests(SimpleTestCase):

    @override_settings(BCC_DEFAULT_SEED=99, BCC_THREADS=3)
    def test_defaults_from_settings(self):
        self.assertEqual(SimulationCommand.seed_from({"seed": None}), 99)
        self.assertEqual(SimulationCommand.seed_from({"seed": 0}), 0)
        self.assertEqual(SimulationCommand.threads_from({}), 3)
        with self.assertRaises(ConfigurationError):
            SimulationCommand.threads_from({"threads": 0})

    def test_shared_flags(self):
        parser = SimulationCommand(stdout=StringIO()).create_parser("manage.py", "simulate")
        options = parser.parse_args(["--seed", "5", "--threads", "2"])
        self.assertEqual((options.seed, options.threads), (5, 2))
