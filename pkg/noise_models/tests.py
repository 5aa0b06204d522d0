from types import SimpleNamespace

import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ConfigurationError, InputError
from inner_codes.codes import get_code
from lattice.geometry import build_lattice
from .models import NoiseModel
from .rng import trial_rng
from .samplers import (
    NoiseSpec, PauliFrame, sample_biased_two_qubit, sample_erasure_pauli,
    sample_phenomenological_flips, sample_single_depolarizing, sample_two_qubit_depolarizing,
    sample_z_flips, two_qubit_paulis,
)

DRAWS = 1_000_000


class BinomialMixin:

    def assertRate(self, hits, n, expected, sigmas=5):
        observed = float(np.sum(hits)) / n
        sigma = np.sqrt(expected * (1 - expected) / n)
        self.assertLessEqual(abs(observed - expected), sigmas * sigma + 1e-12,
                             f"observed {observed:.6f}, expected {expected:.6f}")


class SingleQubitTests(BinomialMixin, SimpleTestCase):

    def test_zero_rate_leaves_frame_alone(self):
        frame = PauliFrame.zeros(100)
        sample_single_depolarizing(frame, np.arange(100), 0.0, np.random.default_rng(1))
        self.assertTrue(frame.is_identity())

    def test_marginals(self):
        frame = PauliFrame.zeros(DRAWS)
        sample_single_depolarizing(frame, np.arange(DRAWS), 0.1, np.random.default_rng(2))
        self.assertRate(frame.z, DRAWS, 0.1)
        self.assertRate(frame.x, DRAWS, 0.1)
        self.assertRate(frame.x & frame.z, DRAWS, 0.05)

    def test_maximal_rate_has_no_identity_branch(self):
        frame = PauliFrame.zeros(10_000)
        sample_single_depolarizing(frame, np.arange(10_000), 2 / 3, np.random.default_rng(3))
        self.assertTrue((frame.x | frame.z).all())

    def test_out_of_range(self):
        frame = PauliFrame.zeros(4)
        with self.assertRaises(ConfigurationError):
            sample_single_depolarizing(frame, 0, 0.7, np.random.default_rng(0))
        with self.assertRaises(ConfigurationError):
            sample_single_depolarizing(frame, 0, -0.1, np.random.default_rng(0))


class PairSamplingMixin:

    def _sample(self, p, seed, sampler=sample_two_qubit_depolarizing):
        frame = PauliFrame.zeros(2 * DRAWS)
        a = np.arange(DRAWS)
        sampler(frame, a, a + DRAWS, p, np.random.default_rng(seed))
        return frame.x[:DRAWS], frame.z[:DRAWS], frame.x[DRAWS:], frame.z[DRAWS:]


class TwoQubitTests(BinomialMixin, PairSamplingMixin, SimpleTestCase):

    def test_zero_rate(self):
        xa, za, xb, zb = self._sample(0.0, 4)
        self.assertFalse(xa.any() or za.any() or xb.any() or zb.any())

    def test_zz_frequency(self):
        xa, za, xb, zb = self._sample(0.15, 5)
        zz = za & zb & (1 - xa) & (1 - xb)
        self.assertRate(zz, DRAWS, 0.01)

    def test_outcomes_are_uniform(self):
        xa, za, xb, zb = self._sample(0.3, 6)
        label = xa.astype(int) | (za.astype(int) << 1) | (xb.astype(int) << 2) | (zb.astype(int) << 3)
        counts = np.bincount(label, minlength=16)
        self.assertRate(np.ones(counts[0]), DRAWS, 0.7)
        for k in range(1, 16):
            self.assertRate(np.ones(counts[k]), DRAWS, 0.02)

    def test_label_decoding(self):
        self.assertEqual([int(v) for v in two_qubit_paulis(10)], [0, 1, 0, 1])
        self.assertEqual([int(v) for v in two_qubit_paulis(5)], [1, 0, 1, 0])

    def test_distinct_qubits_required(self):
        with self.assertRaises(InputError):
            sample_two_qubit_depolarizing(PauliFrame.zeros(4), [1], [1], 0.1, np.random.default_rng(0))
        with self.assertRaises(ConfigurationError):
            sample_two_qubit_depolarizing(PauliFrame.zeros(4), [0], [1], 0.95, np.random.default_rng(0))


class BiasedTests(BinomialMixin, PairSamplingMixin, SimpleTestCase):

    def test_marginal_z_rate(self):
        xa, za, xb, zb = self._sample(0.3, 7, sample_biased_two_qubit)
        self.assertRate(za, DRAWS, 0.2)
        self.assertRate(zb, DRAWS, 0.2)
        self.assertRate(za & zb, DRAWS, 0.1)

    def test_never_sets_x(self):
        xa, za, xb, zb = self._sample(0.9, 8, sample_biased_two_qubit)
        self.assertFalse(xa.any() or xb.any())

    def test_z_flips(self):
        frame = PauliFrame.zeros(DRAWS)
        sample_z_flips(frame, np.arange(DRAWS), 0.04, np.random.default_rng(9))
        self.assertRate(frame.z, DRAWS, 0.04)
        self.assertFalse(frame.x.any())


class PhenomenologicalTests(BinomialMixin, SimpleTestCase):

    def test_zero_rate(self):
        layout = build_lattice(3)
        flips = sample_phenomenological_flips(layout, get_code("713"), 0.0, np.random.default_rng(1))
        self.assertEqual(flips.shape, (81, 7))
        self.assertFalse(flips.any())

    def test_empirical_rate(self):
        fake = SimpleNamespace(n_primal=DRAWS)
        flips = sample_phenomenological_flips(fake, get_code("cubic"), 0.03, np.random.default_rng(2))
        self.assertRate(flips, DRAWS, 0.03)

    def test_heterogeneous_rates(self):
        fake = SimpleNamespace(n_primal=DRAWS // 2)
        flips = sample_phenomenological_flips(fake, get_code("211"), [0.1, 0.2], np.random.default_rng(3))
        self.assertRate(flips[:, 0], DRAWS // 2, 0.1)
        self.assertRate(flips[:, 1], DRAWS // 2, 0.2)

    def test_wrong_rate_vector(self):
        with self.assertRaises(InputError):
            sample_phenomenological_flips(build_lattice(2), get_code("211"), [0.1, 0.1, 0.1],
                                          np.random.default_rng(0))

    def test_cubic_equals_reference_bernoulli_stream(self):
        layout = build_lattice(5)
        flips = sample_phenomenological_flips(layout, get_code("cubic"), 0.03, trial_rng(11, 4))
        reference = trial_rng(11, 4).random(layout.n_primal) < 0.03
        np.testing.assert_array_equal(flips[:, 0], reference.astype(np.uint8))

    def test_erasure_pauli(self):
        fake = SimpleNamespace(n_primal=DRAWS)
        flips, erased = sample_erasure_pauli(fake, 0.02, 0.18, np.random.default_rng(4))
        self.assertRate(erased, DRAWS, 0.18)
        kept = ~erased
        self.assertRate(flips[kept], int(kept.sum()), 0.02)
        self.assertRate(flips[erased], int(erased.sum()), 0.5)


class NoiseSpecTests(SimpleTestCase):

    def test_model_limits(self):
        NoiseSpec("phenomenological", 2 / 3)
        with self.assertRaises(ConfigurationError):
            NoiseSpec("phenomenological", 0.7)
        NoiseSpec("biased_z", 0.9)
        with self.assertRaises(ConfigurationError):
            NoiseSpec("biased_z", 1.2)
        with self.assertRaises(ConfigurationError):
            NoiseSpec("thermal", 0.1)

    def test_overrides_only_for_biased(self):
        spec = NoiseSpec("biased_z", 0.01, {"cz": 0.02})
        self.assertEqual(spec.rate_for("cz"), 0.02)
        self.assertEqual(spec.rate_for("single_qubit"), 0.01)
        with self.assertRaises(ConfigurationError):
            NoiseSpec("phenomenological", 0.01, {"cz": 0.02})
        with self.assertRaises(ConfigurationError):
            NoiseSpec("biased_z", 0.01, {"measurement": 0.02})

    def test_erasure_rates(self):
        spec = NoiseSpec("erasure_pauli", 0.1, erasure_rates=(0.012, 0.18))
        self.assertEqual(spec.model, NoiseModel.ERASURE_PAULI)
        self.assertEqual(spec.to_dict()["erasure_rates"], [0.012, 0.18])
        with self.assertRaises(ConfigurationError):
            NoiseSpec("phenomenological", 0.1, erasure_rates=(0.1, 0.1))

    def test_with_p_keeps_overrides(self):
        spec = NoiseSpec("biased_z", 0.01, {"cz": 0.02}).with_p(0.03)
        self.assertEqual(spec.p, 0.03)
        self.assertEqual(spec.rate_for("cz"), 0.02)


class TrialRngTests(SimpleTestCase):

    def test_streams_are_reproducible_and_distinct(self):
        first = trial_rng(20240601, 17).random(8)
        again = trial_rng(20240601, 17).random(8)
        other = trial_rng(20240601, 18).random(8)
        np.testing.assert_array_equal(first, again)
        self.assertFalse(np.array_equal(first, other))
