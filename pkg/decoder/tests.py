import itertools
import json

import networkx as nx
import numpy as np
from django.test import SimpleTestCase, override_settings

from core.exceptions import ConfigurationError, DecoderInvariantError
from inner_codes.codes import get_code
from lattice.geometry import build_lattice, check_defect_graph
from lattice.models import Boundary
from .pipeline import (
    BlockReadout, cut_parity, debug_dump, decode_and_judge, erased_cycle_crosses_cut, inner_stage,
    manhattan_distance, mwpm, outer_syndrome, pair_distance,
)

ENGINES = ("pymatching", "blossom")


def _readout(layout, flips=(), erased=()):
    logical = np.zeros(layout.n_primal, dtype=np.uint8)
    logical[list(flips)] = 1
    mask = np.zeros(layout.n_primal, dtype=bool)
    mask[list(erased)] = True
    return BlockReadout(logical, mask)


def _exhaustive(nodes, weight):
    if not nodes:
        return 0
    first, rest = nodes[0], nodes[1:]
    return min(weight(first, other) + _exhaustive([n for n in rest if n != other], weight) for other in rest)


def _adjacent_checks(layout):
    """Two checks sharing primal block 0."""
    a, b = layout.block_checks[0]
    return int(a), int(b), 0


class InnerStageTests(SimpleTestCase):

    def test_clean_blocks(self):
        layout = build_lattice(3)
        readout = inner_stage(layout, get_code("211"), np.zeros((layout.n_primal, 2)))
        self.assertFalse(readout.logical_flip.any())
        self.assertFalse(readout.erased.any())

    def test_single_z_erases_one_block(self):
        layout = build_lattice(3)
        flips = np.zeros((layout.n_primal, 2), dtype=np.uint8)
        flips[5, 0] = 1
        readout = inner_stage(layout, get_code("211"), flips)
        self.assertEqual(np.flatnonzero(readout.erased).tolist(), [5])
        self.assertEqual(np.flatnonzero(readout.logical_flip).tolist(), [5])

    def test_logical_z_is_undetected(self):
        layout = build_lattice(3)
        flips = np.zeros((layout.n_primal, 2), dtype=np.uint8)
        flips[7] = 1
        readout = inner_stage(layout, get_code("211"), flips)
        self.assertFalse(readout.erased.any())
        self.assertEqual(np.flatnonzero(readout.logical_flip).tolist(), [7])


class OuterSyndromeTests(SimpleTestCase):

    def test_empty(self):
        layout = build_lattice(3)
        self.assertEqual(len(outer_syndrome(layout, _readout(layout))), 0)

    def test_single_flip_lights_its_two_checks(self):
        layout = build_lattice(3)
        defects = outer_syndrome(layout, _readout(layout, [11]))
        self.assertEqual(sorted(defects.checks.tolist()), sorted(layout.block_checks[11].tolist()))

    def test_closed_loop_is_silent(self):
        layout = build_lattice(3)
        dual = layout.dual_blocks[4]
        loop = layout.primal_ordinal[layout.neighbors[dual]]
        self.assertEqual(len(outer_syndrome(layout, _readout(layout, loop))), 0)


class DistanceTests(SimpleTestCase):

    def test_adjacent_and_same(self):
        layout = build_lattice(4)
        a, b, block = _adjacent_checks(layout)
        clean = np.zeros(layout.n_primal, dtype=bool)
        self.assertEqual(pair_distance(layout, clean, a, b), 1)
        self.assertEqual(pair_distance(layout, clean, a, a), 0)
        erased = clean.copy()
        erased[block] = True
        self.assertEqual(pair_distance(layout, erased, a, b), 0)

    def test_periodic_manhattan(self):
        layout = build_lattice(4)
        layers = layout.check_layers.tolist()
        a = layers.index([0, 0, 0])
        b = layers.index([3, 2, 1])
        self.assertEqual(manhattan_distance(layout, a, b), 1 + 2 + 1)

    def test_boundary_distance(self):
        layout = build_lattice(3, Boundary.PERIODIC_XY_ROUGH_Z)
        layers = layout.check_layers.tolist()
        middle = layers.index([0, 0, 1])
        self.assertEqual(manhattan_distance(layout, middle, layout.n_checks), 2)
        self.assertEqual(manhattan_distance(layout, middle, layout.n_checks + 1), 2)
        self.assertEqual(pair_distance(layout, np.zeros(layout.n_primal, bool),
                                       layout.n_checks, layout.n_checks + 1), 0)

    def test_graph_distance_agrees_with_manhattan_on_torus(self):
        layout = build_lattice(4)
        graph = check_defect_graph(layout)
        rng = np.random.default_rng(3)
        for _ in range(40):
            a, b = (int(v) for v in rng.choice(layout.n_checks, size=2, replace=False))
            self.assertEqual(nx.shortest_path_length(graph, a, b), manhattan_distance(layout, a, b))


class MatchingTests(SimpleTestCase):

    def test_empty_and_single_pair(self):
        self.assertEqual(mwpm([], lambda a, b: 0), [])
        self.assertEqual(mwpm([3, 9], lambda a, b: 4), [(3, 9)])

    def test_odd_parity_on_closed_lattice(self):
        with self.assertRaises(DecoderInvariantError):
            mwpm([1, 2, 3], lambda a, b: 1)

    def test_matches_exhaustive_oracle(self):
        rng = np.random.default_rng(20240601)
        for L in (3, 4):
            layout = build_lattice(L)
            for instance in range(500):
                erased = np.zeros(layout.n_primal, dtype=bool)
                if instance % 2:
                    erased[rng.choice(layout.n_primal, size=rng.integers(1, layout.n_primal // 4),
                                      replace=False)] = True
                k = int(rng.choice([2, 4, 6, 8]))
                defects = sorted(int(c) for c in rng.choice(layout.n_checks, size=k, replace=False))
                cache = {}

                def weight(a, b):
                    key = (min(a, b), max(a, b))
                    if key not in cache:
                        cache[key] = pair_distance(layout, erased, a, b)
                    return cache[key]

                pairs = mwpm(defects, weight)
                self.assertEqual(sorted(itertools.chain.from_iterable(pairs)), defects)
                self.assertEqual(sum(weight(a, b) for a, b in pairs), _exhaustive(defects, weight))

    def test_boundary_copies(self):
        # two defects far apart, each next to its own boundary
        pairs = mwpm([0, 1], lambda a, b: 10, lambda a: (1, 100 + a))
        self.assertEqual(pairs, [(0, 100), (1, 101)])


class DecodeTests(SimpleTestCase):

    def test_zero_noise(self):
        layout = build_lattice(3)
        for engine in ENGINES:
            decision = decode_and_judge(layout, _readout(layout), engine=engine)
            self.assertFalse(decision.failure)
            self.assertFalse(decision.correction.any())

    def test_correction_clears_syndrome(self):
        rng = np.random.default_rng(5)
        for boundary in Boundary.values:
            layout = build_lattice(4, boundary)
            for engine in ENGINES:
                for _ in range(30):
                    flips = (rng.random(layout.n_primal) < 0.04).astype(np.uint8)
                    erased = rng.random(layout.n_primal) < 0.1
                    readout = BlockReadout(flips, erased)
                    decision = decode_and_judge(layout, readout, engine=engine)
                    residual = outer_syndrome(layout, flips ^ decision.correction)
                    self.assertEqual(len(residual), 0)

    def test_verdict_is_cut_invariant(self):
        rng = np.random.default_rng(6)
        layout = build_lattice(4)
        for _ in range(30):
            flips = (rng.random(layout.n_primal) < 0.05).astype(np.uint8)
            readout = BlockReadout(flips, np.zeros(layout.n_primal, dtype=bool))
            decision = decode_and_judge(layout, readout, engine="blossom")
            parities = {cut_parity(layout, flips ^ decision.correction, layout.cut_at(2 * k))
                        for k in range(layout.L)}
            self.assertEqual(len(parities), 1)

    def test_non_contractible_loop_fails(self):
        layout = build_lattice(3)
        loop = [layout.primal_ordinal[layout.block_at((x, 1, 1))] for x in (0, 2, 4)]
        for engine in ENGINES:
            decision = decode_and_judge(layout, _readout(layout, loop), engine=engine)
            self.assertTrue(decision.failure)

    def test_single_flip_is_corrected(self):
        layout = build_lattice(4)
        for engine in ENGINES:
            decision = decode_and_judge(layout, _readout(layout, [17]), engine=engine)
            self.assertFalse(decision.failure)
            self.assertEqual(decision.weight, 1)

    def test_erased_flips_cost_nothing(self):
        layout = build_lattice(4)
        dual = layout.dual_blocks[9]
        faces = layout.primal_ordinal[layout.neighbors[dual]]
        for engine in ENGINES:
            decision = decode_and_judge(layout, _readout(layout, faces[:3], faces), engine=engine)
            self.assertFalse(decision.failure)
            self.assertEqual(decision.weight, 0)

    def test_rough_boundary_absorbs_a_defect(self):
        layout = build_lattice(3, Boundary.PERIODIC_XY_ROUGH_Z)
        bottom_face = int(layout.logical_cut[0])
        for engine in ENGINES:
            decision = decode_and_judge(layout, _readout(layout, [bottom_face]), engine=engine)
            self.assertEqual(len(decision.defects), 1)
            self.assertFalse(decision.failure)

    def test_unknown_engine(self):
        layout = build_lattice(2)
        with self.assertRaises(ConfigurationError):
            decode_and_judge(layout, _readout(layout), engine="union_find")

    @override_settings(BCC_DECODER_ENGINE="blossom")
    def test_engine_from_settings(self):
        layout = build_lattice(3)
        decision = decode_and_judge(layout, _readout(layout, [2]))
        self.assertEqual(len(decision.pairs), 1)

    def test_debug_dump(self):
        layout = build_lattice(3)
        readout = _readout(layout, [4], [4, 5])
        decision = decode_and_judge(layout, readout, engine="blossom")
        doc = json.loads(debug_dump(layout, readout, decision))
        self.assertEqual(doc["flips"], [4])
        self.assertEqual(doc["erasures"], [4, 5])
        self.assertEqual(doc["weight"], 0)
        self.assertFalse(doc["failure"])


class ErasedCycleTests(SimpleTestCase):

    def _faces(self, layout, coords):
        return [int(layout.primal_ordinal[layout.block_at(c)]) for c in coords]

    def test_no_erasures(self):
        layout = build_lattice(3)
        self.assertFalse(erased_cycle_crosses_cut(layout, np.zeros(layout.n_primal, dtype=bool)))

    def test_pair_straddling_the_cut(self):
        # on L=2 both x faces join the same two checks; only one lies on the cut
        layout = build_lattice(2)
        pair = self._faces(layout, [(0, 1, 1), (2, 1, 1)])
        self.assertIn(pair[0], layout.logical_cut.tolist())
        self.assertNotIn(pair[1], layout.logical_cut.tolist())
        mask = _readout(layout, erased=pair).erased
        self.assertTrue(erased_cycle_crosses_cut(layout, mask))
        # each choice of flips is a zero-cost completion with a different verdict
        verdicts = {cut_parity(layout, np.isin(np.arange(layout.n_primal), [block]).astype(np.uint8))
                    for block in pair}
        self.assertEqual(verdicts, {0, 1})

    def test_non_contractible_erased_loop(self):
        layout = build_lattice(3)
        loop = self._faces(layout, [(x, 1, 1) for x in (0, 2, 4)])
        self.assertTrue(erased_cycle_crosses_cut(layout, _readout(layout, erased=loop).erased))
        self.assertFalse(erased_cycle_crosses_cut(layout, _readout(layout, erased=loop[:2]).erased))

    def test_trivial_cycle_around_a_dual_block(self):
        layout = build_lattice(4)
        for dual in layout.dual_blocks[:40]:
            faces = layout.primal_ordinal[layout.neighbors[dual]]
            self.assertFalse(erased_cycle_crosses_cut(layout, _readout(layout, erased=faces).erased))

    def test_rough_boundaries_are_one_node(self):
        layout = build_lattice(2, Boundary.PERIODIC_XY_ROUGH_Z)
        column = self._faces(layout, [(1, 1, z) for z in (0, 2, 4)])
        self.assertTrue(erased_cycle_crosses_cut(layout, _readout(layout, erased=column).erased))
        self.assertFalse(erased_cycle_crosses_cut(layout, _readout(layout, erased=column[1:]).erased))
