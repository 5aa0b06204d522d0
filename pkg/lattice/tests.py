import numpy as np
from django.test import SimpleTestCase

from core.exceptions import ConfigurationError
from core.utils import dump_json
from .geometry import _build_lattice, build_lattice, check_defect_graph
from .models import Boundary


def _cut_parity(layout, flips, cut):
    return int(flips[cut].sum()) % 2


def _syndrome(layout, flips):
    return layout.check_matrix @ flips % 2


class TorusCountTests(SimpleTestCase):

    def test_l2_counts(self):
        layout = build_lattice(2)
        self.assertEqual(layout.n_primal, 24)
        self.assertEqual(layout.dual_blocks.size, 24)
        self.assertEqual(layout.n_checks, 8)

    def test_l3_degree_histogram(self):
        layout = build_lattice(3)
        self.assertEqual(layout.n_blocks, 162)
        degree = (layout.neighbors >= 0).sum(axis=1)
        self.assertTrue((degree == 4).all())

    def test_edges_are_bipartite_by_parity(self):
        layout = build_lattice(2)
        odd = layout.coords % 2
        for dual, primal in layout.cz_edges:
            self.assertEqual(int(odd[dual].sum()), 1)
            self.assertEqual(int(odd[primal].sum()), 2)
            # one unit apart on the wrapped grid
            delta = (layout.coords[dual] - layout.coords[primal]) % 4
            self.assertEqual(sorted(np.minimum(delta, 4 - delta).tolist()), [0, 0, 1])

    def test_every_block_plays_each_direction_once(self):
        layout = build_lattice(3)
        for primal in layout.primal_blocks[:20]:
            duals = layout.neighbors[primal]
            self.assertEqual(len(set(duals.tolist())), 4)
            for direction, dual in enumerate(duals):
                self.assertEqual(layout.neighbors[dual, direction], primal)

    def test_checks_and_blocks_incidence(self):
        layout = build_lattice(3)
        self.assertTrue((layout.check_blocks >= 0).all())
        column_sums = np.asarray(layout.check_matrix.sum(axis=0)).ravel()
        self.assertTrue((column_sums == 2).all())
        row_sums = np.asarray(layout.check_matrix.sum(axis=1)).ravel()
        self.assertTrue((row_sums == 6).all())

    def test_block_indexing_is_lexicographic_in_zyx(self):
        layout = build_lattice(2)
        keys = [(z, y, x) for x, y, z in layout.coords.tolist()]
        self.assertEqual(keys, sorted(keys))

    def test_rejects_small_or_unknown(self):
        with self.assertRaises(ConfigurationError):
            build_lattice(1)
        with self.assertRaises(ConfigurationError):
            build_lattice(3, "open")


class CheckGraphTests(SimpleTestCase):

    def test_torus_check_degree_is_six(self):
        layout = build_lattice(3)
        graph = check_defect_graph(layout)
        self.assertEqual(graph.number_of_nodes(), 27)
        self.assertTrue(all(d == 6 for _, d in graph.degree()))

    def test_edge_labels_are_a_bijection_onto_blocks(self):
        layout = build_lattice(3)
        graph = check_defect_graph(layout)
        labels = sorted(data["block"] for _, _, data in graph.edges(data=True))
        self.assertEqual(labels, list(range(layout.n_primal)))

    def test_rough_z_boundary_edges(self):
        layout = build_lattice(3, Boundary.PERIODIC_XY_ROUGH_Z)
        self.assertEqual(layout.boundary_nodes, 2)
        self.assertEqual(layout.n_checks, 27)
        graph = check_defect_graph(layout)
        bottom, top = layout.n_checks, layout.n_checks + 1
        for check in range(layout.n_checks):
            z = layout.check_coords[check, 2]
            self.assertEqual(graph.has_edge(check, bottom), z == 1)
            self.assertEqual(graph.has_edge(check, top), z == 5)
        # one boundary face per extreme check
        self.assertEqual(graph.degree(bottom), 9)
        self.assertEqual(graph.degree(top), 9)

    def test_rough_z_faces_at_extremes_touch_one_check(self):
        layout = build_lattice(3, Boundary.PERIODIC_XY_ROUGH_Z)
        column_sums = np.asarray(layout.check_matrix.sum(axis=0)).ravel()
        self.assertEqual(int((column_sums == 1).sum()), 18)


class SerializationTests(SimpleTestCase):

    def test_rebuild_is_byte_identical(self):
        for boundary in Boundary.values:
            first = dump_json(_build_lattice(3, boundary).to_dict())
            second = dump_json(_build_lattice(3, boundary).to_dict())
            self.assertEqual(first, second)

    def test_document_shape(self):
        doc = build_lattice(2).to_dict()
        self.assertEqual(len(doc["blocks"]), 48)
        self.assertEqual(len(doc["cz_edges"]), 96)
        self.assertEqual(len(doc["primal_checks"]), 8)
        self.assertEqual(doc["boundary_nodes"], 0)
        self.assertEqual({e["direction"] for e in doc["cz_edges"]}, {"W", "E", "S", "N"})

    def test_layout_is_read_only(self):
        layout = build_lattice(2)
        with self.assertRaises(ValueError):
            layout.neighbors[0, 0] = 0


class CutTests(SimpleTestCase):

    def test_closed_patterns_have_translation_invariant_cut_parity(self):
        layout = build_lattice(4)
        rng = np.random.default_rng(7)
        ordinal = layout.primal_ordinal
        for _ in range(50):
            flips = np.zeros(layout.n_primal, dtype=np.uint8)
            chosen = rng.choice(layout.dual_blocks, size=rng.integers(1, 30), replace=False)
            for dual in chosen:
                flips[ordinal[layout.neighbors[dual]]] ^= 1
            self.assertFalse(_syndrome(layout, flips).any())
            parities = {_cut_parity(layout, flips, layout.cut_at(2 * k)) for k in range(layout.L)}
            self.assertEqual(parities, {0})

    def test_non_contractible_loop_has_odd_parity(self):
        layout = build_lattice(3)
        flips = np.zeros(layout.n_primal, dtype=np.uint8)
        for x in range(0, 6, 2):
            flips[layout.primal_ordinal[layout.block_at((x, 1, 1))]] = 1
        self.assertFalse(_syndrome(layout, flips).any())
        for k in range(layout.L):
            self.assertEqual(_cut_parity(layout, flips, layout.cut_at(2 * k)), 1)

    def test_cut_size(self):
        self.assertEqual(build_lattice(3).logical_cut.size, 9)
        self.assertEqual(build_lattice(3, Boundary.PERIODIC_XY_ROUGH_Z).logical_cut.size, 9)
