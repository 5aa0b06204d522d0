"""
Two-stage decoding of the primal sublattice.

1. Inner stage: a block with a nonzero inner syndrome is erased; its logical
   outcome is still reported.
2. Outer stage: cube parities of the logical outcomes give the defects,
   which are paired by an exact minimum-weight perfect matching where
   crossing an erased block costs 0 and any other block costs 1.

The logical failure is the parity of (true flips xor correction) over the
logical cut.
"""
import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import List, NamedTuple, Optional, Tuple

import networkx as nx
import numpy as np
import pymatching
from django.conf import settings

from core.exceptions import ConfigurationError, DecoderInvariantError
from core.utils import dump_json
from inner_codes.codes import decode_blocks
from lattice.geometry import check_defect_graph
from lattice.models import Boundary
from .models import DecoderEngine

logger = logging.getLogger(__name__)


class BlockReadout(NamedTuple):
    logical_flip: np.ndarray   # (n_primal,) uint8
    erased: np.ndarray         # (n_primal,) bool


@dataclass(frozen=True)
class DefectSet:
    checks: np.ndarray
    # ids of the virtual boundary nodes that may absorb a defect
    boundary_nodes: Tuple[int, ...] = ()

    def __len__(self):
        return int(self.checks.size)


@dataclass
class Decision:
    failure: bool
    correction: np.ndarray
    # number of non-erased blocks in the correction
    weight: int
    defects: DefectSet
    pairs: Optional[List[Tuple[int, int]]] = None


# ──────────────────────────────────────────
# Stages
# ──────────────────────────────────────────
def inner_stage(layout, code, flips) -> BlockReadout:
    flips = np.asarray(flips, dtype=np.uint8).reshape(layout.n_primal, code.s)
    detected, logical = decode_blocks(code, flips)
    return BlockReadout(logical, detected.astype(bool))


def outer_syndrome(layout, readout) -> DefectSet:
    flips = readout.logical_flip if isinstance(readout, BlockReadout) else readout
    syndrome = layout.check_matrix @ np.asarray(flips, dtype=np.int64) % 2
    boundary = tuple(layout.n_checks + side for side in range(layout.boundary_nodes))
    return DefectSet(np.flatnonzero(syndrome), boundary)


def cut_parity(layout, flips, cut=None) -> int:
    cut = layout.logical_cut if cut is None else cut
    return int(np.asarray(flips)[cut].sum()) % 2


def erased_cycle_crosses_cut(layout, erased) -> bool:
    """
    True when some cycle made only of erased blocks crosses the logical cut
    an odd number of times.

    Zero-cost corrections of an erasure pattern differ by such cycles, so
    when this is False every zero-cost completion gives the same verdict.
    Both rough boundaries count as one node.
    """
    erased = np.asarray(erased, dtype=bool)
    if not erased.any():
        return False
    on_cut = np.zeros(layout.n_primal, dtype=np.uint8)
    on_cut[layout.logical_cut] = 1

    graph = nx.MultiGraph()
    for ordinal in np.flatnonzero(erased):
        a, b = (min(int(c), layout.n_checks) for c in layout.block_checks[ordinal])
        graph.add_edge(a, b, cut=int(on_cut[ordinal]))

    potential = {}
    for component in nx.connected_components(graph):
        root = min(component)
        potential[root] = 0
        for u, v, key in nx.edge_bfs(graph, root):
            expected = potential[u] ^ graph.edges[u, v, key]["cut"]
            if v not in potential:
                potential[v] = expected
            elif potential[v] != expected:
                return True
    return False


# ──────────────────────────────────────────
# Distances and paths
# ──────────────────────────────────────────
def _periodic(axis, layout):
    return layout.boundary == Boundary.TORUS or axis != 2


def manhattan_distance(layout, c1, c2) -> int:
    """Distance between two checks, or from a check to a boundary node, with no erasures."""
    if c1 >= layout.n_checks and c2 >= layout.n_checks:
        return 0
    if c1 >= layout.n_checks:
        c1, c2 = c2, c1
    q1 = layout.check_layers[c1]
    if c2 >= layout.n_checks:
        z = int(q1[2])
        return z + 1 if c2 == layout.n_checks else layout.L - z
    q2 = layout.check_layers[c2]
    total = 0
    for axis in range(3):
        delta = abs(int(q1[axis]) - int(q2[axis]))
        total += min(delta, layout.L - delta) if _periodic(axis, layout) else delta
    return total


def _edge_cost(erased):
    def cost(u, v, edges):
        return min(0 if erased[e["block"]] else 1 for e in edges.values())
    return cost


def _cheapest_block(graph, u, v, erased):
    return min((0 if erased[e["block"]] else 1, e["block"]) for e in graph[u][v].values())[1]


@lru_cache(maxsize=8)
def _graph(layout):
    return check_defect_graph(layout)


def pair_distance(layout, erased, c1, c2) -> int:
    """
    Manhattan distance when nothing is erased, otherwise the 0/1 shortest
    path in the check graph.  Boundary nodes are at distance 0 from each other.
    """
    if c1 == c2 or (c1 >= layout.n_checks and c2 >= layout.n_checks):
        return 0
    erased = np.asarray(erased, dtype=bool)
    if not erased.any():
        return manhattan_distance(layout, c1, c2)
    return int(nx.dijkstra_path_length(_graph(layout), c1, c2, weight=_edge_cost(erased)))


def _axis_path(layout, c1, c2) -> List[int]:
    """Blocks along the x-then-y-then-z Manhattan path from check c1 to c2 (or a boundary)."""
    L = layout.L
    current = [int(v) for v in layout.check_layers[c1]]
    if c2 >= layout.n_checks:
        target = list(current)
        target[2] = -1 if c2 == layout.n_checks else L
    else:
        target = [int(v) for v in layout.check_layers[c2]]

    blocks = []
    for axis in range(3):
        delta = target[axis] - current[axis]
        if _periodic(axis, layout):
            forward = delta % L
            step, count = (1, forward) if forward <= L - forward else (-1, L - forward)
        else:
            step, count = (1 if delta > 0 else -1), abs(delta)
        for _ in range(count):
            face = [2 * q + 1 for q in current]
            face[axis] += step
            blocks.append(int(layout.primal_ordinal[layout.block_at(face)]))
            current[axis] += step
    return blocks


def _graph_paths(layout, erased, defects):
    graph = _graph(layout)
    cost = _edge_cost(erased)
    distances, paths = {}, {}
    for source in defects:
        dist, path = nx.single_source_dijkstra(graph, int(source), weight=cost)
        distances[int(source)], paths[int(source)] = dist, path
    return distances, paths


def _blocks_on(graph, path, erased):
    return [_cheapest_block(graph, u, v, erased) for u, v in zip(path, path[1:])]


# ──────────────────────────────────────────
# Matching
# ──────────────────────────────────────────
def mwpm(defects, distance, boundary_distance=None) -> List[Tuple[int, int]]:
    """
    Exact minimum-weight perfect matching on the complete defect graph.

    `distance(a, b)` prices a defect pair.  With `boundary_distance(a) ->
    (weight, node)` every defect also gets a private boundary copy; the
    copies are joined to each other at weight 0.  Returns (defect, partner)
    pairs where the partner is a defect or a boundary node id.
    """
    defects = [int(d) for d in defects]
    k = len(defects)
    if k == 0:
        return []
    if boundary_distance is None and k % 2:
        raise DecoderInvariantError(f"odd number of defects ({k}) on a closed lattice")

    weights = {}
    for i, j in itertools.combinations(range(k), 2):
        weights[(i, j)] = distance(defects[i], defects[j])
    boundary = {}
    if boundary_distance is not None:
        for i in range(k):
            boundary[i] = boundary_distance(defects[i])
            weights[(i, k + i)] = boundary[i][0]
        for i, j in itertools.combinations(range(k), 2):
            weights[(k + i, k + j)] = 0

    big = max(weights.values()) + 1
    graph = nx.Graph()
    for (i, j), w in weights.items():
        graph.add_edge(i, j, weight=big - w)
    matching = nx.max_weight_matching(graph, maxcardinality=True)

    pairs = []
    for i, j in sorted(tuple(sorted(edge)) for edge in matching):
        if i >= k:
            continue
        if j >= k:
            pairs.append((defects[i], boundary[i][1]))
        else:
            pairs.append((defects[i], defects[j]))
    return pairs


@lru_cache(maxsize=8)
def _unit_matching(layout):
    return pymatching.Matching.from_check_matrix(layout.check_matrix)


def _pymatching_correction(layout, readout, defects):
    syndrome = np.zeros(layout.n_checks, dtype=np.uint8)
    syndrome[defects.checks] = 1
    erased = readout.erased
    if not erased.any():
        matching = _unit_matching(layout)
    else:
        weights = np.where(erased, 0.0, 1.0)
        if not weights.any():
            weights = np.ones_like(weights)
        matching = pymatching.Matching.from_check_matrix(layout.check_matrix, weights=weights)
    correction = matching.decode(syndrome)
    return np.asarray(correction, dtype=np.uint8), None


def _blossom_correction(layout, readout, defects):
    erased = readout.erased
    checks = [int(c) for c in defects.checks]
    correction = np.zeros(layout.n_primal, dtype=np.uint8)
    if not checks:
        return correction, []

    if not erased.any():
        def distance(a, b):
            return manhattan_distance(layout, a, b)

        def boundary_distance(a):
            return min((manhattan_distance(layout, a, node), node) for node in defects.boundary_nodes)

        def path(a, b):
            return _axis_path(layout, a, b)
    else:
        distances, paths = _graph_paths(layout, erased, checks)
        graph = _graph(layout)

        def distance(a, b):
            return distances[a][b]

        def boundary_distance(a):
            return min((distances[a][node], node) for node in defects.boundary_nodes)

        def path(a, b):
            return _blocks_on(graph, paths[a][b], erased)

    pairs = mwpm(checks, distance, boundary_distance if defects.boundary_nodes else None)
    for a, b in pairs:
        for block in path(a, b):
            correction[block] ^= 1
    return correction, pairs


_ENGINES = {
    DecoderEngine.PYMATCHING: _pymatching_correction,
    DecoderEngine.BLOSSOM: _blossom_correction,
}


def decode_and_judge(layout, readout: BlockReadout, true_flips=None, engine=None) -> Decision:
    engine = str(engine or settings.BCC_DECODER_ENGINE)
    if engine not in _ENGINES:
        raise ConfigurationError(f"unknown decoder engine {engine!r} (known: {', '.join(DecoderEngine.values)})")
    defects = outer_syndrome(layout, readout)
    if not defects.boundary_nodes and len(defects) % 2:
        raise DecoderInvariantError(f"odd number of defects ({len(defects)}) on the torus")

    correction, pairs = _ENGINES[engine](layout, readout, defects)

    residual = outer_syndrome(layout, readout.logical_flip ^ correction)
    if len(residual):
        raise DecoderInvariantError(f"correction leaves {len(residual)} defects")

    truth = readout.logical_flip if true_flips is None else np.asarray(true_flips, dtype=np.uint8)
    weight = int((correction.astype(bool) & ~readout.erased).sum())
    return Decision(
        failure=bool(cut_parity(layout, truth ^ correction)),
        correction=correction,
        weight=weight,
        defects=defects,
        pairs=pairs,
    )


def debug_dump(layout, readout: BlockReadout, decision: Decision, path=None) -> str:
    """One decoded trial as JSON, for golden tests and bug reports."""
    return dump_json({
        "L": layout.L,
        "boundary": str(layout.boundary),
        "flips": np.flatnonzero(readout.logical_flip).tolist(),
        "erasures": np.flatnonzero(readout.erased).tolist(),
        "defects": decision.defects.checks.tolist(),
        "pairs": [list(p) for p in decision.pairs] if decision.pairs is not None else None,
        "correction": np.flatnonzero(decision.correction).tolist(),
        "weight": decision.weight,
        "failure": decision.failure,
    }, path)
