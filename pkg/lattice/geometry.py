"""
bcc (Raussendorf) lattice geometry on the integer grid mod 2L.

Site types by the number of odd coordinates:

- 2 odd: primal block (face of the cubic lattice)
- 1 odd: dual block (edge)
- 3 odd: primal check (cube centre)
- 0 odd: dual check (vertex), never decoded here

Blocks are indexed lexicographically by (z, y, x).  CZ edges join a face
and an edge one unit apart.  Every dual block sees its four primal
neighbours as W/E/S/N:  for an edge along axis a, with b = a+1 and
c = a+2 (mod 3), W = -e_b, E = +e_b, S = -e_c, N = +e_c.  With that
convention every primal block also plays each role exactly once, which
makes one local gate pattern globally collision-free.
"""
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache

import networkx as nx
import numpy as np
from scipy.sparse import csc_matrix

from core.exceptions import ConfigurationError, InvariantError
from .models import Boundary, Direction

logger = logging.getLogger(__name__)

# shift of the primal neighbour relative to a dual block, per direction,
# expressed on the (b, c) axes of the dual edge
_DIRECTION_STEPS = {
    Direction.W: (1, -1),
    Direction.E: (1, +1),
    Direction.S: (2, -1),
    Direction.N: (2, +1),
}


@dataclass(frozen=True, eq=False)
class LatticeLayout:
    L: int
    boundary: str
    coords: np.ndarray          # (blocks, 3) as (x, y, z)
    is_primal: np.ndarray       # (blocks,) bool
    neighbors: np.ndarray       # (blocks, 4) block index per Direction, -1 if absent
    check_coords: np.ndarray    # (checks, 3)
    check_blocks: np.ndarray    # (checks, 6) primal ordinals
    block_checks: np.ndarray    # (primal, 2) check index, or a boundary node id
    logical_cut: np.ndarray     # primal ordinals

    # ------------------------------------------------------------------
    # Sizes and index maps
    # ------------------------------------------------------------------
    @property
    def n_blocks(self) -> int:
        return self.coords.shape[0]

    @property
    def n_checks(self) -> int:
        return self.check_coords.shape[0]

    @property
    def boundary_nodes(self) -> int:
        return 0 if self.boundary == Boundary.TORUS else 2

    @cached_property
    def primal_blocks(self) -> np.ndarray:
        return np.flatnonzero(self.is_primal)

    @cached_property
    def dual_blocks(self) -> np.ndarray:
        return np.flatnonzero(~self.is_primal)

    @property
    def n_primal(self) -> int:
        return self.primal_blocks.size

    @cached_property
    def primal_ordinal(self) -> np.ndarray:
        ordinal = np.full(self.n_blocks, -1, dtype=np.int64)
        ordinal[self.primal_blocks] = np.arange(self.n_primal)
        return ordinal

    @cached_property
    def cz_edges(self) -> np.ndarray:
        """(edges, 2) array of (dual block, primal block)."""
        duals = np.repeat(self.dual_blocks, 4)
        primals = self.neighbors[self.dual_blocks].reshape(-1)
        keep = primals >= 0
        return np.stack([duals[keep], primals[keep]], axis=1)

    @cached_property
    def cz_directions(self) -> np.ndarray:
        """Direction label of each cz_edges row (role of the primal endpoint)."""
        directions = np.tile(np.arange(4), self.dual_blocks.size)
        keep = self.neighbors[self.dual_blocks].reshape(-1) >= 0
        return directions[keep]

    def block_at(self, coord) -> int:
        coord = tuple(int(c) for c in coord)
        index = self._site_lookup.get(self._wrap(coord))
        if index is None:
            raise ConfigurationError(f"no block at {coord}")
        return index

    @cached_property
    def _site_lookup(self):
        return {tuple(int(v) for v in c): i for i, c in enumerate(self.coords)}

    def _wrap(self, coord):
        n = 2 * self.L
        x, y, z = coord
        if self.boundary == Boundary.TORUS:
            return (x % n, y % n, z % n)
        return (x % n, y % n, z)

    # ------------------------------------------------------------------
    # Matching substrate
    # ------------------------------------------------------------------
    @cached_property
    def check_matrix(self) -> csc_matrix:
        """Checks x primal blocks incidence; boundary faces have a single entry."""
        rows, cols = [], []
        for ordinal, pair in enumerate(self.block_checks):
            for check in pair:
                if check < self.n_checks:
                    rows.append(check)
                    cols.append(ordinal)
        data = np.ones(len(rows), dtype=np.uint8)
        return csc_matrix((data, (rows, cols)), shape=(self.n_checks, self.n_primal))

    @cached_property
    def check_layers(self) -> np.ndarray:
        """Check coordinates halved to cell indices in [0, L)."""
        return (self.check_coords - 1) // 2

    def cut_at(self, offset: int) -> np.ndarray:
        """
        The logical cut translated to another even coordinate along its
        normal (x on the torus, z with rough z boundaries).
        """
        axis = 0 if self.boundary == Boundary.TORUS else 2
        primal = self.coords[self.primal_blocks]
        normal = np.argmin(primal % 2, axis=1)
        return np.flatnonzero((normal == axis) & (primal[:, axis] == offset))

    def to_dict(self) -> dict:
        return {
            "L": self.L,
            "boundary": str(self.boundary),
            "blocks": [
                {"index": i, "coord": c.tolist(), "sublattice": "primal" if p else "dual"}
                for i, (c, p) in enumerate(zip(self.coords, self.is_primal))
            ],
            "cz_edges": [
                {"dual": int(d), "primal": int(p), "direction": Direction(int(k)).label}
                for (d, p), k in zip(self.cz_edges, self.cz_directions)
            ],
            "primal_checks": [
                {"coord": c.tolist(), "blocks": b[b >= 0].tolist()}
                for c, b in zip(self.check_coords, self.check_blocks)
            ],
            "logical_cut": self.logical_cut.tolist(),
            "boundary_nodes": self.boundary_nodes,
        }


# ──────────────────────────────────────────
# Construction
# ──────────────────────────────────────────
def _grid(L, boundary):
    n = 2 * L
    z_range = np.arange(n) if boundary == Boundary.TORUS else np.arange(n + 1)
    zz, yy, xx = np.meshgrid(z_range, np.arange(n), np.arange(n), indexing="ij")
    # meshgrid in (z, y, x) order keeps the flattening lexicographic in (z, y, x)
    return np.stack([xx.ravel(), yy.ravel(), zz.ravel()], axis=1)


def _lookup_table(L, boundary, coords):
    n = 2 * L
    nz = n if boundary == Boundary.TORUS else n + 1
    table = np.full((n, n, nz), -1, dtype=np.int64)
    table[coords[:, 0], coords[:, 1], coords[:, 2]] = np.arange(coords.shape[0])
    return table


def _shifted(L, boundary, coords, axis, sign):
    """Shift along one axis; returns (coords, valid mask)."""
    n = 2 * L
    out = coords.copy()
    out[:, axis] += sign
    if boundary == Boundary.TORUS or axis != 2:
        out[:, axis] %= n
        return out, np.ones(coords.shape[0], dtype=bool)
    valid = (out[:, 2] >= 0) & (out[:, 2] <= n)
    out[:, 2] = np.clip(out[:, 2], 0, n)
    return out, valid


def _lookup(table, coords, valid):
    found = table[coords[:, 0], coords[:, 1], coords[:, 2]]
    return np.where(valid, found, -1)


def build_lattice(L: int, boundary: str = Boundary.TORUS) -> LatticeLayout:
    """Build and validate the layout; cached because layouts are immutable."""
    return _cached_lattice(L, str(boundary))


@lru_cache(maxsize=16)
def _cached_lattice(L, boundary):
    return _build_lattice(L, boundary)


def _build_lattice(L, boundary=Boundary.TORUS) -> LatticeLayout:
    if not isinstance(L, (int, np.integer)) or L < 2:
        raise ConfigurationError(f"lattice size must be an integer >= 2, got {L!r}")
    if boundary not in Boundary.values:
        raise ConfigurationError(f"unknown boundary {boundary!r}")
    L = int(L)
    boundary = Boundary(boundary)

    grid = _grid(L, boundary)
    odd = (grid % 2).sum(axis=1)
    coords = grid[(odd == 1) | (odd == 2)]
    is_primal = (coords % 2).sum(axis=1) == 2
    check_coords = grid[odd == 3]

    blocks = _lookup_table(L, boundary, coords)
    checks = _lookup_table(L, boundary, check_coords)

    neighbors = np.full((coords.shape[0], 4), -1, dtype=np.int64)

    # dual blocks: primal neighbour in direction k sits at d + sign * e_axis
    dual = np.flatnonzero(~is_primal)
    dual_axis = np.argmax(coords[dual] % 2, axis=1)
    for direction, (offset, sign) in _DIRECTION_STEPS.items():
        for axis_a in range(3):
            rows = dual[dual_axis == axis_a]
            shifted, valid = _shifted(L, boundary, coords[rows], (axis_a + offset) % 3, sign)
            neighbors[rows, direction] = _lookup(blocks, shifted, valid)

    # primal blocks: the dual block for which p is the k-neighbour sits at p - step
    primal = np.flatnonzero(is_primal)
    normal = np.argmin(coords[primal] % 2, axis=1)
    for direction, (offset, sign) in _DIRECTION_STEPS.items():
        for axis_n in range(3):
            rows = primal[normal == axis_n]
            # p = d + sign * e_{a+offset} with a the dual's odd axis; solving for a
            # given the face normal n gives axis (n + 3 - offset) for the step
            step_axis = (axis_n + 3 - offset) % 3
            shifted, valid = _shifted(L, boundary, coords[rows], step_axis, -sign)
            neighbors[rows, direction] = _lookup(blocks, shifted, valid)

    primal_ordinal = np.full(coords.shape[0], -1, dtype=np.int64)
    primal_ordinal[primal] = np.arange(primal.size)

    check_blocks = np.full((check_coords.shape[0], 6), -1, dtype=np.int64)
    col = 0
    for axis in range(3):
        for sign in (-1, +1):
            shifted, valid = _shifted(L, boundary, check_coords, axis, sign)
            found = _lookup(blocks, shifted, valid)
            check_blocks[:, col] = np.where(found >= 0, primal_ordinal[found], -1)
            col += 1

    n_checks = check_coords.shape[0]
    block_checks = np.empty((primal.size, 2), dtype=np.int64)
    for side, sign in enumerate((-1, +1)):
        shifted = coords[primal].copy()
        valid = np.ones(primal.size, dtype=bool)
        for axis_n in range(3):
            rows = normal == axis_n
            moved, ok = _shifted(L, boundary, coords[primal][rows], axis_n, sign)
            shifted[rows] = moved
            valid[rows] = ok
        found = _lookup(checks, shifted, valid)
        # a face without a cube on this side touches the bottom (z=0) or top boundary node
        boundary_node = n_checks + side
        block_checks[:, side] = np.where(found >= 0, found, boundary_node)

    layout = LatticeLayout(
        L=L,
        boundary=boundary,
        coords=coords,
        is_primal=is_primal,
        neighbors=neighbors,
        check_coords=check_coords,
        check_blocks=check_blocks,
        block_checks=block_checks,
        logical_cut=np.empty(0, dtype=np.int64),
    )
    object.__setattr__(layout, "logical_cut", layout.cut_at(0))
    for name in ("coords", "is_primal", "neighbors", "check_coords", "check_blocks",
                 "block_checks", "logical_cut"):
        getattr(layout, name).setflags(write=False)
    validate_layout(layout)
    logger.debug("built %s lattice L=%d: %d blocks, %d checks",
                 boundary, L, layout.n_blocks, layout.n_checks)
    return layout


def validate_layout(layout: LatticeLayout) -> None:
    """Raise InvariantError on the first violated structural property."""
    nbrs = layout.neighbors
    present = nbrs >= 0
    if (layout.is_primal[nbrs[present]] == np.repeat(layout.is_primal, 4).reshape(-1, 4)[present]).any():
        raise InvariantError("CZ edge joins two blocks of the same sublattice")

    # the role a primal plays for a dual is the same label seen from either end
    for direction in range(4):
        dual = layout.dual_blocks
        partner = nbrs[dual, direction]
        has = partner >= 0
        if (nbrs[partner[has], direction] != dual[has]).any():
            raise InvariantError(f"direction {Direction(direction).label} is not a bijection")

    cut = np.zeros(layout.n_primal, dtype=np.uint8)
    cut[layout.logical_cut] = 1
    faces = nbrs[layout.dual_blocks]
    has_face = faces >= 0
    crossing = np.where(has_face, cut[layout.primal_ordinal[np.where(has_face, faces, 0)]], 0)
    if (crossing.sum(axis=1) % 2).any():
        raise InvariantError("a trivial cycle crosses the logical cut an odd number of times")

    if layout.boundary == Boundary.TORUS:
        L3 = layout.L ** 3
        if layout.n_primal != 3 * L3 or layout.dual_blocks.size != 3 * L3:
            raise InvariantError("torus must carry 3L^3 primal and 3L^3 dual blocks")
        if layout.n_checks != L3:
            raise InvariantError("torus must carry L^3 primal checks")
        if not present.all():
            raise InvariantError("every block on the torus has four CZ neighbours")
        if (layout.check_blocks < 0).any() or (layout.block_checks >= layout.n_checks).any():
            raise InvariantError("torus checks must touch six blocks and blocks two checks")


def check_defect_graph(layout: LatticeLayout) -> nx.MultiGraph:
    """
    Checks adjacent through a shared primal block; every edge carries the
    block's primal ordinal as `block`.  Boundary nodes (rough z) are the
    integers n_checks and n_checks + 1 with `boundary=True`.
    """
    graph = nx.MultiGraph()
    for index, coord in enumerate(layout.check_coords):
        graph.add_node(index, coord=tuple(int(c) for c in coord), boundary=False)
    for side in range(layout.boundary_nodes):
        graph.add_node(layout.n_checks + side, coord=None, boundary=True)
    for ordinal, (a, b) in enumerate(layout.block_checks):
        graph.add_edge(int(a), int(b), block=ordinal)
    return graph
