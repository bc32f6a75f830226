"""Pool-bounded balls in the relative Cayley graph and metric measurements on them.

Neighbours of g are g*x for x in X^{+-1} and g*h for h in the (symmetrized)
pool of each parabolic subgroup.  When a pool is not the whole subgroup the BFS
distance is only an upper bound on the relative length; a vertex is marked
Exact only when that can be certified:

* every subgroup is finite and fully pooled, or
* its BFS distance is 0 or 1, or
* its BFS distance is 2 and it is neither an X generator nor inside any
  parabolic subgroup (decided by coset normal forms), so the true length
  cannot be 1.
"""
from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .groups import CosetUnsupported, GroupError, RelativeStructure, symmetrize
from .words import HLetter, XGen, format_letter

DEFAULT_VERTEX_CAP = 200_000
EXHAUSTIVE_CORNERS = 60
DEFAULT_TRIANGLE_SAMPLES = 20_000

EXACT = "Exact"
UPPER = "UpperBound"


class OutOfBall(GroupError):
    pass


class NotExact(GroupError):
    """A measurement needs certified distances but met an UpperBound vertex."""


def normalize_pools(rs: RelativeStructure, pools: Mapping[str, Sequence] | None) -> dict:
    """Symmetrize each pool and drop the identity; a missing pool means 'all' for finite H."""
    out = {}
    for lam in rs.lambdas:
        H = rs.oracles[lam]
        given = None if pools is None else pools.get(lam)
        if given is None:
            if H.order() is None:
                raise GroupError(f"H[{lam}] is infinite: give a finite pool")
            given = H.elements()
        out[lam] = symmetrize(H, given)
    return out


def pool_is_complete(rs: RelativeStructure, lam: str, pool: Sequence) -> bool:
    H = rs.oracles[lam]
    n = H.order()
    return n is not None and len(set(pool)) == n - 1


@dataclass
class CayleyBall:
    """BFS ball around the identity.

    ``keys``/``dist``/``exact`` are indexed by vertex number (BFS discovery
    order, which is deterministic).  ``adj[i]`` lists (label, j) for every
    edge from vertex i that stays inside the ball.  ``elements`` is None for
    balls loaded from JSON, which support graph-only measurements.
    """
    radius: int
    keys: list[str]
    dist: list[int]
    exact: list[bool]
    adj: list[list[tuple[str, int]]]
    elements: list | None = None
    rs: RelativeStructure | None = None
    pools: dict = field(default_factory=dict)
    capped: bool = False
    _index: dict = field(default_factory=dict, repr=False)
    _dm: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.elements is not None and not self._index:
            self._index = {e: i for i, e in enumerate(self.elements)}
        self._key_index = {k: i for i, k in enumerate(self.keys)}

    def __len__(self):
        return len(self.keys)

    def __contains__(self, g):
        return g in self._index

    def index(self, g) -> int:
        try:
            return self._index[g]
        except KeyError:
            raise OutOfBall(f"element {self._fmt(g)} is outside the radius-{self.radius} ball") from None

    def index_of_key(self, key: str) -> int:
        try:
            return self._key_index[key]
        except KeyError:
            raise OutOfBall(f"vertex {key!r} is not in the ball") from None

    def _fmt(self, g) -> str:
        return self.rs.G.format_element(g) if self.rs else repr(g)

    def relative_length(self, g) -> tuple[int, str]:
        i = self.index(g)
        return self.dist[i], EXACT if self.exact[i] else UPPER

    def exact_length(self, g) -> int:
        d, status = self.relative_length(g)
        if status != EXACT:
            raise NotExact(f"relative length of {self._fmt(g)} is only an upper bound ({d})")
        return d

    def distance(self, u, v) -> int:
        """Relative distance |u^-1 v|, certified."""
        G = self.rs.G
        return self.exact_length(G.multiply(G.invert(u), v))

    def sphere(self, d: int) -> list[int]:
        return [i for i, x in enumerate(self.dist) if x == d]

    def edges(self):
        for i, nbrs in enumerate(self.adj):
            for label, j in nbrs:
                yield i, label, j

    def distance_matrix(self) -> np.ndarray:
        """All-pairs distances in the graph induced on the ball."""
        if self._dm is None:
            n = len(self.keys)
            rows, cols = [], []
            for i, nbrs in enumerate(self.adj):
                for _, j in nbrs:
                    rows.append(i)
                    cols.append(j)
            mat = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
            dm = shortest_path(mat, method="D", directed=True, unweighted=True)
            dm[np.isinf(dm)] = -1
            self._dm = dm.astype(np.int64)
        return self._dm

    def to_json(self) -> dict:
        return {
            "radius": self.radius,
            "capped": self.capped,
            "pools": {lam: [self.rs.format_h(lam, h) for h in pool] for lam, pool in self.pools.items()}
            if self.rs else self.pools,
            "vertices": [{"key": k, "dist": d, "exact": e}
                         for k, d, e in zip(self.keys, self.dist, self.exact)],
            "edges": [[self.keys[i], label, self.keys[j]] for i, label, j in self.edges()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CayleyBall":
        keys = [v["key"] for v in data["vertices"]]
        index = {k: i for i, k in enumerate(keys)}
        adj: list[list] = [[] for _ in keys]
        for u, label, v in data["edges"]:
            adj[index[u]].append((label, index[v]))
        return cls(radius=data["radius"], keys=keys,
                   dist=[v["dist"] for v in data["vertices"]],
                   exact=[v["exact"] for v in data["vertices"]],
                   adj=adj, pools=data.get("pools", {}), capped=data.get("capped", False))


def ball_letters(rs: RelativeStructure, pools: Mapping[str, Sequence]) -> list:
    letters = []
    for name in rs.x_names:
        letters += [XGen(name, 1), XGen(name, -1)]
    for lam in rs.lambdas:
        letters += [HLetter(lam, h) for h in pools[lam]]
    return letters


def _certify(rs: RelativeStructure, g, d: int, all_pooled: bool) -> bool:
    if all_pooled or d <= 1:
        return True
    if d > 2:
        return False
    if any(g == rs.x_value(n, s) for n in rs.x_names for s in (1, -1)):
        return False
    try:
        return not any(rs.in_parabolic(g, lam) for lam in rs.lambdas)
    except CosetUnsupported:
        return False


def build_ball(rs: RelativeStructure, radius: int, pools: Mapping[str, Sequence] | None = None,
               vertex_cap: int = DEFAULT_VERTEX_CAP) -> CayleyBall:
    pools = normalize_pools(rs, pools)
    all_pooled = all(pool_is_complete(rs, lam, pools[lam]) for lam in rs.lambdas)
    G = rs.G
    steps = [(format_letter(x, rs), rs.letter_value(x)) for x in ball_letters(rs, pools)]
    e = G.identity()
    index = {e: 0}
    elements = [e]
    dist = [0]
    capped = False
    frontier = [e]
    d = 0
    while frontier and d < radius and not capped:
        nxt = []
        for g in frontier:
            for _, s in steps:
                y = G.multiply(g, s)
                if y not in index:
                    if len(elements) >= vertex_cap:
                        capped = True
                        break
                    index[y] = len(elements)
                    elements.append(y)
                    dist.append(d + 1)
                    nxt.append(y)
            if capped:
                break
        frontier = nxt
        d += 1
    adj = []
    for g in elements:
        nbrs = []
        for label, s in steps:
            j = index.get(G.multiply(g, s))
            if j is not None:
                nbrs.append((label, j))
        adj.append(nbrs)
    exact = [_certify(rs, g, dd, all_pooled) for g, dd in zip(elements, dist)]
    keys = [G.canonical_key(g) for g in elements]
    return CayleyBall(radius, keys, dist, exact, adj, elements, rs, dict(pools), capped, index)


def relative_length(g, ball: CayleyBall) -> tuple[int, str]:
    return ball.relative_length(g)


# --- paths ---------------------------------------------------------------------------

@dataclass
class PathInGraph:
    vertices: list
    labels: list

    def __len__(self):
        return len(self.labels)

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    @classmethod
    def from_word(cls, rs: RelativeStructure, word, start=None) -> "PathInGraph":
        G = rs.G
        g = G.identity() if start is None else start
        verts = [g]
        for letter in word:
            g = G.multiply(g, rs.letter_value(letter))
            verts.append(g)
        return cls(verts, list(word))


@dataclass
class GeodesicSet:
    paths: list[list[int]]
    truncated: bool


def geodesics(u, v, ball: CayleyBall, count_cap: int = 1000) -> GeodesicSet:
    """All shortest paths in the ball graph between vertices u and v (indices or elements)."""
    i = u if isinstance(u, int) else ball.index(u)
    j = v if isinstance(v, int) else ball.index(v)
    for k in (i, j):
        if not ball.exact[k]:
            raise NotExact(f"vertex {ball.keys[k]} has an upper-bound distance")
    dm = ball.distance_matrix()
    if dm[i, j] < 0:
        return GeodesicSet([], False)
    total = dm[i, j]
    out: list[list[int]] = []
    truncated = False

    def walk(path):
        nonlocal truncated
        if truncated:
            return
        x = path[-1]
        if x == j:
            if len(out) >= count_cap:
                truncated = True
                return
            out.append(list(path))
            return
        step = len(path)
        seen = set()
        for _, y in ball.adj[x]:
            if y not in seen and dm[i, y] == step and dm[y, j] == total - step:
                seen.add(y)
                path.append(y)
                walk(path)
                path.pop()

    walk([i])
    return GeodesicSet(out, truncated)


# --- thin triangles ----------------------------------------------------------------------

@dataclass
class DeltaEstimate:
    delta: int
    triangles: int
    exhaustive: bool
    corners: int
    corner_radius: int
    witness: tuple[str, str, str] | None = None

    def to_json(self) -> dict:
        return {"delta": self.delta, "triangles": self.triangles, "exhaustive": self.exhaustive,
                "corners": self.corners, "corner_radius": self.corner_radius,
                "witness": list(self.witness) if self.witness else None}


def _farthest_geodesic(dm: np.ndarray, adj_sets, a: int, b: int, targets: np.ndarray) -> np.ndarray:
    """For every target p: max over geodesics gamma from a to b of dist(p, gamma)."""
    total = dm[a, b]
    layers: list[list[int]] = [[a]]
    for step in range(1, total + 1):
        prev = layers[-1]
        cand = set()
        for x in prev:
            for y in adj_sets[x]:
                if dm[a, y] == step and dm[y, b] == total - step:
                    cand.add(y)
        layers.append(sorted(cand))
    best = {a: dm[targets, a].astype(np.int64)}
    for step in range(1, total + 1):
        for y in layers[step]:
            preds = [best[x] for x in layers[step - 1] if y in adj_sets[x]]
            reach = preds[0] if len(preds) == 1 else np.max(np.stack(preds), axis=0)
            best[y] = np.minimum(reach, dm[targets, y])
    return best[b]


def _triangle_defect(dm, adj_sets, x, y, z) -> int:
    worst = 0
    for a, b, c in ((x, y, z), (y, z, x), (z, x, y)):
        # points on any geodesic from a to b
        interval = np.nonzero(dm[a] + dm[:, b] == dm[a, b])[0]
        to_ac = _farthest_geodesic(dm, adj_sets, a, c, interval)
        to_bc = _farthest_geodesic(dm, adj_sets, b, c, interval)
        worst = max(worst, int(np.max(np.minimum(to_ac, to_bc))))
    return worst


def _corners(ball: CayleyBall, corner_radius: int | None) -> tuple[list[int], int]:
    if corner_radius is None:
        corner_radius = ball.radius // 2
    return [i for i in range(len(ball)) if ball.exact[i] and ball.dist[i] <= corner_radius], corner_radius


def estimate_delta(ball: CayleyBall, corner_radius: int | None = None, seed: int = 0,
                   samples: int = DEFAULT_TRIANGLE_SAMPLES,
                   exhaustive_threshold: int = EXHAUSTIVE_CORNERS) -> DeltaEstimate:
    """Largest thin-triangle defect over geodesic triangles with Exact corners.

    Corners lie within ``corner_radius`` (default radius // 2), so every
    geodesic between two corners stays inside the ball and the induced
    metric is the true one.  For each triangle the defect is maximised over
    all choices of geodesic sides.
    """
    corners, corner_radius = _corners(ball, corner_radius)
    dm = ball.distance_matrix()
    adj_sets = [{j for _, j in nbrs} for nbrs in ball.adj]
    if len(corners) <= exhaustive_threshold:
        triples = itertools.combinations(corners, 3)
        exhaustive = True
    else:
        rng = random.Random(seed)
        triples = (tuple(rng.sample(corners, 3)) for _ in range(samples))
        exhaustive = False
    worst, witness, count = 0, None, 0
    for x, y, z in triples:
        count += 1
        d = _triangle_defect(dm, adj_sets, x, y, z)
        if witness is None or d > worst:
            witness = (ball.keys[x], ball.keys[y], ball.keys[z])
            worst = max(worst, d)
    return DeltaEstimate(worst, count, exhaustive, len(corners), corner_radius, witness)


def four_point_delta(ball: CayleyBall, corner_radius: int | None = None, seed: int = 0,
                     samples: int = DEFAULT_TRIANGLE_SAMPLES,
                     exhaustive_threshold: int = 30) -> Fraction:
    """Gromov four-point constant over corner quadruples (cross-check for estimate_delta)."""
    corners, _ = _corners(ball, corner_radius)
    dm = ball.distance_matrix()
    if len(corners) <= exhaustive_threshold:
        quads = itertools.combinations(corners, 4)
    else:
        rng = random.Random(seed)
        quads = (tuple(rng.sample(corners, 4)) for _ in range(samples))
    worst = Fraction(0)
    for a, b, c, d in quads:
        sums = sorted((dm[a, b] + dm[c, d], dm[a, c] + dm[b, d], dm[a, d] + dm[b, c]))
        worst = max(worst, Fraction(int(sums[2] - sums[1]), 2))
    return worst


# --- quasi-geodesics and growth ----------------------------------------------------------

DEFAULT_LAMBDA_GRID = tuple(Fraction(4 + k, 4) for k in range(37))


@dataclass
class QuasiGeodesicFit:
    lam: Fraction
    c: int

    def as_tuple(self):
        return (self.lam, self.c)


def fit_linear(pairs: Sequence[tuple[int, int]], c_max: int | None = None,
               grid: Sequence[Fraction] = DEFAULT_LAMBDA_GRID) -> QuasiGeodesicFit | None:
    """Smallest grid lambda (then smallest integer c) with lhs <= lambda*rhs + c for all pairs.

    Without ``c_max`` the first grid value always works with a large enough c.
    Returns None when no grid value keeps c within ``c_max``.
    """
    for lam in grid:
        worst = max((Fraction(lhs) - lam * rhs for lhs, rhs in pairs), default=Fraction(0))
        c = max(0, math.ceil(worst))
        if c_max is None or c <= c_max:
            return QuasiGeodesicFit(lam, c)
    return None


def quasi_geodesic_params(path: PathInGraph, ball: CayleyBall, c_max: int | None = None,
                          grid: Sequence[Fraction] = DEFAULT_LAMBDA_GRID) -> QuasiGeodesicFit | None:
    """Fit l(q) <= lambda*dist(q-, q+) + c over every subpath q of the path."""
    verts = path.vertices
    pairs = []
    for i in range(len(verts)):
        for j in range(i + 1, len(verts)):
            pairs.append((j - i, ball.distance(verts[i], verts[j])))
    return fit_linear(pairs, c_max, grid)


@dataclass
class GrowthSeries:
    lengths: list[int]
    exact: list[bool]
    truncated: bool
    lam: Fraction | None
    c: Fraction | None

    @property
    def linear(self) -> bool:
        return self.lam is not None and self.lam > 0

    def to_json(self) -> dict:
        return {"lengths": self.lengths, "exact": self.exact, "truncated": self.truncated,
                "lambda": None if self.lam is None else str(self.lam),
                "c": None if self.c is None else str(self.c), "linear": self.linear}


def cyclic_growth(g, n_max: int, ball: CayleyBall) -> GrowthSeries:
    """|g^n| for n = 1..n_max with the best linear lower envelope |g^n| >= lambda*n - c.

    lambda is the smallest slope between two measured powers, so a series
    that ever stalls or drops gets lambda <= 0 (no linear certificate).
    """
    G = ball.rs.G
    lengths, exact = [], []
    truncated = False
    x = G.identity()
    for _ in range(n_max):
        x = G.multiply(x, g)
        if x not in ball:
            truncated = True
            break
        d, status = ball.relative_length(x)
        lengths.append(d)
        exact.append(status == EXACT)
    usable = len(lengths) if all(exact) else exact.index(False)
    if usable < 2:
        return GrowthSeries(lengths, exact, truncated, None, None)
    pts = [(n + 1, lengths[n]) for n in range(usable)]
    lam = min(Fraction(b[1] - a[1], b[0] - a[0]) for a, b in itertools.combinations(pts, 2))
    c = max(Fraction(0), max(lam * n - ln for n, ln in pts))
    return GrowthSeries(lengths, exact, truncated, lam, c)


def hausdorff_check(p: PathInGraph, q: PathInGraph, ball: CayleyBall) -> int:
    """Hausdorff distance between the vertex sets of two paths with common endpoints."""
    if p.start != q.start or p.end != q.end:
        raise GroupError("hausdorff_check: paths must share both endpoints")
    d = [[ball.distance(u, v) for v in q.vertices] for u in p.vertices]
    one = max(min(row) for row in d)
    two = max(min(d[i][j] for i in range(len(p.vertices))) for j in range(len(q.vertices)))
    return max(one, two)


def save_ball(ball: CayleyBall, path) -> None:
    with open(path, "w") as fh:
        json.dump(ball.to_json(), fh, sort_keys=True)


def load_ball(path) -> CayleyBall:
    with open(path) as fh:
        return CayleyBall.from_json(json.load(fh))

