"""H_lambda-components of paths and cycles, connectedness, isolation, and the
isolated-component inequality harness.

A component is a maximal run of consecutive letters from one H_lambda.  Its
vertices all lie in the left coset g*H_lambda where g is the vertex before the
run; two components are connected when they share that coset.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .groups import RelativeStructure, enumerate_ball, symmetrize
from .words import HLetter, Word, format_word


@dataclass(frozen=True)
class Component:
    lam: str
    start: int          # index of the first letter of the run
    length: int         # number of letters; the run may wrap for cyclic inputs
    coset_key: str
    element: object     # product of the run's H-letters, in H_lambda
    vertex: object = field(compare=False)

    def span(self, n: int) -> list[int]:
        return [(self.start + k) % n for k in range(self.length)]


def _labels_and_vertices(p, rs: RelativeStructure):
    if isinstance(p, Word):
        letters = list(p.letters)
        G = rs.G
        verts = [G.identity()]
        for x in letters:
            verts.append(G.multiply(verts[-1], rs.letter_value(x)))
        return letters, verts
    return list(p.labels), list(p.vertices)


def find_components(p, rs: RelativeStructure, cyclic: bool = False) -> list[Component]:
    """All H_lambda-components of a path (PathInGraph) or a word read from 1.

    With ``cyclic`` the input must be a closed loop and a run split by the
    seam is merged into one component.
    """
    letters, verts = _labels_and_vertices(p, rs)
    n = len(letters)
    if cyclic and n and not rs.G.is_identity(rs.G.multiply(rs.G.invert(verts[0]), verts[-1])):
        raise ValueError("find_components(cyclic=True) needs a closed path")

    def lam_of(i):
        x = letters[i % n]
        return x.lam if isinstance(x, HLetter) else None

    if n == 0:
        return []
    offset = 0
    if cyclic:
        if all(lam_of(i) is not None and lam_of(i) == lam_of(0) for i in range(n)):
            return [_component(rs, letters, verts, 0, n, n)]
        # start scanning just after a run boundary so nothing straddles the seam
        while lam_of(offset) is not None and lam_of(offset - 1) == lam_of(offset):
            offset -= 1
    out = []
    i = 0
    while i < n:
        lam = lam_of(offset + i)
        if lam is None:
            i += 1
            continue
        j = i + 1
        while j < n and lam_of(offset + j) == lam:
            j += 1
        out.append(_component(rs, letters, verts, (offset + i) % n, j - i, n))
        i = j
    out.sort(key=lambda c: c.start)
    return out


def _component(rs, letters, verts, start, length, n) -> Component:
    lam = letters[start].lam
    H = rs.oracles[lam]
    elem = H.identity()
    for k in range(length):
        elem = H.multiply(elem, letters[(start + k) % n].elem)
    vertex = verts[start]
    return Component(lam, start, length, rs.coset_key(vertex, lam), elem, vertex)


def are_connected(c1: Component, c2: Component) -> bool:
    return c1.lam == c2.lam and c1.coset_key == c2.coset_key


def isolated_components(comps: Sequence[Component]) -> list[Component]:
    out = []
    for i, c in enumerate(comps):
        if not any(are_connected(c, d) for j, d in enumerate(comps) if j != i):
            out.append(c)
    return out


# --- isolated-component harness ----------------------------------------------------------

@dataclass
class OmegaRow:
    cycle: str
    length: int
    sigma: int
    isolated: int
    unreached: list[str]

    @property
    def ratio(self) -> Fraction | None:
        return Fraction(self.sigma, self.length) if self.length else None


@dataclass
class OmegaReport:
    rows: list[OmegaRow]
    k_hat: int
    ratio_max: Fraction
    counterexample: bool    # some isolated element is not reached over Omega at scale

    def to_json(self) -> dict:
        return {
            "k_hat": self.k_hat, "ratio_max": str(self.ratio_max),
            "counterexample": self.counterexample,
            "rows": [{"cycle": r.cycle, "length": r.length, "sigma": r.sigma,
                      "isolated": r.isolated,
                      "ratio": None if r.ratio is None else str(r.ratio),
                      "unreached": r.unreached} for r in self.rows],
        }


def omega_harness(rs: RelativeStructure, cycles: Sequence[Word], omega: Mapping[str, Sequence],
                  search_radius: int = 32, element_cap: int = 200_000) -> OmegaReport:
    """Sum of |g_i| over Omega_lambda for the isolated components of each null cycle.

    K_hat is the smallest positive integer K with sum <= K * l(q) on every
    cycle of the sample.
    """
    balls = {}
    for lam in rs.lambdas:
        H = rs.oracles[lam]
        gens = symmetrize(H, omega.get(lam, ()))
        balls[lam] = enumerate_ball(H, gens, search_radius, cap=element_cap)
    rows = []
    for w in cycles:
        comps = isolated_components(find_components(w, rs, cyclic=True))
        sigma = 0
        unreached = []
        for c in comps:
            d = balls[c.lam].lengths.get(c.element)
            if d is None:
                unreached.append(f"H[{c.lam}]{{{rs.format_h(c.lam, c.element)}}}")
            else:
                sigma += d
        rows.append(OmegaRow(format_word(w, rs), len(w), sigma, len(comps), unreached))
    ratio_max = max((r.ratio for r in rows if r.ratio is not None), default=Fraction(0))
    k_hat = max(1, math.ceil(ratio_max))
    return OmegaReport(rows, k_hat, ratio_max, any(r.unreached for r in rows))
