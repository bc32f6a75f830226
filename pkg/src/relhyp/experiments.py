"""Scripted experiments: bounded-generation coverage, relative diameter growth,
and the search for a hyperbolic element of infinite order."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .cayley import EXACT, CayleyBall, build_ball, cyclic_growth
from .groups import GroupError, RelativeStructure
from .subgroup import (Classification, Refused, classify_element, elementary_closure,
                       parabolic_conjugator)

DEFAULT_PRODUCT_CAP = 5_000_000


@dataclass
class Decomp:
    """x = a^-1 * embed(h) * a with h in H_lambda."""
    a: object
    lam: str
    h: object


@dataclass
class BoundedGenSpec:
    xs: list
    exponent: int
    decompositions: list[Decomp | None] = field(default_factory=list)

    def verify(self, rs: RelativeStructure) -> list[str]:
        G = rs.G
        bad = []
        for i, (x, dec) in enumerate(zip(self.xs, self.decompositions)):
            if dec is None:
                continue
            val = G.conjugate(rs.embed(dec.lam, dec.h), dec.a)
            if val != x:
                bad.append(f"x{i + 1}: a^-1 h a evaluates to {G.format_element(val)}, "
                           f"not {G.format_element(x)}")
        return bad


def auto_decompositions(xs: Sequence, ball: CayleyBall) -> list[Decomp | None]:
    """Parabolic decompositions from a conjugator search (None where none is found)."""
    rs = ball.rs
    G = rs.G
    out = []
    for x in xs:
        hit = parabolic_conjugator(x, ball)
        if hit is None:
            out.append(None)
            continue
        lam, f = hit
        # f^-1 x f = h  gives  x = a^-1 h a with a = f^-1
        h = _preimage(rs, lam, G.conjugate(x, f), ball)
        out.append(None if h is None else Decomp(G.invert(f), lam, h))
    return out


def _preimage(rs: RelativeStructure, lam: str, g, ball: CayleyBall):
    H = rs.oracles[lam]
    if rs.G.is_identity(g):
        return H.identity()
    return rs.parabolic_preimage(g, lam, ball.pools[lam])


@dataclass
class CoverageReport:
    products: int
    distinct: int
    max_length: int | None
    max_length_exact: bool
    outside_ball: int
    bound: int | None
    violations: list[dict]
    inconclusive: int
    coverage: list[dict]
    partial: bool

    def to_json(self) -> dict:
        return dict(vars(self))


def bounded_gen_coverage(spec: BoundedGenSpec, ball: CayleyBall,
                         product_cap: int = DEFAULT_PRODUCT_CAP) -> CoverageReport:
    """Enumerate x1^e1 ... xn^en with |ei| <= E and measure them against the ball."""
    rs = ball.rs
    G = rs.G
    bad = spec.verify(rs)
    if bad:
        raise GroupError("; ".join(bad))
    decs = spec.decompositions or [None] * len(spec.xs)
    bound = None
    if decs and all(d is not None for d in decs):
        bound = sum(2 * ball.exact_length(d.a) + 1 for d in decs)
    E = spec.exponent
    powers = [[G.power(x, e) for e in range(-E, E + 1)] for x in spec.xs]
    seen = {}
    count = 0
    partial = False
    # mixed-radix order over the exponent vectors
    for combo in itertools.product(*powers):
        if count >= product_cap:
            partial = True
            break
        count += 1
        g = G.identity()
        for p in combo:
            g = G.multiply(g, p)
        seen.setdefault(g, None)
    max_len, max_exact, outside, violations, inconclusive = None, True, 0, [], 0
    for g in seen:
        if g not in ball:
            outside += 1
            if bound is not None:
                inconclusive += 1
            continue
        d, status = ball.relative_length(g)
        if max_len is None or d > max_len:
            max_len, max_exact = d, status == EXACT
        elif d == max_len and status != EXACT:
            max_exact = False
        if bound is not None and d > bound:
            if status == EXACT:
                violations.append({"element": G.format_element(g), "length": d})
            else:
                inconclusive += 1
    coverage = []
    for r in range(ball.radius + 1):
        sphere = ball.sphere(r)
        hit = sum(1 for i in sphere if ball.elements[i] in seen)
        coverage.append({"radius": r, "sphere": len(sphere), "covered": hit,
                         "fraction": hit / len(sphere) if sphere else 0.0})
    return CoverageReport(count, len(seen), max_len, max_exact, outside, bound, violations,
                          inconclusive, coverage, partial)


def diameter_profile(rs: RelativeStructure, radii: Sequence[int],
                     pools: Mapping[str, Sequence] | None = None,
                     ball: CayleyBall | None = None) -> list[int]:
    """max{|g| : g Exact in the radius-r ball} for each r.

    A radius-r ball is the distance <= r part of any larger ball, so one
    BFS at the largest radius serves every entry.
    """
    if not radii:
        return []
    if ball is None or ball.radius < max(radii):
        ball = build_ball(rs, max(radii), pools)
    out = []
    for r in radii:
        out.append(max((d for d, e in zip(ball.dist, ball.exact) if e and d <= r), default=0))
    return out


@dataclass
class HyperbolicSearch:
    found: bool
    element: object = None
    lam: str | None = None
    a: object = None
    h: object = None
    classification: Classification | None = None
    growth: dict | None = None
    may_be_elementary: bool = False
    closure_index: int | None = None
    plateau: bool = False
    tried: int = 0

    def to_json(self, G) -> dict:
        fmt = G.format_element
        return {"found": self.found,
                "element": None if self.element is None else fmt(self.element),
                "lambda": self.lam, "a": None if self.a is None else fmt(self.a),
                "classification": None if self.classification is None else self.classification.to_json(G),
                "growth": self.growth, "may_be_elementary": self.may_be_elementary,
                "closure_index": self.closure_index, "plateau": self.plateau, "tried": self.tried}


def find_hyperbolic_element(rs: RelativeStructure, search_radius: int,
                            pools: Mapping[str, Sequence] | None = None, n_max: int = 4,
                            ball: CayleyBall | None = None) -> HyperbolicSearch:
    """Try a*h with a of relative length 1 outside H_lambda and h in the pool of H_lambda."""
    ball = ball or build_ball(rs, search_radius, pools)
    G = rs.G
    plateau = max(ball.dist) < ball.radius and not ball.capped
    tried = 0
    for lam in rs.lambdas:
        cands = [rs.x_value(n, s) for n in rs.x_names for s in (1, -1)]
        for other in rs.lambdas:
            if other != lam:
                cands += [rs.embed(other, h) for h in ball.pools[other]]
        for a in cands:
            try:
                if rs.in_parabolic(a, lam):
                    continue
            except GroupError:
                continue
            for h in ball.pools[lam]:
                g = G.multiply(a, rs.embed(lam, h))
                tried += 1
                if g not in ball:
                    continue
                cls = classify_element(g, ball)
                if cls.kind != "HyperbolicAtScale" or cls.infinite_order is False:
                    continue
                growth = cyclic_growth(g, n_max, ball)
                try:
                    clo = elementary_closure(g, ball, n_max, check=False)
                except Refused:
                    clo = None
                covers = clo is not None and len(set(clo.elements)) == len(ball)
                return HyperbolicSearch(True, g, lam, a, h, cls, growth.to_json(), covers,
                                        None if clo is None else clo.index_evidence, plateau, tried)
    return HyperbolicSearch(False, plateau=plateau, tried=tried)
