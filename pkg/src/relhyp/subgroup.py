"""Hyperbolic-embedding checks for a subgroup Q at a declared scale, element
classification, elementary closures and the conjugation scans.

Refutations carry witnesses that can be re-evaluated; positive verdicts are
stamped with the scale they were obtained at and are evidence only.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cayley import EXACT, CayleyBall, cyclic_growth, fit_linear
from .groups import CosetUnsupported, GroupError, RelativeStructure, enumerate_ball, symmetrize

SCALE_NOTE = "positive verdicts are scale-limited evidence, not a proof"


class Refused(GroupError):
    """An operation's hypothesis does not hold for the given element."""


@dataclass
class SubgroupSpec:
    name: str
    gens: list                      # Y, elements of G
    gen_names: list[str] = field(default_factory=list)

    def symmetric(self, G) -> list:
        return symmetrize(G, self.gens)


class Membership:
    """Membership in Q = <Y>: exact via coset normal forms when the oracle has them,
    otherwise from the Q-ball (True inside, False if the ball is all of Q, None beyond)."""

    def __init__(self, G, q: SubgroupSpec, radius: int, cap: int = 200_000):
        self.G = G
        self.q = q
        self.ball = enumerate_ball(G, q.symmetric(G), radius, cap=cap)
        try:
            self._base = G.coset_rep(G.identity(), q.gens)
            self.exact = True
        except CosetUnsupported:
            self.exact = False

    def __call__(self, g) -> bool | None:
        if self.exact:
            return self.G.coset_rep(g, self.q.gens) == self._base
        if g in self.ball.lengths:
            return True
        return False if self.ball.complete else None


# --- (Q2) --------------------------------------------------------------------------------

@dataclass
class DistortionProfile:
    fit: tuple | None              # (lambda, c) or None when no fit within c_max
    samples: int
    ratios: list[tuple[int, Fraction]]   # per |q|_Y sphere: max |q|_Y / |q|_rel
    superlinear: bool
    witness: dict | None
    partial: bool


def distortion_profile(q: SubgroupSpec, ball: CayleyBall, q_radius: int,
                       c_max: int | None = None) -> DistortionProfile:
    G = ball.rs.G
    qb = enumerate_ball(G, q.symmetric(G), q_radius, cap=200_000)
    pairs = []
    per_sphere: dict[int, tuple[Fraction, object]] = {}
    for x, ly in qb.lengths.items():
        if x not in ball:
            continue
        d, status = ball.relative_length(x)
        if status != EXACT:
            continue
        pairs.append((ly, d))
        if d > 0:
            r = Fraction(ly, d)
            if ly not in per_sphere or r > per_sphere[ly][0]:
                per_sphere[ly] = (r, x)
    f = fit_linear(pairs, c_max)
    ratios = sorted((n, r) for n, (r, _) in per_sphere.items())
    values = [r for _, r in ratios]
    superlinear = len(values) >= 3 and all(a < b for a, b in zip(values, values[1:]))
    witness = None
    if superlinear:
        n, (r, x) = max(per_sphere.items())
        witness = {"element": G.format_element(x), "length_Y": n,
                   "relative_length": ball.exact_length(x)}
    return DistortionProfile(None if f is None else f.as_tuple(), len(pairs), ratios,
                             superlinear, witness, qb.capped)


# --- (Q3) --------------------------------------------------------------------------------

@dataclass
class Intersection:
    g: object
    found: list                   # x in the Q-ball with g^-1 x g in Q
    unknown: list
    infinite_witness: object | None = None   # found element of certified infinite order


def conjugate_intersection(q: SubgroupSpec, g, G, radius: int,
                           member: Membership | None = None) -> Intersection:
    member = member or Membership(G, q, radius)
    verdict = member(g)
    if verdict is None:
        raise Refused(f"cannot decide whether {G.format_element(g)} lies in {q.name} at this scale")
    if verdict:
        raise Refused(f"{G.format_element(g)} lies in {q.name}; the condition only concerns g outside it")
    qb = enumerate_ball(G, q.symmetric(G), radius, cap=200_000)
    found, unknown = [], []
    inf = None
    for x in qb.order:
        v = member(G.conjugate(x, g))
        if v is None:
            unknown.append(x)
        elif v:
            found.append(x)
            if inf is None and G.has_infinite_order(x) is True:
                inf = x
    return Intersection(g, found, unknown, inf)


@dataclass
class EmbeddingReport:
    subgroup: str
    scale: dict
    q1: dict
    q2: dict
    q3: dict
    verdict: str
    condition: str | None = None
    witness: dict | None = None
    note: str = SCALE_NOTE

    @property
    def violated(self) -> bool:
        return self.verdict == "Violated"

    def to_json(self) -> dict:
        return {"subgroup": self.subgroup, "scale": self.scale, "q1": self.q1, "q2": self.q2,
                "q3": self.q3, "verdict": self.verdict, "condition": self.condition,
                "witness": self.witness, "note": self.note}


def check_embedded(q: SubgroupSpec, ball: CayleyBall, q_radius: int | None = None,
                   c_max: int | None = None) -> EmbeddingReport:
    """Finite generation, undistortedness and finite conjugate intersections at scale.

    Q3 is scanned over every ball element outside Q in BFS order; an intersection
    containing an element of certified infinite order refutes it outright.  Q2
    can only be refuted by a trend (strictly growing distortion ratio).
    """
    rs = ball.rs
    G = rs.G
    q_radius = ball.radius if q_radius is None else q_radius
    member = Membership(G, q, q_radius)
    fmt = G.format_element
    scale = {"radius": ball.radius, "q_radius": q_radius,
             "pools": {lam: [rs.format_h(lam, h) for h in pool] for lam, pool in ball.pools.items()},
             "membership": "exact" if member.exact else "ball"}
    q1 = {"holds": True, "generators": [fmt(y) for y in q.gens],
          "generation_radius": q_radius, "q_ball_size": len(member.ball.lengths)}

    prof = distortion_profile(q, ball, q_radius, c_max)
    q2 = {"fit": None if prof.fit is None else [str(prof.fit[0]), prof.fit[1]],
          "samples": prof.samples, "superlinear": prof.superlinear,
          "ratios": [[n, str(r)] for n, r in prof.ratios], "witness": prof.witness,
          "partial": prof.partial}

    per_g = []
    q3_witness = None
    undecided = 0
    for g in ball.elements:
        v = member(g)
        if v is None:
            undecided += 1
            continue
        if v:
            continue
        inter = conjugate_intersection(q, g, G, q_radius, member)
        per_g.append({"g": fmt(g), "size": len(inter.found), "unknown": len(inter.unknown),
                      "elements": [fmt(x) for x in inter.found]})
        if q3_witness is None and inter.infinite_witness is not None:
            x = inter.infinite_witness
            q3_witness = {"g": fmt(g), "x": fmt(x), "conjugate": fmt(G.conjugate(x, g)),
                          "intersection_size": len(inter.found),
                          "elements": [fmt(y) for y in inter.found]}
    q3 = {"scanned": len(per_g), "undecided": undecided,
          "max_intersection": max((r["size"] for r in per_g), default=0),
          "all_trivial": all(r["size"] == 1 for r in per_g), "per_g": per_g}

    if q3_witness is not None:
        return EmbeddingReport(q.name, scale, q1, q2, q3, "Violated", "Q3", q3_witness)
    if prof.superlinear:
        return EmbeddingReport(q.name, scale, q1, q2, q3, "Violated", "Q2", prof.witness)
    return EmbeddingReport(q.name, scale, q1, q2, q3, "ConsistentWithEmbedded")


# --- classification --------------------------------------------------------------------

@dataclass
class Classification:
    kind: str                   # FiniteOrder | Parabolic | HyperbolicAtScale
    order: int | None = None
    lam: str | None = None
    conjugator: object = None
    infinite_order: bool | None = None
    conj_radius: int | None = None

    def to_json(self, G) -> dict:
        return {"kind": self.kind, "order": self.order, "lambda": self.lam,
                "conjugator": None if self.conjugator is None else G.format_element(self.conjugator),
                "infinite_order": self.infinite_order, "conj_radius": self.conj_radius}


def classify_element(g, ball: CayleyBall, conj_radius: int | None = None,
                     order_cap: int = 1000) -> Classification:
    """Finite order first, then a conjugator f with f^-1 g f in some H_lambda, else hyperbolic at scale."""
    rs = ball.rs
    G = rs.G
    conj_radius = ball.radius if conj_radius is None else conj_radius
    inf = G.has_infinite_order(g, order_cap)
    if inf is not True:
        n = G.element_order(g, order_cap)
        if n is not None:
            return Classification("FiniteOrder", order=n, infinite_order=False)
    hit = parabolic_conjugator(g, ball, conj_radius)
    if hit is not None:
        return Classification("Parabolic", lam=hit[0], conjugator=hit[1], infinite_order=inf,
                              conj_radius=conj_radius)
    return Classification("HyperbolicAtScale", infinite_order=inf, conj_radius=conj_radius)


def parabolic_conjugator(g, ball: CayleyBall, conj_radius: int | None = None):
    """First (lambda, f) in BFS order with f^-1 g f in H_lambda and |f| <= conj_radius."""
    rs = ball.rs
    conj_radius = ball.radius if conj_radius is None else conj_radius
    for f, d in zip(ball.elements, ball.dist):
        if d > conj_radius:
            break
        c = rs.G.conjugate(g, f)
        for lam in rs.lambdas:
            if _in_parabolic(rs, c, lam, ball):
                return lam, f
    return None


def _in_parabolic(rs: RelativeStructure, c, lam: str, ball: CayleyBall) -> bool:
    try:
        return rs.in_parabolic(c, lam)
    except CosetUnsupported:
        return rs.G.is_identity(c) or any(rs.embed(lam, h) == c for h in ball.pools[lam])


# --- elementary closure -------------------------------------------------------------------

@dataclass
class ElementaryClosure:
    g: object
    plus: list                 # E_+(g): f^-1 g^n f = g^n
    minus: list                # f^-1 g^n f = g^-n
    closed: bool
    not_closed: list
    partial: bool
    index_evidence: int

    @property
    def elements(self) -> list:
        return self.plus + self.minus

    def to_json(self, G) -> dict:
        fmt = G.format_element
        return {"g": fmt(self.g), "plus": [fmt(x) for x in self.plus],
                "minus": [fmt(x) for x in self.minus], "closed": self.closed,
                "not_closed": [[fmt(x), fmt(y)] for x, y in self.not_closed],
                "partial": self.partial, "index_evidence": self.index_evidence}


def elementary_closure(g, ball: CayleyBall, n_max: int, radius: int | None = None,
                       check: bool = True) -> ElementaryClosure:
    rs = ball.rs
    G = rs.G
    radius = ball.radius if radius is None else radius
    if check:
        cls = classify_element(g, ball)
        if cls.kind != "HyperbolicAtScale":
            raise Refused(f"{G.format_element(g)} is {cls.kind}, not hyperbolic at scale")
    powers = [(G.power(g, n), G.power(g, -n)) for n in range(1, n_max + 1)]
    plus, minus = [], []
    for f, d in zip(ball.elements, ball.dist):
        if d > radius:
            break
        for gn, gm in powers:
            c = G.conjugate(gn, f)
            if c == gn:
                plus.append(f)
                break
            if c == gm:
                minus.append(f)
                break
    found = set(plus) | set(minus)
    not_closed, partial = [], False
    for x, y in itertools.product(plus + minus, repeat=2):
        z = G.multiply(x, y)
        if z not in ball or ball.dist[ball.index(z)] > radius:
            partial = True
        elif z not in found:
            not_closed.append((x, y))
    # classes modulo <g>: canonical representative is the min key over f g^k
    span = 2 * radius + 2
    gpows = [G.power(g, k) for k in range(-span, span + 1)]
    classes = {min(G.canonical_key(G.multiply(f, p)) for p in gpows) for f in found}
    return ElementaryClosure(g, plus, minus, not not_closed, not_closed, partial, len(classes))


# --- conjugation scans -------------------------------------------------------------------

def bs_scan(g, ball: CayleyBall, m_n_max: int, radius: int | None = None) -> list[dict]:
    """All f, m, n with f^-1 g^m f = g^n and |m| != |n| (expected: none)."""
    G = ball.rs.G
    radius = ball.radius if radius is None else radius
    cls = classify_element(g, ball)
    if cls.kind != "HyperbolicAtScale":
        raise Refused(f"{G.format_element(g)} is {cls.kind}; the scan needs a hyperbolic element")
    powers = {n: G.power(g, n) for n in range(-m_n_max, m_n_max + 1) if n}
    out = []
    for f, d in zip(ball.elements, ball.dist):
        if d > radius:
            break
        for m in range(1, m_n_max + 1):
            c = G.conjugate(powers[m], f)
            for n, gn in powers.items():
                if abs(n) != m and c == gn:
                    out.append({"f": G.format_element(f), "m": m, "n": n})
    return out


@dataclass
class AhRow:
    h: object
    product: object
    classification: Classification
    growth_linear: bool


def ah_scan(lam: str, a, pool: Sequence, ball: CayleyBall, n_max: int = 4,
            conj_radius: int | None = None) -> tuple[list[AhRow], list]:
    """Classify a*h for each h in the pool; returns rows and the exceptional h."""
    rs = ball.rs
    G = rs.G
    if ball.exact_length(a) != 1:
        raise Refused(f"{G.format_element(a)} does not have relative length 1")
    if _in_parabolic(rs, a, lam, ball):
        raise Refused(f"{G.format_element(a)} lies in H[{lam}]")
    H = rs.oracles[lam]
    rows, exceptional = [], []
    for h in pool:
        if H.is_identity(h):
            continue
        x = G.multiply(a, rs.embed(lam, h))
        cls = classify_element(x, ball, conj_radius)
        growth = cyclic_growth(x, n_max, ball)
        rows.append(AhRow(h, x, cls, growth.linear))
        if cls.kind != "HyperbolicAtScale" or cls.infinite_order is False:
            exceptional.append(h)
    return rows, exceptional
