"""Relative presentations, certified relative area, Dehn profiles, primitive words.

Area search works on cyclic words.  Area is invariant under conjugation in the
free product F, so a state is a cyclically reduced word up to rotation.  One
move splices a rotation of a relator R^{+-1} into the word and cyclically
reduces; each move costs 1.  A* runs with the heuristic min(Area, 2), which is
computable exactly (0 for the empty word, 1 for the conjugacy class of a
relator, 2 otherwise) and consistent because one move changes the area by at
most one.

Exactness: a derivation that ever visits a word longer than the cap L needs at
least ceil((L + 1 - |w|) / m) moves to get there (one splice adds at most m
letters, m the longest relator), and from there at least two more moves,
since a word longer than m is not a single conjugated relator.  So a goal found
at cost k <= ceil((L + 1 - |w|) / m) + 2 is the true area.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .groups import GroupError, RelativeStructure
from .words import (HLetter, QLetter, Word, XGen, cyclic_reduce, format_word, invert,
                    letter_sort_key, reduce)

DEFAULT_MAX_EXPANSIONS = 2_000_000
DEFAULT_WORD_CAP = 2_000_000

EXACT = "Exact"
UPPER = "UpperBound"
UNKNOWN = "UnknownWithinCap"

POOL_NOTE = ("pool-restricted lower estimate of the relative Dehn function: finite pools can "
             "exhibit unbounded growth in the pool parameter but never certify an infinite value")


class NotNullError(GroupError):
    """The word does not represent the identity of G."""

    def __init__(self, msg: str, element: str):
        super().__init__(msg)
        self.element = element


class UnknownWithinScale(GroupError):
    pass


@dataclass
class RelativePresentation:
    rs: RelativeStructure
    relators: list[Word] = field(default_factory=list)

    def __post_init__(self):
        self.relators = [reduce(r, self.rs.oracles) for r in self.relators]

    @property
    def oracles(self):
        return self.rs.oracles

    def max_relator_length(self) -> int:
        return max((len(r) for r in self.relators), default=0)

    def format(self, w: Word) -> str:
        return format_word(w, self.rs)


@dataclass
class ValidationReport:
    valid: bool
    problems: list[dict]


def validate(p: RelativePresentation) -> ValidationReport:
    """Check that every relator is null in G and nonempty in F."""
    problems = []
    G = p.rs.G
    for i, r in enumerate(p.relators):
        val = p.rs.evaluate(r)
        if not G.is_identity(val):
            problems.append({"relator": i, "word": p.format(r),
                             "problem": "not null in G", "evaluates_to": G.format_element(val)})
        elif not r:
            problems.append({"relator": i, "word": "", "problem": "trivial in F"})
    for name in p.rs.x_names:
        if G.is_identity(p.rs.x[name]):
            problems.append({"generator": name, "problem": "X generator is the identity"})
    return ValidationReport(not problems, problems)


# --- area --------------------------------------------------------------------------

@dataclass
class AreaResult:
    status: str
    k: int | None
    cap: int
    expansions: int
    witness: list[dict] = field(default_factory=list)
    lower_bound: int = 0

    def to_json(self) -> dict:
        return {"status": self.status, "k": self.k, "cap": self.cap,
                "expansions": self.expansions, "lower_bound": self.lower_bound,
                "witness": self.witness}


def default_cap(w: Word, p: RelativePresentation) -> int:
    return len(w) + 2 * p.max_relator_length() + 4


class _Interner:
    """Letters to small ints so cyclic canonical forms are cheap tuples."""

    def __init__(self, oracles):
        self.oracles = oracles
        self.ids: dict = {}
        self.letters: list = []

    def id(self, letter) -> int:
        i = self.ids.get(letter)
        if i is None:
            i = self.ids[letter] = len(self.letters)
            self.letters.append(letter)
        return i


def _canon(letters: tuple, intern: _Interner) -> tuple:
    if not letters:
        return ()
    ids = tuple(intern.id(x) for x in letters)
    n = len(ids)
    best = min(range(n), key=lambda i: ids[i:] + ids[:i])
    return ids[best:] + ids[:best]


class _AreaSearch:
    def __init__(self, p: RelativePresentation):
        self.p = p
        self.oracles = p.oracles
        self.intern = _Interner(self.oracles)
        self.moves = []
        seen = set()
        for i, r in enumerate(p.relators):
            for sign in (1, -1):
                base = cyclic_reduce(r if sign > 0 else invert(r, self.oracles), self.oracles).letters
                for rot in range(len(base)):
                    rho = base[rot:] + base[:rot]
                    if rho and rho not in seen:
                        seen.add(rho)
                        self.moves.append((i, sign, rot, rho))
        self.relator_classes = set()
        for _, _, _, rho in self.moves:
            self.relator_classes.add(self._state(rho))
        self.m = p.max_relator_length()

    def _state(self, letters: tuple) -> tuple:
        red = cyclic_reduce(Word(letters), self.oracles).letters
        return _canon(red, self.intern)

    def letters_of(self, state: tuple) -> tuple:
        return tuple(self.intern.letters[i] for i in state)

    def h(self, state: tuple) -> int:
        if not state:
            return 0
        return 1 if state in self.relator_classes else 2

    def successors(self, state: tuple, cap: int):
        letters = self.letters_of(state)
        n = len(letters)
        out = []
        for pos in range(max(n, 1)):
            rotated = letters[pos:] + letters[:pos]
            for idx, sign, rot, rho in self.moves:
                new = self._state(rho + rotated)
                if len(new) <= cap:
                    out.append((new, (idx, sign, rot, pos)))
        return out


def area(w: Word, p: RelativePresentation, cap: int | None = None,
         max_expansions: int = DEFAULT_MAX_EXPANSIONS) -> AreaResult:
    """Certified relative area of a null word (see module docstring for the certificate)."""
    val = p.rs.evaluate(w)
    if not p.rs.G.is_identity(val):
        s = p.rs.G.format_element(val)
        raise NotNullError(f"word is not null in G: evaluates to {s}", s)
    if cap is None:
        cap = default_cap(w, p)
    search = _AreaSearch(p)
    start = search._state(tuple(w.letters))
    m = search.m
    if not start:
        return AreaResult(EXACT, 0, cap, 0)
    if len(start) > cap:
        return AreaResult(UNKNOWN, None, cap, 0, lower_bound=1)
    # any derivation leaving the cap costs at least this much
    if m == 0:
        exit_bound = math.inf
    else:
        steps_out = max(1, math.ceil((cap + 1 - len(start)) / m))
        # beyond length m no state is a single conjugated relator
        exit_bound = steps_out + (2 if cap >= m else 1)

    g_cost = {start: 0}
    parent: dict = {start: None}
    tie = itertools.count()
    heap = [(search.h(start), 0, len(start), next(tie), start)]
    closed = set()
    expansions = 0
    while heap:
        f, neg_g, _, _, state = heapq.heappop(heap)
        g = -neg_g
        if state in closed or g != g_cost[state]:
            continue
        if not state:
            witness = _witness(search, parent, state, p)
            if g <= exit_bound:
                return AreaResult(EXACT, g, cap, expansions, witness, g)
            return AreaResult(UPPER, g, cap, expansions, witness, int(exit_bound))
        if expansions >= max_expansions:
            lb = min(f, exit_bound)
            return AreaResult(UNKNOWN, None, cap, expansions, lower_bound=int(lb))
        closed.add(state)
        expansions += 1
        for nxt, move in search.successors(state, cap):
            ng = g + 1
            if nxt in closed or ng >= g_cost.get(nxt, math.inf):
                continue
            g_cost[nxt] = ng
            parent[nxt] = (state, move)
            heapq.heappush(heap, (ng + search.h(nxt), -ng, len(nxt), next(tie), nxt))
    lb = exit_bound if exit_bound != math.inf else 0
    return AreaResult(UNKNOWN, None, cap, expansions, lower_bound=int(lb))


def _witness(search: _AreaSearch, parent: dict, state: tuple, p: RelativePresentation) -> list[dict]:
    steps = []
    while parent[state] is not None:
        prev, (idx, sign, rot, pos) = parent[state]
        steps.append({"relator": idx, "sign": sign, "rotation": rot, "position": pos,
                      "result": format_word(search.letters_of(state), p.rs)})
        state = prev
    steps.reverse()
    return steps


def replay_witness(w: Word, p: RelativePresentation, witness: list[dict]) -> Word:
    """Re-apply a witness derivation to ``w``; returns the final cyclically reduced word."""
    search = _AreaSearch(p)
    letters = search.letters_of(search._state(tuple(w.letters)))
    by_key = {(i, s, r): rho for i, s, r, rho in search.moves}
    for step in witness:
        rho = by_key[(step["relator"], step["sign"], step["rotation"])]
        pos = step["position"]
        rotated = letters[pos:] + letters[:pos]
        letters = search.letters_of(search._state(rho + rotated))
    return Word(letters, True)


# --- Dehn profile ---------------------------------------------------------------------

@dataclass
class DehnRow:
    n: int
    max_area: int
    null_words: int
    unknown: int
    upper_bound: int
    argmax: str = ""


@dataclass
class DehnProfile:
    rows: list[DehnRow]
    partial: bool
    note: str = POOL_NOTE

    def to_json(self) -> dict:
        return {"partial": self.partial, "note": self.note,
                "rows": [vars(r) for r in self.rows]}


def alphabet_letters(rs: RelativeStructure, pools: Mapping[str, Iterable]) -> list:
    letters: list = []
    for name in rs.x_names:
        letters += [XGen(name, 1), XGen(name, -1)]
    for lam in rs.lambdas:
        H = rs.oracles[lam]
        seen = set()
        for h in pools.get(lam, ()):
            for e in (h, H.invert(h)):
                if not H.is_identity(e) and e not in seen:
                    seen.add(e)
                    letters.append(HLetter(lam, e))
    return letters


def _compatible(prev, nxt) -> bool:
    if isinstance(prev, XGen) and isinstance(nxt, XGen):
        return not (prev.name == nxt.name and prev.sign == -nxt.sign)
    if isinstance(prev, HLetter) and isinstance(nxt, HLetter):
        return prev.lam != nxt.lam
    return True


def enumerate_words(letters: list, n_max: int, reduced_only: bool = True,
                    cap: int = DEFAULT_WORD_CAP):
    """Yield (length, letters) for all words of length 1..n_max, shortest first.

    Stops after ``cap`` words; the caller detects this via the count.
    """
    count = 0
    level = [()]
    for n in range(1, n_max + 1):
        nxt = []
        for w in level:
            for x in letters:
                if reduced_only and w and not _compatible(w[-1], x):
                    continue
                nw = w + (x,)
                nxt.append(nw)
                yield n, nw
                count += 1
                if count >= cap:
                    return
        level = nxt


def dehn_profile(p: RelativePresentation, n_max: int, pools: Mapping[str, Iterable],
                 cap: int | None = None, reduced_only: bool = True,
                 word_cap: int = DEFAULT_WORD_CAP,
                 max_expansions: int = DEFAULT_MAX_EXPANSIONS) -> DehnProfile:
    """Per-length maximum area over null words whose H-letters come from ``pools``."""
    letters = alphabet_letters(p.rs, pools)
    rows = {n: DehnRow(n, 0, 0, 0, 0) for n in range(1, n_max + 1)}
    G = p.rs.G
    seen = 0
    for n, w in enumerate_words(letters, n_max, reduced_only, word_cap):
        seen += 1
        if not G.is_identity(p.rs.evaluate(w)):
            continue
        row = rows[n]
        row.null_words += 1
        res = area(Word(w), p, cap, max_expansions)
        if res.status == EXACT:
            if res.k > row.max_area:
                row.max_area = res.k
                row.argmax = format_word(w, p.rs)
        elif res.status == UPPER:
            row.upper_bound += 1
        else:
            row.unknown += 1
    # cumulative: the Dehn function bounds all words of length <= n
    out = []
    best = 0
    arg = ""
    for n in range(1, n_max + 1):
        r = rows[n]
        if r.max_area > best:
            best, arg = r.max_area, r.argmax
        out.append(DehnRow(n, best, r.null_words, r.unknown, r.upper_bound, arg))
    return DehnProfile(out, partial=seen >= word_cap)


# --- primitive words ----------------------------------------------------------------

@dataclass
class Decomposition:
    w1: Word
    q1: QLetter
    w2: Word
    q2: QLetter
    w3: Word


def is_primitive(w: Word, rs: RelativeStructure,
                 q_member: Callable[[object], bool | None]) -> Decomposition | None:
    """Return a decomposition W = W1 q1 W2 q2 W3 with W2 in Q, or None if W is primitive.

    ``q_member`` answers membership in Q for elements of G; None means unknown
    and raises UnknownWithinScale.
    """
    letters = w.letters
    qpos = [i for i, x in enumerate(letters) if isinstance(x, QLetter)]
    for a, b in itertools.combinations(qpos, 2):
        inner = letters[a + 1:b]
        verdict = q_member(rs.evaluate(inner))
        if verdict is None:
            raise UnknownWithinScale(f"membership in Q unknown for the subword between "
                                     f"positions {a} and {b}")
        if verdict:
            return Decomposition(Word(letters[:a]), letters[a], Word(inner), letters[b],
                                 Word(letters[b + 1:]))
    return None


def sort_words(words: Iterable[Word], oracles) -> list[Word]:
    return sorted(words, key=lambda w: [letter_sort_key(x, oracles) for x in w])
