"""Computable group backends.

Every group in the toolkit (the ambient group G and each peripheral subgroup
H_lambda) is an explicit oracle.  Elements are immutable, hashable normal forms,
so two elements are equal in the group iff they compare equal in Python; the
canonical key of an element is its printed normal form.
"""
from __future__ import annotations

import itertools
import math
import random
import re
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Hashable, Iterable, Sequence

Element = Hashable

DEFAULT_ELEMENT_CAP = 10**6


class GroupError(ValueError):
    """Malformed group data or an element expression that does not parse."""


class CosetUnsupported(GroupError):
    """The oracle cannot produce a canonical coset representative."""


# --- generator words --------------------------------------------------------

_EXP = re.compile(r"\s*\^\s*(?P<exp>[+-]?\d+)")


def parse_gen_word(text: str, names: Sequence[str]) -> list[tuple[int, int]]:
    """Parse a product of generator names with optional integer exponents.

    Names are matched greedily (longest first) so ``abab`` works when every
    generator name is a single character.  Parenthesised groups may carry an
    exponent too: ``(ab)^3``.
    """
    order = sorted(range(len(names)), key=lambda i: -len(names[i]))
    pos = 0

    def parse_seq(depth: int) -> list[tuple[int, int]]:
        nonlocal pos
        out: list[tuple[int, int]] = []
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                if depth:
                    raise GroupError(f"unbalanced parenthesis in {text!r}")
                return out
            ch = text[pos]
            if ch == ")":
                if not depth:
                    raise GroupError(f"unexpected ')' at column {pos + 1} in {text!r}")
                pos += 1
                return out
            if ch == "(":
                pos += 1
                chunk = parse_seq(depth + 1)
            elif ch == "1" and (pos + 1 == len(text) or not text[pos + 1].isalnum()):
                pos += 1
                chunk = []
            else:
                for i in order:
                    if text.startswith(names[i], pos):
                        pos += len(names[i])
                        chunk = [(i, 1)]
                        break
                else:
                    raise GroupError(f"unknown generator at column {pos + 1} in {text!r}")
            m = _EXP.match(text, pos)
            if m:
                pos = m.end()
                n = int(m.group("exp"))
                chunk = power_word(chunk, n)
            out.extend(chunk)

    return parse_seq(0)


def power_word(word: list[tuple[int, int]], n: int) -> list[tuple[int, int]]:
    if n >= 0:
        return word * n
    inv = [(g, -e) for g, e in reversed(word)]
    return inv * (-n)


def format_gen_word(word: Iterable[tuple[int, int]], names: Sequence[str]) -> str:
    parts = []
    for g, e in word:
        if e == 0:
            continue
        parts.append(names[g] if e == 1 else f"{names[g]}^{e}")
    return " ".join(parts) if parts else "1"


# --- oracle contract ----------------------------------------------------------

class GroupOracle(ABC):
    """Behaviour contract shared by all backends."""

    abelian = False
    gen_names: tuple[str, ...] = ()

    @abstractmethod
    def identity(self) -> Element: ...

    @abstractmethod
    def multiply(self, a: Element, b: Element) -> Element: ...

    @abstractmethod
    def invert(self, a: Element) -> Element: ...

    @abstractmethod
    def generators(self) -> list[Element]: ...

    @abstractmethod
    def decompose(self, a: Element) -> list[tuple[int, int]]:
        """A word in ``generators()`` (index, exponent) representing ``a``."""

    @abstractmethod
    def format_element(self, a: Element) -> str: ...

    @abstractmethod
    def parse_native(self, text: str) -> Element: ...

    def order(self) -> int | None:
        """Group order, or None when infinite."""
        return None

    def elements(self) -> list[Element]:
        raise GroupError("group is infinite")

    def is_identity(self, a: Element) -> bool:
        return a == self.identity()

    def canonical_key(self, a: Element) -> str:
        return self.format_element(a)

    def parse_element(self, text: str) -> Element:
        text = text.strip()
        try:
            return self.parse_native(text)
        except GroupError:
            if not self.gen_names:
                raise
        return self.from_gen_word(parse_gen_word(text, self.gen_names))

    def from_gen_word(self, word: Iterable[tuple[int, int]]) -> Element:
        gens = self.generators()
        out = self.identity()
        for g, e in word:
            out = self.multiply(out, self.power(gens[g], e))
        return out

    def power(self, a: Element, n: int) -> Element:
        if n < 0:
            a, n = self.invert(a), -n
        out = self.identity()
        while n:
            if n & 1:
                out = self.multiply(out, a)
            a = self.multiply(a, a)
            n >>= 1
        return out

    def conjugate(self, a: Element, f: Element) -> Element:
        """f^-1 a f."""
        return self.multiply(self.multiply(self.invert(f), a), f)

    def element_order(self, a: Element, cap: int = 1000) -> int | None:
        x = a
        for n in range(1, cap + 1):
            if self.is_identity(x):
                return n
            x = self.multiply(x, a)
        return None

    def has_infinite_order(self, a: Element, cap: int = 1000) -> bool | None:
        """True/False when decidable, None when power iteration up to ``cap`` is inconclusive."""
        if self.order() is not None:
            return False
        return False if self.element_order(a, cap) is not None else None

    def coset_rep(self, g: Element, sub_gens: Sequence[Element]) -> Element:
        """Canonical representative of the left coset g<sub_gens>.

        The generic fallback enumerates the subgroup, which only works when it
        is finite.
        """
        if any(self.has_infinite_order(h, cap=64) for h in sub_gens):
            raise CosetUnsupported(f"{self!r}: no coset normal form for an infinite subgroup")
        ball = enumerate_ball(self, symmetrize(self, sub_gens), radius=None, cap=100_000)
        if ball.capped:
            raise CosetUnsupported(f"{self!r}: no coset normal form for an infinite subgroup")
        return min((self.multiply(g, h) for h in ball.lengths), key=self.canonical_key)

    def conjugacy_rep(self, a: Element) -> Element:
        if self.abelian:
            return a
        if self.order() is not None:
            return min((self.conjugate(a, f) for f in self.elements()), key=self.canonical_key)
        return a


def symmetrize(oracle: GroupOracle, gens: Iterable[Element]) -> list[Element]:
    out: list[Element] = []
    seen = set()
    for g in gens:
        for h in (g, oracle.invert(g)):
            if h not in seen and not oracle.is_identity(h):
                seen.add(h)
                out.append(h)
    return out


# --- builtins -----------------------------------------------------------------

class Cyclic(GroupOracle):
    """Z/n written additively; ``n=None`` is the infinite cyclic group."""

    abelian = True

    def __init__(self, n: int | None = None, gen_name: str | None = None):
        if n is not None and n < 1:
            raise GroupError(f"cyclic order must be positive, got {n}")
        self.n = n
        self.gen_names = (gen_name,) if gen_name else ()

    def __repr__(self):
        return f"Cyclic({'inf' if self.n is None else self.n})"

    def identity(self):
        return 0

    def multiply(self, a, b):
        return a + b if self.n is None else (a + b) % self.n

    def invert(self, a):
        return -a if self.n is None else (-a) % self.n

    def power(self, a, n):
        return a * n if self.n is None else (a * n) % self.n

    def generators(self):
        return [1 % self.n] if self.n else [1]

    def decompose(self, a):
        return [(0, a)] if a else []

    def order(self):
        return self.n

    def elements(self):
        if self.n is None:
            raise GroupError("group is infinite")
        return list(range(self.n))

    def format_element(self, a):
        return str(a)

    def parse_native(self, text):
        try:
            v = int(text)
        except ValueError:
            raise GroupError(f"expected an integer, got {text!r}") from None
        return v if self.n is None else v % self.n

    def has_infinite_order(self, a, cap=1000):
        return self.n is None and a != 0

    def coset_rep(self, g, sub_gens):
        d = math.gcd(self.n or 0, *sub_gens)
        return g if d == 0 else g % d


def _hnf(rows: list[list[int]]) -> list[tuple[int, list[int]]]:
    """Row Hermite normal form; returns (pivot column, row) pairs."""
    rows = [list(r) for r in rows if any(r)]
    out: list[tuple[int, list[int]]] = []
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        while True:
            nz = [r for r in rows if r[col]]
            if len(nz) <= 1:
                break
            piv = min(nz, key=lambda r: abs(r[col]))
            for r in nz:
                if r is not piv:
                    q = r[col] // piv[col]
                    for k in range(ncols):
                        r[k] -= q * piv[k]
            rows = [r for r in rows if any(r)]
        nz = [r for r in rows if r[col]]
        if not nz:
            continue
        piv = nz[0]
        rows.remove(piv)
        if piv[col] < 0:
            piv = [-x for x in piv]
        out.append((col, piv))
    for i, (col, piv) in enumerate(out):
        for j in range(i):
            other = out[j][1]
            q = other[col] // piv[col]
            for k in range(ncols):
                other[k] -= q * piv[k]
    return out


class FreeAbelian(GroupOracle):
    abelian = True

    def __init__(self, rank: int):
        if rank < 0:
            raise GroupError("rank must be non-negative")
        self.rank = rank

    def __repr__(self):
        return f"FreeAbelian({self.rank})"

    def identity(self):
        return (0,) * self.rank

    def multiply(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def invert(self, a):
        return tuple(-x for x in a)

    def power(self, a, n):
        return tuple(x * n for x in a)

    def generators(self):
        return [tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank)]

    def decompose(self, a):
        return [(i, x) for i, x in enumerate(a) if x]

    def format_element(self, a):
        if self.rank == 1:
            return str(a[0])
        return "(" + ",".join(map(str, a)) + ")"

    def parse_native(self, text):
        body = text.strip()
        if body.startswith("(") and body.endswith(")"):
            body = body[1:-1]
        try:
            vals = tuple(int(x) for x in body.split(",")) if body.strip() else ()
        except ValueError:
            raise GroupError(f"expected an integer vector, got {text!r}") from None
        if len(vals) != self.rank:
            raise GroupError(f"expected {self.rank} coordinates, got {text!r}")
        return vals

    def has_infinite_order(self, a, cap=1000):
        return any(a)

    def coset_rep(self, g, sub_gens):
        rep = list(g)
        for col, row in _hnf([list(v) for v in sub_gens]):
            q = rep[col] // row[col]
            for k in range(self.rank):
                rep[k] -= q * row[k]
        return tuple(rep)


class Free(GroupOracle):
    """Free group; elements are reduced tuples of signed 1-based generator ids."""

    def __init__(self, rank: int, names: Sequence[str] | None = None):
        self.rank = rank
        self.gen_names = tuple(names) if names else tuple(f"x{i + 1}" for i in range(rank))
        if len(self.gen_names) != rank:
            raise GroupError("free group: wrong number of generator names")

    def __repr__(self):
        return f"Free({self.rank})"

    def identity(self):
        return ()

    def multiply(self, a, b):
        i = 0
        n = len(a)
        while i < n and i < len(b) and a[n - 1 - i] == -b[i]:
            i += 1
        return a[: n - i] + b[i:]

    def invert(self, a):
        return tuple(-x for x in reversed(a))

    def generators(self):
        return [(i + 1,) for i in range(self.rank)]

    def decompose(self, a):
        return [(abs(x) - 1, 1 if x > 0 else -1) for x in a]

    def format_element(self, a):
        return format_gen_word(self.decompose(a), self.gen_names)

    def parse_native(self, text):
        raise GroupError("free group elements are generator words")

    def has_infinite_order(self, a, cap=1000):
        return bool(a)


class FiniteTable(GroupOracle):
    """Finite group given by a multiplication table over named elements."""

    def __init__(self, names: Sequence[str], table: Sequence[Sequence[int]],
                 generators: Sequence[int] | None = None):
        self.names = tuple(names)
        self.table = tuple(tuple(r) for r in table)
        self._index = {nm: i for i, nm in enumerate(self.names)}
        self._validate()
        self._inv = tuple(next(j for j in range(len(names)) if self.table[i][j] == self._id)
                          for i in range(len(names)))
        self.abelian = all(self.table[i][j] == self.table[j][i]
                           for i in range(len(names)) for j in range(len(names)))
        self._gens = list(generators) if generators is not None else [
            i for i in range(len(names)) if i != self._id]
        self.gen_names = tuple(self.names[i] for i in self._gens)
        self._words = self._word_table()

    def __repr__(self):
        return f"FiniteTable({len(self.names)})"

    def _validate(self):
        n = len(self.names)
        if len(set(self.names)) != n:
            raise GroupError("table: duplicate element names")
        if len(self.table) != n or any(len(r) != n for r in self.table):
            raise GroupError(f"table: expected a {n}x{n} table")
        for i, row in enumerate(self.table):
            for j, v in enumerate(row):
                if not 0 <= v < n:
                    raise GroupError(f"table: cell ({self.names[i]},{self.names[j]}) out of range")
        full = set(range(n))
        for i, row in enumerate(self.table):
            if set(row) != full:
                j = _first_repeat(row)
                raise GroupError(f"table: row {self.names[i]} repeats an entry at cell "
                                 f"({self.names[i]},{self.names[j]})")
        for j in range(n):
            col = [self.table[i][j] for i in range(n)]
            if set(col) != full:
                i = _first_repeat(col)
                raise GroupError(f"table: column {self.names[j]} repeats an entry at cell "
                                 f"({self.names[i]},{self.names[j]})")
        ids = [i for i in range(n) if list(self.table[i]) == list(range(n))
               and [self.table[k][i] for k in range(n)] == list(range(n))]
        if not ids:
            raise GroupError("table: no identity element")
        self._id = ids[0]
        t = self.table
        for a, b, c in itertools.product(range(n), repeat=3):
            if t[t[a][b]][c] != t[a][t[b][c]]:
                raise GroupError(f"table: not associative at ({self.names[a]},{self.names[b]},"
                                 f"{self.names[c]})")

    def _word_table(self):
        words = {self._id: []}
        queue = deque([self._id])
        while queue:
            x = queue.popleft()
            for k, g in enumerate(self._gens):
                for e in (1, -1):
                    y = self.table[x][g if e == 1 else self._inv[g]]
                    if y not in words:
                        words[y] = words[x] + [(k, e)]
                        queue.append(y)
        if len(words) != len(self.names):
            raise GroupError("table: declared generators do not generate the group")
        return words

    def identity(self):
        return self._id

    def multiply(self, a, b):
        return self.table[a][b]

    def invert(self, a):
        return self._inv[a]

    def generators(self):
        return list(self._gens)

    def decompose(self, a):
        return list(self._words[a])

    def order(self):
        return len(self.names)

    def elements(self):
        return list(range(len(self.names)))

    def format_element(self, a):
        return self.names[a]

    def parse_native(self, text):
        try:
            return self._index[text.strip()]
        except KeyError:
            raise GroupError(f"unknown table element {text!r}") from None

    def parse_element(self, text):
        # element names double as generator names
        out = self._id
        for g, e in parse_gen_word(text, self.names):
            x = g if e >= 0 else self._inv[g]
            for _ in range(abs(e)):
                out = self.table[out][x]
        return out


def _first_repeat(seq):
    seen = set()
    for i, v in enumerate(seq):
        if v in seen:
            return i
        seen.add(v)
    return 0


class FreeProduct(GroupOracle):
    """Free product of named factors.

    Elements are strictly alternating tuples of ``(factor index, factor element)``
    syllables with no identity syllables, which is the unique normal form.
    """

    def __init__(self, factors: Sequence[tuple[str, GroupOracle]]):
        if not factors:
            raise GroupError("free product needs at least one factor")
        self.aliases = tuple(a for a, _ in factors)
        self.factors = tuple(f for _, f in factors)
        names: list[str] = []
        self._gen_index: list[tuple[int, int]] = []
        for i, (alias, fac) in enumerate(factors):
            gens = fac.generators()
            for k in range(len(gens)):
                names.append(alias if len(gens) == 1 else f"{alias}.{k + 1}")
                self._gen_index.append((i, k))
        self.gen_names = tuple(names)
        self._offset = [0]
        for fac in self.factors:
            self._offset.append(self._offset[-1] + len(fac.generators()))

    def __repr__(self):
        return "FreeProduct(" + ", ".join(f"{f!r} as {a}" for a, f in zip(self.aliases, self.factors)) + ")"

    def identity(self):
        return ()

    def multiply(self, a, b):
        res = list(a)
        j = 0
        while res and j < len(b) and res[-1][0] == b[j][0]:
            i = b[j][0]
            fac = self.factors[i]
            p = fac.multiply(res[-1][1], b[j][1])
            res.pop()
            j += 1
            if not fac.is_identity(p):
                res.append((i, p))
                break
        res.extend(b[j:])
        return tuple(res)

    def invert(self, a):
        return tuple((i, self.factors[i].invert(e)) for i, e in reversed(a))

    def generators(self):
        return [((i, self.factors[i].generators()[k]),) for i, k in self._gen_index]

    def decompose(self, a):
        out = []
        for i, e in a:
            out.extend((self._offset[i] + g, x) for g, x in self.factors[i].decompose(e))
        return out

    def syllable(self, factor: int, e: Element) -> Element:
        return () if self.factors[factor].is_identity(e) else ((factor, e),)

    def order(self):
        return 1 if all(f.order() == 1 for f in self.factors) else None

    def format_element(self, a):
        return format_gen_word(self.decompose(a), self.gen_names)

    def parse_native(self, text):
        raise GroupError("free product elements are generator words")

    def coset_rep(self, g, sub_gens):
        subs = [s for s in sub_gens if s]
        if not subs:
            return g
        if any(len(s) != 1 for s in subs):
            return super().coset_rep(g, sub_gens)
        inner: dict[int, list] = {}
        for s in subs:
            inner.setdefault(s[0][0], []).append(s[0][1])
        if len(inner) == 1:
            (i, gens), = inner.items()
            fac = self.factors[i]
            if g and g[-1][0] == i:
                return g[:-1] + self.syllable(i, fac.coset_rep(g[-1][1], gens))
            return g + self.syllable(i, fac.coset_rep(fac.identity(), gens))
        # a free product of whole factors: strip the longest suffix inside it
        if not all(self._generates_factor(i, gens) for i, gens in inner.items()):
            return super().coset_rep(g, sub_gens)
        k = len(g)
        while k and g[k - 1][0] in inner:
            k -= 1
        return g[:k]

    def _generates_factor(self, i: int, gens: list) -> bool:
        fac = self.factors[i]
        try:
            base = fac.coset_rep(fac.identity(), gens)
            return all(fac.coset_rep(x, gens) == base for x in fac.generators())
        except CosetUnsupported:
            return False

    def has_infinite_order(self, a, cap=1000):
        # conjugate into a single factor, or cyclically reduced of length >= 2
        a = tuple(a)
        while len(a) >= 2 and a[0][0] == a[-1][0]:
            a = self.multiply(a[1:], ((a[0][0], a[0][1]),))
        if not a:
            return False
        if len(a) == 1:
            return self.factors[a[0][0]].has_infinite_order(a[0][1], cap)
        return True

    def conjugacy_rep(self, a):
        return a


class DirectProduct(GroupOracle):
    def __init__(self, factors: Sequence[tuple[str, GroupOracle]]):
        self.aliases = tuple(a for a, _ in factors)
        self.factors = tuple(f for _, f in factors)
        self.abelian = all(f.abelian for f in self.factors)
        names = []
        self._gen_index = []
        for i, (alias, fac) in enumerate(factors):
            gens = fac.generators()
            for k in range(len(gens)):
                names.append(alias if len(gens) == 1 else f"{alias}.{k + 1}")
                self._gen_index.append((i, k))
        self.gen_names = tuple(names)
        self._offset = [0]
        for fac in self.factors:
            self._offset.append(self._offset[-1] + len(fac.generators()))

    def __repr__(self):
        return "DirectProduct(" + ", ".join(f"{f!r} as {a}" for a, f in zip(self.aliases, self.factors)) + ")"

    def identity(self):
        return tuple(f.identity() for f in self.factors)

    def multiply(self, a, b):
        return tuple(f.multiply(x, y) for f, x, y in zip(self.factors, a, b))

    def invert(self, a):
        return tuple(f.invert(x) for f, x in zip(self.factors, a))

    def generators(self):
        out = []
        for i, k in self._gen_index:
            e = list(self.identity())
            e[i] = self.factors[i].generators()[k]
            out.append(tuple(e))
        return out

    def decompose(self, a):
        out = []
        for i, (f, x) in enumerate(zip(self.factors, a)):
            out.extend((self._offset[i] + g, e) for g, e in f.decompose(x))
        return out

    def order(self):
        n = 1
        for f in self.factors:
            o = f.order()
            if o is None:
                return None
            n *= o
        return n

    def elements(self):
        return [tuple(t) for t in itertools.product(*(f.elements() for f in self.factors))]

    def has_infinite_order(self, a, cap=1000):
        parts = [f.has_infinite_order(x, cap) for f, x in zip(self.factors, a)]
        if any(p is True for p in parts):
            return True
        return False if all(p is False for p in parts) else None

    def format_element(self, a):
        return "(" + " | ".join(f.format_element(x) for f, x in zip(self.factors, a)) + ")"

    def parse_native(self, text):
        body = text.strip()
        if not (body.startswith("(") and body.endswith(")")) or "|" not in body:
            raise GroupError(f"expected (e1 | e2 | ...), got {text!r}")
        parts = body[1:-1].split("|")
        if len(parts) != len(self.factors):
            raise GroupError(f"expected {len(self.factors)} components in {text!r}")
        return tuple(f.parse_element(p) for f, p in zip(self.factors, parts))


# --- builtin specs ------------------------------------------------------------

@dataclass(frozen=True)
class BuiltinSpec:
    """Declarative description of a builtin oracle.

    kind is one of cyclic, free_abelian, free, table, free_product,
    direct_product.  ``arg`` carries the order/rank/table text; ``factors``
    holds (spec, alias) pairs for products.
    """
    kind: str
    arg: Any = None
    factors: tuple[tuple["BuiltinSpec", str], ...] = ()

    def __str__(self):
        return format_spec(self)


def build_oracle(spec: BuiltinSpec) -> GroupOracle:
    k = spec.kind
    if k == "cyclic":
        return Cyclic(spec.arg)
    if k == "free_abelian":
        return FreeAbelian(spec.arg)
    if k == "free":
        return Free(spec.arg)
    if k == "table":
        return table_from_text(spec.arg)
    if k in ("free_product", "direct_product"):
        facs = [(alias, build_oracle(s)) for s, alias in spec.factors]
        return FreeProduct(facs) if k == "free_product" else DirectProduct(facs)
    raise GroupError(f"unknown group kind {k!r}")


def table_from_text(text: str) -> FiniteTable:
    rows = [r.split() for r in text.split(";") if r.strip()]
    if not rows:
        raise GroupError("table: empty")
    names = rows[0]
    index = {nm: i for i, nm in enumerate(names)}
    table = []
    for i, r in enumerate(rows):
        try:
            table.append([index[x] for x in r])
        except KeyError as exc:
            raise GroupError(f"table: row {i + 1} uses undeclared element {exc.args[0]!r}") from None
    return FiniteTable(names, table)


def format_spec(spec: BuiltinSpec) -> str:
    if spec.kind == "cyclic":
        return f"cyclic({'inf' if spec.arg is None else spec.arg})"
    if spec.kind in ("free_abelian", "free"):
        return f"{spec.kind}({spec.arg})"
    if spec.kind == "table":
        return f'table("{spec.arg}")'
    inner = ", ".join(f"{format_spec(s)} as {a}" for s, a in spec.factors)
    return f"{spec.kind}({inner})"


class SpecSyntaxError(GroupError):
    def __init__(self, msg: str, column: int):
        super().__init__(f"{msg} (column {column})")
        self.column = column


def parse_spec(text: str) -> BuiltinSpec:
    """Parse ``free_product(cyclic(2) as a, cyclic(2) as b)`` and friends."""
    pos = 0

    def ws():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def ident():
        nonlocal pos
        ws()
        m = re.compile(r"[A-Za-z_][A-Za-z0-9_]*").match(text, pos)
        if not m:
            raise SpecSyntaxError("expected a name", pos + 1)
        pos = m.end()
        return m.group()

    def expect(ch):
        nonlocal pos
        ws()
        if not text.startswith(ch, pos):
            raise SpecSyntaxError(f"expected {ch!r}", pos + 1)
        pos += len(ch)

    def spec() -> BuiltinSpec:
        nonlocal pos
        ws()
        start = pos
        kind = ident()
        expect("(")
        ws()
        if kind == "cyclic":
            word = ident() if text[pos:pos + 1].isalpha() else None
            if word is not None:
                if word != "inf":
                    raise SpecSyntaxError("cyclic order must be an integer or inf", start + 1)
                arg = None
            else:
                arg = integer()
            out = BuiltinSpec("cyclic", arg)
        elif kind in ("free_abelian", "free"):
            out = BuiltinSpec(kind, integer())
        elif kind == "table":
            if not text.startswith('"', pos):
                raise SpecSyntaxError("table expects a quoted string", pos + 1)
            end = text.find('"', pos + 1)
            if end < 0:
                raise SpecSyntaxError("unterminated string", pos + 1)
            out = BuiltinSpec("table", text[pos + 1:end].strip())
            pos = end + 1
        elif kind in ("free_product", "direct_product"):
            facs = []
            while True:
                s = spec()
                ws()
                at = pos
                if ident() != "as":
                    raise SpecSyntaxError("expected 'as <alias>'", at + 1)
                facs.append((s, ident()))
                ws()
                if text.startswith(",", pos):
                    pos += 1
                    continue
                break
            out = BuiltinSpec(kind, None, tuple(facs))
        else:
            raise SpecSyntaxError(f"unknown group kind {kind!r}", start + 1)
        expect(")")
        return out

    def integer():
        nonlocal pos
        ws()
        m = re.compile(r"-?\d+").match(text, pos)
        if not m:
            raise SpecSyntaxError("expected an integer", pos + 1)
        pos = m.end()
        return int(m.group())

    result = spec()
    ws()
    if pos != len(text):
        raise SpecSyntaxError("trailing text", pos + 1)
    if result.kind == "table":
        build_oracle(result)
    return result


# --- ball enumeration -----------------------------------------------------------

@dataclass
class BallResult:
    """Word lengths of all elements within ``radius`` of the identity.

    ``capped`` means the element cap stopped enumeration early; ``complete``
    means BFS ran out of new elements, i.e. the generated subgroup is finite
    and fully listed.
    """
    lengths: dict
    radius: int | None
    capped: bool = False
    complete: bool = False
    order: list = field(default_factory=list)

    def by_key(self, oracle: GroupOracle) -> dict[str, int]:
        return {oracle.canonical_key(e): n for e, n in self.lengths.items()}

    def __contains__(self, e):
        return e in self.lengths


def enumerate_ball(oracle: GroupOracle, gens: Sequence[Element], radius: int | None,
                   cap: int = DEFAULT_ELEMENT_CAP) -> BallResult:
    """Breadth-first word lengths with respect to ``gens`` (closed under inverses)."""
    e = oracle.identity()
    lengths = {e: 0}
    order = [e]
    frontier = [e]
    d = 0
    capped = False
    while frontier and (radius is None or d < radius):
        nxt = []
        for x in frontier:
            for g in gens:
                y = oracle.multiply(x, g)
                if y not in lengths:
                    if len(lengths) >= cap:
                        capped = True
                        break
                    lengths[y] = d + 1
                    order.append(y)
                    nxt.append(y)
            if capped:
                break
        if capped:
            break
        frontier = nxt
        d += 1
    complete = not capped and not frontier
    return BallResult(lengths, radius, capped, complete, order)


# --- relative structure ---------------------------------------------------------

@dataclass
class Peripheral:
    """One H_lambda: its own oracle plus the images of its generators in G."""
    name: str
    oracle: GroupOracle
    images: tuple
    gen_names: tuple[str, ...] = ()


class RelativeStructure:
    """G together with its peripheral subgroups and a finite relative generating set X."""

    def __init__(self, G: GroupOracle, peripherals: Sequence[Peripheral],
                 x: dict[str, Element] | None = None):
        self.G = G
        self.peripherals = {p.name: p for p in peripherals}
        self.x = dict(x or {})
        clash = set(self.x) & set(self.peripherals)
        if clash:
            raise GroupError(f"names used both as X generators and subgroup labels: {sorted(clash)}")
        for p in peripherals:
            if len(p.images) != len(p.oracle.generators()):
                raise GroupError(f"H[{p.name}]: need one image per generator "
                                 f"({len(p.oracle.generators())}), got {len(p.images)}")
        self._embed_cache: dict = {}
        self._sub_gens = {lam: [im for im in p.images] for lam, p in self.peripherals.items()}

    @property
    def lambdas(self) -> list[str]:
        return list(self.peripherals)

    @property
    def oracles(self) -> dict[str, GroupOracle]:
        return {lam: p.oracle for lam, p in self.peripherals.items()}

    @property
    def x_names(self) -> list[str]:
        return list(self.x)

    def embed(self, lam: str, h: Element) -> Element:
        key = (lam, h)
        hit = self._embed_cache.get(key)
        if hit is not None:
            return hit
        p = self.peripherals[lam]
        out = self.G.identity()
        for g, e in p.oracle.decompose(h):
            out = self.G.multiply(out, self.G.power(p.images[g], e))
        self._embed_cache[key] = out
        return out

    def x_value(self, name: str, sign: int) -> Element:
        v = self.x[name]
        return v if sign > 0 else self.G.invert(v)

    def letter_value(self, letter) -> Element:
        from .words import HLetter, QLetter, XGen
        if isinstance(letter, XGen):
            return self.x_value(letter.name, letter.sign)
        if isinstance(letter, HLetter):
            return self.embed(letter.lam, letter.elem)
        if isinstance(letter, QLetter):
            return letter.elem
        raise TypeError(f"not a letter: {letter!r}")

    def evaluate(self, word) -> Element:
        out = self.G.identity()
        for letter in word:
            out = self.G.multiply(out, self.letter_value(letter))
        return out

    def coset_rep(self, g: Element, lam: str) -> Element:
        return self.G.coset_rep(g, self._sub_gens[lam])

    def coset_key(self, g: Element, lam: str) -> str:
        return self.G.canonical_key(self.coset_rep(g, lam))

    def in_parabolic(self, g: Element, lam: str) -> bool:
        return self.coset_rep(g, lam) == self.coset_rep(self.G.identity(), lam)

    def parabolic_preimage(self, g: Element, lam: str, pool: Iterable[Element]) -> Element | None:
        """An element h of the pool with embed(h) == g, if any."""
        for h in pool:
            if self.embed(lam, h) == g:
                return h
        return None

    # element expressions

    def parse_h(self, lam: str, text: str) -> Element:
        p = self.peripherals.get(lam)
        if p is None:
            raise GroupError(f"unknown subgroup label H[{lam}]")
        try:
            return p.oracle.parse_element(text)
        except GroupError:
            if not p.gen_names:
                raise
        return p.oracle.from_gen_word(parse_gen_word(text, p.gen_names))

    def format_h(self, lam: str, h: Element) -> str:
        return self.peripherals[lam].oracle.format_element(h)

    def validate(self, samples: int = 200, seed: int = 0, radius: int = 3) -> list[str]:
        """Spot-check embeddings; returns human-readable problems (empty when fine)."""
        problems = []
        rng = random.Random(seed)
        for lam, p in self.peripherals.items():
            H = p.oracle
            gens = symmetrize(H, H.generators())
            ball = enumerate_ball(H, gens, radius, cap=5000)
            elems = list(ball.lengths)
            for _ in range(samples):
                a, b = rng.choice(elems), rng.choice(elems)
                lhs = self.embed(lam, H.multiply(a, b))
                rhs = self.G.multiply(self.embed(lam, a), self.embed(lam, b))
                if lhs != rhs:
                    problems.append(f"H[{lam}]: embedding is not a homomorphism on "
                                    f"({H.format_element(a)}, {H.format_element(b)})")
                    break
            for h in elems:
                if H.is_identity(h):
                    continue
                # the image's order must match: a shorter one means a power of h dies
                n = self.G.element_order(self.embed(lam, h), cap=64)
                if n is not None and not H.is_identity(H.power(h, n)):
                    problems.append(f"H[{lam}]: embedding kills {H.format_element(H.power(h, n))}")
                    break
        return problems

    def generates(self, radius: int = 6) -> bool:
        """Whether G's generators appear within ``radius`` of X plus the subgroup generators."""
        gens = [self.x_value(n, s) for n in self.x for s in (1, -1)]
        for lam, p in self.peripherals.items():
            gens += [self.G.invert(im) for im in p.images] + list(p.images)
        gens = symmetrize(self.G, gens)
        ball = enumerate_ball(self.G, gens, radius, cap=200_000)
        return all(g in ball.lengths or self.G.is_identity(g) for g in self.G.generators())

