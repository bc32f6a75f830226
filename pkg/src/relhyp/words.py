"""Words over the mixed alphabet X ∪ 𝓗 and free-product normal forms.

X letters are formal symbols with a sign; an H-letter carries a parabolic label
and a non-identity element of that subgroup (as the subgroup's oracle
normal form).  Words reduce in the free product F = (*H_lambda) * F(X):
same-label H-letters multiply, identities vanish, x x^-1 cancels.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Iterator, Mapping, Sequence

from .groups import GroupError, GroupOracle


class ConfigurationError(GroupError):
    pass


class WordSyntaxError(GroupError):
    def __init__(self, msg: str, column: int):
        super().__init__(f"{msg} (column {column})")
        self.column = column


@dataclass(frozen=True, slots=True)
class XGen:
    name: str
    sign: int = 1

    def inverse(self) -> "XGen":
        return XGen(self.name, -self.sign)


@dataclass(frozen=True, slots=True)
class HLetter:
    lam: str
    elem: Hashable


@dataclass(frozen=True, slots=True)
class QLetter:
    """A letter from Q∖{1}; ``elem`` is an element of G."""
    elem: Hashable


Letter = XGen | HLetter | QLetter


@dataclass(frozen=True)
class Word:
    letters: tuple = ()
    reduced: bool = False

    def __len__(self):
        return len(self.letters)

    def __iter__(self) -> Iterator:
        return iter(self.letters)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return Word(self.letters[i])
        return self.letters[i]

    def __add__(self, other: "Word") -> "Word":
        return concat(self, other)

    def __bool__(self):
        return bool(self.letters)


def word(*letters) -> Word:
    return Word(tuple(letters))


def _oracle(oracles: Mapping[str, GroupOracle], lam: str) -> GroupOracle:
    try:
        return oracles[lam]
    except KeyError:
        raise ConfigurationError(f"no oracle for subgroup label {lam!r}") from None


def _push(stack: list, letter, oracles: Mapping[str, GroupOracle]) -> None:
    if isinstance(letter, HLetter):
        H = _oracle(oracles, letter.lam)
        if H.is_identity(letter.elem):
            return
        if stack and isinstance(stack[-1], HLetter) and stack[-1].lam == letter.lam:
            prod = H.multiply(stack[-1].elem, letter.elem)
            stack.pop()
            if not H.is_identity(prod):
                stack.append(HLetter(letter.lam, prod))
            return
    elif isinstance(letter, XGen):
        top = stack[-1] if stack else None
        if isinstance(top, XGen) and top.name == letter.name and top.sign == -letter.sign:
            stack.pop()
            return
    stack.append(letter)


def reduce(w: Word | Iterable, oracles: Mapping[str, GroupOracle]) -> Word:
    """Free-product normal form (single left-to-right stack pass)."""
    letters = w.letters if isinstance(w, Word) else tuple(w)
    stack: list = []
    for letter in letters:
        _push(stack, letter, oracles)
    return Word(tuple(stack), True)


def concat(u: Word, v: Word) -> Word:
    return Word(u.letters + v.letters)


def invert_letter(letter, oracles: Mapping[str, GroupOracle], G: GroupOracle | None = None):
    if isinstance(letter, XGen):
        return letter.inverse()
    if isinstance(letter, HLetter):
        return HLetter(letter.lam, _oracle(oracles, letter.lam).invert(letter.elem))
    if G is None:
        raise ConfigurationError("inverting a Q-letter needs the ambient oracle")
    return QLetter(G.invert(letter.elem))


def invert(w: Word, oracles: Mapping[str, GroupOracle], G: GroupOracle | None = None) -> Word:
    return Word(tuple(invert_letter(x, oracles, G) for x in reversed(w.letters)), w.reduced)


def cyclic_shift(w: Word, i: int) -> Word:
    if not w.letters:
        return w
    i %= len(w.letters)
    return Word(w.letters[i:] + w.letters[:i])


def relative_length(w: Word, oracles: Mapping[str, GroupOracle]) -> int:
    return len(reduce(w, oracles))


# --- syllables ------------------------------------------------------------------

@dataclass(frozen=True)
class Syllable:
    """A maximal H_lambda run (``lam`` set) or a maximal run of X letters (``lam`` None)."""
    lam: str | None
    start: int
    stop: int

    @property
    def is_x(self) -> bool:
        return self.lam is None

    def __len__(self):
        return self.stop - self.start


def _run_label(letter):
    if isinstance(letter, HLetter):
        return ("H", letter.lam)
    if isinstance(letter, QLetter):
        return ("Q", None)
    return ("X", None)


def syllables(w: Word) -> list[Syllable]:
    out: list[Syllable] = []
    letters = w.letters
    i = 0
    while i < len(letters):
        label = _run_label(letters[i])
        j = i + 1
        while j < len(letters) and _run_label(letters[j]) == label:
            j += 1
        if label[0] == "Q":
            out.extend(Syllable("Q", k, k + 1) for k in range(i, j))
        else:
            out.append(Syllable(label[1], i, j))
        i = j
    return out


# --- cyclic words ---------------------------------------------------------------

def cyclic_reduce(w: Word, oracles: Mapping[str, GroupOracle]) -> Word:
    """Reduce, then cancel or merge across the seam until cyclically reduced."""
    letters = list(reduce(w, oracles).letters)
    while len(letters) >= 2:
        first, last = letters[0], letters[-1]
        if isinstance(first, XGen) and isinstance(last, XGen) \
                and first.name == last.name and first.sign == -last.sign:
            letters = letters[1:-1]
            continue
        if isinstance(first, HLetter) and isinstance(last, HLetter) and first.lam == last.lam:
            H = _oracle(oracles, first.lam)
            prod = H.multiply(last.elem, first.elem)
            middle = letters[1:-1]
            letters = ([HLetter(first.lam, prod)] if not H.is_identity(prod) else []) + middle
            continue
        break
    if len(letters) == 1 and isinstance(letters[0], HLetter):
        h = letters[0]
        letters = [HLetter(h.lam, _oracle(oracles, h.lam).conjugacy_rep(h.elem))]
    return Word(tuple(letters), True)


def letter_sort_key(letter, oracles: Mapping[str, GroupOracle]):
    if isinstance(letter, XGen):
        return (0, letter.name, -letter.sign, "")
    if isinstance(letter, HLetter):
        return (1, letter.lam, 0, _oracle(oracles, letter.lam).canonical_key(letter.elem))
    return (2, "", 0, repr(letter.elem))


def min_rotation(letters: Sequence, key: Callable) -> tuple:
    if not letters:
        return ()
    keys = [key(x) for x in letters]
    n = len(letters)
    best = min(range(n), key=lambda i: keys[i:] + keys[:i])
    return tuple(letters[best:]) + tuple(letters[:best])


class CyclicWord:
    """A word up to cyclic shift, compared through its cyclically reduced minimal rotation."""

    def __init__(self, representative: Word, oracles: Mapping[str, GroupOracle]):
        self.representative = representative
        red = cyclic_reduce(representative, oracles)
        self.canonical = min_rotation(red.letters, lambda x: letter_sort_key(x, oracles))

    def __eq__(self, other):
        return isinstance(other, CyclicWord) and self.canonical == other.canonical

    def __hash__(self):
        return hash(self.canonical)

    def __len__(self):
        return len(self.canonical)

    def __repr__(self):
        return f"CyclicWord({self.canonical!r})"


# --- text syntax ------------------------------------------------------------------

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.']*")
_EXPONENT = re.compile(r"\s*\^\s*([+-]?\d+)")


class WordParser:
    """Recursive-descent parser for the textual word syntax.

    ``b``, ``b^-1``, ``b^3`` are X letters; ``H[A]{expr}`` is an H-letter whose
    element expression is handed to the subgroup's oracle; ``Q{expr}`` is a
    Q-letter (needs ``parse_g``); ``[u, v]`` is the commutator ``u v u^-1 v^-1``
    and ``( ... )^n`` powers a group of letters.
    """

    def __init__(self, alphabet, parse_g: Callable[[str], Hashable] | None = None,
                 constants: Mapping[str, Hashable] | None = None):
        self.alphabet = alphabet
        self.parse_g = parse_g
        self.constants = dict(constants or {})
        names = list(alphabet.x_names) + [c for c in self.constants if c not in alphabet.x_names]
        self.names = sorted(names, key=len, reverse=True)

    def parse(self, text: str) -> Word:
        self.text = text
        self.pos = 0
        letters = self._seq(stop="")
        self._ws()
        if self.pos != len(text):
            raise WordSyntaxError(f"unexpected {text[self.pos]!r}", self.pos + 1)
        return Word(tuple(letters))

    def _ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _seq(self, stop: str) -> list:
        out: list = []
        while True:
            self._ws()
            if self.pos >= len(self.text) or self.text[self.pos] in stop:
                return out
            if self.text[self.pos] in ",])}" :
                raise WordSyntaxError(f"unexpected {self.text[self.pos]!r}", self.pos + 1)
            chunk = self._atom()
            m = _EXPONENT.match(self.text, self.pos)
            if m:
                self.pos = m.end()
                chunk = self._power(chunk, int(m.group(1)))
            out.extend(chunk)

    def _power(self, chunk: list, n: int) -> list:
        if n >= 0:
            return chunk * n
        oracles = self.alphabet.oracles
        G = getattr(self.alphabet, "G", None)
        return [invert_letter(x, oracles, G) for x in reversed(chunk)] * (-n)

    def _braced(self) -> str:
        start = self.pos
        if not self.text.startswith("{", self.pos):
            raise WordSyntaxError("expected '{'", self.pos + 1)
        depth = 0
        for i in range(self.pos, len(self.text)):
            ch = self.text[i]
            if ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    self.pos = i + 1
                    return self.text[start + 1:i]
        raise WordSyntaxError("unterminated '{'", start + 1)

    def _atom(self) -> list:
        t, p = self.text, self.pos
        if t.startswith("H[", p):
            close = t.find("]", p)
            if close < 0:
                raise WordSyntaxError("unterminated H[", p + 1)
            lam = t[p + 2:close].strip()
            if lam not in self.alphabet.oracles:
                raise WordSyntaxError(f"unknown subgroup label {lam!r}", p + 3)
            self.pos = close + 1
            col = self.pos + 2
            body = self._braced()
            try:
                elem = self.alphabet.parse_h(lam, body)
            except GroupError as exc:
                raise WordSyntaxError(f"bad element for H[{lam}]: {exc}", col) from None
            return [HLetter(lam, elem)]
        if t.startswith("Q{", p):
            if self.parse_g is None:
                raise WordSyntaxError("Q-letters are not allowed here", p + 1)
            self.pos = p + 1
            col = self.pos + 2
            body = self._braced()
            try:
                return [QLetter(self.parse_g(body))]
            except GroupError as exc:
                raise WordSyntaxError(f"bad Q element: {exc}", col) from None
        if t[p] == "[":
            self.pos += 1
            u = self._seq(stop=",")
            if not t.startswith(",", self.pos):
                raise WordSyntaxError("expected ',' in commutator", self.pos + 1)
            self.pos += 1
            v = self._seq(stop="]")
            if not t.startswith("]", self.pos):
                raise WordSyntaxError("expected ']'", self.pos + 1)
            self.pos += 1
            return u + v + self._power(u, -1) + self._power(v, -1)
        if t[p] == "(":
            self.pos += 1
            inner = self._seq(stop=")")
            if not t.startswith(")", self.pos):
                raise WordSyntaxError("expected ')'", self.pos + 1)
            self.pos += 1
            return inner
        if t[p] == "1" and (p + 1 == len(t) or not t[p + 1].isalnum()):
            self.pos += 1
            return []
        for name in self.names:
            if t.startswith(name, p):
                self.pos = p + len(name)
                if name in self.alphabet.x_names:
                    return [XGen(name, 1)]
                return [QLetter(self.constants[name])]
        m = _NAME.match(t, p)
        what = m.group() if m else t[p]
        raise WordSyntaxError(f"unknown letter {what!r}", p + 1)


def parse_word(text: str, alphabet, parse_g=None) -> Word:
    """Parse the textual word syntax against an alphabet (usually a RelativeStructure)."""
    return WordParser(alphabet, parse_g).parse(text)


def format_letter(letter, alphabet, format_g=None) -> str:
    if isinstance(letter, XGen):
        return letter.name if letter.sign > 0 else f"{letter.name}^-1"
    if isinstance(letter, HLetter):
        return f"H[{letter.lam}]{{{alphabet.format_h(letter.lam, letter.elem)}}}"
    fmt = format_g or alphabet.G.format_element
    return f"Q{{{fmt(letter.elem)}}}"


def format_word(w: Word | Iterable, alphabet, format_g=None) -> str:
    letters = w.letters if isinstance(w, Word) else tuple(w)
    return " ".join(format_letter(x, alphabet, format_g) for x in letters)
