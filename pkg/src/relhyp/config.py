"""Line-oriented experiment configuration.

    # comment
    group G = free_abelian(2)
    embed a = (1,0)
    embed b = (0,1)
    relative_to A = cyclic(inf) gens a
    X b
    relator [H[A]{1}, b]
    pool A = -4..4
    subgroup Qa = a
    seed 0
    cap area = 16

Element expressions after ``embed``, ``X``, ``gens`` and ``subgroup`` are
elements of G: either the oracle's native syntax or products of embed names
(free-product factor aliases are predeclared).  Every diagnostic carries the
line and column it refers to.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .groups import (GroupError, GroupOracle, Peripheral, RelativeStructure,
                     SpecSyntaxError, build_oracle, enumerate_ball, format_spec, parse_gen_word,
                     parse_spec, symmetrize)
from .relpres import RelativePresentation, validate
from .subgroup import SubgroupSpec
from .words import WordSyntaxError, parse_word

KEYS = ("group", "embed", "relative_to", "X", "relator", "pool", "subgroup", "seed", "cap")
CAP_NAMES = ("area", "vertex", "expansions", "words")
BUNDLED = ("zxz", "tree", "dinfty", "z5z5")

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_RANGE = re.compile(r"^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$")
_BALL = re.compile(r"^\s*ball\s*\(\s*(\d+)\s*\)\s*$")


class ConfigError(GroupError):
    def __init__(self, msg: str, line: int = 0, column: int = 0):
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + msg)
        self.msg = msg
        self.line = line
        self.column = column

    def to_json(self) -> dict:
        return {"error": "ConfigError", "message": self.msg, "line": self.line, "column": self.column}


@dataclass
class ExperimentConfig:
    """Declarative content of a config file; derived objects are built by ``build``."""
    group: tuple[str, str] = ("", "")
    embeds: tuple = ()
    relative_to: tuple = ()           # (lambda, spec text, generator expressions)
    x: tuple = ()                     # (name, expression or None)
    relators: tuple = ()
    pools: tuple = ()                 # (lambda, pool expression)
    subgroups: tuple = ()             # (name, generator expressions)
    seed: int = 0
    caps: tuple = ()
    positions: dict = field(default_factory=dict, compare=False, repr=False)

    def cap(self, name: str, default=None):
        return dict(self.caps).get(name, default)


@dataclass
class Experiment:
    """A validated config: the relative structure, presentation, pools and subgroups."""
    config: ExperimentConfig
    G: GroupOracle
    rs: RelativeStructure
    presentation: RelativePresentation
    pools: dict
    subgroups: dict
    constants: dict

    def parse_g(self, text: str):
        return parse_group_element(text, self.G, self.constants)

    def word(self, text: str):
        return parse_word(text, self.rs, self.parse_g)

    def subgroup(self, text: str) -> SubgroupSpec:
        """A config subgroup name, a subgroup label, or ``Name=e1,e2``."""
        text = text.strip()
        if text in self.subgroups:
            return self.subgroups[text]
        if text in self.rs.peripherals:
            p = self.rs.peripherals[text]
            return SubgroupSpec(text, list(p.images), list(p.gen_names))
        name, sep, body = text.partition("=")
        if not sep:
            raise ConfigError(f"unknown subgroup {text!r}")
        exprs = [e.strip() for e in body.split(",") if e.strip()]
        return SubgroupSpec(name.strip(), [self.parse_g(e) for e in exprs], exprs)


def parse_group_element(text: str, G: GroupOracle, constants: dict):
    text = text.strip()
    try:
        return G.parse_element(text)
    except GroupError as first:
        if not constants:
            raise
        names = list(constants)
        try:
            word = parse_gen_word(text, names)
        except GroupError:
            raise first from None
    out = G.identity()
    for i, e in word:
        out = G.multiply(out, G.power(constants[names[i]], e))
    return out


# --- parsing ----------------------------------------------------------------------

def _split_assign(body: str, col: int, lineno: int, key: str) -> tuple[str, str, int]:
    m = _IDENT.match(body)
    if not m:
        raise ConfigError(f"{key}: expected a name", lineno, col)
    name = m.group()
    rest = body[m.end():]
    stripped = rest.lstrip()
    if not stripped.startswith("="):
        raise ConfigError(f"{key}: expected '=' after {name!r}", lineno, col + m.end() + len(rest) - len(stripped))
    eq = m.end() + len(rest) - len(stripped)
    value = body[eq + 1:]
    vcol = col + eq + 1 + (len(value) - len(value.lstrip()))
    return name, value.strip(), vcol


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate; raises ConfigError with line/column."""
    cfg = parse_config_syntax(text)
    build(cfg)
    return cfg


def parse_config_syntax(text: str) -> ExperimentConfig:
    fields: dict[str, list] = {k: [] for k in KEYS}
    pos: dict = {}
    group = None
    seed = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        m = _IDENT.match(line, indent)
        if not m:
            raise ConfigError("expected a key", lineno, indent + 1)
        key = m.group()
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno, indent + 1)
        body = line[m.end():]
        bcol = m.end() + 1 + (len(body) - len(body.lstrip()))
        body = body.strip()
        if key == "group":
            if group is not None:
                raise ConfigError("duplicate group", lineno, indent + 1)
            name, value, vcol = _split_assign(body, bcol, lineno, key)
            try:
                spec = parse_spec(value)
            except SpecSyntaxError as exc:
                raise ConfigError(str(exc).rsplit(" (column", 1)[0], lineno, vcol + exc.column - 1) from None
            except GroupError as exc:
                raise ConfigError(str(exc), lineno, vcol) from None
            group = (name, format_spec(spec))
            pos["group"] = (lineno, vcol)
        elif key == "embed":
            name, value, vcol = _split_assign(body, bcol, lineno, key)
            fields["embed"].append((name, value))
            pos[("embed", name)] = (lineno, vcol)
        elif key == "relative_to":
            name, value, vcol = _split_assign(body, bcol, lineno, key)
            spec_text, sep, gens = value.partition(" gens ")
            if not sep:
                raise ConfigError("relative_to: expected '<spec> gens <g1>, ...'", lineno, vcol)
            try:
                spec = parse_spec(spec_text.strip())
            except SpecSyntaxError as exc:
                raise ConfigError(str(exc).rsplit(" (column", 1)[0], lineno, vcol + exc.column - 1) from None
            except GroupError as exc:
                raise ConfigError(str(exc), lineno, vcol) from None
            exprs = tuple(g.strip() for g in gens.split(","))
            if any(not g for g in exprs):
                raise ConfigError("relative_to: empty generator expression", lineno, vcol + len(spec_text) + 6)
            fields["relative_to"].append((name, format_spec(spec), exprs))
            pos[("relative_to", name)] = (lineno, vcol)
        elif key == "X":
            mm = _IDENT.match(body)
            if not mm:
                raise ConfigError("X: expected a generator name", lineno, bcol)
            if body[mm.end():].strip():
                name, value, vcol = _split_assign(body, bcol, lineno, key)
            else:
                name, value, vcol = mm.group(), None, bcol
            fields["X"].append((name, value))
            pos[("X", name)] = (lineno, vcol)
        elif key == "relator":
            if not body:
                raise ConfigError("relator: expected a word", lineno, bcol)
            pos[("relator", len(fields["relator"]))] = (lineno, bcol)
            fields["relator"].append(body)
        elif key == "pool":
            name, value, vcol = _split_assign(body, bcol, lineno, key)
            fields["pool"].append((name, value))
            pos[("pool", name)] = (lineno, vcol)
        elif key == "subgroup":
            name, value, vcol = _split_assign(body, bcol, lineno, key)
            exprs = tuple(e.strip() for e in value.split(","))
            if any(not e for e in exprs):
                raise ConfigError("subgroup: empty generator expression", lineno, vcol)
            fields["subgroup"].append((name, exprs))
            pos[("subgroup", name)] = (lineno, vcol)
        elif key == "seed":
            try:
                seed = int(body)
            except ValueError:
                raise ConfigError(f"seed: expected an integer, got {body!r}", lineno, bcol) from None
        elif key == "cap":
            name, value, vcol = _split_assign(body, bcol, lineno, key)
            if name not in CAP_NAMES:
                raise ConfigError(f"unknown cap {name!r} (expected one of {', '.join(CAP_NAMES)})",
                                  lineno, bcol)
            try:
                fields["cap"].append((name, int(value)))
            except ValueError:
                raise ConfigError(f"cap: expected an integer, got {value!r}", lineno, vcol) from None
    if group is None:
        raise ConfigError("missing group", 1 if text.strip() else 0, 1 if text.strip() else 0)
    return ExperimentConfig(group, tuple(fields["embed"]), tuple(fields["relative_to"]),
                            tuple(fields["X"]), tuple(fields["relator"]), tuple(fields["pool"]),
                            tuple(fields["subgroup"]), seed, tuple(fields["cap"]), pos)


def _where(cfg: ExperimentConfig, key) -> tuple[int, int]:
    return cfg.positions.get(key, (0, 0))


def build(cfg: ExperimentConfig, check_generation: bool = True) -> Experiment:
    """Turn a parsed config into oracles, structure and presentation, with semantic checks."""
    G = build_oracle(parse_spec(cfg.group[1]))
    constants: dict = {}
    for i, gname in enumerate(G.gen_names):
        if _IDENT.fullmatch(gname):
            constants[gname] = G.generators()[i]
    for name, expr in cfg.embeds:
        try:
            constants[name] = parse_group_element(expr, G, constants)
        except GroupError as exc:
            raise ConfigError(f"embed {name}: {exc}", *_where(cfg, ("embed", name))) from None

    peripherals = []
    for lam, spec_text, exprs in cfg.relative_to:
        where = _where(cfg, ("relative_to", lam))
        H = build_oracle(parse_spec(spec_text))
        try:
            images = tuple(parse_group_element(e, G, constants) for e in exprs)
        except GroupError as exc:
            raise ConfigError(f"relative_to {lam}: {exc}", *where) from None
        names = tuple(e for e in exprs) if all(_IDENT.fullmatch(e) for e in exprs) else ()
        if len(images) != len(H.generators()):
            raise ConfigError(f"relative_to {lam}: {len(H.generators())} generator image(s) needed, "
                              f"got {len(images)}", *where)
        peripherals.append(Peripheral(lam, H, images, names))

    x = {}
    for name, expr in cfg.x:
        where = _where(cfg, ("X", name))
        if expr is None:
            if name not in constants:
                raise ConfigError(f"X {name}: no value and no embed named {name!r}", *where)
            x[name] = constants[name]
        else:
            try:
                x[name] = parse_group_element(expr, G, constants)
            except GroupError as exc:
                raise ConfigError(f"X {name}: {exc}", *where) from None
    try:
        rs = RelativeStructure(G, peripherals, x)
    except GroupError as exc:
        raise ConfigError(str(exc), *_where(cfg, "group")) from None
    probs = rs.validate(seed=cfg.seed)
    if probs:
        lam = probs[0].split("]")[0].removeprefix("H[")
        raise ConfigError(probs[0], *_where(cfg, ("relative_to", lam)))
    if check_generation and not rs.generates():
        raise ConfigError("X together with the subgroups does not generate G at radius 6",
                          *_where(cfg, "group"))

    def parse_g(text):
        return parse_group_element(text, G, constants)

    relators = []
    for i, text in enumerate(cfg.relators):
        line, col = _where(cfg, ("relator", i))
        try:
            relators.append(parse_word(text, rs, parse_g))
        except WordSyntaxError as exc:
            raise ConfigError(str(exc).rsplit(" (column", 1)[0], line, col + exc.column - 1) from None
    pres = RelativePresentation(rs, relators)
    report = validate(pres)
    if not report.valid:
        prob = report.problems[0]
        where = _where(cfg, ("relator", prob.get("relator", 0)))
        detail = f", evaluates to {prob['evaluates_to']}" if "evaluates_to" in prob else ""
        raise ConfigError(f"relator {prob.get('word', '')!r}: {prob['problem']}{detail}", *where)

    pools = {}
    for lam, expr in cfg.pools:
        where = _where(cfg, ("pool", lam))
        if lam not in rs.peripherals:
            raise ConfigError(f"pool for unknown subgroup label {lam!r}", *where)
        try:
            pools[lam] = parse_pool(expr, rs, lam)
        except GroupError as exc:
            raise ConfigError(f"pool {lam}: {exc}", *where) from None

    subgroups = {}
    for name, exprs in cfg.subgroups:
        try:
            subgroups[name] = SubgroupSpec(name, [parse_g(e) for e in exprs], list(exprs))
        except GroupError as exc:
            raise ConfigError(f"subgroup {name}: {exc}", *_where(cfg, ("subgroup", name))) from None
    return Experiment(cfg, G, rs, pres, pools, subgroups, constants)


def parse_pool(expr: str, rs: RelativeStructure, lam: str) -> list:
    """``i..j`` (powers of the first generator), ``all``, ``ball(r)`` or explicit elements."""
    H = rs.oracles[lam]
    expr = expr.strip()
    m = _RANGE.match(expr)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if lo > hi:
            raise GroupError(f"empty range {expr!r}")
        g = H.generators()[0]
        out = []
        for k in range(lo, hi + 1):
            h = H.power(g, k)
            if not H.is_identity(h) and h not in out:
                out.append(h)
        return out
    if expr == "all":
        if H.order() is None:
            raise GroupError("'all' needs a finite subgroup")
        return [h for h in H.elements() if not H.is_identity(h)]
    m = _BALL.match(expr)
    if m:
        ball = enumerate_ball(H, symmetrize(H, H.generators()), int(m.group(1)))
        return [h for h in ball.order if not H.is_identity(h)]
    return [rs.parse_h(lam, e) for e in expr.split(",") if e.strip()]


# --- printing ------------------------------------------------------------------------

def format_config(cfg: ExperimentConfig) -> str:
    lines = [f"group {cfg.group[0]} = {cfg.group[1]}"]
    lines += [f"embed {n} = {e}" for n, e in cfg.embeds]
    lines += [f"relative_to {lam} = {spec} gens {', '.join(g)}" for lam, spec, g in cfg.relative_to]
    lines += [f"X {n}" if e is None else f"X {n} = {e}" for n, e in cfg.x]
    lines += [f"relator {r}" for r in cfg.relators]
    lines += [f"pool {lam} = {e}" for lam, e in cfg.pools]
    lines += [f"subgroup {n} = {', '.join(e)}" for n, e in cfg.subgroups]
    lines.append(f"seed {cfg.seed}")
    lines += [f"cap {n} = {v}" for n, v in cfg.caps]
    return "\n".join(lines) + "\n"


def bundled_path(name: str) -> Path:
    return Path(str(resources.files("relhyp") / "configs" / f"{name}.cfg"))


def config_text(name_or_path: str) -> str:
    """Text of a config given by path, or one of the bundled names (zxz, tree, dinfty, z5z5)."""
    path = Path(name_or_path)
    if not path.exists():
        stem = name_or_path.removesuffix(".cfg")
        if stem in BUNDLED:
            path = bundled_path(stem)
        else:
            raise ConfigError(f"no such config: {name_or_path}")
    return path.read_text()


def load_config(name_or_path: str) -> ExperimentConfig:
    return parse_config(config_text(name_or_path))


def load_experiment(name_or_path: str) -> Experiment:
    return build(parse_config_syntax(config_text(name_or_path)))
