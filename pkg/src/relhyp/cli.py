"""Command-line entry point: ``relhyp <command> -c CONFIG ...``.

Reports go to stdout as JSON with sorted keys.  ``--out DIR`` also writes
report.json, report.csv (tabular commands), summary.txt and metadata.json;
``--out FILE.json`` writes just the JSON report there.  Exit status is 0 on
completion, 2 when the result is a negative verdict or counterexample, and 1
on errors (reported as JSON on stderr).
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import random
import sys
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .cayley import (CayleyBall, ball_letters, build_ball, estimate_delta, four_point_delta,
                     load_ball, normalize_pools)
from .components import find_components, isolated_components, omega_harness
from .config import ConfigError, Experiment, load_experiment, parse_pool
from .experiments import (BoundedGenSpec, auto_decompositions, bounded_gen_coverage,
                          diameter_profile)
from .groups import GroupError, enumerate_ball, symmetrize
from .relpres import alphabet_letters, area, dehn_profile, enumerate_words
from .subgroup import check_embedded, classify_element, elementary_closure
from .words import Word, format_word, invert, reduce, syllables

SCHEMA_VERSION = 1
ENV_AREA_CAP = "RELHYP_AREA_CAP"
ENV_VERTEX_CAP = "RELHYP_VERTEX_CAP"


@dataclass
class Outcome:
    report: dict
    code: int = 0
    table: tuple[list[str], list[list]] | None = None
    summary: str = ""


# --- helpers -----------------------------------------------------------------------

def _env_int(name: str) -> int | None:
    v = os.environ.get(name)
    if v is None or not v.strip():
        return None
    try:
        return int(v)
    except ValueError:
        raise GroupError(f"{name} must be an integer, got {v!r}") from None


def _experiment(args) -> Experiment:
    if not args.config:
        raise ConfigError("this command needs -c/--config")
    return load_experiment(args.config)


def _pools(ex: Experiment, specs: list[str] | None) -> dict:
    pools = dict(ex.pools)
    for item in specs or []:
        lam, sep, expr = item.partition("=")
        lam = lam.strip()
        if not sep or lam not in ex.rs.peripherals:
            raise ConfigError(f"--pool expects LABEL=EXPR with a known label, got {item!r}")
        pools[lam] = parse_pool(expr, ex.rs, lam)
    return pools


def _radii(text: str) -> list[int]:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(x) for x in text.split(",") if x.strip()]


def _ball(ex: Experiment, args, radius: int) -> CayleyBall:
    cap = getattr(args, "vertex_cap", None) or _env_int(ENV_VERTEX_CAP) or ex.config.cap("vertex")
    kwargs = {"vertex_cap": cap} if cap else {}
    return build_ball(ex.rs, radius, _pools(ex, getattr(args, "pool", None)), **kwargs)


def _stamp(kind: str, body: dict) -> dict:
    return {"report": kind, "schema_version": SCHEMA_VERSION, **body}


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table[0])
    w.writerows(table[1])
    return buf.getvalue()


# --- commands ------------------------------------------------------------------------

def cmd_area(args) -> Outcome:
    ex = _experiment(args)
    w = ex.word(args.word)
    cap = args.cap or _env_int(ENV_AREA_CAP) or ex.config.cap("area")
    kwargs = {}
    exp_cap = args.max_expansions or ex.config.cap("expansions")
    if exp_cap:
        kwargs["max_expansions"] = exp_cap
    res = area(w, ex.presentation, cap, **kwargs)
    body = res.to_json()
    body["word"] = format_word(w, ex.rs)
    return Outcome(_stamp("area", body), 0, None,
                   f"area({body['word']}) = {res.status}({res.k}) at cap {res.cap}")


def cmd_dehn(args) -> Outcome:
    ex = _experiment(args)
    pools = _pools(ex, args.pool)
    for lam in ex.rs.lambdas:
        if lam not in pools:
            H = ex.rs.oracles[lam]
            if H.order() is None:
                raise ConfigError(f"H[{lam}] is infinite: give --pool {lam}=...")
            pools[lam] = [h for h in H.elements() if not H.is_identity(h)]
    cap = args.cap or _env_int(ENV_AREA_CAP) or ex.config.cap("area")
    prof = dehn_profile(ex.presentation, args.n_max, pools, cap,
                        reduced_only=not args.all_words,
                        word_cap=ex.config.cap("words") or 2_000_000)
    body = prof.to_json()
    table = (["n", "max_area", "unknown_count"],
             [[r.n, r.max_area, r.unknown + r.upper_bound] for r in prof.rows])
    return Outcome(_stamp("dehn", body), 0, table,
                   f"dehn profile to n={args.n_max}: " +
                   ", ".join(str(r.max_area) for r in prof.rows) + f"\n{prof.note}")


def cmd_ball(args) -> Outcome:
    ex = _experiment(args)
    ball = _ball(ex, args, args.radius)
    body = ball.to_json()
    table = (["key", "dist", "exact"], [[k, d, e] for k, d, e in zip(ball.keys, ball.dist, ball.exact)])
    return Outcome(_stamp("ball", body), 0, table,
                   f"ball of radius {args.radius}: {len(ball)} vertices"
                   f"{' (capped)' if ball.capped else ''}")


def cmd_delta(args) -> Outcome:
    if args.ball_file:
        ball = load_ball(args.ball_file)
    else:
        ball = _ball(_experiment(args), args, args.radius)
    est = estimate_delta(ball, args.corner_radius, seed=args.seed or 0)
    body = est.to_json()
    if args.four_point:
        body["four_point"] = str(four_point_delta(ball, args.corner_radius, seed=args.seed or 0))
    return Outcome(_stamp("delta", body), 0, None,
                   f"delta = {est.delta} over {est.triangles} triangles "
                   f"({'exhaustive' if est.exhaustive else 'sampled'})")


def cmd_components(args) -> Outcome:
    ex = _experiment(args)
    w = ex.word(args.word)
    comps = find_components(w, ex.rs, cyclic=args.cyclic)
    iso = set(id(c) for c in isolated_components(comps))
    rows = [{"lambda": c.lam, "start": c.start, "length": c.length, "coset": c.coset_key,
             "element": ex.rs.format_h(c.lam, c.element), "isolated": id(c) in iso} for c in comps]
    sylls = syllables(reduce(w, ex.rs.oracles))
    body = {"word": format_word(w, ex.rs), "relative_length": len(reduce(w, ex.rs.oracles)),
            "syllables": [{"lambda": s.lam, "start": s.start, "stop": s.stop} for s in sylls],
            "components": rows}
    table = (["lambda", "start", "length", "coset", "element", "isolated"],
             [[r["lambda"], r["start"], r["length"], r["coset"], r["element"], r["isolated"]] for r in rows])
    return Outcome(_stamp("components", body), 0, table,
                   f"{len(rows)} components, {len(iso)} isolated")


def _null_cycles(ex: Experiment, pools: dict, n_max: int) -> list[Word]:
    letters = alphabet_letters(ex.rs, pools)
    out = [Word(())]
    for _, w in enumerate_words(letters, n_max, reduced_only=False):
        if ex.G.is_identity(ex.rs.evaluate(w)):
            out.append(Word(w))
    return out


def cmd_omega(args) -> Outcome:
    ex = _experiment(args)
    pools = _pools(ex, args.pool)
    omega = {}
    for item in args.omega or []:
        lam, _, expr = item.partition("=")
        lam = lam.strip()
        if lam not in ex.rs.peripherals:
            raise ConfigError(f"--omega: unknown subgroup label {lam!r}")
        omega[lam] = [ex.rs.parse_h(lam, e) for e in expr.split(",") if e.strip()]
    for lam in ex.rs.lambdas:
        if lam not in omega:
            H = ex.rs.oracles[lam]
            omega[lam] = pools.get(lam) or ([h for h in H.elements() if not H.is_identity(h)]
                                            if H.order() else [])
    if args.cycles:
        cycles = [ex.word(line) for line in Path(args.cycles).read_text().splitlines()
                  if line.strip() and not line.lstrip().startswith("#")]
    else:
        for lam in ex.rs.lambdas:
            if lam not in pools:
                H = ex.rs.oracles[lam]
                if H.order() is None:
                    raise ConfigError(f"H[{lam}] is infinite: give --pool {lam}=...")
                pools[lam] = [h for h in H.elements() if not H.is_identity(h)]
        cycles = _null_cycles(ex, pools, args.max_length)
    rep = omega_harness(ex.rs, cycles, omega, search_radius=args.search_radius)
    body = rep.to_json()
    table = (["cycle", "length", "sigma", "ratio"],
             [[r["cycle"], r["length"], r["sigma"], r["ratio"]] for r in body["rows"]])
    return Outcome(_stamp("omega", body), 2 if rep.counterexample else 0, table,
                   f"K_hat = {rep.k_hat} over {len(cycles)} cycles (max ratio {rep.ratio_max})")


def cmd_check_embedded(args) -> Outcome:
    ex = _experiment(args)
    q = ex.subgroup(args.subgroup)
    ball = _ball(ex, args, args.radius)
    rep = check_embedded(q, ball, args.q_radius, args.c_max)
    body = rep.to_json()
    summary = f"{q.name}: {rep.verdict}" + (f"({rep.condition})" if rep.condition else "")
    if rep.witness and "g" in rep.witness:
        summary += f", witness g = {rep.witness['g']}"
    return Outcome(_stamp("check-embedded", body), 2 if rep.violated else 0, None, summary)


def cmd_elementary(args) -> Outcome:
    ex = _experiment(args)
    g = ex.parse_g(args.g)
    ball = _ball(ex, args, args.radius)
    clo = elementary_closure(g, ball, args.n_max)
    body = clo.to_json(ex.G)
    return Outcome(_stamp("elementary", body), 0, None,
                   f"E({ex.G.format_element(g)}): {len(clo.plus)} in E+, {len(clo.minus)} outside, "
                   f"index evidence {clo.index_evidence}")


def cmd_classify(args) -> Outcome:
    ex = _experiment(args)
    g = ex.parse_g(args.g)
    ball = _ball(ex, args, args.radius)
    cls = classify_element(g, ball, args.conj_radius)
    body = cls.to_json(ex.G)
    body["element"] = ex.G.format_element(g)
    return Outcome(_stamp("classify", body), 0, None, f"{body['element']}: {cls.kind}")


def cmd_bounded_gen(args) -> Outcome:
    ex = _experiment(args)
    xs = [ex.parse_g(t) for t in args.x.split(",")]
    ball = _ball(ex, args, args.radius)
    spec = BoundedGenSpec(xs, args.exp, auto_decompositions(xs, ball))
    rep = bounded_gen_coverage(spec, ball)
    body = rep.to_json()
    table = (["radius", "sphere", "covered", "fraction"],
             [[c["radius"], c["sphere"], c["covered"], c["fraction"]] for c in rep.coverage])
    return Outcome(_stamp("bounded-gen", body), 2 if rep.violations else 0, table,
                   f"{rep.products} products, {rep.distinct} distinct, max length {rep.max_length}, "
                   f"bound {rep.bound}")


def cmd_diameter(args) -> Outcome:
    ex = _experiment(args)
    radii = _radii(args.radii)
    prof = diameter_profile(ex.rs, radii, _pools(ex, args.pool))
    increasing = all(a < b for a, b in zip(prof, prof[1:]))
    body = {"radii": radii, "diameters": prof, "strictly_increasing": increasing}
    table = (["radius", "diameter"], [[r, d] for r, d in zip(radii, prof)])
    return Outcome(_stamp("diameter", body), 0, table,
                   "diameters " + ", ".join(map(str, prof)))


def cmd_verify(args) -> Outcome:
    """Spot-check the invariants of the configured structure."""
    ex = _experiment(args)
    rng = random.Random(ex.config.seed if args.seed is None else args.seed)
    checks = []

    def record(name, ok, detail=""):
        checks.append({"check": name, "ok": bool(ok), "detail": detail})

    rs, G = ex.rs, ex.G
    oracles = [("G", G)] + [(f"H[{lam}]", H) for lam, H in rs.oracles.items()]
    for name, o in oracles:
        sample = list(enumerate_ball(o, symmetrize(o, o.generators()), 3, cap=2000).lengths)
        bad = None
        for _ in range(200):
            a, b, c = (rng.choice(sample) for _ in range(3))
            if o.multiply(o.multiply(a, b), c) != o.multiply(a, o.multiply(b, c)) \
                    or not o.is_identity(o.multiply(a, o.invert(a))) or o.multiply(o.identity(), a) != a:
                bad = (a, b, c)
                break
        record(f"{name} group laws", bad is None, "" if bad is None else repr(bad))
    pools = _pools(ex, args.pool)
    letters = alphabet_letters(rs, {lam: pools.get(lam) or (
        [h for h in rs.oracles[lam].elements() if not rs.oracles[lam].is_identity(h)]
        if rs.oracles[lam].order() else []) for lam in rs.lambdas})
    ok = True
    for _ in range(200):
        w = Word(tuple(rng.choice(letters) for _ in range(rng.randint(0, 8)))) if letters else Word(())
        r = reduce(w, rs.oracles)
        if reduce(r, rs.oracles) != r or reduce(w + invert(w, rs.oracles), rs.oracles).letters \
                or G.multiply(rs.evaluate(w), G.invert(rs.evaluate(r))) != G.identity():
            ok = False
            break
    record("reduce: idempotent, inverse cancels, value preserved", ok)
    record("relators null in G", all(G.is_identity(rs.evaluate(r)) for r in ex.presentation.relators))
    problems = rs.validate(seed=rng.randrange(1 << 30))
    record("embeddings are injective homomorphisms", not problems, "; ".join(problems))
    try:
        ball = _ball(ex, args, args.radius)
        brute = _brute_lengths(rs, ball.pools, args.radius)
        mism = [k for k, d in zip(ball.keys, ball.dist) if brute.get(k) != d]
        record(f"BFS matches word enumeration to radius {args.radius}",
               not mism and len(brute) == len(ball), ", ".join(mism[:5]))
        dm = ball.distance_matrix()
        ex_idx = [i for i, e in enumerate(ball.exact) if e]
        record("distance symmetry on exact vertices",
               all(dm[i, j] == dm[j, i] for i in ex_idx for j in ex_idx))
    except GroupError as exc:
        record("ball checks", False, str(exc))
    failed = [c for c in checks if not c["ok"]]
    return Outcome(_stamp("verify", {"checks": checks, "failed": len(failed)}),
                   2 if failed else 0,
                   (["check", "ok", "detail"], [[c["check"], c["ok"], c["detail"]] for c in checks]),
                   f"{len(checks) - len(failed)}/{len(checks)} checks passed")


def _brute_lengths(rs, pools, radius: int) -> dict[str, int]:
    """Shortest word length per element by listing every word, no BFS."""
    G = rs.G
    vals = [rs.letter_value(x) for x in ball_letters(rs, normalize_pools(rs, pools))]
    out = {}
    for n in range(radius + 1):
        for combo in itertools.product(vals, repeat=n):
            g = G.identity()
            for v in combo:
                g = G.multiply(g, v)
            out.setdefault(G.canonical_key(g), n)
    return out


# --- parser ----------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relhyp", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"relhyp {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", "--group", dest="config",
                        help="config file, or a bundled name: zxz, tree, dinfty, z5z5")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", help="report directory, or a .json file for the report alone")
    common.add_argument("--format", choices=("json", "csv", "summary"), default="json",
                        help="stdout format; csv applies to tabular commands")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(func=func)
        return p

    def pool_opt(p):
        p.add_argument("--pool", action="append", metavar="LABEL=EXPR",
                       help="pool for one subgroup: i..j, all, ball(r) or e1,e2 (repeatable)")
        p.add_argument("--vertex-cap", type=int, default=None)

    p = add("area", cmd_area, "certified relative area of a null word")
    p.add_argument("--word", required=True)
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--max-expansions", type=int, default=None)

    p = add("dehn", cmd_dehn, "pool-restricted relative Dehn profile")
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--cap", type=int, default=None)
    p.add_argument("--all-words", action="store_true", help="include non-reduced words")
    pool_opt(p)

    p = add("ball", cmd_ball, "relative Cayley ball")
    p.add_argument("--radius", type=int, required=True)
    pool_opt(p)

    p = add("delta", cmd_delta, "thin-triangle constant of a ball")
    p.add_argument("ball_file", nargs="?", help="ball JSON written by 'relhyp ball'")
    p.add_argument("--radius", type=int, default=6)
    p.add_argument("--corner-radius", type=int, default=None)
    p.add_argument("--four-point", action="store_true")
    pool_opt(p)

    p = add("components", cmd_components, "H-components of a word or cycle")
    p.add_argument("--word", required=True)
    p.add_argument("--cyclic", action="store_true")

    p = add("omega", cmd_omega, "isolated-component sums over null cycles")
    p.add_argument("--cycles", help="file with one null word per line")
    p.add_argument("--max-length", type=int, default=8,
                   help="enumerate all null cycles up to this length when --cycles is absent")
    p.add_argument("--omega", action="append", metavar="LABEL=h1,h2")
    p.add_argument("--search-radius", type=int, default=32)
    pool_opt(p)

    p = add("check-embedded", cmd_check_embedded, "hyperbolic-embedding conditions at scale")
    p.add_argument("--subgroup", required=True, help="config subgroup, subgroup label, or Name=e1,e2")
    p.add_argument("--radius", type=int, default=6)
    p.add_argument("--q-radius", type=int, default=None)
    p.add_argument("--c-max", type=int, default=None)
    pool_opt(p)

    p = add("elementary", cmd_elementary, "elements of E(g) found in a ball")
    p.add_argument("--g", required=True)
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--radius", type=int, default=6)
    pool_opt(p)

    p = add("classify", cmd_classify, "finite order / parabolic / hyperbolic at scale")
    p.add_argument("--g", required=True)
    p.add_argument("--radius", type=int, default=6)
    p.add_argument("--conj-radius", type=int, default=None)
    pool_opt(p)

    p = add("bounded-gen", cmd_bounded_gen, "bounded-generation coverage experiment")
    p.add_argument("--x", required=True, help="comma-separated elements of G")
    p.add_argument("--exp", type=int, default=8)
    p.add_argument("--radius", type=int, default=6)
    pool_opt(p)

    p = add("diameter", cmd_diameter, "maximum exact relative length per radius")
    p.add_argument("--radii", default="1..6")
    pool_opt(p)

    p = add("verify", cmd_verify, "run the invariant suite on a config")
    p.add_argument("--radius", type=int, default=3)
    pool_opt(p)
    return parser


def _emit(outcome: Outcome, args) -> None:
    report = dumps(outcome.report)
    out = getattr(args, "out", None)
    if out and out.endswith(".json"):
        _atomic_write(Path(out), report)
        print(dumps({"report": outcome.report["report"], "written": out, "summary": outcome.summary}), end="")
        return
    if args.format == "csv" and outcome.table is not None:
        sys.stdout.write(_csv(outcome.table))
    elif args.format == "summary":
        sys.stdout.write(outcome.summary + "\n")
    else:
        sys.stdout.write(report)
    if out:
        d = Path(out)
        _atomic_write(d / "report.json", report)
        if outcome.table is not None:
            _atomic_write(d / "report.csv", _csv(outcome.table))
        _atomic_write(d / "summary.txt", outcome.summary + "\n")
        meta = {"command": args.command, "argv": sys.argv[1:], "version": __version__,
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                "exit_code": outcome.code}
        _atomic_write(d / "metadata.json", dumps(meta))


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        outcome = args.func(args)
        _emit(outcome, args)
    except ConfigError as exc:
        sys.stderr.write(json.dumps(exc.to_json(), sort_keys=True) + "\n")
        return 1
    except (GroupError, OSError, ValueError, KeyError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)},
                                    sort_keys=True) + "\n")
        return 1
    return outcome.code


if __name__ == "__main__":
    sys.exit(main())
