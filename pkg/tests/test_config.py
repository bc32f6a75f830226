import pytest
from hypothesis import given, settings, strategies as st

from relhyp.config import (BUNDLED, ConfigError, config_text, format_config, load_experiment,
                           parse_config, parse_config_syntax, parse_pool)

ZXZ_TEXT = config_text("zxz")


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_configs_roundtrip(name):
    cfg = parse_config(config_text(name))
    assert parse_config(format_config(cfg)) == cfg


def test_zxz_contents():
    ex = load_experiment("zxz")
    assert ex.rs.lambdas == ["A"] and ex.rs.x_names == ["b"]
    assert ex.pools["A"] == [-4, -3, -2, -1, 1, 2, 3, 4]
    assert len(ex.presentation.relators) == 1
    assert ex.subgroups["Qa"].gens == [(1, 0)]


def test_subgroup_lookup_forms():
    ex = load_experiment("tree")
    assert ex.subgroup("Qab").name == "Qab"
    assert len(ex.subgroup("A").gens) == 1
    q = ex.subgroup("Y=a, b c")
    assert q.name == "Y" and len(q.gens) == 2
    with pytest.raises(ConfigError):
        ex.subgroup("nope")


def error_of(text):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    return info.value


@pytest.mark.parametrize("text, line, column, fragment", [
    ("", 0, 0, "missing group"),
    ("group G = cyclic(3)\nfoo 1\n", 2, 1, "unknown key"),
    ("group G = free_product(cyclic(2) as a, cyclic(x) as b)\n", 1, 40, "cyclic order"),
    ("group G = cyclic(3)\nseed x\n", 2, 6, "seed"),
    ("group G = cyclic(3)\ncap speed = 3\n", 2, 5, "unknown cap"),
    (ZXZ_TEXT.replace("relator [H[A]{1}, b]", "relator b"), 8, 9, "not null in G"),
    (ZXZ_TEXT.replace("relator [H[A]{1}, b]", "relator [H[A]{x}, b]"), 8, 15, "bad element"),
    (ZXZ_TEXT.replace("X b\n", ""), 3, 11, "does not generate"),
    (ZXZ_TEXT.replace("pool A = -4..4", "pool Z = 1..2"), 9, 10, "unknown subgroup label"),
])
def test_diagnostics_carry_line_and_column(text, line, column, fragment):
    err = error_of(text)
    assert (err.line, err.column) == (line, column)
    assert fragment in err.msg
    assert err.to_json()["line"] == line


def test_embedding_must_be_injective():
    text = ("group G = cyclic(4)\nrelative_to A = cyclic(inf) gens 1\nX g = 1\n")
    assert "kills" in error_of(text).msg


def test_parse_pool_forms():
    ex = load_experiment("z5z5")
    assert parse_pool("all", ex.rs, "A") == [1, 2, 3, 4]
    assert parse_pool("1..2", ex.rs, "A") == [1, 2]
    assert parse_pool("ball(1)", ex.rs, "A") == [1, 4]
    assert parse_pool("a^2, a^3", ex.rs, "A") == [2, 3]
    zxz = load_experiment("zxz")
    with pytest.raises(Exception):
        parse_pool("all", zxz.rs, "A")


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10**6), lo=st.integers(-6, -1), hi=st.integers(1, 6),
       area_cap=st.integers(4, 100))
def test_generated_configs_roundtrip(seed, lo, hi, area_cap):
    text = (ZXZ_TEXT.replace("pool A = -4..4", f"pool A = {lo}..{hi}")
            .replace("seed 0", f"seed {seed}") + f"cap area = {area_cap}\n")
    cfg = parse_config_syntax(text)
    assert parse_config_syntax(format_config(cfg)) == cfg
    assert cfg.cap("area") == area_cap
