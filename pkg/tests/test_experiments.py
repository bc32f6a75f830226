import pytest

from relhyp.cayley import build_ball
from relhyp.config import load_experiment
from relhyp.experiments import (BoundedGenSpec, Decomp, auto_decompositions, bounded_gen_coverage,
                                diameter_profile, find_hyperbolic_element)
from relhyp.groups import GroupError

TREE = load_experiment("tree")
DINF = load_experiment("dinfty")


@pytest.fixture(scope="module")
def tree_ball():
    return build_ball(TREE.rs, 5)


def test_auto_decompositions_of_generators(tree_ball):
    xs = [TREE.parse_g(t) for t in ("a", "b", "c")]
    decs = auto_decompositions(xs, tree_ball)
    assert [d.lam for d in decs] == ["A", "B", "C"]
    assert all(TREE.G.is_identity(d.a) for d in decs)
    assert BoundedGenSpec(xs, 2, decs).verify(TREE.rs) == []


def test_auto_decomposition_of_a_conjugate(tree_ball):
    x = TREE.parse_g("b a b")
    dec, = auto_decompositions([x], tree_ball)
    assert dec.lam == "A" and tree_ball.exact_length(dec.a) == 1


def test_wrong_decomposition_is_rejected(tree_ball):
    a = TREE.parse_g("a")
    spec = BoundedGenSpec([a], 2, [Decomp(TREE.parse_g("b"), "A", TREE.rs.parse_h("A", "a"))])
    with pytest.raises(GroupError):
        bounded_gen_coverage(spec, tree_ball)


def test_coverage_small(tree_ball):
    xs = [TREE.parse_g(t) for t in ("a", "b")]
    spec = BoundedGenSpec(xs, 2, auto_decompositions(xs, tree_ball))
    rep = bounded_gen_coverage(spec, tree_ball)
    assert rep.products == 25
    # a^i b^j with Z2 factors gives 1, a, b, ab
    assert rep.distinct == 4
    assert rep.max_length == 2 and rep.bound == 2 and not rep.violations
    assert [c["covered"] for c in rep.coverage] == [1, 2, 1, 0, 0, 0]


def test_product_cap_marks_partial(tree_ball):
    xs = [TREE.parse_g(t) for t in ("a", "b")]
    rep = bounded_gen_coverage(BoundedGenSpec(xs, 2), tree_ball, product_cap=10)
    assert rep.partial and rep.products == 10 and rep.bound is None


def test_diameter_profiles():
    assert diameter_profile(TREE.rs, [1, 2, 3]) == [1, 2, 3]
    # D_infinity relative to both factors is a line: diameters keep growing
    assert diameter_profile(DINF.rs, range(1, 6)) == [1, 2, 3, 4, 5]
    assert diameter_profile(TREE.rs, []) == []


def test_find_hyperbolic_element_tree(tree_ball):
    res = find_hyperbolic_element(TREE.rs, 5, ball=tree_ball)
    assert res.found
    assert res.classification.kind == "HyperbolicAtScale"
    assert res.growth["linear"]
    assert not res.may_be_elementary


def test_find_hyperbolic_element_dinfty_is_elementary():
    res = find_hyperbolic_element(DINF.rs, 6)
    # D_infinity is itself elementary: the closure of ab is the whole ball
    assert res.found and res.may_be_elementary
    assert res.closure_index == 2
