from fractions import Fraction

import pytest

from relhyp.cayley import (EXACT, UPPER, CayleyBall, OutOfBall, PathInGraph, build_ball,
                           cyclic_growth, estimate_delta, fit_linear, four_point_delta, geodesics,
                           hausdorff_check, load_ball, quasi_geodesic_params, save_ball)
from relhyp.config import load_experiment
from relhyp.groups import FreeAbelian, RelativeStructure
from relhyp.words import parse_word

from oracles import brute_force_delta, brute_force_lengths

GRID = RelativeStructure(FreeAbelian(2), [], {"a": (1, 0), "b": (0, 1)})
ZXZ = load_experiment("zxz")
TREE = load_experiment("tree")


def grid_word(text):
    return parse_word(text, GRID)


def test_bfs_matches_word_enumeration_on_the_grid():
    ball = build_ball(GRID, 3)
    brute = brute_force_lengths(GRID, {}, 3)
    assert dict(zip(ball.keys, ball.dist)) == brute
    assert len(ball) == 25
    assert all(ball.exact)          # no peripheral subgroups: BFS is exact


def test_unpooled_parabolic_is_only_an_upper_bound():
    ball = build_ball(ZXZ.rs, 3, ZXZ.pools)
    assert ball.relative_length((1, 0)) == (1, EXACT)
    # a^5 lies in H_A (true length 1) but the pool stops at a^4
    assert ball.relative_length((5, 0)) == (2, UPPER)
    assert ball.relative_length((1, 1)) == (2, EXACT)
    assert ball.relative_length((0, 2)) == (2, EXACT)
    assert ball.relative_length((6, 0)) == (2, UPPER)
    with pytest.raises(OutOfBall):
        ball.index((0, 9))


def test_complete_pools_make_every_vertex_exact():
    ball = build_ball(TREE.rs, 4)
    assert all(ball.exact)
    assert [len(ball.sphere(r)) for r in range(5)] == [1, 3, 6, 12, 24]


def test_distance_matrix_is_a_metric_on_the_grid():
    ball = build_ball(GRID, 4)
    dm = ball.distance_matrix()
    assert (dm == dm.T).all()
    for i in range(0, len(ball), 7):
        assert dm[0, i] == ball.dist[i]


def test_geodesic_count_in_the_grid():
    ball = build_ball(GRID, 4)
    gs = geodesics((0, 0), (2, 1), ball)
    assert len(gs.paths) == 3 and not gs.truncated
    assert all(len(p) == 4 for p in gs.paths)


def test_ball_json_roundtrip(tmp_path):
    ball = build_ball(TREE.rs, 3)
    path = tmp_path / "ball.json"
    save_ball(ball, path)
    again = load_ball(path)
    assert again.keys == ball.keys and again.dist == ball.dist and again.exact == ball.exact
    assert sorted(again.edges()) == sorted(ball.edges())
    assert estimate_delta(again).delta == estimate_delta(ball).delta == 0


@pytest.mark.parametrize("name, rs, pools, radius, corner_radius", [
    ("grid", GRID, None, 4, 2),
    ("zxz", ZXZ.rs, {"A": [-2, -1, 1, 2]}, 4, 2),
    ("dinfty", load_experiment("dinfty").rs, None, 5, 2),
    ("z5z5", load_experiment("z5z5").rs, None, 3, 1),
])
def test_delta_matches_brute_force(name, rs, pools, radius, corner_radius):
    ball = build_ball(rs, radius, pools)
    est = estimate_delta(ball, corner_radius)
    corners = [i for i in range(len(ball)) if ball.exact[i] and ball.dist[i] <= corner_radius]
    assert est.exhaustive and est.corners == len(corners)
    assert est.delta == brute_force_delta(ball, corners)


def test_four_point_on_a_tree_is_zero():
    ball = build_ball(TREE.rs, 4)
    assert four_point_delta(ball) == 0


def test_fit_linear():
    assert fit_linear([(n, n) for n in range(1, 6)]).as_tuple() == (1, 0)
    assert fit_linear([(2 * n, n) for n in range(1, 6)]).as_tuple() == (1, 5)
    assert fit_linear([(2 * n, n) for n in range(1, 6)], c_max=0).as_tuple() == (2, 0)
    assert fit_linear([(n * n, 1) for n in range(1, 6)], c_max=0,
                      grid=[Fraction(1), Fraction(2)]) is None


def test_quasi_geodesic_params_of_a_detour():
    ball = build_ball(GRID, 4)
    geo = PathInGraph.from_word(GRID, grid_word("a a"), (0, 0))
    assert quasi_geodesic_params(geo, ball, c_max=0).as_tuple() == (1, 0)
    detour = PathInGraph.from_word(GRID, grid_word("b a b^-1"), (0, 0))
    fit = quasi_geodesic_params(detour, ball, c_max=0)
    assert fit.as_tuple() == (3, 0)


def test_hausdorff_of_two_grid_geodesics():
    ball = build_ball(GRID, 4)
    p = PathInGraph.from_word(GRID, grid_word("a a b b"), (0, 0))
    q = PathInGraph.from_word(GRID, grid_word("b b a a"), (0, 0))
    assert hausdorff_check(p, q, ball) == 2


def test_cyclic_growth_of_torsion_and_parabolic():
    ball = build_ball(TREE.rs, 6)
    a = TREE.parse_g("a")
    g = cyclic_growth(a, 4, ball)
    assert g.lengths == [1, 0, 1, 0] and not g.linear
    ball = build_ball(ZXZ.rs, 4, ZXZ.pools)
    g = cyclic_growth((1, 0), 4, ball)
    assert g.lengths == [1, 1, 1, 1] and not g.linear


def test_capped_ball_reports_it():
    ball = build_ball(TREE.rs, 8, vertex_cap=50)
    assert ball.capped and len(ball) == 50


def test_loaded_ball_has_no_elements():
    ball = CayleyBall.from_json(build_ball(TREE.rs, 2).to_json())
    assert ball.elements is None and len(ball) == 10
