import json

import numpy as np
import pytest
from helpers import FAMILIES, family_dims, random_lmo_instance, random_point_in, random_set
from hypothesis import given
from hypothesis import strategies as st

from locallmo import geometry as geo
from locallmo import objectives as O
from locallmo import oracle as orc
from locallmo import rules as R

seeds = st.integers(0, 2**32 - 1)
families = st.sampled_from(FAMILIES)


# contains ------------------------------------------------------------------------------

def test_contains_examples():
    assert geo.Box([2, 2], [4, 4]).contains([4, 4], tol=0)
    assert geo.WholeSpace(2).contains([1e300, -3])
    assert not geo.EuclideanBall([0, 0], 1).contains([2, 0], tol=1e-9)


def test_contains_tolerance_is_componentwise_for_box():
    b = geo.Box([0, 0], [1, 1])
    assert b.contains([1 + 5e-10, 1 + 5e-10])
    assert not b.contains([1 + 2e-9, 0.5])


def test_contains_dimension_mismatch():
    with pytest.raises(geo.DimensionMismatch):
        geo.Box([0, 0], [1, 1]).contains([0.5, 0.5, 0.5])


# project -------------------------------------------------------------------------------

def test_project_examples():
    np.testing.assert_array_equal(geo.Box([2, 2], [4, 4]).project([5, 3]), [4, 3])
    np.testing.assert_allclose(geo.Hyperplane([0, 1], 0).project([3, 2]), [3, 0])
    np.testing.assert_allclose(geo.EuclideanBall([0, 0], 1).project([3, 4]), [0.6, 0.8])


@given(families, seeds)
def test_project_idempotent_and_nonexpansive(family, seed):
    rng = np.random.default_rng(seed)
    d = int(rng.choice(family_dims(family)))
    s = random_set(family, d, rng)
    x, y = rng.normal(scale=4, size=(2, d))
    px, py = s.project(x), s.project(y)
    assert s.contains(px)
    np.testing.assert_allclose(s.project(px), px, atol=1e-12)
    assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12


@given(families, seeds)
def test_project_returns_feasible_input_unchanged(family, seed):
    rng = np.random.default_rng(seed)
    d = int(rng.choice(family_dims(family)))
    s = random_set(family, d, rng)
    x = random_point_in(s, rng)
    np.testing.assert_allclose(s.project(x), x, atol=1e-12)


@given(families, seeds)
def test_project_is_the_nearest_point(family, seed):
    # variational inequality <y - P(y), z - P(y)> <= 0 for feasible z
    rng = np.random.default_rng(seed)
    d = int(rng.choice(family_dims(family)))
    s = random_set(family, d, rng)
    y = rng.normal(scale=4, size=d)
    p = s.project(y)
    for _ in range(5):
        z = random_point_in(s, rng)
        assert (y - p) @ (z - p) <= 1e-9 * (1 + np.linalg.norm(y - p) * np.linalg.norm(z - p))


# global lmo ----------------------------------------------------------------------------

def test_global_lmo_examples():
    np.testing.assert_array_equal(geo.Box([2, 2], [4, 4]).global_lmo([1, 1]), [2, 2])
    np.testing.assert_array_equal(geo.Segment([0, 0], [1, 0]).global_lmo([-1, 0]), [1, 0])
    with pytest.raises(geo.Unbounded):
        geo.WholeSpace(2).global_lmo([1, 0])


@pytest.mark.parametrize("s", [geo.Ray([0, 0], [1, 0]), geo.Hyperplane([0, 1], 0), geo.AffineLine([0, 0], [1, 0]),
                               geo.Slab([0, 1], 0, 1)])
def test_global_lmo_unbounded_sets(s):
    with pytest.raises(geo.Unbounded):
        s.global_lmo([-1, 0.3])


def test_global_lmo_bounded_directions_on_unbounded_sets():
    np.testing.assert_array_equal(geo.Ray([0, 0], [1, 0]).global_lmo([1, 0]), [0, 0])
    # g normal to the hyperplane: every point ties, a feasible one comes back
    z = geo.Hyperplane([0, 1], 2).global_lmo([0, 3])
    assert geo.Hyperplane([0, 1], 2).contains(z)


@given(st.sampled_from(["Singleton", "Segment", "EuclideanBall", "Box", "Diamond"]), seeds)
def test_global_lmo_beats_feasible_points(family, seed):
    rng = np.random.default_rng(seed)
    d = int(rng.choice(family_dims(family)))
    s = random_set(family, d, rng)
    g = rng.normal(size=d)
    z = s.global_lmo(g)
    assert s.contains(z)
    for _ in range(10):
        assert g @ z <= g @ random_point_in(s, rng) + 1e-12


def test_global_lmo_box_tie_is_lexicographic():
    np.testing.assert_array_equal(geo.Box([0, 0], [1, 1]).global_lmo([0, 1]), [0, 0])


# local lmo -----------------------------------------------------------------------------

def test_local_lmo_examples():
    np.testing.assert_allclose(geo.WholeSpace(2).local_lmo(geo.LocalBall([0, 0], 1), [3, 4]), [-0.6, -0.8])
    np.testing.assert_allclose(geo.Hyperplane([0, 1], 0).local_lmo(geo.LocalBall([0, 0], 2), [1, 1]), [-2, 0])
    np.testing.assert_allclose(geo.Ray([0, 0], [1, 0]).local_lmo(geo.LocalBall([0.5, 0], 2), [1, 0]), [0, 0])


def test_local_lmo_paper_box_matches_oracle():
    f = O.make_paper_quadratic()
    box = O.paper_box()
    x0 = np.array([4.0, 4.0])
    theta = R.strong_convexity_theta(1, 100)
    ball = geo.LocalBall(x0, theta * np.linalg.norm(x0 - f.optimum.x_star))
    g = f.gradient(x0)
    ref = orc.oracle_local_lmo(box, ball, g)
    assert abs(g @ box.local_lmo(ball, g) - ref.objective) <= 1e-10


def test_local_lmo_zero_gradient_returns_center():
    for family in FAMILIES:
        rng = np.random.default_rng(0)
        s, ball, _ = random_lmo_instance(family, 2, rng)
        np.testing.assert_array_equal(s.local_lmo(ball, np.zeros(2)), ball.center)


def test_local_lmo_tie_breaking_is_lexicographic():
    seg = geo.Segment([0, 0], [1, 0])
    np.testing.assert_array_equal(seg.local_lmo(geo.LocalBall([0.5, 0], 1), [0, 1]), [0, 0])
    np.testing.assert_array_equal(geo.Singleton([1, 2]).local_lmo(geo.LocalBall([1, 2], 3), [1, 1]), [1, 2])


def test_local_lmo_errors():
    b = geo.Box([2, 2], [4, 4])
    with pytest.raises(geo.InfeasibleCenter):
        b.local_lmo(geo.LocalBall([5, 5], 1), [1, 1])
    with pytest.raises(geo.BadRadius):
        b.local_lmo(geo.LocalBall([3, 3], 0), [1, 1])
    with pytest.raises(geo.BadRadius):
        geo.LocalBall([3, 3], -1)
    with pytest.raises(geo.BadRadius):
        geo.LocalBall([3, 3], np.inf)
    with pytest.raises(geo.DimensionMismatch):
        b.local_lmo(geo.LocalBall([3, 3], 1), [1, 1, 1])


@given(families, seeds)
def test_local_lmo_feasible_and_in_ball(family, seed):
    rng = np.random.default_rng(seed)
    d = int(rng.choice(family_dims(family)))
    s, ball, g = random_lmo_instance(family, d, rng)
    z = s.local_lmo(ball, g)
    assert s.contains(z, 1e-9)
    assert np.linalg.norm(z - ball.center) <= ball.radius + 1e-9


@given(families, seeds)
def test_local_lmo_matches_oracle(family, seed):
    rng = np.random.default_rng(seed)
    d = int(rng.choice(family_dims(family)))
    s, ball, g = random_lmo_instance(family, d, rng)
    ref = orc.oracle_local_lmo(s, ball, g)
    assert g @ s.local_lmo(ball, g) <= ref.objective + 1e-8 * (1 + np.linalg.norm(g))


@given(st.sampled_from([f for f in FAMILIES if f != "Singleton"]), seeds)
def test_local_lmo_lands_on_sphere_when_admissible(family, seed):
    # f = 0.5 ||. - xs||^2 with xs feasible; t <= <g, x - xs>/||g|| is Type-I admissible
    rng = np.random.default_rng(seed)
    d = int(rng.choice(family_dims(family)))
    s = random_set(family, d, rng)
    x = random_point_in(s, rng)
    xs = s.project(rng.normal(scale=3, size=d))
    g = x - xs  # gradient of 0.5 ||. - xs||^2
    if np.linalg.norm(g) < 1e-6:
        return
    t = (g @ (x - xs)) / np.linalg.norm(g) * rng.uniform(0.05, 1)
    if t <= 1e-9:
        return
    z = s.local_lmo(geo.LocalBall(x, t), g)
    assert abs(np.linalg.norm(z - x) - t) <= 1e-9 * max(1, t)


@given(seeds, st.integers(1, 3))
def test_affine_subspace_closed_form(seed, k):
    rng = np.random.default_rng(seed)
    d = 4
    s = geo.AffineSubspace.from_spanning(rng.normal(size=d), rng.normal(size=(k, d)))
    x = s.project(rng.normal(size=d))
    g = rng.normal(size=d)
    t = float(rng.uniform(0.1, 3))
    B = s.basis
    Pg = B.T @ (B @ g)
    np.testing.assert_allclose(s.local_lmo(geo.LocalBall(x, t), g), x - t * Pg / np.linalg.norm(Pg),
                               atol=1e-12, rtol=0)


def test_slab_two_step_construction():
    # boundary at distance 1 along -u, remaining budget sqrt(t^2 - 1) tangentially
    s = geo.Slab([0, 1], 0, 5)
    z = s.local_lmo(geo.LocalBall([0, 1], 2), [1, 1])
    np.testing.assert_allclose(z, [-np.sqrt(3), 0])


def test_diamond_local_lmo_on_edge():
    s = geo.Diamond([0, 0], 1)
    z = s.local_lmo(geo.LocalBall([1, 0], 0.5), [0, -1])
    assert s.contains(z)
    assert abs(np.linalg.norm(z - [1, 0]) - 0.5) < 1e-12
    assert z[1] > 0 and z[0] + z[1] == pytest.approx(1)


def test_diamond_tiny_radius_at_vertex():
    s = geo.Diamond([0, 0], 1)
    z = s.local_lmo(geo.LocalBall([1, 0], 1e-300), [-1, 0])
    assert s.contains(z)


# validation and serialization ----------------------------------------------------------

def test_validate_examples():
    assert geo.validate({"variant": "Box", "lo": [0, 0], "hi": [1, 1]}) == []
    assert geo.validate({"variant": "Box", "lo": [2, 0], "hi": [1, 1]}) == ["lo <= hi violated"]
    assert geo.validate({"variant": "Hyperplane", "a": [0, 0], "b": 1}) == ["a != 0 violated"]


@pytest.mark.parametrize("make", [
    lambda: geo.Box([2, 0], [1, 1]),
    lambda: geo.Hyperplane([0, 0], 1),
    lambda: geo.Segment([1, 1], [1, 1]),
    lambda: geo.EuclideanBall([0, 0], 0),
    lambda: geo.Slab([1, 0], 2, 1),
    lambda: geo.AffineLine([0, 0], [1, 1]),
    lambda: geo.AffineSubspace([0, 0], [[1, 0], [1, 0]]),
    lambda: geo.Box([0, np.nan], [1, 1]),
])
def test_invalid_sets_raise(make):
    with pytest.raises(geo.InvalidSet):
        make()


@given(families, seeds)
def test_serialization_round_trip(family, seed):
    rng = np.random.default_rng(seed)
    d = int(rng.choice(family_dims(family)))
    s = random_set(family, d, rng)
    doc = json.loads(json.dumps(s.to_dict()))
    back = geo.set_from_dict(doc)
    assert type(back) is type(s)
    for k, v in s.params().items():
        np.testing.assert_array_equal(getattr(back, k), v)


def test_unknown_variant():
    with pytest.raises(geo.GeometryError, match="Simplex"):
        geo.set_from_dict({"variant": "Simplex"})
