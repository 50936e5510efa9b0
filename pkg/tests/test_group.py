from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from htype import group as G
from htype.group import (
    AlgebraElement,
    BallPoint,
    DomainError,
    GroupElement,
    SiegelPoint,
    make_space,
)

S7 = make_space(2, 1)
S2 = make_space(1, 1)


def naive_product(space, s, s2):
    """Loop form of (X + sqrt(a) X', Z + a Z' + 1/2 sqrt(a) [X, X'], a a')."""
    X, Z, a = space.split(s)
    X2, Z2, a2 = space.split(s2)
    E = space.algebra.E
    br = np.array([sum(E[i][p, q] * X[q] * X2[p] for p in range(space.m) for q in range(space.m)) for i in range(space.k)])
    return np.concatenate([X + np.sqrt(a) * X2, Z + a * Z2 + 0.5 * np.sqrt(a) * br, [a * a2]])


def random_group(space, rng, n=None):
    shape = () if n is None else (n,)
    a = np.exp(rng.uniform(-2.3, 2.3, size=shape))
    return space.join(rng.normal(size=shape + (space.m,)), rng.normal(size=shape + (space.k,)), a)


def test_q_is_exact():
    assert S7.Q == Fraction(4)
    assert make_space(3, 1).Q == Fraction(5)
    assert S2.Q == 2
    assert make_space(1, 1).dim == 4 and S7.dim == 7


def test_multiply_example():
    s = GroupElement([1.0, 0.0], [0.0], 1.0)
    s2 = GroupElement([0.0, 1.0], [0.0], 1.0)
    np.testing.assert_allclose(G.multiply(S2, s, s2).coords, [1.0, 1.0, 0.5, 1.0])


def test_product_matches_loop_oracle():
    rng = np.random.default_rng(1)
    for _ in range(20):
        s, s2 = random_group(S7, rng), random_group(S7, rng)
        np.testing.assert_allclose(G.multiply_coords(S7, s, s2), naive_product(S7, s, s2), rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("space", [S2, S7, make_space(3, (1, 1)), make_space(7, 1)], ids=repr)
def test_group_laws(space):
    rng = np.random.default_rng(0)
    s1, s2, s3 = (random_group(space, rng, 200) for _ in range(3))
    mul = lambda x, y: G.multiply_coords(space, x, y)  # noqa: E731
    np.testing.assert_allclose(mul(mul(s1, s2), s3), mul(s1, mul(s2, s3)), atol=1e-11, rtol=1e-12)
    e = np.broadcast_to(G.identity(space).coords, s1.shape)
    np.testing.assert_allclose(mul(s1, G.inverse_coords(space, s1)), e, atol=1e-12)
    np.testing.assert_allclose(mul(G.inverse_coords(space, s1), s1), e, atol=1e-12)
    np.testing.assert_array_equal(mul(s1, e), s1)


def test_point_types_validate():
    with pytest.raises(DomainError):
        GroupElement([0.0, 0.0], [0.0], 0.0)
    with pytest.raises(DomainError):
        SiegelPoint([2.0, 0.0], [0.0], 1.0)  # on the boundary t = |X|^2 / 4
    with pytest.raises(DomainError):
        BallPoint([0.6, 0.0], [0.0], 0.8)
    assert BallPoint([0.3, 0.0], [0.4], 0.0).radius == pytest.approx(0.5)


def test_lie_bracket_rule():
    X = np.array([1.0, 0, 0, 0])
    Z = np.array([0.0, 1.0])
    T = AlgebraElement(np.zeros(4), np.zeros(2), 1.0)
    v = AlgebraElement(X, np.zeros(2), 0.0)
    np.testing.assert_allclose(G.lie_bracket_s(S7, T, v).coords, np.r_[0.5 * X, 0, 0, 0])
    w = AlgebraElement(np.zeros(4), Z, 0.0)
    np.testing.assert_allclose(G.lie_bracket_s(S7, T, w).coords, np.r_[np.zeros(4), Z, 0])


def test_jacobi_identity():
    rng = np.random.default_rng(3)
    br = lambda a, b: G.lie_bracket_s(S7, a, b)  # noqa: E731
    for u, v, w in rng.normal(size=(30, 3, 7)):
        u, v, w = (AlgebraElement.from_coords(S7, x) for x in (u, v, w))
        total = br(u, br(v, w)).coords + br(v, br(w, u)).coords + br(w, br(u, v)).coords
        assert np.abs(total).max() <= 1e-12


def test_bracket_is_derivative_of_commutator():
    # [u, v] is the second-order term of exp-free group commutators: check via
    # d^2/ds dt of g(s) h(t) g(s)^-1 h(t)^-1 on one-parameter curves X-directions
    rng = np.random.default_rng(5)
    X1, X2 = rng.normal(size=(2, 4))
    eps = 1e-4
    g = S7.join(eps * X1, np.zeros(2), 1.0)
    h = S7.join(eps * X2, np.zeros(2), 1.0)
    mul = lambda a, b: G.multiply_coords(S7, a, b)  # noqa: E731
    comm = mul(mul(g, h), mul(G.inverse_coords(S7, g), G.inverse_coords(S7, h)))
    expected = G.lie_bracket_s(S7, *(AlgebraElement(x, np.zeros(2), 0.0) for x in (X1, X2))).coords
    np.testing.assert_allclose(comm[4:6] / eps**2, expected[4:6], rtol=1e-6)


def test_haar_density_examples():
    assert G.haar_density(S7, G.identity(S7)) == 1.0
    assert G.haar_density(S7, GroupElement(np.zeros(4), np.zeros(2), 2.0)) == 0.03125


def test_left_translation_jacobian_examples():
    assert G.left_translation_jacobian(S7, G.identity(S7)) == pytest.approx(1.0)
    g = GroupElement(np.ones(4), np.ones(2), 4.0)
    assert G.left_translation_jacobian(S7, g) == pytest.approx(1024.0, rel=1e-13)


def test_numeric_jacobian_matches_closed_form():
    rng = np.random.default_rng(2)
    for _ in range(5):
        g = GroupElement.from_coords(S7, random_group(S7, rng))
        s = GroupElement.from_coords(S7, random_group(S7, rng))
        expected = g.a ** 5
        assert G.numeric_left_translation_jacobian(S7, g, s, rel_step=1e-3) == pytest.approx(expected, rel=1e-10)


def test_left_haar_measure_is_invariant():
    # the pushforward of a^(-Q-1) dx under left translation keeps the density:
    # rho(g x) |det DL_g| = rho(x)
    rng = np.random.default_rng(4)
    Q1 = float(S7.Q) + 1
    for _ in range(10):
        g, x = random_group(S7, rng), random_group(S7, rng)
        gx = G.multiply_coords(S7, g, x)
        assert gx[-1] ** -Q1 * g[-1] ** Q1 == pytest.approx(x[-1] ** -Q1, rel=1e-12)


def test_siegel_examples():
    s = GroupElement([2.0, 0, 0, 0], np.zeros(2), 1.0)
    assert G.to_siegel(S7, s).t == pytest.approx(2.0)
    e = G.to_siegel(S7, G.identity(S7))
    np.testing.assert_array_equal(e.coords, G.identity(S7).coords)
    back = G.from_siegel(S7, G.to_siegel(S7, s))
    np.testing.assert_allclose(back.coords, s.coords, atol=1e-15)
    with pytest.raises(DomainError):
        G.from_siegel_coords(S7, np.r_[2.0, 0, 0, 0, 0, 0, 1.0])


def test_cayley_examples():
    origin = BallPoint(np.zeros(4), np.zeros(2), 0.0)
    np.testing.assert_allclose(G.cayley(S7, origin).coords, G.identity(S7).coords)
    np.testing.assert_allclose(G.ball_to_group(S7, origin).coords, G.identity(S7).coords)
    np.testing.assert_allclose(G.group_to_ball(S7, G.identity(S7)).coords, np.zeros(7), atol=1e-15)
    for t in (-0.9, -0.3, 0.2, 0.7):
        d = G.cayley_coords(S7, np.r_[np.zeros(6), t])
        assert d[-1] == pytest.approx((1 + t) / (1 - t), rel=1e-14)
        back = G.cayley_inv_coords(S7, np.r_[np.zeros(6), (1 + t) / (1 - t)])
        assert back[-1] == pytest.approx(t, abs=1e-15)


unit = st.floats(-1, 1, allow_nan=False)


@settings(max_examples=80, deadline=None)
@given(st.lists(unit, min_size=7, max_size=7), st.floats(0.0, 0.999))
def test_cayley_round_trip_and_image(vec, radius):
    v = np.array(vec)
    if np.linalg.norm(v) < 1e-3:
        v = np.eye(7)[0]
    b = radius * v / np.linalg.norm(v)
    d = G.cayley_coords(S7, b)
    XD, _, tD = S7.split(d)
    assert tD > 0.25 * XD @ XD  # lands in the Siegel domain
    np.testing.assert_allclose(G.cayley_inv_checked(S7, d), b, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=7, max_size=7))
def test_sphere_maps_to_siegel_boundary(vec):
    v = np.array(vec)
    if np.linalg.norm(v) < 1e-3 or v[-1] > 0.9 * np.linalg.norm(v):
        v = np.r_[1.0, np.zeros(6)]
    b = v / np.linalg.norm(v)
    XD, _, tD = S7.split(G.cayley_coords(S7, b))
    assert tD == pytest.approx(0.25 * XD @ XD, rel=1e-9, abs=1e-9)


def test_newton_fallback_agrees_with_closed_form():
    rng = np.random.default_rng(7)
    b = 0.8 * rng.normal(size=7) / np.sqrt(7)
    d = G.cayley_coords(S7, b)
    seed = np.zeros(7)
    np.testing.assert_allclose(G._newton_cayley_inv(S7, d, seed), b, atol=1e-12)


@pytest.mark.parametrize("space", [S2, S7, make_space(3, (1, 1))], ids=repr)
def test_cayley_jacobian_matches_finite_differences(space):
    rng = np.random.default_rng(8)
    b = 0.7 * rng.normal(size=space.dim) / np.sqrt(space.dim)
    h = 1e-6
    fd = np.array([
        (G.cayley_coords(space, b + h * e) - G.cayley_coords(space, b - h * e)) / (2 * h) for e in np.eye(space.dim)
    ]).T
    np.testing.assert_allclose(G.cayley_jacobian(space, b), fd, atol=1e-7)
    fd2 = np.array([
        (G.ball_to_group_coords(space, b + h * e) - G.ball_to_group_coords(space, b - h * e)) / (2 * h)
        for e in np.eye(space.dim)
    ]).T
    np.testing.assert_allclose(G.ball_to_group_jacobian(space, b), fd2, atol=1e-7)


def test_chart_differential_at_identity_is_half():
    from htype.checks import chart_differential_at_identity

    np.testing.assert_allclose(chart_differential_at_identity(S7), 0.5 * np.eye(7), atol=1e-6)


def test_group_ball_round_trip_many_points():
    rng = np.random.default_rng(9)
    s = random_group(S7, rng, 10_000)
    np.testing.assert_allclose(G.ball_to_group_coords(S7, G.group_to_ball_coords(S7, s)), s, rtol=1e-10, atol=1e-10)
    assert np.all(np.linalg.norm(G.group_to_ball_coords(S7, s), axis=1) < 1)
