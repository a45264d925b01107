import itertools

import numpy as np
import pytest

from volumenes.errors import ExpressionSyntaxError, PoleError
from volumenes.polyexpr import (
    ONE,
    X,
    Y,
    Z,
    PolyBundle,
    Polynomial,
    RationalBundle,
    RationalField3,
    RationalFn,
    lie_bracket,
    parse_poly,
    partial,
    partial_rational,
)

_MONOMIALS = [e for e in itertools.product(range(3), repeat=3) if sum(e) <= 2]


def random_int_poly(rng, low=-3, high=4):
    coeffs = rng.integers(low, high, size=len(_MONOMIALS))
    return Polynomial({e: float(c) for e, c in zip(_MONOMIALS, coeffs)})


def random_int_field(rng):
    return RationalField3(random_int_poly(rng) for _ in range(3))


def test_parse_canonical_form():
    p = parse_poly("x^2 + 2*x*y")
    assert p.terms == {(2, 0, 0): 1.0, (1, 1, 0): 2.0}
    assert str(p) == "x^2 + 2*x*y"


def test_parse_zero_and_unary_minus():
    assert parse_poly("0").is_zero()
    assert parse_poly("-(y)*(y)").at((0.0, 2.0, 0.0)) == -4.0


def test_double_star_is_power():
    assert parse_poly("x**3") == X**3


def test_parse_scientific_notation():
    p = parse_poly("1.5e-3*z + .25")
    assert p.at((0.0, 0.0, 2.0)) == pytest.approx(0.253)


@pytest.mark.parametrize(
    "text, position",
    [
        ("x + * y", 4),
        ("x $ y", 2),
        ("w + 1", 0),
        ("(x + 1", 6),
        ("x^-1", 2),
        ("x^1.5", 2),
        ("x^2^3", 3),
        ("", 0),
    ],
)
def test_syntax_errors_report_position(text, position):
    with pytest.raises(ExpressionSyntaxError) as exc:
        parse_poly(text)
    assert exc.value.position == position
    assert f"posición {position}" in str(exc.value)


def test_partial_derivatives():
    p = parse_poly("x^2*y + 3*y*z^2 - z")
    assert partial(p, "x") == parse_poly("2*x*y")
    assert partial(p, "y") == parse_poly("x^2 + 3*z^2")
    assert partial(p, "z") == parse_poly("6*y*z - 1")
    assert partial(ONE, "x").is_zero()


def test_partial_rejects_unknown_variable():
    with pytest.raises(ValueError):
        partial(X, "w")


def test_rational_partial_matches_quotient_rule():
    r = RationalFn(ONE, ONE + X * X)
    d = partial_rational(r, "x")
    for x in (-1.3, 0.0, 0.4, 2.0):
        assert d.at((x, 0.0, 0.0)) == pytest.approx(-2 * x / (1 + x * x) ** 2, rel=1e-12, abs=1e-15)
    assert partial_rational(r, "z").is_zero()


def test_rational_cancels_exact_factors():
    r = RationalFn(X * X - ONE, X - ONE)
    assert r.is_polynomial()
    assert r == X + ONE


def test_rational_pole_raises():
    r = RationalFn(ONE, X)
    with pytest.raises(PoleError):
        r.at((0.0, 1.0, 1.0))


def test_scale_vars():
    p = parse_poly("x^2*z + y")
    q = p.scale_vars(2.0, 3.0, 5.0)
    assert q.at((1.0, 1.0, 1.0)) == pytest.approx(4 * 5 + 3)


def test_homogeneous_part_and_z_axis():
    p = parse_poly("1 + x + x*y + z^2 + x^2*z")
    assert p.homogeneous_part(2, "xy") == parse_poly("x*y + x^2*z")
    assert p.restrict_z_axis() == parse_poly("1 + z^2")


def test_bracket_of_heisenberg_fields():
    X1 = RationalField3.parse(["1", "0", "-0.5*y"])
    X2 = RationalField3.parse(["0", "1", "0.5*x"])
    assert lie_bracket(X2, X1) == RationalField3([0.0, 0.0, -1.0])
    assert lie_bracket(X1, X2) == RationalField3([0.0, 0.0, 1.0])


def test_bracket_of_coordinate_fields():
    dx = RationalField3.coordinate("x")
    x_dy = RationalField3([0.0, X, 0.0])
    assert lie_bracket(dx, x_dy) == RationalField3.coordinate("y")


def test_bracket_is_antisymmetric_and_satisfies_jacobi(rng):
    for _ in range(5):
        U, V, W = (random_int_field(rng) for _ in range(3))
        assert (lie_bracket(U, V) + lie_bracket(V, U)).is_zero()
        jacobi = (
            lie_bracket(U, lie_bracket(V, W))
            + lie_bracket(V, lie_bracket(W, U))
            + lie_bracket(W, lie_bracket(U, V))
        )
        assert jacobi.is_zero()


def test_evaluation_is_a_ring_homomorphism(rng):
    for _ in range(10):
        p, q = random_int_poly(rng), random_int_poly(rng)
        pt = tuple(rng.uniform(-1, 1, size=3))
        assert (p * q).at(pt) == pytest.approx(p.at(pt) * q.at(pt), rel=1e-12, abs=1e-12)
        assert (p + q).at(pt) == pytest.approx(p.at(pt) + q.at(pt), rel=1e-12, abs=1e-12)


def test_printed_form_parses_back(rng):
    for _ in range(10):
        p = Polynomial({e: float(c) for e, c in zip(_MONOMIALS, rng.normal(size=len(_MONOMIALS)))})
        assert parse_poly(str(p)) == p


def test_bundles_match_scalar_evaluation(rng):
    polys = [random_int_poly(rng) for _ in range(4)]
    pts = rng.uniform(-1, 1, size=(3, 7))
    values = PolyBundle(polys).evaluate(*pts)
    for row, p in zip(values, polys):
        np.testing.assert_allclose(row, p.evaluate(*pts), rtol=1e-12, atol=1e-12)

    rats = [RationalFn(p, ONE + X * X + Y * Y) for p in polys] + [RationalFn(Z)]
    values = RationalBundle(rats).evaluate(*pts)
    for row, r in zip(values, rats):
        np.testing.assert_allclose(row, r.evaluate(*pts), rtol=1e-12, atol=1e-12)
