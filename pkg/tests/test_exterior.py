"""Exactness tests for the symbolic exterior calculus core."""

import math
import random
from fractions import Fraction

import pytest

from dhlab import (
    ChartMismatchError,
    CoordVectorField,
    CutWindow,
    DimensionError,
    Form,
    Poly,
    UnsupportedIntegrandError,
    canonical_chart,
    evaluate_poly,
    exterior_derivative,
    integrate_over_face,
    interior_product,
    wedge,
)
from helpers import abs_eval, chart6, random_form, random_poly

CHART = chart6()
RHO = Poly(1, {(2,): 1, (1,): -5, (0,): 7})  # t^2 - 5 t + 7


# ---------------------------------------------------------------------------
# wedge
# ---------------------------------------------------------------------------

def test_wedge_ascending_pairs():
    a = Form.basis(CHART, 0, 1)
    b = Form.basis(CHART, 2, 3)
    assert wedge(a, b) == Form.basis(CHART, 0, 1, 2, 3)


def test_wedge_single_transposition():
    assert wedge(Form.basis(CHART, 3), Form.basis(CHART, 0)) == \
        Form.basis(CHART, 0, 3, coeff=-1)


def test_wedge_repeated_index_annihilates():
    a = Form.basis(CHART, 0, 1)
    assert wedge(a, Form.basis(CHART, 1)).is_zero()
    assert Form(CHART, 2, {(0, 0): 1}).is_zero()


def test_wedge_above_top_degree_is_zero():
    a = Form.basis(CHART, 0, 1, 2, 3)
    b = Form.basis(CHART, 3, 4, 5)
    out = wedge(a, b)
    assert out.degree == 7 and out.is_zero()


def test_wedge_chart_mismatch():
    other = canonical_chart(CutWindow(1.0, 2.0))
    with pytest.raises(ChartMismatchError):
        wedge(Form.basis(CHART, 0), Form.basis(other, 1))


def test_basis_normalizes_index_order():
    assert Form(CHART, 2, {(3, 0): 1}) == Form.basis(CHART, 0, 3, coeff=-1)


def test_wedge_bilinear_and_associative():
    rng = random.Random(2024)
    for _ in range(100):
        a = random_form(rng, CHART, max_degree=2)
        b = random_form(rng, CHART, max_degree=2)
        c = random_form(rng, CHART, max_degree=2)
        p = random_poly(rng, CHART.dim)
        assert wedge(p * a, b) == p * wedge(a, b)
        assert wedge(wedge(a, b), c) == wedge(a, wedge(b, c))
        if a.degree == b.degree:
            assert wedge(a + b, c) == wedge(a, c) + wedge(b, c)


def test_wedge_graded_commutativity():
    rng = random.Random(7)
    for _ in range(120):
        a = random_form(rng, CHART)
        b = random_form(rng, CHART)
        sign = (-1) ** (a.degree * b.degree)
        assert wedge(a, b) == sign * wedge(b, a)


# ---------------------------------------------------------------------------
# exterior derivative
# ---------------------------------------------------------------------------

def test_derivative_of_coefficient_one_form():
    x4 = Poly.variable(CHART.dim, 3)
    assert exterior_derivative(Form(CHART, 1, {(0,): x4})) == \
        Form.basis(CHART, 0, 3, coeff=-1)


def test_d_squared_on_scalar():
    f = Poly(CHART.dim, {(2, 0, 1, 0, 0, 0): 1, (0, 0, 0, 0, 1, 0): 5})  # x1^2 x3 + 5t
    ddf = exterior_derivative(exterior_derivative(Form.scalar(CHART, f)))
    assert ddf.is_zero() and ddf.degree == 2


def test_derivative_of_top_degree_is_zero():
    top = Form.basis(CHART, 0, 1, 2, 3, 4, 5)
    assert exterior_derivative(top).is_zero()


def test_d_squared_property():
    rng = random.Random(11)
    for _ in range(120):
        a = random_form(rng, CHART)
        assert exterior_derivative(exterior_derivative(a)).is_zero()


def test_leibniz_rule():
    rng = random.Random(13)
    for _ in range(120):
        a = random_form(rng, CHART, max_degree=2)
        b = random_form(rng, CHART, max_degree=2)
        lhs = exterior_derivative(wedge(a, b))
        rhs = wedge(exterior_derivative(a), b) + \
            (-1) ** a.degree * wedge(a, exterior_derivative(b))
        assert lhs == rhs


# ---------------------------------------------------------------------------
# interior product
# ---------------------------------------------------------------------------

def test_interior_product_second_slot_sign():
    dt_dtheta = Form.basis(CHART, 4, 5)
    assert interior_product(dt_dtheta, CoordVectorField(5)) == \
        Form.basis(CHART, 4, coeff=-1)


def test_interior_product_absent_axis():
    out = interior_product(Form.basis(CHART, 0, 1), CoordVectorField(5))
    assert out.is_zero() and out.degree == 1


def test_interior_product_degree_zero():
    out = interior_product(Form.scalar(CHART, 3), CoordVectorField(0))
    assert out.is_zero()


def test_interior_product_antiderivation():
    rng = random.Random(17)
    for _ in range(120):
        a = random_form(rng, CHART, degree=rng.randint(1, 2))
        b = random_form(rng, CHART, degree=rng.randint(1, 2))
        v = CoordVectorField(rng.randrange(CHART.dim))
        lhs = interior_product(wedge(a, b), v)
        rhs = wedge(interior_product(a, v), b) + \
            (-1) ** a.degree * wedge(a, interior_product(b, v))
        assert lhs == rhs


def test_interior_product_scalar_factor():
    # degree-0 factors contract to nothing: i_v(f b) = f i_v(b)
    rng = random.Random(18)
    for _ in range(50):
        f = random_poly(rng, CHART.dim)
        b = random_form(rng, CHART, degree=rng.randint(1, 3))
        v = CoordVectorField(rng.randrange(CHART.dim))
        assert interior_product(f * b, v) == f * interior_product(b, v)


def test_interior_product_squares_to_zero():
    rng = random.Random(19)
    for _ in range(120):
        a = random_form(rng, CHART)
        v = CoordVectorField(rng.randrange(CHART.dim))
        assert interior_product(interior_product(a, v), v).is_zero()


# ---------------------------------------------------------------------------
# polynomial evaluation
# ---------------------------------------------------------------------------

def test_evaluate_density_points():
    assert RHO.evaluate((2.5,)) == 0.75
    assert RHO.evaluate((0.5,)) == 4.75
    assert Poly.zero(1).evaluate((1.23,)) == 0.0


def test_evaluate_dimension_mismatch():
    with pytest.raises(DimensionError):
        evaluate_poly(RHO, (1.0, 2.0))


def test_evaluate_matches_exact():
    rng = random.Random(23)
    for _ in range(100):
        p = random_poly(rng, 3, max_degree=3)
        point = [rng.uniform(-2, 2) for _ in range(3)]
        exact = float(p.evaluate_exact(point))
        assert p.evaluate(point) == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_evaluate_is_ring_homomorphism_up_to_rounding():
    rng = random.Random(29)
    eps = 2.0 ** -52
    for _ in range(100):
        p = random_poly(rng, 2, max_degree=2)
        q = random_poly(rng, 2, max_degree=2)
        point = [rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)]
        lhs = (p * q).evaluate(point)
        rhs = p.evaluate(point) * q.evaluate(point)
        scale = max(1.0, abs_eval(p, point) * abs_eval(q, point))
        assert abs(lhs - rhs) <= 8 * eps * scale


# ---------------------------------------------------------------------------
# face integration
# ---------------------------------------------------------------------------

def _curv_literal() -> Form:
    # -dx1^dx4 - dx3^dx2, written exactly like that
    return Form(CHART, 2, {(0, 3): -1, (2, 1): -1})


def test_face_integral_matching_pair():
    assert integrate_over_face(_curv_literal(), (0, 3)) == Fraction(-1)


def test_face_integral_absent_pair():
    assert integrate_over_face(_curv_literal(), (0, 1)) == Fraction(0)


def test_face_integral_orientation_flip():
    # the dx3^dx2 term normalizes to +dx2^dx3; the (x3,x2) orientation flips it back
    assert integrate_over_face(_curv_literal(), (2, 1)) == Fraction(-1)
    assert integrate_over_face(_curv_literal(), (1, 2)) == Fraction(1)


def test_face_integral_rejects_nonconstant_coefficient():
    t = Poly.variable(CHART.dim, 4)
    form = Form(CHART, 2, {(0, 1): t})
    with pytest.raises(UnsupportedIntegrandError):
        integrate_over_face(form, (0, 1))


def test_face_integral_rejects_nonperiodic_axis():
    form = Form(CHART, 2, {(0, 4): 1})
    with pytest.raises(ValueError):
        integrate_over_face(form, (0, 4))


def test_face_integral_rejects_wrong_degree():
    with pytest.raises(ValueError):
        integrate_over_face(Form.basis(CHART, 0), (0, 1))


# ---------------------------------------------------------------------------
# Poly ring details, serialization
# ---------------------------------------------------------------------------

def test_poly_content_and_primitive():
    six_rho = Poly(1, {(2,): 6, (1,): -30, (0,): 42})
    assert six_rho.content() == Fraction(6)
    assert six_rho.primitive() == RHO
    assert (RHO * Fraction(-3, 2)).content() == Fraction(3, 2)


def test_poly_exact_integration():
    assert RHO.integrate(Fraction(1, 2), Fraction(9, 2)) == Fraction(25, 3)
    assert RHO.integrate(0.5, 4.5) == Fraction(25, 3)


def test_poly_univariate_projection():
    t_only = Poly(CHART.dim, {(0, 0, 0, 0, 2, 0): 1, (0, 0, 0, 0, 0, 0): -1})
    assert t_only.univariate(4) == Poly(1, {(2,): 1, (0,): -1})
    mixed = Poly(CHART.dim, {(1, 0, 0, 0, 1, 0): 1})
    with pytest.raises(ValueError):
        mixed.univariate(4)


def test_poly_partial_derivative():
    assert RHO.partial(0) == Poly(1, {(1,): 2, (0,): -5})
    assert Poly.constant(1, 5).partial(0).terms == {}


def test_poly_pow_matches_repeated_product():
    p = Poly(2, {(1, 0): 1, (0, 1): Fraction(1, 2)})
    assert p ** 3 == p * p * p
    assert p ** 0 == Poly.constant(2, 1)


def test_form_json_round_trip():
    rng = random.Random(31)
    for _ in range(25):
        form = random_form(rng, CHART)
        data = form.to_json()
        assert Form.from_json(CHART, data) == form
    doc = Form.basis(CHART, 0, 3, coeff=Fraction(-2, 3)).to_json()
    assert doc == {"degree": 2,
                   "terms": [{"indices": [0, 3],
                              "poly": [{"exps": [0, 0, 0, 0, 0, 0], "num": -2, "den": 3}]}]}


def test_evaluate_exact_is_rational():
    val = RHO.evaluate_exact((Fraction(5, 2),))
    assert val == Fraction(3, 4)
    assert math.isclose(float(val), 0.75)
