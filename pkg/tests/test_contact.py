import math

import numpy as np
import pytest

from volumenes.contact import (
    ORIGIN,
    FrameField,
    NormalFormSpec,
    build_normal_frame,
    chi_at,
    derive,
    gamma2,
    heisenberg_frame,
    kappa_at,
    normal_form_invariants,
    popp_density,
    reeb_residuals,
    rotate_frame,
    truncated_constants,
)
from volumenes.errors import BoundaryConditionError, DegenerateFrameError
from volumenes.polyexpr import RationalField3, parse_poly
from volumenes.verification import nearby_points, quadratic_gamma, quadratic_structure


def test_heisenberg_frame_values():
    frame = heisenberg_frame()
    np.testing.assert_allclose(frame.X1.at((0.0, 2.0, 0.0)), [1.0, 0.0, -1.0])
    assert frame.X3 == RationalField3([0.0, 0.0, -1.0])


def test_heisenberg_constants(heis, rng):
    for pt in rng.uniform(-2, 2, size=(5, 3)):
        table = heis.constants_at(pt)
        expected = np.zeros((3, 3, 3))
        expected[1, 2, 0] = 1.0
        expected[2, 1, 0] = -1.0
        np.testing.assert_allclose(table, expected, atol=1e-14)
        np.testing.assert_allclose(heis.reeb.at(pt), [0.0, 0.0, -1.0], atol=1e-14)
    assert kappa_at(heis, ORIGIN) == pytest.approx(0.0, abs=1e-14)
    assert chi_at(heis, ORIGIN) == 0.0


def test_normal_frame_without_perturbation_is_heisenberg():
    frame = build_normal_frame(NormalFormSpec.parse("0", "0"))
    assert frame.X1 == heisenberg_frame().X1
    assert frame.X2 == heisenberg_frame().X2


def test_normal_frame_example():
    frame = build_normal_frame(NormalFormSpec.parse("0", "x^2 + y^2"))
    np.testing.assert_allclose(frame.X1.at((0.0, 1.0, 0.0)), [1.0, 0.0, -1.0])


@pytest.mark.parametrize("gamma", ["x", "x*z", "z^2 + x^2"])
def test_boundary_conditions_are_enforced(gamma):
    with pytest.raises(BoundaryConditionError):
        build_normal_frame(NormalFormSpec.parse("0", gamma))


def test_boundary_condition_on_beta():
    with pytest.raises(BoundaryConditionError) as exc:
        build_normal_frame(NormalFormSpec.parse("z", "x^2"))
    assert "β(0,0,z)" in str(exc.value)


def test_degenerate_frame():
    with pytest.raises(DegenerateFrameError):
        FrameField(RationalField3.coordinate("x"), RationalField3.coordinate("y"))


def test_general_structure_identities(nf_general, rng):
    for pt in nearby_points(rng, 20, 0.3):
        assert nf_general.c(1, 2, 0).at(pt) == pytest.approx(1.0, abs=1e-10)
        assert nf_general.c(0, 1, 1).at(pt) + nf_general.c(0, 2, 2).at(pt) == pytest.approx(0.0, abs=1e-10)
        assert max(reeb_residuals(nf_general, pt)) < 1e-10
        omega = np.array([fn.at(pt) for fn in nf_general.omega])
        assert omega @ nf_general.X1.at(pt) == pytest.approx(0.0, abs=1e-12)
        assert omega @ nf_general.X2.at(pt) == pytest.approx(0.0, abs=1e-12)


def test_constant_table_is_antisymmetric(nf_general):
    table = nf_general.constants_at((0.1, -0.2, 0.05))
    np.testing.assert_allclose(table, -table.transpose(1, 0, 2), atol=1e-15)


def test_invariants_match_closed_formulas(rng):
    for a, b, c in rng.uniform(-1, 1, size=(10, 3)):
        s = quadratic_structure(a, b, c)
        inv = normal_form_invariants(a, b, c)
        assert kappa_at(s, ORIGIN) == pytest.approx(inv.kappa, abs=1e-10)
        assert chi_at(s, ORIGIN) == pytest.approx(inv.chi, abs=1e-10)
        q = s.quadratic_form(ORIGIN)
        assert np.trace(q) == pytest.approx(0.0, abs=1e-12)
        assert math.sqrt(max(0.0, -np.linalg.det(q))) == pytest.approx(inv.chi, abs=1e-10)


def test_named_invariants(nf_radial, nf_traceless):
    assert kappa_at(nf_radial, ORIGIN) == pytest.approx(12.0)
    assert chi_at(nf_radial, ORIGIN) == pytest.approx(0.0, abs=1e-14)
    assert normal_form_invariants(1.0, 0.0, 1.0).kappa_vol == 4.0
    assert kappa_at(nf_traceless, ORIGIN) == pytest.approx(0.0, abs=1e-14)
    assert chi_at(nf_traceless, ORIGIN) == pytest.approx(4.0)
    assert normal_form_invariants(1.0, 1.0, 0.0).chi == pytest.approx(2.0 * math.sqrt(5.0))


def test_rotation_leaves_invariants_unchanged(nf_general, rng):
    rotated = derive(rotate_frame(nf_general.frame, 0.7))
    for pt in [ORIGIN, *nearby_points(rng, 5, 0.1)]:
        assert kappa_at(rotated, pt) == pytest.approx(kappa_at(nf_general, pt), abs=1e-9)
        assert chi_at(rotated, pt) == pytest.approx(chi_at(nf_general, pt), abs=1e-9)


def test_truncated_constants_match_derived(rng):
    a, b, c = 0.7, -0.3, 0.4
    s = quadratic_structure(a, b, c)
    gamma = quadratic_gamma(a, b, c)
    for pt in nearby_points(rng, 5, 0.3):
        for key, value in truncated_constants(gamma, pt).items():
            assert s.c(*key).at(pt) == pytest.approx(value, abs=1e-10)


def test_popp_density(heis, nf_radial, rng):
    for pt in rng.uniform(-1, 1, size=(5, 3)):
        assert popp_density(heis, pt) == pytest.approx(1.0)
    assert popp_density(nf_radial, ORIGIN) == pytest.approx(1.0)
    # ψ = 1/(1 + 2γ) para γ cuadrática
    pt = (0.3, -0.2, 0.5)
    g = 0.3**2 + 0.2**2
    assert popp_density(nf_radial, pt) == pytest.approx(1.0 / (1.0 + 2.0 * g))
    np.testing.assert_allclose(nf_radial.popp_values(*np.array([pt]).T), [1.0 / (1.0 + 2.0 * g)])


def test_gamma2():
    assert gamma2(NormalFormSpec.parse("0", "x^2 + 2*x*y")) == (1.0, 1.0, 0.0)
    assert gamma2(NormalFormSpec.parse("x", "y^2 + x^3 + x^2*z")) == (0.0, 0.0, 1.0)


def test_derivative_fn_matches_finite_differences(nf_general):
    pt = np.array([0.1, 0.05, -0.1])
    h = 1e-6
    for d, field in ((1, nf_general.X1), (2, nf_general.X2)):
        v = field.at(pt)
        fn = nf_general.c(0, 1, 2)
        fd = (fn.at(pt + h * v) - fn.at(pt - h * v)) / (2 * h)
        assert nf_general.derivative_fn(d, 0, 1, 2).at(pt) == pytest.approx(fd, rel=1e-6, abs=1e-8)
    with pytest.raises(ValueError):
        nf_general.derivative_fn(0, 0, 1, 2)


def test_parsed_gamma_equals_quadratic_helper():
    assert quadratic_gamma(1.0, 1.0, 0.0) == parse_poly("x^2 + 2*x*y")
