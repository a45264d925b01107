import numpy as np
import pytest

from volumenes.connection import (
    SEC_CONSTANT,
    ExtendedConstants,
    christoffel,
    connection_residuals,
    constant_derivatives,
    extended_constants,
    levi_civita_sectional,
    sectional_D,
    verify_levi_civita,
    verify_sec_identity,
)
from volumenes.contact import ORIGIN
from volumenes.polyexpr import lie_bracket
from volumenes.verification import nearby_points, quadratic_structure

ZERO_DERIVS = (np.zeros((3, 3, 3)), np.zeros((3, 3, 3)))


def test_heisenberg_christoffel():
    gamma = christoffel(ExtendedConstants.heisenberg())
    assert gamma[1, 2, 0] == pytest.approx(-0.5)
    assert gamma[2, 1, 0] == pytest.approx(0.5)
    assert gamma[0, 2, 1] == pytest.approx(-0.5)
    assert gamma[0, 1, 2] == pytest.approx(0.5)
    assert gamma[2, 2, 0] == 0.0


def test_zero_constants_give_flat_connection():
    ext = ExtendedConstants.zeros()
    assert not christoffel(ext).any()
    assert levi_civita_sectional(ext, ZERO_DERIVS) == 0.0


def test_heisenberg_covariant_derivative_is_half_the_bracket(heis):
    # ∇_{X1}X2 = ½[X1, X2] = ½∂z, con X0 = −∂z
    gamma = christoffel(extended_constants(heis, ORIGIN))
    pt = (0.3, -0.7, 1.1)
    fields = (heis.reeb, heis.frame.X1, heis.frame.X2)
    nabla_12 = sum(gamma[1, 2, k] * np.asarray(fields[k].at(pt)) for k in range(3))
    bracket = np.asarray(lie_bracket(heis.frame.X1, heis.frame.X2).at(pt))
    np.testing.assert_allclose(bracket, [0.0, 0.0, 1.0], atol=1e-14)
    np.testing.assert_allclose(nabla_12, 0.5 * bracket, atol=1e-14)


def test_connection_is_torsion_free_and_metric(rng):
    for ext in (ExtendedConstants.heisenberg(), ExtendedConstants.zeros()):
        assert connection_residuals(ext) == (0.0, 0.0)
    for _ in range(5):
        raw = rng.normal(size=(3, 3, 3))
        ext = ExtendedConstants(raw - raw.transpose(1, 0, 2))
        torsion, metric = connection_residuals(ext)
        assert torsion < 1e-14 and metric < 1e-14


def test_constants_must_be_antisymmetric():
    table = np.zeros((3, 3, 3))
    table[1, 2, 0] = 1.0
    with pytest.raises(ValueError):
        ExtendedConstants(table)
    with pytest.raises(ValueError):
        ExtendedConstants(np.zeros((3, 3)))


def test_heisenberg_sectional_curvature(heis):
    assert levi_civita_sectional(ExtendedConstants.heisenberg(), ZERO_DERIVS) == pytest.approx(SEC_CONSTANT)
    assert sectional_D(heis, ORIGIN) == pytest.approx(-0.75)
    assert verify_levi_civita(heis, (0.3, -0.2, 1.0)) < 1e-12


def test_sectional_curvature_examples(nf_radial, nf_traceless):
    assert sectional_D(nf_radial, ORIGIN) == pytest.approx(12.0 - 0.75, abs=1e-10)
    assert sectional_D(nf_traceless, ORIGIN) == pytest.approx(16.0 - 0.75, abs=1e-10)


def test_sectional_identity_on_random_structures(rng):
    for a, b, c in rng.uniform(-1, 1, size=(6, 3)):
        s = quadratic_structure(a, b, c)
        assert verify_sec_identity(s, ORIGIN) <= 1e-9
        assert verify_levi_civita(s, ORIGIN) <= 1e-9
        for pt in nearby_points(rng, 3):
            assert verify_sec_identity(s, pt) <= 1e-8


def test_sectional_identity_away_from_origin(nf_general, rng):
    for pt in nearby_points(rng, 5, 0.2):
        assert verify_sec_identity(nf_general, pt) <= 1e-8
        assert verify_levi_civita(nf_general, pt) <= 1e-9


def test_derivative_tables_are_antisymmetric(nf_general):
    pt = (0.05, -0.02, 0.1)
    for table in constant_derivatives(nf_general, pt):
        np.testing.assert_allclose(table, -table.transpose(1, 0, 2), atol=0.0)
    ext = extended_constants(nf_general, pt)
    assert ext[1, 2, 0] == pytest.approx(1.0)
