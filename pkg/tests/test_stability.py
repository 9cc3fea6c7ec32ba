"""Characteristic polynomials, root condition, slices, sector angles."""

from fractions import Fraction

import numpy as np
import pytest

from imexlmm.schemes import bdf_coefficients, lmm6_scheme, lmm_from_parameters
from imexlmm.stability import (
    UndefinedAngleError,
    char_polys,
    region_slice,
    root_condition,
    stability_angle,
)

F = Fraction


def test_char_polys_bdf6_display():
    polys = char_polys(bdf_coefficients(6))
    assert polys.rho == (F(49, 20), F(-6), F(15, 2), F(-20, 3), F(15, 4), F(-6, 5), F(1, 6))
    assert polys.sigma == (F(1),) + (F(0),) * 6
    assert polys.sigma_hat == (F(0), F(6), F(-15), F(20), F(-15), F(6), F(-1))


def test_char_polys_bdf1():
    polys = char_polys(bdf_coefficients(1))
    assert polys.rho == (F(1), F(-1))
    assert polys.sigma == (F(1), F(0))
    assert polys.sigma_hat == (F(0), F(1))


def test_char_polys_lmm6_leading():
    assert char_polys(lmm6_scheme()).rho[0] == F(2617, 200)


def test_consistency_identities_exact():
    for scheme in [bdf_coefficients(k) for k in range(1, 7)] + [lmm6_scheme()]:
        polys = char_polys(scheme)
        k = scheme.k
        assert sum(polys.rho) == 0
        assert sum((k - i) * polys.rho[i] for i in range(k + 1)) == 1
        assert sum(polys.sigma) == 1
        assert sum(polys.sigma_hat) == 1


def test_root_condition_zero_stable_schemes():
    for scheme in (bdf_coefficients(6), lmm6_scheme()):
        rho = char_polys(scheme).as_arrays()[0]
        result = root_condition(rho)
        assert result.zero_stable
        assert not result.violations


def test_root_condition_double_root_on_circle():
    result = root_condition([1.0, -2.0, 1.0])  # (xi - 1)^2
    assert not result.zero_stable
    assert any("repeated" in v for v in result.violations)


def test_root_condition_unstable_root():
    result = root_condition([1.0, -2.5])  # root at 2.5
    assert not result.zero_stable


def test_root_condition_degree_zero():
    assert root_condition([3.0]).zero_stable


def test_region_point_checks():
    bdf6 = bdf_coefficients(6)
    s = region_slice(bdf6, "implicit", window=(-1.0, -1.0 + 1e-9, 0.0, 1e-9),
                     resolution=2)
    assert s.mask.all()  # z_I = -1 lies in the implicit region

    lmm6 = lmm6_scheme()
    s = region_slice(lmm6, "imex", fixed_value=-10.0 + 0j,
                     window=(0.0, 1e-9, 0.0, 1e-9), resolution=2)
    assert s.mask.all()  # z_E = 0 at z_I = -10 is stable


def test_origin_reduces_to_zero_stability():
    for scheme in (bdf_coefficients(6), lmm6_scheme()):
        s = region_slice(scheme, "explicit", window=(0.0, 1e-12, 0.0, 1e-12),
                         resolution=2)
        assert s.mask.all() == root_condition(
            char_polys(scheme).as_arrays()[0]
        ).zero_stable


def test_slice_conjugate_symmetry():
    s = region_slice(
        lmm6_scheme(), "explicit", window=(-0.08, 0.04, -0.06, 0.06),
        resolution=(21, 21),
    )
    assert np.array_equal(s.mask, s.mask[::-1, :])


def test_explicit_slice_not_everywhere_stable():
    s = region_slice(
        lmm6_scheme(), "explicit", window=(-0.5, 0.5, -0.5, 0.5),
        resolution=(15, 15),
    )
    assert s.mask.any() and not s.mask.all()


def test_stability_angle_bdf1_is_a_stable():
    assert stability_angle(bdf_coefficients(1)) == 90.0


def test_stability_angle_bdf2_is_a_stable():
    assert stability_angle(bdf_coefficients(2)) == 90.0


def test_stability_angle_bdf6():
    assert stability_angle(bdf_coefficients(6)) == pytest.approx(17.84, abs=0.05)


def test_stability_angle_lmm6():
    assert stability_angle(lmm6_scheme()) == pytest.approx(26.15, abs=0.05)


def test_stability_angle_refinement_stable():
    coarse = stability_angle(lmm6_scheme(), n_radii=200)
    fine = stability_angle(lmm6_scheme(), n_radii=400)
    assert abs(coarse - fine) < 0.1


def test_stability_angle_requires_zero_stability():
    # seven-step tables from this parametrization are not zero-stable
    bdf7_like = lmm_from_parameters([F(0)] * 7)
    with pytest.raises(UndefinedAngleError):
        stability_angle(bdf7_like)


def test_region_slice_rejects_bad_input():
    with pytest.raises(ValueError):
        region_slice(lmm6_scheme(), "sideways")
    with pytest.raises(ValueError):
        region_slice(lmm6_scheme(), "implicit", resolution=1)
