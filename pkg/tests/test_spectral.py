import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mkdv_ut import spectral as sp
from mkdv_ut.contour import build_grid
from mkdv_ut.core import BadParams, BoundaryProfile, InitialProfile, SechCurve, zero_boundary, zero_initial

from conftest import soliton_profiles

SMALL = build_grid(4, 8, 20.0, 1.5)


def test_zero_data_identity():
    sd = sp.zero_spectral(SMALL)
    sp.derive_cdhr(sd)
    lower = SMALL.on("real", "D1")
    assert np.allclose(sd.a[lower], 1) and np.allclose(sd.b[lower], 0)
    assert np.max(np.abs(sd.h[sd.d1_mask])) == 0 and np.max(np.abs(sd.r[sd.real_mask])) == 0
    ha = sp.build_ha(sd.h0, sp.expand_h_series(sd.coeffs, sd.lam))
    assert np.max(np.abs(ha(SMALL.nodes))) < 1e-14


def test_zero_profiles_through_scattering():
    p, q = zero_initial(1), zero_boundary(1)
    sd = sp.compute_spectral(p, q, SMALL)
    sp.derive_cdhr(sd)
    lower = SMALL.on("real", "D1")
    assert np.max(np.abs(sd.a[lower] - 1)) <= 1e-12
    assert np.max(np.abs(sd.B)) <= 1e-12
    assert np.max(np.abs(sd.h[sd.d1_mask])) <= 1e-12


def test_soliton_spectral(soliton_data):
    sd, ha = soliton_data
    assert sp.global_relation_residual(sd)["sup"] <= 1e-10
    assert sd.diagnostics["h_symmetry_residual"] <= 1e-10
    assert sd.diagnostics["r_symmetry_residual"] <= 1e-10
    assert sd.diagnostics["r_formula_gap"] <= 1e-10
    assert sd.diagnostics["h0_gr_gap"] <= 1e-10
    # the soliton's reflection coefficient vanishes on the real axis
    assert np.max(np.abs(sd.r[sd.real_mask])) <= 1e-10
    # series and fitted h coefficients agree
    assert sd.diagnostics["h_fit_gap"] <= 1e-6
    assert ha.constraint_residual(sd.h0, sd.coeffs["h"]) <= 1e-10


def test_h_decay_after_regularization(soliton_data):
    sd, ha = soliton_data
    k = sd.grid.nodes[sd.d1_mask]
    big = np.abs(k) >= 10
    err = np.abs(sd.h[sd.d1_mask] - ha(k))[big]
    slope = np.polyfit(np.log(np.abs(k[big])), np.log(err), 1)[0]
    assert slope <= -4.5


def test_spectral_json_roundtrip(soliton_data):
    sd, _ = soliton_data
    back = sp.SpectralData.from_json(sd.to_json())
    for name in sp.SpectralData._TABLES:
        np.testing.assert_array_equal(getattr(back, name), getattr(sd, name))
    assert back.coeffs == sd.coeffs and back.h0 == sd.h0 and back.origin == sd.origin


def test_part_roundtrip_and_merge_checks():
    p, q = soliton_profiles()
    xpart = sp.compute_x_part(p, SMALL)
    back = sp.SpectralPart.from_json(xpart.to_json())
    np.testing.assert_array_equal(back.tables["a"], xpart.tables["a"])
    tpart = sp.compute_t_part(q, build_grid(4, 8, 20.0, 1.4))
    with pytest.raises(BadParams):
        sp.merge_parts(xpart, tpart)
    with pytest.raises(BadParams):
        sp.merge_parts(xpart, xpart)


def _symmetric_constraints(h0, r1, r2, r3, r4):
    # h(-conj k) = conj h(k) forces odd coefficients imaginary, even ones real
    return h0, np.array([1j * r1, r2, 1j * r3, r4])


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=5, max_size=5))
def test_build_ha_meets_constraints(vals):
    h0, hs = _symmetric_constraints(*vals)
    ha = sp.build_ha(h0, hs)
    assert ha.constraint_residual(h0, hs) <= 1e-10
    k = np.array([2 - 1j, -0.5 + 3j, 7.0])
    np.testing.assert_allclose(ha(-np.conj(k)), np.conj(ha(k)), atol=1e-12)


def test_expansion_matches_evaluation():
    ha = sp.build_ha(0.3, [0.2j, -0.1, 0.05j, 0.4])
    k = 400 * np.exp(-0.3j)
    series = sum(c * k ** -(j + 1) for j, c in enumerate(ha.expansion(5)))
    assert abs(series - ha(k)) <= 1e-14


def test_build_ha_rejects_nonfinite():
    with pytest.raises(BadParams):
        sp.build_ha(np.nan, [0, 0, 0, 0])


def test_h_series_frozen_for_zero_boundary():
    # with A = 1, B = 0 the series path gives h = 0 to every order
    coeffs = {"a": [0.1j, 0.2, 0.0, 0.0], "b": [0.5j, 0.1, 0.0, 0.0], "A": [0j] * 4, "B": [0j] * 4}
    assert np.all(sp.expand_h_series(coeffs, 1) == 0)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=1, max_size=4))
def test_zero_scan_counts_polynomial_roots(roots):
    roots = [r for r in roots if min(abs(r.real - g) for g in np.linspace(-4, 4, 5)) > 0.05
             and min(abs(r.imag - g) for g in np.linspace(-4, 4, 5)) > 0.05]

    def f(z):
        out = np.ones_like(z)
        for r in roots:
            out = out * (z - r)
        return out

    rep = sp.zero_scan(f, (-4, 4), (-4, 4), nx=4, ny=4)
    assert rep.count == len(roots)


def test_zero_gate_sees_soliton_eigenvalue():
    # eta = 1 placed at x0 = 3: the half-line a(k) keeps a zero in the lower half plane
    p = InitialProfile(-1, SechCurve(1.0, 1.0, -3.0, 0))
    q = BoundaryProfile(-1, *[SechCurve(1.0, 1.0, -3.0, j) for j in range(3)])
    rep = sp.zero_gate(p, q, radius=5.0)
    assert rep["a_lower_half_plane"].count == 1


def test_zero_gate_clean_for_preset():
    p, q = soliton_profiles()
    rep = sp.zero_gate(p, q, radius=5.0)
    assert all(r.count == 0 for r in rep.values())
