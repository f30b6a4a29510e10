import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mkdv_ut import tscatter as ts
from mkdv_ut.core import BoundaryProfile, ExponentialCurve, GaussianCurve, sigma_lambda, zero_boundary


@pytest.fixture(params=[1, -1], ids=["defocusing", "focusing"])
def lam(request):
    return request.param


def test_zero_boundary_gives_trivial_data():
    A, B, _ = ts.spectral_AB(zero_boundary(-1), [0.5, -1j, 1 + 0.2j])
    assert np.all(A == 1) and np.all(B == 0)


def test_first_coefficient_for_exponential(lam):
    # g0 = e^{-t}, g1 = g2 = 0: (T_1)_22(0) = (i lam / 2) * 3 lam int_0^inf e^{-4t} dt = 3i/8
    q = BoundaryProfile(lam, ExponentialCurve(1.0, 1.0))
    c = ts.t_asym_coeffs(q, 4)
    T1 = c.T[1][0]
    assert abs(T1[1, 1] - 0.375j) < 1e-10 and abs(T1[0, 0] + 0.375j) < 1e-10
    assert abs(T1[0, 1] - 0.5j) < 1e-12
    assert np.max(abs(c.W[1][0] - (-0.5j) * sigma_lambda(lam))) < 1e-12


def test_ode_matches_picard(lam):
    q = BoundaryProfile(lam, ExponentialCurve(0.3, 1.0))
    for k in (np.exp(1j * np.pi / 6), 0.8 * np.exp(1j * np.pi / 3), 1.0, 0.9 * np.exp(-2j * np.pi / 3)):
        s = ts.solve_T_col2(q, k)
        o, _ = ts.picard_oracle_T(q, k, 8)
        assert np.max(abs(s.values[0] - o.values[0])) / np.max(abs(o.values[0])) < 1e-6


def test_U_matches_picard(lam):
    q = BoundaryProfile(lam, ExponentialCurve(0.3, 1.0))
    k = 0.7 * np.exp(1j * np.pi / 3)
    U = ts.solve_U(q, k)
    up = ts.picard_oracle_U(q, k, 8, t_end=3)
    line = ts.u_line(q, k)
    j = [int(np.argmin(abs(up.t - v))) for v in (0.5, 1.0, 2.0, 3.0)]
    Uv = line.interpolate(U.values.reshape(len(U.t), 4), up.t[j]).reshape(len(j), 2, 2)
    assert np.max(abs(Uv - up.values[j])) < 1e-7


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 4), st.sampled_from(range(6)), st.sampled_from([1, -1]))
def test_AB_unitarity_and_symmetry_on_rays(r, ray, lam):
    q = BoundaryProfile(lam, ExponentialCurve(1.0, 1.0), GaussianCurve(0.5, 2.0, 0.3))
    k = r * np.exp(1j * np.pi * ray / 3)
    A, B, _ = ts.spectral_AB(q, [k, np.conj(k), -np.conj(k)])
    assert abs(A[0] * np.conj(A[1]) - lam * B[0] * np.conj(B[1]) - 1) < 1e-10
    assert abs(A[2] - np.conj(A[0])) < 1e-10 and abs(B[2] - np.conj(B[0])) < 1e-10


def test_series_decay_order(lam):
    q = BoundaryProfile(lam, GaussianCurve(4.0, 16.0, 0.5), GaussianCurve(4.0, 16.0, 0.3),
                        GaussianCurve(4.0, 16.0, 0.4))
    line = ts.t_line(q, panel=0.125)
    c = ts.t_asym_coeffs(q, 4, line)
    ks = np.array([20.0, 40, 80, 160, 320]) * np.exp(1j * np.pi / 6)
    errs = [np.max(abs(ts.solve_T_col2(q, k, line=line).values[0] - ts.hat_T0(c, [k])[0][:, 1])) for k in ks]
    assert np.polyfit(np.log(abs(ks)), np.log(errs), 1)[0] < -4.5


def test_outside_plus_side_rejected():
    q = BoundaryProfile(1, ExponentialCurve(1.0, 1.0))
    with pytest.raises(ts.WrongRegion):
        ts.spectral_AB(q, [1j])


def test_series_and_ode_agree_at_crossover(lam):
    q = BoundaryProfile(lam, ExponentialCurve(1.0, 1.0), GaussianCurve(0.5, 2.0, 0.3))
    for k in (ts.K_SWITCH_T * np.exp(1j * np.pi / 6), ts.K_SWITCH_T * np.exp(2j * np.pi / 3)):
        Ao, Bo, mo = ts.spectral_AB(q, [k], K_switch=1e9)
        As, Bs, ms = ts.spectral_AB(q, [k], K_switch=1.0)
        assert mo[0] == "ode" and ms[0] == "series"
        assert abs(Ao[0] - As[0]) < 1e-11 and abs(Bo[0] - Bs[0]) < 1e-11
