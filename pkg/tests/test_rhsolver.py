import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mkdv_ut import rhsolver as rh
from mkdv_ut.contour import RayId, build_grid
from mkdv_ut.core import OutOfDomain, det2

from conftest import soliton_exact, soliton_profiles

GRID = build_grid(16, 16, 60.0, 1.35)


def _segments(grid):
    for ray in RayId:
        far = grid.line_breaks[ray.line][-1] * ray.direction
        yield ray, ((0j, far) if ray.orientation > 0 else (far, 0j))


def _inv_integral(grid, z, own=None):
    """int ds/(s - z) over the truncated contour; principal value on ray `own`."""
    tot = 0j
    for ray, (a, b) in _segments(grid):
        if ray is own:
            tot += np.log(abs(b - z) / abs(a - z))
        else:
            tot += np.log((b - z) / (a - z))
    return tot


def _pole_transform(grid, z, pole, order, own=None):
    """(1/2 pi i) int f(s)/(s - z) ds for f = (s - pole)^-order, order 1 or 2."""
    Iz = _inv_integral(grid, z, own)
    Ip = sum(np.log((b - pole) / (a - pole)) for _, (a, b) in _segments(grid))
    if order == 1:
        val = (Iz - Ip) / (z - pole)
    else:
        Ip2 = sum(1 / (a - pole) - 1 / (b - pole) for _, (a, b) in _segments(grid))
        val = (Iz - Ip) / (z - pole) ** 2 - Ip2 / (z - pole)
    return val / (2j * np.pi)


# poles sit at least 0.4 from every ray
DENSITIES = [(1.5 + 0.4j, 1), (-0.2 + 1.1j, 2), (0.2 - 1.4j, 1)]


@pytest.fixture(scope="module")
def operators():
    return rh.boundary_operators(GRID)


@pytest.mark.parametrize("pole,order", DENSITIES)
def test_plemelj_against_closed_form(operators, pole, order):
    Cp, Cm = operators
    f = (GRID.nodes - pole) ** -order
    interior = GRID.radii > 0.05
    np.testing.assert_allclose((Cp - Cm) @ f, f, atol=1e-13)
    idx = np.flatnonzero(interior)[::7]
    exact = np.array([_pole_transform(GRID, GRID.nodes[i], pole, order, RayId(GRID.ray[i])) for i in idx])
    got = (Cp @ f)[idx] - 0.5 * f[idx]
    assert np.max(np.abs(got - exact)) <= 1e-8


@pytest.mark.parametrize("z", [0.9 + 2.1j, -1.7 - 0.8j, 0.4 - 3j])
def test_off_contour_cauchy(z):
    for pole, order in DENSITIES:
        f = (GRID.nodes - pole) ** -order
        assert abs(rh.cauchy(GRID, f, z) - _pole_transform(GRID, z, pole, order)) <= 1e-8


def test_cauchy_refuses_points_on_contour():
    with pytest.raises(rh.TooCloseToContour):
        rh.cauchy(GRID, np.ones(len(GRID)), GRID.nodes[40] + 1e-6)


def test_zero_jump_gives_identity():
    sol = rh.solve_mu(rh.zero_jump(GRID, -1, 0.3, 0.1))
    assert np.all(sol.mu == np.eye(2))
    assert rh.reconstruct_u(sol) == (0.0, 0.0)


def test_out_of_domain_points(soliton_data):
    sd, ha = soliton_data
    with pytest.raises(OutOfDomain):
        rh.solve_point(sd, ha, -0.1, 0.0)
    with pytest.raises(OutOfDomain):
        rh.jump_J(sd, 0.0, -1.0, 2.0)


@pytest.fixture(scope="module")
def soliton_point(soliton_data):
    sd, ha = soliton_data
    return rh.solve_point(sd, ha, 0.5, 0.1)


def test_soliton_point_diagnostics(soliton_point):
    sol = soliton_point
    assert sol.diagnostics["residual"] <= 1e-10
    assert rh.jump_residual(sol) <= 1e-8
    assert rh.det_check(sol, [1 + 2j, -2 - 1j, 0.5 - 3j]) <= 1e-8
    assert rh.symmetry_gap(sol) <= 1e-8
    if sol.diagnostics["neumann_gap"] is not None:
        assert sol.diagnostics["neumann_gap"] <= 1e-8


def test_soliton_point_values(soliton_point):
    u, im = rh.reconstruct_u(soliton_point)
    assert abs(u - soliton_exact(0.5, 0.1)) <= 1e-6 and abs(im) <= 1e-10
    du = rh.recover_derivatives(soliton_point)
    for j in range(3):
        assert abs(du[j] - soliton_exact(0.5, 0.1, j)) <= [1e-6, 1e-5, 1e-4][j]


def test_guards(soliton_data, soliton_point):
    sd, ha = soliton_data
    with pytest.raises(rh.IllConditioned):
        rh.solve_point(sd, ha, 0.5, 0.1, cond_limit=1.0)
    with pytest.raises(rh.MomentDivergence):
        rh.recover_derivatives(soliton_point, min_decay=100)


def test_jump_determinants(soliton_data):
    sd, ha = soliton_data
    for k in (1.3, -0.7, 2 * np.exp(-1j * np.pi / 3), 3 * np.exp(2j * np.pi / 3)):
        assert abs(det2(rh.jump_J(sd, 0.4, 0.2, k)) - 1) <= 1e-12
        wp, wm, v = rh.jump_vw(sd, ha, 0.4, 0.2, k)
        np.testing.assert_allclose((np.eye(2) - wm) @ v, np.eye(2) + wp, atol=1e-14)
        assert abs(det2(v) - 1) <= 1e-12


@settings(max_examples=20, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=2, max_size=2))
def test_closed_form_v(vals):
    lo, up = vals
    grid = build_grid(nodes_per_panel=4, breaks=[0.0, 1.0])
    n = len(grid)
    jd = rh.JumpData(grid, 0.0, 0.0, 1, np.full(n, lo), np.full(n, up))
    v = jd.v[0]
    wm, wp = jd.w_minus[0], jd.w_plus[0]
    np.testing.assert_allclose(np.linalg.solve(np.eye(2) - wm, np.eye(2) + wp), v, atol=1e-12)


def test_x_only_agrees_with_soliton():
    p, _ = soliton_profiles()
    setup = rh.x_only_setup(p)
    for x in (0.0, 0.7, 2.0):
        assert abs(rh.x_only_rh(p, x, setup) - soliton_exact(x, 0.0)) <= 1e-6


def test_positivity_check(soliton_data):
    sd, _ = soliton_data
    assert rh.positivity_check(sd, 0.0, 0.0)["min_eigenvalue"] > 0


def test_nontangential_limit_diagnostic(soliton_point):
    u, _ = rh.reconstruct_u(soliton_point)
    assert abs(rh.u_nontangential(soliton_point) - u) <= 1e-6
