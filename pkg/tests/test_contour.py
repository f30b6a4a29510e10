import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mkdv_ut.contour import (ContourGrid, RayId, Region, build_grid, classify, contour_integral_inv,
                             gl_diff_matrix, graded_breaks, in_plus_side, residue_oracle, segment_integral_inv)
from mkdv_ut.core import BadParams


@pytest.fixture(scope="module")
def grid():
    return build_grid(10, 16, 30.0, 1.4)


def test_ray_geometry():
    assert [r.orientation for r in RayId] == [1, -1, 1, -1, 1, -1]
    for r in RayId:
        assert r.mirror.mirror is r
        assert abs(r.mirror.direction + np.conj(r.direction)) < 1e-15
    assert RayId.R300.line == "D1" and RayId.R60.line == "D4" and RayId.R180.line == "real"


@pytest.mark.parametrize("k, region", [(1 + 0.1j, Region.D3), (0.1 + 1j, Region.D4), (0.1 - 1j, Region.D1),
                                       (1 - 0.1j, Region.D2), (0, Region.ORIGIN), (2.0, Region.RAY)])
def test_classify(k, region):
    assert classify(k)[0] is region


def test_classify_rejects_nonfinite():
    with pytest.raises(BadParams):
        classify(complex(np.nan, 0))


def test_grid_maps_are_exact(grid):
    k = grid.nodes
    assert np.array_equal(k[grid.mirror], -np.conj(k))
    assert np.array_equal(k[grid.conjugate], np.conj(k))
    assert np.all(np.abs(k) <= grid.R_max)


def test_grid_quadrature_lengths(grid):
    # int over each ray of ds, signed by orientation, is R * direction * orientation
    for r in RayId:
        m = grid.ray_mask(r)
        assert abs(np.sum(grid.weights[m]) - grid.R_max * r.direction * r.orientation) < 1e-12


def test_grid_json_roundtrip(grid):
    again = ContourGrid.from_json(grid.to_json())
    assert np.array_equal(again.nodes, grid.nodes)
    assert np.array_equal(again.weights, grid.weights)


def test_per_line_breaks():
    g = build_grid(nodes_per_panel=8, breaks={"real": [0, 1, 3], "D1": [0, 2], "D4": [0, 2]})
    assert g.on("real").sum() == 2 * 2 * 8 and g.on("D1").sum() == 2 * 8 and g.on("D4").sum() == 2 * 8
    assert np.array_equal(g.nodes[g.conjugate], np.conj(g.nodes))
    with pytest.raises(BadParams):
        _ = g.breaks
    with pytest.raises(BadParams):
        build_grid(nodes_per_panel=8, breaks={"real": [0, 1], "D1": [0, 2], "D4": None})
    g = build_grid(nodes_per_panel=8, breaks={"real": [0, 1, 3], "D1": None, "D4": None})
    assert g.on("real").all()


def test_graded_breaks_end_exactly():
    b = graded_breaks(24, 60.0, 1.35)
    assert b[0] == 0.0 and b[-1] == 60.0 and np.all(np.diff(b) > 0)


def test_gl_diff_matrix():
    x, _ = np.polynomial.legendre.leggauss(12)
    D = gl_diff_matrix(12)
    assert np.max(abs(D @ x**7 - 7 * x**6)) < 1e-12


def test_interpolate_on_ray(grid):
    vals = np.exp(-grid.radii) * grid.nodes
    r = np.array([0.3, 2.2, 17.0])
    got = grid.interpolate(vals, RayId.R240, r)
    assert np.max(abs(got - np.exp(-r) * r * RayId.R240.direction)) < 1e-10
    assert np.isnan(grid.interpolate(vals, RayId.R240, [31.0])).all()


@settings(max_examples=30, deadline=None)
@given(st.floats(-3, 3), st.floats(0.2, 3))
def test_segment_integral_matches_quadrature(re, im):
    z = complex(re, im)
    s0, s1 = 0.5 - 0.2j, 2.0 + 1.0 - 0.5j
    t, w = np.polynomial.legendre.leggauss(200)
    s = s0 + (s1 - s0) * (t + 1) / 2
    quad = np.sum(w / (s - z)) * (s1 - s0) / 2
    assert abs(segment_integral_inv(z, s0, s1) - quad) < 1e-9


def test_contour_integral_winding():
    # closing the D1 and D3 sectors adds three arcs of angle pi/3 (i pi in
    # total) and winds once around points inside them
    R = 1e8
    for z, plus in ((0.3 + 0.05j, True), (-0.2 - 1.0j, True), (0.1 + 1j, False), (1 - 0.1j, False)):
        assert in_plus_side(z) is plus
        total = contour_integral_inv(z, R)
        assert abs(total - (1j * np.pi if plus else -1j * np.pi)) < 1e-6


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.floats(0.3, 3), st.floats(-np.pi, np.pi)), min_size=2, max_size=4))
def test_residue_oracle_against_quadrature(poles):
    zs = [r * np.exp(1j * a) for r, a in poles]
    if any(classify(z)[0] is Region.RAY or min(abs(np.angle(z) - k * np.pi / 3) % (2 * np.pi)
                                                for k in range(-3, 4)) < 0.15 for z in zs):
        return
    if len({round(z.real, 3) + 1j * round(z.imag, 3) for z in zs}) < len(zs):
        return
    g = build_grid(40, 16, 1e4, 1.35)
    f = 1 / np.prod([g.nodes - z for z in zs], axis=0)
    terms = [(1 / np.prod([z - o for o in zs if o is not z]), z) for z in zs]
    quad = g.integrate(f) / (2j * np.pi)
    assert abs(quad - residue_oracle(terms)) < 1e-8 * max(1, max(abs(c) for c, _ in terms))
