"""The twelve acceptance criteria, run at their stated tolerances.

Each test records one PASS/FAIL line, printed in the terminal summary.
"""

import json
import time

import numpy as np
import pytest
from click.testing import CliRunner

from mkdv_ut import rhsolver as rh
from mkdv_ut import spectral as sp
from mkdv_ut import tscatter as ts
from mkdv_ut import xscatter as xs
from mkdv_ut.cli.main import main
from mkdv_ut.contour import build_grid
from mkdv_ut.core import (BoundaryProfile, ExponentialCurve, GaussianCurve, InitialProfile, zero_boundary,
                          zero_initial)

from conftest import soliton_exact, soliton_profiles

K_LADDER = np.array([20.0, 40.0, 80.0, 160.0, 320.0])


def _slope(k, err):
    x, y = np.log(np.abs(k)), np.log(err)
    return float(np.polyfit(x, y, 1)[0]), float(np.corrcoef(x, y)[0, 1] ** 2)


def test_1_zero_data_chain(criterion):
    t0 = time.perf_counter()
    g = build_grid(4, 8, 20.0, 1.5)
    worst = 0.0
    for lam in (1, -1):
        sd = sp.compute_spectral(zero_initial(lam), zero_boundary(lam), g)
        sp.derive_cdhr(sd)
        lower = g.on("real", "D1")
        for arr, ref, mask in ((sd.a, 1, lower), (sd.b, 0, lower), (sd.A, 1, slice(None)), (sd.B, 0, slice(None)),
                               (sd.h, 0, sd.d1_mask), (sd.r, 0, sd.real_mask)):
            worst = max(worst, float(np.max(np.abs(arr[mask] - ref))))
        ha = sp.build_ha(sd.h0, sp.expand_h_series(sd.coeffs, lam))
        sol = rh.solve_point(sd, ha, 0.7, 0.2)
        worst = max(worst, float(np.max(np.abs(sol.mu - np.eye(2)))), abs(rh.reconstruct_u(sol)[0]))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and dt < 5
    criterion(1, ok, f"zero chain max deviation {worst:.2e} (<= 1e-12), {dt:.1f} s (< 5 s)")
    assert ok


@pytest.fixture(scope="module")
def gaussian_data():
    """Gaussian u0 with g0 = e^-t, g1 = g2 = 0 for both signs, timed."""
    g = build_grid(7, 16, 40.0, 1.5)
    out = {}
    t0 = time.perf_counter()
    for lam in (1, -1):
        p = InitialProfile(lam, GaussianCurve(1.0, 1.0, 1.0))
        q = BoundaryProfile(lam, ExponentialCurve(1.0, 1.0))
        sd = sp.compute_spectral(p, q, g)
        sp.derive_cdhr(sd)
        out[lam] = sd
    return out, time.perf_counter() - t0


def test_2_unitarity(criterion, gaussian_data):
    data, dt = gaussian_data
    worst, n_real, n_all = 0.0, None, None
    for lam, sd in data.items():
        g = sd.grid
        real, lower = g.on("real"), g.on("real", "D1")
        n_real, n_all = int(real.sum()), len(g)
        uni_x = np.abs(np.abs(sd.a[real]) ** 2 - lam * np.abs(sd.b[real]) ** 2 - 1)
        # A(k) conj(A(conj k)) - lam B(k) conj(B(conj k)) = 1 on every node
        uni_t = np.abs(sd.A * np.conj(sd.A[g.conjugate]) - lam * sd.B * np.conj(sd.B[g.conjugate]) - 1)
        worst = max(worst, float(uni_x.max()), float(uni_t.max()))
        assert np.all(np.isfinite(sd.a[lower]))
    ok = worst <= 1e-10 and n_real >= 200 and n_all >= 200 and dt < 30
    criterion(2, ok, f"unitarity {worst:.2e} (<= 1e-10) on {n_real} real / {n_all} contour nodes, {dt:.1f} s")
    assert ok


def test_3_symmetry(criterion, gaussian_data):
    data, _ = gaussian_data
    worst = 0.0
    for sd in data.values():
        g = sd.grid
        mir = g.mirror
        lower, d1, real = g.on("real", "D1"), sd.d1_mask, sd.real_mask
        for arr, mask in ((sd.a, lower), (sd.b, lower), (sd.A, slice(None)), (sd.B, slice(None)), (sd.h, d1),
                          (sd.r, real)):
            worst = max(worst, float(np.max(np.abs(arr[mir][mask] - np.conj(arr[mask])))))
    ok = worst <= 1e-10
    criterion(3, ok, f"mirror symmetry residual {worst:.2e} (<= 1e-10) for a, b, A, B, h, r")
    assert ok


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


def test_4_picard_oracles(criterion):
    worst, pairs = 0.0, 0
    for lam in (1, -1):
        p = InitialProfile(lam, GaussianCurve(0.3, 1.0, 1.0))
        q = BoundaryProfile(lam, ExponentialCurve(0.3, 1.0))
        line = xs.x_line(p)
        for k in (-1j, 1 - 0.5j):
            s = xs.solve_X_col2(p, k, line=line)
            o, _ = xs.picard_oracle_X(p, k, 8)
            j = [int(np.argmin(abs(o.x - v))) for v in (0.0, 1.0)]
            sv = line.interpolate(s.values.reshape(len(s.x), -1), o.x[j]).reshape(len(j), 2)
            worst, pairs = max(worst, _rel(sv, o.values[j])), pairs + 2
        Y = xs.solve_Y(p, 0.7)
        yp = xs.picard_oracle_Y(p, 0.7, 8, x_end=3)
        yl = xs.y_line(p, 0.7)
        j = [int(np.argmin(abs(yp.x - v))) for v in (1.0, 2.0)]
        Yv = yl.interpolate(Y.values.reshape(len(Y.x), 4), yp.x[j]).reshape(len(j), 2, 2)
        worst, pairs = max(worst, _rel(Yv, yp.values[j])), pairs + 2
        for k in (np.exp(1j * np.pi / 6), 1.0):
            s = ts.solve_T_col2(q, k)
            o, _ = ts.picard_oracle_T(q, k, 8)
            worst, pairs = max(worst, _rel(s.values[0], o.values[0])), pairs + 1
        k = 0.7 * np.exp(1j * np.pi / 3)
        U = ts.solve_U(q, k)
        up = ts.picard_oracle_U(q, k, 8, t_end=3)
        ul = ts.u_line(q, k)
        j = [int(np.argmin(abs(up.t - v))) for v in (1.0, 2.0)]
        Uv = ul.interpolate(U.values.reshape(len(U.t), 4), up.t[j]).reshape(len(j), 2, 2)
        worst, pairs = max(worst, _rel(Uv, up.values[j])), pairs + 2
    ok = worst <= 1e-6 and pairs >= 10
    criterion(4, ok, f"ODE vs 8-term Picard for X, Y, T, U: rel diff {worst:.2e} (<= 1e-6) over {pairs} pairs")
    assert ok


def test_5_asymptotic_orders(criterion):
    t0 = time.perf_counter()
    fits = {}
    for lam in (1, -1):
        p = InitialProfile(lam, GaussianCurve(1.0, 4.0, 1.0))
        c = xs.x_asym_coeffs(p, 4)
        ex = [np.max(np.abs(xs.solve_X_col2(p, -1j * k).values[0] - xs.hat_X0(c, [-1j * k])[0][:, 1]))
              for k in K_LADDER]
        ey = [np.max(np.abs(xs.Y_from_X(p, [k], [1.0])[0, 0] - xs.hat_XY(c, 1.0, k)[1])) for k in K_LADDER]
        q = BoundaryProfile(lam, GaussianCurve(4.0, 16.0, 0.5), GaussianCurve(4.0, 16.0, 0.3),
                            GaussianCurve(4.0, 16.0, 0.4))
        line = ts.t_line(q, panel=0.125)
        tc = ts.t_asym_coeffs(q, 4, line)
        kt = K_LADDER * np.exp(1j * np.pi / 6)
        et = [np.max(np.abs(ts.solve_T_col2(q, k, line=line).values[0] - ts.hat_T0(tc, [k])[0][:, 1])) for k in kt]
        ku = K_LADDER * np.exp(1j * np.pi / 3)
        eu = [np.max(np.abs(ts.U_from_T(q, [k], [0.5], line=line)[0, 0] - ts.hat_TU(tc, 0.5, k)[1])) for k in ku]
        for name, ks, errs in (("X", K_LADDER, ex), ("Y", K_LADDER, ey), ("T", kt, et), ("U", ku, eu)):
            fits[f"{name}{lam:+d}"] = _slope(ks, errs)
    dt = time.perf_counter() - t0
    worst_slope = max(s for s, _ in fits.values())
    worst_r2 = min(r for _, r in fits.values())
    ok = worst_slope <= -4.5 and worst_r2 >= 0.99 and dt < 120
    criterion(5, ok, f"m = 4 decay slopes <= {worst_slope:.2f} (<= -4.5), R^2 >= {worst_r2:.4f}, {dt:.0f} s")
    assert ok


def _pole_cauchy_exact(grid, pole, z, own=None):
    """(1/2 pi i) int ds/((s - pole)(s - z)) over the truncated contour; PV on ray `own`."""
    from mkdv_ut.contour import RayId

    tot = 0j
    for ray in RayId:
        far = grid.line_breaks[ray.line][-1] * ray.direction
        a, b = (0j, far) if ray.orientation > 0 else (far, 0j)
        Ip = np.log((b - pole) / (a - pole))
        Iz = np.log(abs(b - z) / abs(a - z)) if ray is own else np.log((b - z) / (a - z))
        tot += (Iz - Ip) / (z - pole)
    return tot / (2j * np.pi)


def test_6_plemelj(criterion):
    from mkdv_ut.contour import RayId

    g = build_grid(16, 16, 60.0, 1.35)
    Cp, Cm = rh.boundary_operators(g)
    interior = (g.radii > 0.05) & (g.radii < 0.8 * g.R_max)
    poles = (1.5 + 0.4j, -0.2 + 1.1j, 0.2 - 1.4j)
    ident = bvals = off = 0.0
    for pole in poles:
        f = 1 / (g.nodes - pole)
        ident = max(ident, float(np.max(np.abs(((Cp - Cm) @ f - f)[interior]))))
        idx = np.flatnonzero(interior)[::5]
        pv = np.array([_pole_cauchy_exact(g, pole, g.nodes[i], RayId(g.ray[i])) for i in idx])
        bvals = max(bvals, float(np.max(np.abs((Cp @ f)[idx] - (pv + 0.5 * f[idx])))),
                    float(np.max(np.abs((Cm @ f)[idx] - (pv - 0.5 * f[idx])))))
        for z in (0.9 + 2.1j, -1.7 - 0.8j, 0.4 - 3.0j):
            off = max(off, abs(rh.cauchy(g, f, z) - _pole_cauchy_exact(g, pole, z)))
    # an untruncated check: residues of a fast-decaying rational density on a long contour
    glong = build_grid(40, 16, 1e4, 1.35)
    pts = (1.5 + 0.4j, -0.2 + 1.1j, 0.2 - 1.4j, -2 - 2j)
    res = 0.0
    for z in (0.9 + 2.1j, -1.7 - 0.8j, 0.4 - 3.0j):
        f = 1 / np.prod([glong.nodes - q for q in pts], axis=0)
        allp = list(pts) + [z]
        # residues of f(s)/(s - z) inside each half plane, signed by which side of the contour holds them
        total = 0j
        for q in allp:
            w = 1 / np.prod([q - o for o in allp if o != q])
            total += w if _plus_side(q) == _plus_side(z) else 0
        exact = total if _plus_side(z) else -total
        res = max(res, abs(rh.cauchy(glong, f, z) - exact))
    worst_c = max(off, res)
    ok = ident <= 1e-8 and bvals <= 1e-8 and worst_c <= 1e-8
    criterion(6, ok, f"C+ - C- = I residual {ident:.1e}, boundary values {bvals:.1e}, "
                     f"Cauchy vs closed form / residues {worst_c:.1e} (all <= 1e-8)")
    assert ok


def _plus_side(z):
    """D1 and D3 lie to the left of the oriented contour."""
    ang = np.degrees(np.angle(z))
    return bool(-120 < ang < -60 or 0 < ang < 60 or 120 < ang < 180)


@pytest.fixture(scope="module")
def soliton_point(soliton_data):
    sd, ha = soliton_data
    return rh.solve_point(sd, ha, 0.5, 0.1)


def test_7_rh_self_consistency(criterion, soliton_point):
    sol = soliton_point
    res = sol.diagnostics["residual"]
    det = rh.det_check(sol, [1 + 2j, -2 - 1j, 0.5 - 3j, 3 + 0.5j])
    jump = rh.jump_residual(sol)
    neu = sol.diagnostics["neumann_gap"]
    ok = res <= 1e-10 and det <= 1e-8 and jump <= 1e-8 and (neu is None or neu <= 1e-8)
    neu_text = "n/a (norm of C_w above 0.3)" if neu is None else f"{neu:.1e}"
    criterion(7, ok, f"(0.5, 0.1): mu residual {res:.1e}, det m - 1 {det:.1e}, jump {jump:.1e}, "
                     f"Neumann gap {neu_text}")
    assert ok


@pytest.mark.slow
def test_8_initial_recovery(criterion, soliton_data):
    sd, ha = soliton_data
    t0 = time.perf_counter()
    xg = np.linspace(0, 3, 31)
    u = np.array([rh.reconstruct_u(rh.solve_point(sd, ha, x, 0.0))[0] for x in xg])
    err = float(np.max(np.abs(u - soliton_exact(xg, 0.0))))
    p, _ = soliton_profiles()
    setup = rh.x_only_setup(p)
    ux = np.array([rh.x_only_rh(p, x, setup) for x in xg])
    cross = float(np.max(np.abs(ux - u)))
    dt = time.perf_counter() - t0
    ok = err <= 1e-4 and cross <= 1e-6 and dt < 300
    criterion(8, ok, f"u(x, 0) sup error {err:.1e} (<= 1e-4), real-line cross-check {cross:.1e} (<= 1e-6), {dt:.0f} s")
    assert ok


def _solve_row(sd, ha, x, t):
    sol = rh.solve_point(sd, ha, x, t)
    u, ux, uxx = rh.recover_derivatives(sol)
    return rh.reconstruct_u(sol)[0], ux.real, uxx.real


@pytest.mark.slow
def test_9_boundary_recovery(criterion, soliton_data):
    sd, ha = soliton_data
    t0 = time.perf_counter()
    tg = np.linspace(0, 0.5, 11)
    vals = np.array([_solve_row(sd, ha, 0.0, t) for t in tg])
    errs = [float(np.max(np.abs(vals[:, j] - soliton_exact(0.0, tg, j)))) for j in range(3)]
    dt = time.perf_counter() - t0
    ok = errs[0] <= 1e-3 and errs[1] <= 5e-3 and errs[2] <= 2e-2 and dt < 300
    criterion(9, ok, f"(u, u_x, u_xx)(0, t) errors ({errs[0]:.1e}, {errs[1]:.1e}, {errs[2]:.1e}) "
                     f"(<= 1e-3, 5e-3, 2e-2), {dt:.0f} s")
    assert ok


def _fd_residual(F, i, j, hx, ht, s):
    """u_t - 6 u^2 u_x - u_xxx at grid point (t index j, x index i), stencils s steps wide."""
    ut = (F[j + s, i] - F[j - s, i]) / (2 * s * ht)
    ux = (F[j, i + s] - F[j, i - s]) / (2 * s * hx)
    uxxx = (F[j, i + 2 * s] - 2 * F[j, i + s] + 2 * F[j, i - s] - F[j, i - 2 * s]) / (2 * (s * hx) ** 3)
    return ut - 6 * F[j, i] ** 2 * ux - uxxx


@pytest.mark.slow
def test_10_field(criterion, soliton_data):
    sd, ha = soliton_data
    t0 = time.perf_counter()
    xg, tg = np.linspace(0, 2, 21), np.linspace(0, 0.5, 11)
    U = np.array([[rh.reconstruct_u(rh.solve_point(sd, ha, x, t))[0] for x in xg] for t in tg])
    dt = time.perf_counter() - t0
    err = float(np.max(np.abs(U - soliton_exact(xg[None, :], tg[:, None]))))
    # residual at (1.0, 0.25) from grid values, stencils 4, 2 and 1 grid steps wide
    hs = np.array([4, 2, 1])
    res = np.array([abs(_fd_residual(U, 10, 5, 0.1, 0.05, s)) for s in hs])
    order, _ = _slope(hs, res)
    ok = err <= 1e-3 and 1.5 <= order <= 2.5 and dt < 1200
    criterion(10, ok, f"21 x 11 sup error {err:.1e} (<= 1e-3), FD residual {res[-1]:.1e} at h = 0.1 with "
                      f"order {order:.2f} (target 2), {dt:.0f} s on one worker")
    assert ok


def test_11_negative_control(criterion, tmp_path):
    g = build_grid(7, 16, 40.0, 1.5)
    p = InitialProfile(1, GaussianCurve(1.0, 1.0, 0.0))
    sd = sp.compute_spectral(p, zero_boundary(1), g)
    gr = sp.global_relation_residual(sd)["sup"]
    doc = {"lambda": 1,
           "initial": {"kind": "preset", "name": "gaussian", "params": {"alpha": 1.0, "beta": 1.0, "x0": 0.0}},
           "boundary": {"kind": "preset", "name": "zero"},
           "grid": {"panels_per_ray": 7, "nodes_per_panel": 16, "R_max": 40.0, "grading": 1.5},
           "solve": {"x": {"start": 0.5, "stop": 0.5, "num": 1}, "t": {"start": 0.0, "stop": 0.0, "num": 1}},
           "paths": {"spectral_x": "sx.json", "spectral_t": "st.json", "derived": "d.json",
                     "solution": "u.csv", "report": "report"}}
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(doc))
    runner = CliRunner()
    codes = [runner.invoke(main, [cmd, "--config", str(cfg)]).exit_code
             for cmd in ("spectral-x", "spectral-t", "derive", "solve")]
    forced = runner.invoke(main, ["solve", "--config", str(cfg), "--force"]).exit_code
    ok = gr >= 1e-2 and codes == [0, 0, 0, 3] and forced == 0
    criterion(11, ok, f"global relation sup {gr:.2f} (>= 1e-2); solve exit {codes[-1]} without --force, "
                      f"{forced} with it")
    assert ok


def test_12_regularization(criterion, soliton_data):
    sd, ha = soliton_data
    k = sd.grid.nodes[sd.d1_mask]
    big = np.abs(k) >= 10
    err = np.abs(sd.h[sd.d1_mask] - ha(k))[big]
    h_slope, h_r2 = _slope(k[big], err)
    # the soliton's reflection coefficient is zero, so its decay slope is a fit to rounding noise;
    # the honest check is that r vanishes on the real axis
    r_sup = float(np.max(np.abs(sd.r[sd.real_mask])))
    ok = h_slope <= -4.5 and r_sup <= 1e-10
    criterion(12, ok, f"|h - h_a| slope {h_slope:.2f} on D1 (<= -4.5, R^2 {h_r2:.3f}); r identically zero on R "
                      f"(sup {r_sup:.1e}), so its slope is vacuous")
    assert ok
