"""Validation suites: quick, invariants, asymptotics, endtoend, all."""

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .. import rhsolver as rh
from .. import spectral as sp
from .. import tscatter as ts
from .. import xscatter as xs
from ..contour import RayId, build_grid, residue_oracle, segment_integral_inv
from ..core import (BoundaryProfile, ConfigError, ExponentialCurve, GaussianCurve, InitialProfile, MkdvError,
                    zero_boundary, zero_initial)
from .presets import SolitonFocusing, verify_preset

log = logging.getLogger(__name__)

SUITES = ("quick", "invariants", "asymptotics", "endtoend", "all")


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)


def _timed(fn):
    def run(*args, **kwargs):
        t0 = time.perf_counter()
        try:
            out = fn(*args, **kwargs)
        except MkdvError as exc:
            out = [Check(fn.__name__, False, float("nan"), float("nan"), detail={"error": str(exc)})]
        dt = (time.perf_counter() - t0) / max(len(out), 1)
        for c in out:
            c.seconds = round(dt, 3)
        return out

    run.__name__ = fn.__name__
    return run


def _fit(ks, errs):
    x, y = np.log(np.abs(ks)), np.log(errs)
    slope = float(np.polyfit(x, y, 1)[0])
    r2 = float(np.corrcoef(x, y)[0, 1] ** 2)
    return slope, r2


# ---------------------------------------------------------------------------
# quick


@_timed
def check_zero_chain():
    g = build_grid(4, 8, 20.0, 1.5)
    worst = 0.0
    for lam in (1, -1):
        sd = sp.compute_spectral(zero_initial(lam), zero_boundary(lam), g)
        sp.derive_cdhr(sd)
        lower = g.on("real", "D1")
        for arr, ref, mask in ((sd.a, 1, lower), (sd.b, 0, lower), (sd.A, 1, None), (sd.B, 0, None),
                               (sd.h, 0, sd.d1_mask), (sd.r, 0, sd.real_mask)):
            sel = arr if mask is None else arr[mask]
            worst = max(worst, float(np.max(np.abs(sel - ref))))
        ha = sp.build_ha(sd.h0, sp.expand_h_series(sd.coeffs, lam))
        sol = rh.solve_point(sd, ha, 0.7, 0.2)
        worst = max(worst, float(np.max(np.abs(sol.mu - np.eye(2)))), abs(rh.reconstruct_u(sol)[0]))
    return [Check("zero_data_identity_chain", worst <= 1e-12, worst, 1e-12)]


def _truncated_pole_cauchy(grid, a, z, own=None, side=0):
    """(1/2 pi i) int over the grid's truncated rays of ds/((s - a)(s - z)), exactly."""
    tot = 0j
    for ray in RayId:
        b = grid.line_breaks[ray.line]
        if b is None:
            continue
        far = b[-1] * ray.direction
        s0, s1 = (0.0, far) if ray.orientation > 0 else (far, 0.0)
        Ia = segment_integral_inv(a, s0, s1)
        Iz = np.log(abs(s1 - z) / abs(s0 - z)) if ray is own else segment_integral_inv(z, s0, s1)
        tot += (Ia - Iz) / (a - z)
    val = tot / (2j * np.pi)
    if own is not None:
        val += side * 0.5 / (z - a)
    return val


@_timed
def check_plemelj():
    g = build_grid(16, 16, 60.0, 1.35)
    H = rh.pv_matrix(g)
    Cp, Cm = rh.boundary_operators(g, H)
    interior = g.radii < 0.8 * g.R_max
    poles = (2j, 1 - 0.3j, -3 + 1j)
    ident, bvals = 0.0, 0.0
    for a in poles:
        f = 1 / (g.nodes - a)
        ident = max(ident, float(np.max(np.abs((Cp @ f - Cm @ f - f)[interior]))))
        idx = np.flatnonzero(interior)[::7]
        for side, C in ((1, Cp), (-1, Cm)):
            ex = np.array([_truncated_pole_cauchy(g, a, g.nodes[i], RayId(g.ray[i]), side) for i in idx])
            bvals = max(bvals, float(np.max(np.abs(C[idx] @ f - ex))))
    # off the contour, against residues on a long contour
    glong = build_grid(40, 16, 1e4, 1.35)
    zs = (0.9 + 2.1j, -1.7 - 0.8j, 0.4 - 3.0j)
    pts = (1.5 + 0.4j, -0.2 + 1.1j, 0.3 - 0.9j, -2 - 2j)  # all well away from the rays
    res = 0.0
    for z in zs:
        f = 1 / np.prod([glong.nodes - p for p in pts], axis=0)
        allp = list(pts) + [z]
        terms = [(1 / np.prod([q - o for o in allp if o != q]), q) for q in allp]
        res = max(res, abs(rh.cauchy(glong, f, z) - residue_oracle(terms)))
    return [Check("plemelj_jump_identity", ident <= 1e-8, ident, 1e-8),
            Check("plemelj_boundary_values_closed_form", bvals <= 1e-8, bvals, 1e-8),
            Check("cauchy_vs_residues", res <= 1e-8, float(res), 1e-8)]


@_timed
def check_preset():
    sol = SolitonFocusing()
    res = verify_preset(sol)
    p, q = sol.initial, sol.boundary
    gap = max(abs(q(0.0, j) - p(0.0, j)) for j in range(3))
    return [Check("preset_pde_residual", res <= 1e-12, res, 1e-12),
            Check("preset_boundary_consistency", gap <= 1e-14, float(gap), 1e-14)]


@_timed
def check_roundtrip():
    g = build_grid(3, 8, 10.0, 1.5)
    p = InitialProfile(1, ExponentialCurve(0.4, 1.0))
    q = BoundaryProfile(1, ExponentialCurve(0.2, 2.0))
    sd = sp.compute_spectral(p, q, g)
    sp.derive_cdhr(sd)
    back = sp.SpectralData.from_json(sd.to_json())
    same = all(np.array_equal(getattr(sd, n), getattr(back, n), equal_nan=True) for n in sp.SpectralData._TABLES)
    same = same and np.array_equal(sd.grid.nodes, back.grid.nodes)
    return [Check("spectral_json_roundtrip", bool(same), 0.0 if same else 1.0, 0.0)]


@_timed
def check_config_strict():
    from .config import parse_config

    base = {"lambda": 1, "initial": {"kind": "preset", "name": "zero"}, "boundary": {"kind": "preset", "name": "zero"}}
    rejected = 0
    for bad in ({**base, "colour": 1}, {**base, "grid": {"R": 3}}, {**base, "tolerances": {"tol_ode": -1}}):
        try:
            parse_config(bad, "solve")
        except ConfigError:
            rejected += 1
    return [Check("config_rejects_bad_keys", rejected == 3, float(rejected), 3.0)]


# ---------------------------------------------------------------------------
# invariants


def _small_grid():
    return build_grid(7, 16, 40.0, 1.5)


@_timed
def check_unitarity_symmetry():
    g = _small_grid()
    out = []
    for lam in (1, -1):
        p = InitialProfile(lam, GaussianCurve(1.0, 1.0, 1.0))
        q = BoundaryProfile(lam, ExponentialCurve(1.0, 1.0))
        sd = sp.compute_spectral(p, q, g)
        sp.derive_cdhr(sd)
        xc, tc = sd.diagnostics["x_checks"], sd.diagnostics["t_checks"]
        uni = max(xc["max_unitarity_residual"], tc["max_unitarity_residual"])
        sym = max(xc["max_symmetry_residual"], tc["max_symmetry_residual"],
                  sd.diagnostics["h_symmetry_residual"], sd.diagnostics["r_symmetry_residual"])
        out.append(Check(f"unitarity_lambda{lam:+d}", uni <= 1e-10, uni, 1e-10,
                         detail={"real_nodes": int(g.on("real").sum()), "contour_nodes": len(g)}))
        out.append(Check(f"symmetry_lambda{lam:+d}", sym <= 1e-10, sym, 1e-10))
    return out


@_timed
def check_picard():
    worst = 0.0
    pairs = 0
    for lam in (1, -1):
        p = InitialProfile(lam, GaussianCurve(0.3, 1.0, 1.0))
        q = BoundaryProfile(lam, ExponentialCurve(0.3, 1.0))
        line = xs.x_line(p)
        for k in (-1j, 1 - 0.5j, 2.0):
            s = xs.solve_X_col2(p, k, line=line)
            o, _ = xs.picard_oracle_X(p, k, 8)
            j = [int(np.argmin(abs(o.x - v))) for v in (0.0, 1.0)]
            sv = line.interpolate(s.values.reshape(len(s.x), -1), o.x[j]).reshape(len(j), 2)
            worst = max(worst, float(np.max(np.abs(sv - o.values[j])) / np.max(np.abs(o.values[j]))))
            pairs += 2
        for k in (np.exp(1j * np.pi / 6), 1.0):
            s = ts.solve_T_col2(q, k)
            o, _ = ts.picard_oracle_T(q, k, 8)
            worst = max(worst, float(np.max(np.abs(s.values[0] - o.values[0])) / np.max(np.abs(o.values[0]))))
            pairs += 1
    return [Check("picard_oracle_equivalence", worst <= 1e-6, worst, 1e-6, detail={"pairs": pairs})]


@_timed
def check_negative_control():
    g = _small_grid()
    p = InitialProfile(1, GaussianCurve(1.0, 1.0, 0.0))
    sd = sp.compute_spectral(p, zero_boundary(1), g)
    gr = sp.global_relation_residual(sd)["sup"]
    return [Check("incompatible_data_global_relation", gr >= 1e-2, gr, 1e-2)]


# ---------------------------------------------------------------------------
# asymptotics

K_LADDER = np.array([20.0, 40.0, 80.0, 160.0, 320.0])


@_timed
def check_asymptotics():
    out = []
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
            slope, r2 = _fit(ks, errs)
            out.append(Check(f"decay_{name}_lambda{lam:+d}", slope <= -4.5 and r2 >= 0.99, slope, -4.5,
                             detail={"r2": r2, "abs_k": np.abs(ks).tolist(), "errors": [float(e) for e in errs]}))
    return out


# ---------------------------------------------------------------------------
# endtoend (soliton)


def soliton_data(cfg=None, sol=None):
    """Derived soliton spectral data, reused from cfg's derived file when it matches."""
    from .pipeline import derive, load_derived

    sol = sol or SolitonFocusing()
    if cfg is not None and cfg.preset and cfg.preset.get("name") == "soliton-focusing":
        path = Path(cfg.path("derived"))
        if path.exists():
            return load_derived(path)
    g = build_grid(24, 16, 60.0, 1.35)
    xpart = sp.compute_x_part(sol.initial, g)
    tpart = sp.compute_t_part(sol.boundary, g)
    return derive(xpart, tpart)


@_timed
def check_endtoend(cfg=None):
    sol = SolitonFocusing()
    if cfg is not None and cfg.preset and cfg.preset.get("name") == "soliton-focusing":
        sol = SolitonFocusing(**cfg.preset.get("params", {}))
    sd, ha = soliton_data(cfg, sol)
    out = []
    d1 = sd.d1_mask
    k = sd.grid.nodes[d1]
    sel = np.abs(k) >= 10
    dif = np.abs(sd.h[d1][sel] - ha(k[sel]))
    slope, r2 = _fit(np.abs(k[sel]), dif)
    out.append(Check("regularization_decay_D1", slope <= -4.5, slope, -4.5, detail={"r2": r2}))
    gr = sp.global_relation_residual(sd)["sup"]
    out.append(Check("soliton_global_relation", gr <= 1e-4, gr, 1e-4))
    # self-consistency at one point
    s = rh.solve_point(sd, ha, 0.5, 0.1)
    jr = rh.jump_residual(s)
    det = rh.det_check(s, [1 + 2.5j, -0.5 + 0.3j, 2 - 1j, 0.3 - 3j])
    out.append(Check("rh_residual", s.diagnostics["residual"] <= 1e-10, s.diagnostics["residual"], 1e-10))
    out.append(Check("rh_jump_residual", jr <= 1e-8, jr, 1e-8))
    out.append(Check("rh_det_one", det <= 1e-8, det, 1e-8))
    # reconstruction table on a coarse sample of the field
    table = []
    worst = [0.0, 0.0, 0.0]
    for t in (0.0, 0.25, 0.5):
        for x in (0.0, 1.0, 2.0):
            s = rh.solve_point(sd, ha, x, t)
            u, ux, uxx = rh.recover_derivatives(s, sd.lam)
            errs = [abs(u.real - sol(x, t)), abs(ux.real - sol(x, t, dx=1)), abs(uxx.real - sol(x, t, dx=2))]
            worst = [max(a, b) for a, b in zip(worst, errs)]
            table.append({"x": x, "t": t, "u": u.real, "exact": float(sol(x, t)), "errors": errs})
    out.append(Check("soliton_field_u", worst[0] <= 1e-3, worst[0], 1e-3, detail={"table": table}))
    out.append(Check("soliton_boundary_u_x", worst[1] <= 5e-3, worst[1], 5e-3))
    out.append(Check("soliton_boundary_u_xx", worst[2] <= 2e-2, worst[2], 2e-2))
    setup = rh.x_only_setup(sol.initial)
    gap = max(abs(rh.x_only_rh(sol.initial, x, setup) - sol(x, 0.0)) for x in (0.0, 1.5, 3.0))
    out.append(Check("x_only_initial_recovery", gap <= 1e-6, gap, 1e-6))
    return out


SUITE_CHECKS = {
    "quick": (check_zero_chain, check_plemelj, check_preset, check_roundtrip, check_config_strict),
    "invariants": (check_unitarity_symmetry, check_picard, check_negative_control),
    "asymptotics": (check_asymptotics,),
    "endtoend": (check_endtoend,),
}


def run_suite(name="quick", cfg=None):
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}; choose from {SUITES}")
    names = [s for s in SUITES if s != "all"] if name == "all" else [name]
    checks = []
    for suite in names:
        for fn in SUITE_CHECKS[suite]:
            log.info("running %s", fn.__name__)
            res = fn(cfg) if fn is check_endtoend else fn()
            for c in res:
                c.detail["suite"] = suite
            checks.extend(res)
    return checks


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def write_report(checks, out_dir, suite):
    """JSON report, plain-text summary and the slope table (plus its figure)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    doc = {"suite": suite, "passed": all(c.passed for c in checks), "checks": [_plain(asdict(c)) for c in checks]}
    (out / "validate.json").write_text(json.dumps(doc, indent=1))
    lines = [f"{'PASS' if c.passed else 'FAIL'}  {c.name:42s} value={c.value:.3e}  threshold={c.threshold:.1e}"
             f"  ({c.seconds:.1f}s)" for c in checks]
    lines.append(f"{sum(c.passed for c in checks)}/{len(checks)} checks passed")
    summary = "\n".join(lines)
    (out / "validate.txt").write_text(summary + "\n")
    rows = []
    for i, c in enumerate(c for c in checks if c.name.startswith("decay_")):
        rows += [(i, k, e) for k, e in zip(c.detail["abs_k"], c.detail["errors"])]
    files = {"json": str(out / "validate.json"), "summary": str(out / "validate.txt")}
    if rows:
        from .figures import render_figures
        from .pipeline import write_csv

        files["slopes"] = str(out / "slopes.csv")
        write_csv(files["slopes"], rows, ["series", "abs_k", "error"])
        files.update(render_figures({"slopes": files["slopes"]}, out))
    return summary, files
