"""File-based stages: spectral-x, spectral-t, derive, solve, emit."""

import csv
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .. import rhsolver as rh
from .. import spectral as sp
from ..contour import build_grid
from ..core import ConfigError, MkdvError

log = logging.getLogger(__name__)

CSV_COLUMNS = ("x", "t", "u", "u_x", "u_xx", "im_u_diagnostic", "cond_estimate")


class GateFailed(MkdvError):
    """A hypothesis gate (global relation, zero scan, conditioning) refused the run."""


class StageError(MkdvError):
    def __init__(self, stage, exc):
        self.stage = stage
        self.cause = exc
        where = getattr(exc, "k", None)
        at = f" at k = {complex(where):.6g}" if where is not None else ""
        super().__init__(f"stage {stage}{at}: {type(exc).__name__}: {exc}")


def _write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _read(path, what):
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {what} file {path} (run the stage that writes it): {exc}") from None


def grid_from_config(cfg):
    g = cfg.grid
    return build_grid(g["panels_per_ray"], g["nodes_per_panel"], g["R_max"], g["grading"])


# ---------------------------------------------------------------------------
# spectral-x / spectral-t


def _summarize(part, tol):
    checks = dict(part.checks)
    worst = max(checks["max_unitarity_residual"], checks["max_symmetry_residual"])
    checks["tolerance"] = tol
    checks["passed"] = bool(worst <= tol)
    return checks


def cmd_spectral(cfg, kind):
    """Tabulate one half of the spectral data and write it as JSON."""
    grid = grid_from_config(cfg)
    try:
        if kind == "x":
            part = sp.compute_x_part(cfg.initial, grid, cfg.expansion_order)
        else:
            part = sp.compute_t_part(cfg.boundary, grid, cfg.expansion_order)
    except MkdvError as exc:
        raise StageError(f"spectral-{kind}", exc) from exc
    part.checks["report"] = _summarize(part, cfg.tol_ode)
    path = cfg.path("spectral_x" if kind == "x" else "spectral_t")
    _write(path, part.to_json())
    log.info("spectral-%s: %d nodes -> %s", kind, len(grid), path)
    return part


# ---------------------------------------------------------------------------
# derive


def run_gates(sd, p, q, cfg):
    """Global relation, focusing-case zero scans and the real-axis positivity check."""
    gr = sp.global_relation_residual(sd)["sup"]
    gates = {"global_relation": {"sup": gr, "threshold": cfg.gr_threshold, "passed": bool(gr <= cfg.gr_threshold)}}
    if sd.lam == -1:
        try:
            zs = sp.zero_gate(p, q, cfg.zero_scan_radius)
            entry = {name: {"count": rep.count, "min_abs": rep.min_abs} for name, rep in zs.items()}
            entry["passed"] = all(rep.count == 0 for rep in zs.values())
        except MkdvError as exc:
            entry = {"error": str(exc), "passed": False}
        entry["radius"] = cfg.zero_scan_radius
        gates["zero_scan"] = entry
        pos = rh.positivity_check(sd, 0.0, 0.0)
        pos["passed"] = bool(pos["min_eigenvalue"] > 0)
        gates["positivity"] = pos
    return gates


def derive(xpart, tpart, p=None, q=None, cfg=None):
    """Merged, derived spectral data with regularizer and gate records (no file I/O)."""
    sd = sp.merge_parts(xpart, tpart)
    sp.derive_cdhr(sd)
    hs = sp.expand_h_coeffs(sd)
    ha = sp.build_ha(sd.h0, hs)
    sd.diagnostics["ha"] = ha.to_json()
    sd.diagnostics["ha_constraint_residual"] = ha.constraint_residual(sd.h0, hs)
    sd.diagnostics["decay"] = {line: rh.decay_tag(sd, ha, line) for line in ("D1", "real")}
    if cfg is not None:
        sd.diagnostics["gates"] = run_gates(sd, p, q, cfg)
    return sd, ha


def cmd_derive(cfg):
    xpart = sp.SpectralPart.from_json(_read(cfg.path("spectral_x"), "spectral-x"))
    tpart = sp.SpectralPart.from_json(_read(cfg.path("spectral_t"), "spectral-t"))
    try:
        sd, ha = derive(xpart, tpart, cfg.initial, cfg.boundary, cfg)
    except MkdvError as exc:
        raise StageError("derive", exc) from exc
    _write(cfg.path("derived"), sd.to_json())
    log.info("derive: global relation sup %.3g", sd.diagnostics["gates"]["global_relation"]["sup"])
    return sd, ha


def load_derived(path):
    sd = sp.SpectralData.from_json(_read(path, "derived spectral"))
    if "ha" not in sd.diagnostics:
        raise MkdvError(f"{path} has no regularizer; run the derive stage")
    return sd, sp.RationalRegularizer.from_json(sd.diagnostics["ha"])


def check_gates(sd, force=False):
    gates = sd.diagnostics.get("gates", {})
    failed = [name for name, g in gates.items() if not g.get("passed", True)]
    if failed and not force:
        detail = "; ".join(f"{n}: {json.dumps(gates[n], default=str)}" for n in failed)
        raise GateFailed(f"gate(s) failed: {detail} (use --force to override)")
    return failed


# ---------------------------------------------------------------------------
# solve

_WORKER = {}


def _init_worker(path, options):
    sd, ha = load_derived(path)
    _WORKER.update(sd=sd, ha=ha, options=options)


def solve_one(sd, ha, x, t, options):
    """CSV row values for one (x, t)."""
    try:
        sol = rh.solve_point(sd, ha, x, t, tail_tol=options["tail_tol"], max_unknowns=options["max_unknowns"],
                             phase_per_panel=options["phase_per_panel"], cond_limit=options["cond_limit"])
    except rh.IllConditioned as exc:
        if not options["force"]:
            raise GateFailed(str(exc)) from exc
        return (x, t, np.nan, np.nan, np.nan, np.nan, exc.cond)
    diag = sol.diagnostics
    if diag["residual"] > options["tol_solve"]:
        raise MkdvError(f"mu residual {diag['residual']:.3g} above tol_solve at (x, t) = ({x}, {t})")
    u, im = rh.reconstruct_u(sol)
    ux = uxx = np.nan
    if options["derivatives"]:
        try:
            _, dux, duxx = rh.recover_derivatives(sol, sd.lam)
            ux, uxx = dux.real, duxx.real
        except rh.MomentDivergence as exc:
            log.warning("derivatives unavailable at (%g, %g): %s", x, t, exc)
    return (x, t, u, ux, uxx, im, diag["cond"])


def _solve_task(point):
    return solve_one(_WORKER["sd"], _WORKER["ha"], *point, _WORKER["options"])


def solve_options(cfg, force=False, derivatives=True):
    return {"tail_tol": cfg.tol_quad, "max_unknowns": cfg.max_unknowns, "phase_per_panel": cfg.phase_per_panel,
            "cond_limit": cfg.cond_limit, "tol_solve": cfg.tol_solve, "force": force,
            "derivatives": derivatives}


def grid_points(cfg):
    """(x, t) pairs, x varying fastest; the order fixes the CSV layout."""
    return [(float(x), float(t)) for t in cfg.t_axis.values() for x in cfg.x_axis.values()]


def cmd_solve(cfg, force=False, workers=None):
    path = cfg.path("derived")
    sd, ha = load_derived(path)
    failed = check_gates(sd, force)
    if failed:
        log.warning("proceeding despite failed gates: %s", ", ".join(failed))
    options = solve_options(cfg, force)
    points = grid_points(cfg)
    workers = workers or cfg.workers
    if workers > 1:
        with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(path, options)) as pool:
            rows = list(pool.map(_solve_task, points, chunksize=1))
    else:
        rows = [solve_one(sd, ha, x, t, options) for x, t in points]
    write_csv(cfg.path("solution"), rows)
    return rows


def write_csv(path, rows, columns=CSV_COLUMNS):
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(format(float(v), ".17g") for v in row))
    _write(path, "\n".join(lines) + "\n")


def read_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise MkdvError(f"{path} holds no rows")
    return {key: np.array([float(r[key]) for r in rows]) for key in reader.fieldnames}


# ---------------------------------------------------------------------------
# emit


def emit_tables(cfg, exact=None):
    """Plot-ready CSVs next to the report path; returns {name: path}."""
    out = Path(cfg.path("report"))
    out.mkdir(parents=True, exist_ok=True)
    written = {}
    sol = Path(cfg.path("solution"))
    if sol.exists():
        data = read_csv(sol)
        x, t = data["x"], data["t"]
        cols = ["x", "t", "u"]
        vals = [x, t, data["u"]]
        if exact is not None:
            ue = exact(x, t)
            cols += ["u_exact", "abs_error"]
            vals += [ue, np.abs(data["u"] - ue)]
        written["field"] = out / "field.csv"
        write_csv(written["field"], list(zip(*vals)), cols)
        x0 = x == x.min()
        written["boundary_trace"] = out / "boundary_trace.csv"
        write_csv(written["boundary_trace"], list(zip(t[x0], data["u"][x0], data["u_x"][x0], data["u_xx"][x0])),
                  ["t", "u", "u_x", "u_xx"])
        t0 = t == t.min()
        written["initial_trace"] = out / "initial_trace.csv"
        write_csv(written["initial_trace"], list(zip(x[t0], data["u"][t0])), ["x", "u"])
    derived = Path(cfg.path("derived"))
    if derived.exists():
        sd, ha = load_derived(derived)
        d1 = sd.d1_mask
        k = sd.grid.nodes[d1]
        written["regularization"] = out / "regularization.csv"
        write_csv(written["regularization"],
                  list(zip(np.abs(k), np.angle(k), np.abs(sd.h[d1] - ha(k)), np.abs(sd.h[d1]))),
                  ["abs_k", "arg_k", "abs_h_minus_ha", "abs_h"])
        real = sd.real_mask
        kr = sd.grid.nodes[real].real
        written["reflection"] = out / "reflection.csv"
        write_csv(written["reflection"], list(zip(kr, np.abs(sd.r[real]))), ["k", "abs_r"])
        gr = sp.global_relation_residual(sd)
        written["global_relation"] = out / "global_relation.csv"
        write_csv(written["global_relation"], list(zip(np.abs(gr["k"]), np.angle(gr["k"]), gr["residual"])),
                  ["abs_k", "arg_k", "residual"])
    if not written:
        raise MkdvError("nothing to emit: neither a solution CSV nor derived spectral data exists")
    return {k: str(v) for k, v in written.items()}


def cmd_emit(cfg, exact=None, figures=True):
    written = emit_tables(cfg, exact)
    if figures:
        from .figures import render_figures

        written.update(render_figures(written, Path(cfg.path("report"))))
    return written
