"""Derived spectral functions (c, d, h, r), their large-k coefficients, the
rational regularizer h_a, the global relation diagnostic and zero scans.

Everything is tabulated on a ContourGrid.  a, b live on the real axis and the
two rays bounding D1; A, B live on all six rays.  For k on the D1 rays the
conjugate point lies on the D4 rays, where A, B are also available, so every
quantity of the form conj(F(conj k)) is evaluated at an actual conjugate
point rather than looked up on the grid.
"""

import json
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .contour import ContourGrid, Region, build_grid, classify
from .core import BadParams, MkdvError
from . import tscatter, xscatter


class ZeroDenominator(MkdvError):
    def __init__(self, what, k):
        super().__init__(f"{what} vanishes near k = {complex(k):.6g}")
        self.what = what
        self.k = complex(k)


class FitDisagreement(MkdvError):
    pass


class SingularConstraintSystem(MkdvError):
    pass


DENOM_FLOOR = 1e-8


def _series_mul(p, q, n):
    """Product of power series in 1/k (index 0 = constant term), truncated at order n."""
    out = np.zeros(n + 1, dtype=complex)
    for i in range(min(len(p), n + 1)):
        for j in range(min(len(q), n + 1 - i)):
            out[i + j] += p[i] * q[j]
    return out


def _series_div(p, q, n):
    """p / q as a power series in 1/k, q[0] != 0."""
    out = np.zeros(n + 1, dtype=complex)
    p = np.concatenate([p, np.zeros(max(0, n + 1 - len(p)))])
    for i in range(n + 1):
        acc = p[i] - sum(out[j] * q[i - j] for j in range(i) if i - j < len(q))
        out[i] = acc / q[0]
    return out


@dataclass
class SpectralData:
    """Tabulated spectral functions on a contour grid.

    Arrays run over all grid nodes; entries outside the set where a function
    is defined hold NaN.  `Ac`/`Bc` are A and B at the conjugate node.
    """

    lam: int
    grid: ContourGrid
    a: np.ndarray
    b: np.ndarray
    A: np.ndarray
    B: np.ndarray
    Ac: np.ndarray
    Bc: np.ndarray
    c: np.ndarray = None
    d: np.ndarray = None
    h: np.ndarray = None
    r: np.ndarray = None
    coeffs: dict = field(default_factory=dict)  # a, b, A, B, h, h_fit: lists of complex
    h0: complex = 0j
    origin: dict = field(default_factory=dict)  # a, b, A, B at k = 0
    diagnostics: dict = field(default_factory=dict)

    # -- persistence -----------------------------------------------------
    _TABLES = ("a", "b", "A", "B", "Ac", "Bc", "c", "d", "h", "r")

    def to_json(self):
        doc = {
            "lambda": self.lam,
            "grid": self.grid.to_json(),
            "tables": {name: None if getattr(self, name) is None else _enc(getattr(self, name))
                       for name in self._TABLES},
            "coeffs": {k: _enc_list(v) for k, v in self.coeffs.items()},
            "h0": [float(np.real(self.h0)), float(np.imag(self.h0))],
            "origin": {k: [float(v.real), float(v.imag)] for k, v in self.origin.items()},
            "diagnostics": self.diagnostics,
        }
        return json.dumps(doc, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        grid = ContourGrid.from_json(doc["grid"])
        tables = {name: None if doc["tables"][name] is None else _dec(doc["tables"][name])
                  for name in cls._TABLES}
        coeffs = {k: [complex(*z) for z in v] for k, v in doc["coeffs"].items()}
        origin = {k: complex(*v) for k, v in doc.get("origin", {}).items()}
        return cls(doc["lambda"], grid, coeffs=coeffs, h0=complex(*doc["h0"]), origin=origin,
                   diagnostics=doc["diagnostics"], **tables)

    # -- views -----------------------------------------------------------
    @property
    def real_mask(self):
        return self.grid.on("real")

    @property
    def d1_mask(self):
        return self.grid.on("D1")

    @property
    def d4_mask(self):
        return self.grid.on("D4")


def _nan(n):
    return np.full(n, np.nan + 0j)


def _enc(arr):
    return {"re": [None if np.isnan(v) else float(v) for v in arr.real],
            "im": [None if np.isnan(v) else float(v) for v in arr.imag]}


def _dec(entry):
    re = np.array([np.nan if v is None else v for v in entry["re"]])
    im = np.array([np.nan if v is None else v for v in entry["im"]])
    return re + 1j * im


def _enc_list(vals):
    return [[float(np.real(z)), float(np.imag(z))] for z in vals]


@dataclass
class SpectralPart:
    """One half of the spectral data: a, b from u0 ('x') or A, B from g ('t')."""

    kind: str
    lam: int
    grid: ContourGrid
    tables: dict  # name -> complex array over all nodes (NaN where undefined)
    coeffs: dict
    origin: dict
    checks: dict = field(default_factory=dict)

    def to_json(self):
        doc = {"kind": self.kind, "lambda": self.lam, "grid": self.grid.to_json(),
               "tables": {k: _enc(v) for k, v in self.tables.items()},
               "coeffs": {k: _enc_list(v) for k, v in self.coeffs.items()},
               "origin": {k: [float(v.real), float(v.imag)] for k, v in self.origin.items()},
               "checks": self.checks}
        return json.dumps(doc, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls(doc["kind"], doc["lambda"], ContourGrid.from_json(doc["grid"]),
                   {k: _dec(v) for k, v in doc["tables"].items()},
                   {k: [complex(*z) for z in v] for k, v in doc["coeffs"].items()},
                   {k: complex(*v) for k, v in doc["origin"].items()}, doc.get("checks", {}))


def compute_x_part(p, grid, m=4, K_switch=xscatter.K_SWITCH, panel=xscatter.PANEL):
    """a, b on the real axis and the D1 rays, their coefficients and origin values."""
    N = len(grid)
    lower = grid.on("real", "D1")
    xl = xscatter.x_line(p, panel=panel)
    xc = xscatter.x_asym_coeffs(p, m, xl)
    a, b = _nan(N), _nan(N)
    kl = grid.nodes[lower].copy()
    kl.imag = np.minimum(kl.imag, 0.0)  # real nodes carry an exact zero imaginary part
    a[lower], b[lower], _ = xscatter.spectral_ab(p, kl, K_switch, m, xc, xl)
    aj, bj = xc.ab_coeffs()
    a0, b0, _ = xscatter.spectral_ab(p, [0.0])
    part = SpectralPart("x", p.lam, grid, {"a": a, "b": b}, {"a": list(aj), "b": list(bj)},
                        {"a": complex(a0[0]), "b": complex(b0[0])})
    real = grid.on("real")
    part.checks = {
        "max_unitarity_residual": float(np.max(np.abs(np.abs(a[real]) ** 2 - p.lam * np.abs(b[real]) ** 2 - 1))),
        "max_symmetry_residual": float(np.max(np.abs(np.concatenate([
            a[grid.mirror][lower] - np.conj(a[lower]), b[grid.mirror][lower] - np.conj(b[lower])])))),
        "K_switch": K_switch, "m": m,
    }
    return part


def compute_t_part(q, grid, m=4, K_switch=tscatter.K_SWITCH_T, panel=tscatter.PANEL):
    """A, B on all six rays, their coefficients and origin values."""
    tl = tscatter.t_line(q, panel=panel)
    tc = tscatter.t_asym_coeffs(q, m, tl)
    A, B, _ = tscatter.spectral_AB(q, grid.nodes, K_switch, m, tc, tl)
    Aj = np.array([tc.T[j][0, 1, 1] for j in range(1, tc.count + 1)])
    Bj = np.array([tc.T[j][0, 0, 1] for j in range(1, tc.count + 1)])
    A0, B0, _ = tscatter.spectral_AB(q, [0.0])
    part = SpectralPart("t", q.lam, grid, {"A": A, "B": B}, {"A": list(Aj), "B": list(Bj)},
                        {"A": complex(A0[0]), "B": complex(B0[0])})
    cj = grid.conjugate
    part.checks = {
        "max_unitarity_residual": float(np.max(np.abs(A * np.conj(A[cj]) - q.lam * B * np.conj(B[cj]) - 1))),
        "max_symmetry_residual": float(np.max(np.abs(np.concatenate([
            A[grid.mirror] - np.conj(A), B[grid.mirror] - np.conj(B)])))),
        "K_switch": K_switch, "m": m,
    }
    return part


def merge_parts(xpart, tpart):
    """SpectralData from an x part and a t part on the same grid."""
    if xpart.kind != "x" or tpart.kind != "t":
        raise BadParams("need one x part and one t part")
    if xpart.lam != tpart.lam:
        raise BadParams("initial and boundary data carry different lambda")
    g = xpart.grid
    if len(g) != len(tpart.grid) or not np.array_equal(g.nodes, tpart.grid.nodes):
        raise BadParams("x and t parts were tabulated on different grids")
    N = len(g)
    lower = g.on("real", "D1")
    A, B = tpart.tables["A"], tpart.tables["B"]
    # conj(k) of every node is itself a node, where A and B are already known
    Ac, Bc = _nan(N), _nan(N)
    Ac[lower], Bc[lower] = A[g.conjugate[lower]], B[g.conjugate[lower]]
    sd = SpectralData(xpart.lam, g, xpart.tables["a"], xpart.tables["b"], A, B, Ac, Bc,
                      coeffs={**xpart.coeffs, **tpart.coeffs}, origin={**xpart.origin, **tpart.origin})
    sd.diagnostics["x_checks"] = xpart.checks
    sd.diagnostics["t_checks"] = tpart.checks
    sd.diagnostics["m"] = xpart.checks.get("m")
    return sd


def compute_spectral(p, q, grid, m=4, K_switch_x=xscatter.K_SWITCH, K_switch_t=tscatter.K_SWITCH_T,
                     x_panel=xscatter.PANEL, t_panel=tscatter.PANEL):
    """Tabulate a, b, A, B on the grid and fill the expansion coefficients.

    p: InitialProfile, q: BoundaryProfile with the same lambda.
    """
    if p.lam != q.lam:
        raise BadParams("initial and boundary data carry different lambda")
    return merge_parts(compute_x_part(p, grid, m, K_switch_x, x_panel),
                       compute_t_part(q, grid, m, K_switch_t, t_panel))


def zero_spectral(grid, lam=1, m=4):
    N = len(grid)
    lower = grid.on("real", "D1")
    a, b = _nan(N), _nan(N)
    a[lower], b[lower] = 1, 0
    Ac, Bc = _nan(N), _nan(N)
    Ac[lower], Bc[lower] = 1, 0
    z = [0j] * m
    return SpectralData(lam, grid, a, b, np.ones(N, complex), np.zeros(N, complex), Ac, Bc,
                        coeffs={"a": z, "b": z, "A": z, "B": z},
                        origin={"a": 1 + 0j, "b": 0j, "A": 1 + 0j, "B": 0j})


def derive_cdhr(sd):
    """Fill c, d, h, r and the h expansion; returns sd (mutated in place)."""
    lam = sd.lam
    N = len(sd.grid)
    lower = sd.grid.on("real", "D1")
    real = sd.real_mask
    k = sd.grid.nodes
    c, d, h, r = _nan(N), _nan(N), _nan(N), _nan(N)
    c[lower] = sd.A[lower] * sd.b[lower] - sd.B[lower] * sd.a[lower]
    d[lower] = sd.a[lower] * np.conj(sd.Ac[lower]) - lam * sd.b[lower] * np.conj(sd.Bc[lower])
    for name, arr in (("a", sd.a), ("d", d)):
        vals = np.abs(arr[lower])
        if np.any(vals < DENOM_FLOOR):
            i = np.flatnonzero(lower)[np.argmin(vals)]
            raise ZeroDenominator(name, k[i])
    h[lower] = -np.conj(sd.Bc[lower]) / (sd.a[lower] * d[lower])
    # on the real axis conj(c(conj k)) = conj(c(k))
    r[real] = np.conj(c[real]) / d[real]
    r_alt = np.conj(sd.b[real]) / sd.a[real] + h[real]
    sd.c, sd.d, sd.h, sd.r = c, d, h, r
    sd.diagnostics["r_formula_gap"] = float(np.max(np.abs(r[real] - r_alt))) if real.any() else 0.0
    mir = sd.grid.mirror
    d1 = sd.d1_mask
    sd.diagnostics["h_symmetry_residual"] = float(np.max(np.abs(h[mir][d1] - np.conj(h[d1])))) if d1.any() else 0.0
    sd.diagnostics["r_symmetry_residual"] = float(np.max(np.abs(r[mir][real] - np.conj(r[real])))) if real.any() else 0.0
    if sd.origin:
        sd.h0, h0_gr = h_at_origin(sd.origin, lam)
        sd.diagnostics["h0_gr_gap"] = float(abs(sd.h0 - h0_gr))
    sd.coeffs["h"] = list(expand_h_series(sd.coeffs, lam))
    return sd


def expand_h_series(coeffs, lam, order=4):
    """h_1..h_order by series division of -conj(B(conj k)) / (a d) in powers of 1/k.

    For F(k) = sum F_j k^-j, conj(F(conj k)) = sum conj(F_j) k^-j.
    """
    n = order
    a = np.concatenate([[1], coeffs["a"]])[: n + 1]
    b = np.concatenate([[0], coeffs["b"]])[: n + 1]
    Ac = np.concatenate([[1], np.conj(coeffs["A"])])[: n + 1]
    Bc = np.concatenate([[0], np.conj(coeffs["B"])])[: n + 1]
    d = _series_mul(a, Ac, n) - lam * _series_mul(b, Bc, n)
    h = _series_div(-Bc, _series_mul(a, d, n), n)
    return h[1:]


def fit_h_coeffs(sd, k_min=10.0, terms=10, order=4):
    """Least-squares fit of h on the D1 rays, |k| >= k_min, to sum_j c_j k^-j."""
    mask = sd.d1_mask & (np.abs(sd.grid.nodes) >= k_min)
    k = sd.grid.nodes[mask]
    # scale columns to keep the system well conditioned
    V = np.stack([(k_min / k) ** j for j in range(1, terms + 1)], axis=1)
    sol, *_ = np.linalg.lstsq(V, sd.h[mask], rcond=None)
    return sol[:order] * k_min ** np.arange(1, order + 1)


def expand_h_coeffs(sd, tol=1e-6, k_min=10.0):
    """h_1..h_4 from the series path, cross-checked against a numerical fit."""
    series = expand_h_series(sd.coeffs, sd.lam)
    fit = fit_h_coeffs(sd, k_min)
    gap = float(np.max(np.abs(series - fit) / np.maximum(1.0, np.abs(series))))
    sd.coeffs["h"] = list(series)
    sd.coeffs["h_fit"] = list(fit)
    sd.diagnostics["h_fit_gap"] = gap
    if gap > 10 * tol:
        raise FitDisagreement(f"series and fitted h coefficients differ by {gap:.3g}")
    return series


def origin_values(p, q):
    """a, b, A, B at k = 0 (all real by symmetry)."""
    a0, b0, _ = xscatter.spectral_ab(p, [0.0])
    A0, B0, _ = tscatter.spectral_AB(q, [0.0])
    return {"a": complex(a0[0]), "b": complex(b0[0]), "A": complex(A0[0]), "B": complex(B0[0])}


def h_at_origin(origin, lam):
    """h(0) from its definition, and the value implied by the global relation."""
    a, b, A, B = (origin[n] for n in "abAB")
    d = a * np.conj(A) - lam * b * np.conj(B)
    return -np.conj(B) / (a * d), -np.conj(b) / a


def global_relation_residual(sd):
    """|A b - B a| on the D1 nodes plus its supremum."""
    mask = sd.d1_mask
    res = np.abs(sd.A[mask] * sd.b[mask] - sd.B[mask] * sd.a[mask])
    return {"k": sd.grid.nodes[mask], "residual": res, "sup": float(res.max()) if res.size else 0.0}


# ---------------------------------------------------------------------------
# Rational regularizer


def _inv_power_series(p, j, n):
    """Coefficients of 1/(k - p)^j in powers of 1/k up to k^-n (index = power)."""
    out = np.zeros(n + 1, dtype=complex)
    for e in range(j, n + 1):
        out[e] = comb(e - 1, j - 1) * p ** (e - j)
    return out


@dataclass(frozen=True)
class RationalRegularizer:
    """h_a(k) = sum_i coef_i * basis_i(k) with poles at p and -conj(p).

    Basis: psi_j = 1/(k-p)^j + (-1)^j/(k+conj p)^j and i*chi_j with
    chi_j = 1/(k-p)^j - (-1)^j/(k+conj p)^j; with real coefficients the
    symmetry h_a(k) = conj(h_a(-conj k)) holds identically.
    """

    pole: complex
    coef: tuple  # real coefficients for (psi1, i chi1, psi2, i chi2, psi3)
    order: int = 4

    BASIS = ((1, "psi"), (1, "chi"), (2, "psi"), (2, "chi"), (3, "psi"))

    @property
    def poles(self):
        return (self.pole, -np.conj(self.pole))

    @staticmethod
    def _basis(kind, j, p, k):
        sgn = (-1) ** j
        f1 = 1 / (k - p) ** j
        f2 = sgn / (k + np.conj(p)) ** j
        return f1 + f2 if kind == "psi" else 1j * (f1 - f2)

    def __call__(self, k):
        k = np.asarray(k, dtype=complex)
        out = np.zeros_like(k)
        for c, (j, kind) in zip(self.coef, self.BASIS):
            out = out + c * self._basis(kind, j, self.pole, k)
        return out

    def expansion(self, n=5):
        """Coefficients of k^-1..k^-n."""
        tot = np.zeros(n + 1, dtype=complex)
        q = -np.conj(self.pole)
        for c, (j, kind) in zip(self.coef, self.BASIS):
            e1 = _inv_power_series(self.pole, j, n)
            e2 = (-1) ** j * _inv_power_series(q, j, n)
            tot += c * ((e1 + e2) if kind == "psi" else 1j * (e1 - e2))
        return tot[1:]

    def constraint_residual(self, h0, hcoeffs):
        vals = np.concatenate([[self(0.0) - h0], self.expansion(4) - np.asarray(hcoeffs)])
        return float(np.max(np.abs(vals)))

    def to_json(self):
        return {"pole": [self.pole.real, self.pole.imag], "coef": list(self.coef)}

    @classmethod
    def from_json(cls, d):
        return cls(complex(*d["pole"]), tuple(float(c) for c in d["coef"]))


def _ha_system(p, h0, hcoeffs):
    rows, rhs = [], []
    q = -np.conj(p)
    cols = []
    for j, kind in RationalRegularizer.BASIS:
        val0 = RationalRegularizer._basis(kind, j, p, 0.0)
        e1 = _inv_power_series(p, j, 4)
        e2 = (-1) ** j * _inv_power_series(q, j, 4)
        ex = (e1 + e2) if kind == "psi" else 1j * (e1 - e2)
        cols.append(np.concatenate([[val0], ex[1:]]))
    M = np.array(cols).T  # (5 constraints, 5 unknowns), complex
    target = np.concatenate([[h0], hcoeffs])
    # real unknowns: stack real and imaginary parts
    rows = np.vstack([M.real, M.imag])
    rhs = np.concatenate([target.real, target.imag])
    return rows, rhs


def build_ha(h0, hcoeffs, rho=1.0, retry=True):
    """Rational h_a with h_a(0) = h0 and k^-1..k^-4 coefficients hcoeffs.

    Poles at rho e^{-i pi/6} and its mirror, both inside D2.
    """
    h0 = complex(h0)
    hcoeffs = np.asarray(hcoeffs, dtype=complex)
    if not (np.isfinite(h0) and np.all(np.isfinite(hcoeffs))):
        raise BadParams("regularizer constraints must be finite")
    p = rho * np.exp(-1j * np.pi / 6)
    rows, rhs = _ha_system(p, h0, hcoeffs)
    sv = np.linalg.svd(rows, compute_uv=False)
    if sv[-1] < 1e-12 * sv[0]:
        if retry:
            return build_ha(h0, hcoeffs, 2 * rho, retry=False)
        raise SingularConstraintSystem("regularizer constraints are degenerate")
    coef, *_ = np.linalg.lstsq(rows, rhs, rcond=None)
    ha = RationalRegularizer(complex(p), tuple(float(c) for c in coef))
    for pole in ha.poles:
        reg, _ = classify(pole)
        if reg in (Region.D1, Region.D4) or reg is Region.RAY:
            raise SingularConstraintSystem("regularizer pole on a forbidden region")
    return ha


# ---------------------------------------------------------------------------
# Zero scans


@dataclass
class ZeroReport:
    count: int
    cells: list  # (re0, re1, im0, im1, winding) per sub-rectangle with nonzero winding
    min_abs: float
    where_min: complex


def _winding(f, corners, samples):
    z = []
    for a, b in zip(corners, corners[1:] + corners[:1]):
        z.append(a + (b - a) * np.linspace(0, 1, samples, endpoint=False))
    z = np.concatenate(z + [corners[:1]])
    vals = f(z)
    steps = np.angle(vals[1:] / vals[:-1])
    if np.max(np.abs(steps)) > np.pi / 2:
        if samples > 4096:
            raise MkdvError("argument increments unresolved; zero near the boundary")
        return _winding(f, corners, samples * 2)
    return int(round(np.sum(steps) / (2 * np.pi))), np.min(np.abs(vals)), z[np.argmin(np.abs(vals))]


def zero_scan(f, re_range, im_range, nx=8, ny=8, samples=64):
    """Argument-principle zero count of f over a rectangle split into nx*ny cells.

    f is a vectorized callable; the report also carries min |f| on cell edges.
    """
    xs = np.linspace(*re_range, nx + 1)
    ys = np.linspace(*im_range, ny + 1)
    total, cells = 0, []
    best, where = np.inf, 0j
    for i in range(nx):
        for j in range(ny):
            corners = [complex(xs[i], ys[j]), complex(xs[i + 1], ys[j]),
                       complex(xs[i + 1], ys[j + 1]), complex(xs[i], ys[j + 1])]
            w, mn, at = _winding(f, corners, samples)
            total += w
            if w:
                cells.append((xs[i], xs[i + 1], ys[j], ys[j + 1], w))
            if mn < best:
                best, where = mn, at
    return ZeroReport(total, cells, float(best), complex(where))


def zero_count_polygon(f, corners, samples=64):
    """Winding number of f around a counterclockwise polygon, with min |f| on it."""
    w, mn, at = _winding(f, [complex(c) for c in corners], samples)
    return ZeroReport(w, [] if w == 0 else [tuple(corners)], float(mn), complex(at))


def zero_gate(p, q, radius=20.0, samples=64):
    """Zero scans behind the focusing-case hypotheses.

    a is scanned over the box [-R, R] x [-R, 0] and d over the two sectors of
    D2 cut at |k| = R.  Returns a dict of ZeroReports.
    """
    lam = p.lam

    def a_of(k):
        return xscatter.spectral_ab(p, _lower(k))[0]

    def d_of(k):
        k = _lower(k)
        a, b, _ = xscatter.spectral_ab(p, k)
        A, B, _ = tscatter.spectral_AB(q, np.conj(k))
        return a * np.conj(A) - lam * b * np.conj(B)

    R = float(radius)
    box = [-R + 0j, -R - 1j * R, R - 1j * R, R + 0j]
    right = [0j, R * np.exp(-1j * np.pi / 3), R + 0j]
    left = [0j, -R + 0j, R * np.exp(-2j * np.pi / 3)]
    return {
        "a_lower_half_plane": zero_count_polygon(a_of, box, samples),
        "d_D2_right": zero_count_polygon(d_of, right, samples),
        "d_D2_left": zero_count_polygon(d_of, left, samples),
    }


def _lower(k):
    k = np.asarray(k, dtype=complex).copy()
    k.imag = np.minimum(k.imag, 0.0)
    return k
