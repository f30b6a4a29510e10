"""Riemann-Hilbert solve on the six-ray contour and reconstruction of u(x, t).

The jump is stored through its two nilpotent factors: on every node w- has
only a (2,1) entry `lower` and w+ only a (1,2) entry `upper`.  Because of
that structure a row (f1, f2) of mu enters C_w only through f2 on nodes where
`lower` is active and through f1 where `upper` is active, so the dense system
is assembled on those unknowns alone.

The solve grid is chosen per (x, t): the oscillating factor exp(theta) is
known in closed form, h and r are interpolated from the tabulation grid, and
panels are cut so that theta turns by at most `phase_per_panel` radians per
panel.  Each line is truncated where the estimated contribution of the rest
of the jump drops below `tail_tol`, or where the unknown budget runs out.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .contour import RayId, build_grid, classify, Region, gl_diff_matrix, segment_integral_inv
from .core import BadParams, MkdvError, OutOfDomain, RangeError, guarded_exp, IDENT, det2

COND_LIMIT = 1e10
# jump entries below this everywhere are tabulation noise; the line is dropped
NOISE_FLOOR = 1e-10
SQRT3 = np.sqrt(3.0)


class TooCloseToContour(MkdvError):
    pass


class IllConditioned(MkdvError):
    def __init__(self, cond, x=None, t=None):
        super().__init__(f"I - C_w has condition estimate {cond:.3g} at (x, t) = ({x}, {t})")
        self.cond = cond


class MomentDivergence(MkdvError):
    pass


def theta(k, x, t):
    return -2j * k * x + 8j * k**3 * t


def _check_point(x, t):
    if not (np.isfinite(x) and np.isfinite(t)) or x < 0 or t < 0:
        raise OutOfDomain(f"(x, t) = ({x}, {t}) is outside the quarter plane")


def _exp_on(th, sign, what):
    """exp(sign * theta), refusing growth beyond rounding."""
    z = sign * np.asarray(th)
    if np.any(z.real > 1e-9 * (1 + np.abs(z))):
        raise RangeError(f"growing exponential requested for the {what} entry")
    return guarded_exp(z)


# ---------------------------------------------------------------------------
# Spectral lookups on arbitrary nodes


def _conj_ray(ray):
    """Ray containing conj(k) for k on `ray`."""
    return RayId((6 - ray.value) % 6)


class SpectralLookup:
    """h and r at arbitrary radii on the rays, interpolated from SpectralData."""

    def __init__(self, sd):
        self.sd = sd
        self.R_max = sd.grid.R_max

    def h(self, ray, radii):
        if ray.line != "D1":
            raise BadParams("h is tabulated on the D1 rays")
        return self.sd.grid.interpolate(self.sd.h, ray, radii)

    def r(self, ray, radii):
        if ray.line != "real":
            raise BadParams("r is tabulated on the real axis")
        return self.sd.grid.interpolate(self.sd.r, ray, radii)


def jump_entries(look, ha, lam, x, t, ray, radii):
    """(lower, upper) entries of w-, w+ at the given radii on one ray."""
    radii = np.asarray(radii, dtype=float)
    k = radii * ray.direction
    th = theta(k, x, t)
    zero = np.zeros(k.shape, dtype=complex)
    if ray.line == "D1":
        hd = look.h(ray, radii) - ha(k)
        return lam * hd * _exp_on(th, 1, "D1"), zero
    if ray.line == "D4":
        kc = np.conj(k)
        hd = np.conj(look.h(_conj_ray(ray), radii)) - np.conj(ha(kc))
        return zero, -hd * _exp_on(th, -1, "D4")
    rr = look.r(ray, radii)
    return lam * rr * _exp_on(th, 1, "real"), -np.conj(rr) * _exp_on(th, -1, "real")


def jump_J(sd, x, t, k):
    """Unregularized jump matrix J(x, t, k) for k on the contour."""
    _check_point(x, t)
    reg, ray = classify(k)
    if reg is Region.ORIGIN:
        ray = RayId.R0
    elif reg is not Region.RAY:
        raise BadParams(f"{k} is not on the contour")
    rad = np.array([abs(k)])
    look = SpectralLookup(sd)
    th = theta(complex(k), x, t)
    lam = sd.lam
    if ray.line == "D1":
        return np.array([[1, 0], [lam * look.h(ray, rad)[0] * _exp_on(th, 1, "D1"), 1]], dtype=complex)
    if ray.line == "D4":
        hc = np.conj(look.h(_conj_ray(ray), rad)[0])
        return np.array([[1, -hc * _exp_on(th, -1, "D4")], [0, 1]], dtype=complex)
    r = look.r(ray, rad)[0]
    return np.array([[1, -np.conj(r) * _exp_on(th, -1, "real")],
                     [lam * r * _exp_on(th, 1, "real"), 1 - lam * abs(r) ** 2]], dtype=complex)


def jump_vw(sd, ha, x, t, k):
    """(w+, w-, v) at a single contour point, with h replaced by h - h_a."""
    _check_point(x, t)
    reg, ray = classify(k)
    if reg is Region.ORIGIN:
        ray = RayId.R0
    elif reg is not Region.RAY:
        raise BadParams(f"{k} is not on the contour")
    lo, up = jump_entries(SpectralLookup(sd), ha, sd.lam, x, t, ray, [abs(k)])
    wp = np.array([[0, up[0]], [0, 0]], dtype=complex)
    wm = np.array([[0, 0], [lo[0], 0]], dtype=complex)
    v = np.linalg.solve(IDENT - wm, IDENT + wp)
    return wp, wm, v


# ---------------------------------------------------------------------------
# Jump data on a solve grid


@dataclass(frozen=True)
class JumpData:
    grid: object
    x: float
    t: float
    lam: int
    lower: np.ndarray  # (2,1) entry of w- per node
    upper: np.ndarray  # (1,2) entry of w+ per node
    info: dict = field(default_factory=dict)

    @property
    def w_minus(self):
        out = np.zeros((len(self.grid), 2, 2), dtype=complex)
        out[:, 1, 0] = self.lower
        return out

    @property
    def w_plus(self):
        out = np.zeros((len(self.grid), 2, 2), dtype=complex)
        out[:, 0, 1] = self.upper
        return out

    @property
    def v(self):
        """(I - w-)^-1 (I + w+) in closed form."""
        lo, up = self.lower, self.upper
        out = np.empty((len(self.grid), 2, 2), dtype=complex)
        out[:, 0, 0] = 1
        out[:, 0, 1] = up
        out[:, 1, 0] = lo
        out[:, 1, 1] = 1 + lo * up
        return out

    @property
    def lower_active(self):
        return self.grid.on("real", "D1")

    @property
    def upper_active(self):
        return self.grid.on("real", "D4")


def assemble_jump(sd, ha, x, t, grid):
    _check_point(x, t)
    look = SpectralLookup(sd)
    lower = np.zeros(len(grid), dtype=complex)
    upper = np.zeros(len(grid), dtype=complex)
    for ray in RayId:
        sel = grid.ray == ray.value
        if not sel.any():
            continue
        lo, up = jump_entries(look, ha, sd.lam, x, t, ray, grid.radii[sel])
        lower[sel], upper[sel] = lo, up
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise BadParams("solve grid reaches outside the tabulated spectral data")
    return JumpData(grid, float(x), float(t), sd.lam, lower, upper)


def zero_jump(grid, lam=1, x=0.0, t=0.0):
    n = len(grid)
    return JumpData(grid, x, t, lam, np.zeros(n, complex), np.zeros(n, complex))


# ---------------------------------------------------------------------------
# Grid planning


def _line_amplitude(sd, ha, x, line):
    """Radii on the tabulation grid and the size of the line's jump entry there,
    including the exponential decay in x."""
    g = sd.grid
    ray = RayId.R300 if line in ("D1", "D4") else RayId.R0
    sel = g.ray == ray.value
    rad = g.radii[sel]
    if line == "real":
        return rad, np.abs(sd.r[sel])
    amp = np.abs(sd.h[sel] - ha(g.nodes[sel]))
    if x is not None:
        amp = amp * np.exp(-SQRT3 * x * rad)
    return rad, amp


def decay_tag(sd, ha, line="D1", k_min=10.0):
    """Minus the log-log slope of the regularized jump entry for |k| >= k_min."""
    rad, amp = _line_amplitude(sd, ha, None, line)
    sel = (rad >= k_min) & (amp > 0)
    if sel.sum() < 4:
        return np.inf
    slope = np.polyfit(np.log(rad[sel]), np.log(amp[sel]), 1)[0]
    return float(-slope)


def _phase_rate(line, x, t, rho):
    return (2 * x if line == "real" else x) + 24 * t * rho**2


def _line_breaks(tab_breaks, R, line, x, t, phase_per_panel, origin_levels=3):
    b = [v for v in tab_breaks if v < R * (1 - 1e-12)] + [R]
    b = np.array(b)
    first = b[1]
    # extra geometric panels at the origin, where three lines meet
    pre = first * 4.0 ** -np.arange(origin_levels, 0, -1)
    b = np.concatenate([[0.0], pre, b[1:]])
    out = [0.0]
    for lo, hi in zip(b[:-1], b[1:]):
        n = max(1, int(np.ceil(_phase_rate(line, x, t, hi) * (hi - lo) / phase_per_panel)))
        out.extend(lo + (hi - lo) * np.arange(1, n + 1) / n)
    out[-1] = R
    return np.array(out)


def _tail_estimate(rad, amp, W, rate, i):
    """Rough size of the moment contributions beyond rad[i]."""
    dr = np.gradient(rad)
    plain = float(np.sum((amp * W * dr)[i:]))
    # beyond the table, amp ~ rho^-5 and W ~ rho^2
    plain += amp[-1] * W[-1] * rad[-1] / 2
    osc = 2 * amp[i] * W[i] / max(rate[i], 1e-300)
    return min(plain, osc)


def plan_breaks(sd, ha, x, t, tail_tol=1e-7, max_unknowns=2400, phase_per_panel=12.0,
                nodes_per_panel=16):
    """Per-line panel breaks for the solve at (x, t), plus a planning report."""
    _check_point(x, t)
    tab = sd.grid.line_breaks
    info = {"tail": {}, "R": {}, "decay": {}}
    plans = {}
    for line in ("real", "D1"):
        if tab.get(line) is None:
            continue
        rad, amp = _line_amplitude(sd, ha, x, line)
        W = (8 / np.pi) * (1 + rad**2)
        if np.max(amp) < NOISE_FLOOR:
            info["tail"][line] = 0.0
            continue
        info["decay"][line] = decay_tag(sd, ha, line)
        rate = _phase_rate(line, x, t, rad)
        tails = np.array([_tail_estimate(rad, amp, W, rate, i) for i in range(len(rad))])
        ok = np.flatnonzero(tails <= tail_tol)
        # first radius after which every later estimate stays small
        bad = np.flatnonzero(tails > tail_tol)
        i = bad[-1] + 1 if bad.size else 0
        i = min(i, len(rad) - 1)
        R = float(rad[i]) if ok.size else float(tab[line][-1])
        R = max(R, float(tab[line][1]))
        plans[line] = [R, rad, tails]
    # rays per line: 2 each; unknowns: 2 per real node, 1 per D1 or D4 node
    weight = {"real": 4, "D1": 4}

    def cost(line, R):
        br = _line_breaks(tab[line], R, line, x, t, phase_per_panel)
        return weight[line] * (len(br) - 1) * nodes_per_panel

    def total():
        return sum(cost(ln, p[0]) for ln, p in plans.items())

    # shrink the most expensive line until the budget fits
    while plans and total() > max_unknowns:
        line = max(plans, key=lambda ln: cost(ln, plans[ln][0]))
        R = plans[line][0]
        lo, hi = float(tab[line][1]), R
        if hi <= lo * (1 + 1e-9):
            break
        target = max_unknowns - (total() - cost(line, R))
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            if cost(line, mid) <= target:
                lo = mid
            else:
                hi = mid
        plans[line][0] = lo if lo < R else R * 0.9
    breaks = {"real": None, "D1": None, "D4": None}
    for line, (R, rad, tails) in plans.items():
        br = _line_breaks(tab[line], R, line, x, t, phase_per_panel)
        i = min(np.searchsorted(rad, R), len(rad) - 1)
        info["R"][line] = R
        info["tail"][line] = float(tails[i])
        breaks[line] = br
        if line == "D1":
            breaks["D4"] = br
    if all(v is None for v in breaks.values()):
        breaks = None
    info["tail_estimate"] = float(sum(info["tail"].values()))
    return breaks, info


# ---------------------------------------------------------------------------
# Cauchy operators


def cauchy(grid, vals, z):
    """(1/2 pi i) int f(s)/(s - z) ds for node values f, z off the contour."""
    z = complex(z)
    d = np.abs(grid.nodes - z)
    j = np.argmin(d)
    if d[j] <= 5 * grid.spacing()[j]:
        raise TooCloseToContour(f"z = {z:.6g} is within 5 node spacings of the contour")
    vals = np.asarray(vals)
    kern = grid.weights / (grid.nodes - z) / (2j * np.pi)
    return np.tensordot(kern, vals, axes=(0, 0))


def _ray_extent(grid, ray):
    b = grid.line_breaks[ray.line]
    return 0.0 if b is None else float(b[-1])


def _contour_pv_inv(grid, k, own):
    """PV int_Gamma ds/(s - k) over the grid's truncated contour, k on ray `own`."""
    tot = np.zeros(k.shape, dtype=complex)
    for ray in RayId:
        R = _ray_extent(grid, ray)
        if R == 0:
            continue
        far = R * ray.direction
        start, end = (0.0, far) if ray.orientation > 0 else (far, 0.0)
        if ray is own:
            tot += np.log(np.abs(end - k) / np.abs(start - k))
        else:
            tot += segment_integral_inv(k, start, end)
    return tot


def pv_matrix(grid):
    """Matrix of (1/2 pi i) PV int f(s)/(s - k_i) ds acting on node values.

    Singularity subtraction over the whole contour: the quotient
    (f(s) - f(k_i))/(s - k_i) is integrated by the panel rule (its value at
    s = k_i is f'(k_i), from the panel differentiation matrix) and f(k_i)
    times the closed-form principal value of int ds/(s - k_i) is added back.
    Subtracting on every ray rather than only the node's own ray keeps the
    quotient bounded near the origin, where the rays meet.
    """
    k, w = grid.nodes, grid.weights
    n = grid.nodes_per_panel
    diff = k[None, :] - k[:, None]
    np.fill_diagonal(diff, 1.0)
    H = w[None, :] / diff
    np.fill_diagonal(H, 0.0)
    D = gl_diff_matrix(n)
    bounds = grid.panel_bounds
    diag = -H.sum(axis=1)
    for ray in RayId:
        idx = np.flatnonzero(grid.ray == ray.value)
        if idx.size == 0:
            continue
        diag[idx] += _contour_pv_inv(grid, k[idx], ray)
        for p0 in range(0, idx.size, n):
            rows = idx[p0:p0 + n]
            a, b = bounds[grid.panel[rows[0]]]
            dr = np.abs(w[rows])
            H[np.ix_(rows, rows)] += (dr * ray.orientation * 2 / (b - a))[:, None] * D
    H[np.diag_indices_from(H)] += diag
    return H / (2j * np.pi)


def boundary_operators(grid, H=None):
    """(C+, C-) as dense matrices; + is the left side of the oriented contour."""
    if H is None:
        H = pv_matrix(grid)
    half = 0.5 * np.eye(len(grid))
    return H + half, H - half


def cauchy_boundary(grid, vals, index, side, H=None):
    """C+ or C- of node values at one node."""
    if side not in ("+", "-", 1, -1):
        raise BadParams("side must be '+' or '-'")
    if H is None:
        H = pv_matrix(grid)
    sgn = 1 if side in ("+", 1) else -1
    vals = np.asarray(vals)
    return np.tensordot(H[index], vals, axes=(0, 0)) + 0.5 * sgn * vals[index]


# ---------------------------------------------------------------------------
# The singular integral equation


@dataclass
class CwOperator:
    """I - C_w restricted to the active unknowns.

    Unknown vector: [f1 on upper-active nodes, f2 on lower-active nodes].
    """

    jd: JumpData
    K: np.ndarray
    P: np.ndarray  # node indices of upper-active nodes
    L: np.ndarray  # node indices of lower-active nodes
    Cp: np.ndarray
    Cm: np.ndarray
    norm_estimate: float = np.nan

    @property
    def size(self):
        return self.K.shape[0]

    def rhs(self, row):
        """C_w applied to row `row` of the identity."""
        nP = len(self.P)
        e = np.zeros(self.size, dtype=complex)
        if row == 0:
            e[:nP] = 1
        else:
            e[nP:] = 1
        return self.K @ e


def _weighted_norm(K, wts, iters=30, seed=0):
    """Power-iteration estimate of the L2(Gamma) norm of K."""
    if K.size == 0:
        return 0.0
    s = np.sqrt(wts)
    A = (s[:, None] * K) / s[None, :]
    v = np.random.default_rng(seed).standard_normal(A.shape[1]) + 0j
    est = 0.0
    for _ in range(iters):
        u = A @ v
        nu = np.linalg.norm(u)
        if nu == 0:
            return 0.0
        v = A.conj().T @ (u / nu)
        est = np.linalg.norm(v)
        v = v / est
    return float(est)


def assemble_Cw(jd, H=None):
    grid = jd.grid
    Cp, Cm = boundary_operators(grid, H)
    P = np.flatnonzero(jd.upper_active)
    L = np.flatnonzero(jd.lower_active)
    nP, nL = len(P), len(L)
    K = np.zeros((nP + nL, nP + nL), dtype=complex)
    # f1 = C+(f2 * lower) on P, f2 = C-(f1 * upper) on L
    K[:nP, nP:] = Cp[np.ix_(P, L)] * jd.lower[L][None, :]
    K[nP:, :nP] = Cm[np.ix_(L, P)] * jd.upper[P][None, :]
    wts = np.abs(grid.weights[np.concatenate([P, L])])
    op = CwOperator(jd, K, P, L, Cp, Cm)
    op.norm_estimate = _weighted_norm(K, wts)
    return op


@dataclass
class RHSolution:
    jd: JumpData
    mu: np.ndarray  # (N, 2, 2) at every node of the solve grid
    diagnostics: dict

    @property
    def grid(self):
        return self.jd.grid

    @property
    def x(self):
        return self.jd.x

    @property
    def t(self):
        return self.jd.t

    def density(self):
        """mu (w+ + w-) at the nodes."""
        F = np.zeros_like(self.mu)
        F[:, :, 0] = self.mu[:, :, 1] * self.jd.lower[:, None]
        F[:, :, 1] = self.mu[:, :, 0] * self.jd.upper[:, None]
        return F


def _discrete_norm(v, wts):
    return float(np.sqrt(np.sum(wts * np.abs(v) ** 2)))


def solve_mu(jd, op=None, cond_limit=COND_LIMIT, neumann_below=0.3):
    if op is None:
        op = assemble_Cw(jd)
    N = len(jd.grid)
    nP = len(op.P)
    mu = np.zeros((N, 2, 2), dtype=complex)
    mu[:, 0, 0] = mu[:, 1, 1] = 1
    diag = {"unknowns": op.size, "norm_Cw": op.norm_estimate, "cond": 1.0, "residual": 0.0,
            "neumann_gap": None}
    if op.size == 0 or not (np.any(jd.lower) or np.any(jd.upper)):
        return RHSolution(jd, mu, diag)
    A = np.eye(op.size) - op.K
    lu, piv = sla.lu_factor(A, check_finite=False)
    anorm = np.linalg.norm(A, 1)
    rcond, info = sla.lapack.zgecon(lu, anorm, norm="1")
    cond = np.inf if rcond == 0 else 1 / rcond
    diag["cond"] = float(cond)
    if not cond < cond_limit:
        raise IllConditioned(cond, jd.x, jd.t)
    rhs = np.stack([op.rhs(0), op.rhs(1)], axis=1)
    Z = sla.lu_solve((lu, piv), rhs, check_finite=False)
    wts = np.abs(jd.grid.weights[np.concatenate([op.P, op.L])])
    diag["residual"] = max(_discrete_norm(A @ Z[:, r] - rhs[:, r], wts) for r in range(2))
    if op.norm_estimate < neumann_below:
        Zn = rhs.copy()
        term = rhs.copy()
        for _ in range(2000):
            term = op.K @ term
            Zn += term
            if np.max(np.abs(term)) < 1e-16:
                break
        diag["neumann_gap"] = float(np.max(np.abs(Zn - Z)))
    # mu on every node from mu = I + C_w mu
    for r in range(2):
        f1P = Z[:nP, r] + (1 if r == 0 else 0)
        f2L = Z[nP:, r] + (1 if r == 1 else 0)
        mu[:, r, 0] = (1 if r == 0 else 0) + op.Cp[:, op.L] @ (f2L * jd.lower[op.L])
        mu[:, r, 1] = (1 if r == 1 else 0) + op.Cm[:, op.P] @ (f1P * jd.upper[op.P])
    sol = RHSolution(jd, mu, diag)
    sol._op = op
    return sol


# ---------------------------------------------------------------------------
# Reconstruction


def reconstruct_m(sol, z):
    F = sol.density()
    return IDENT + cauchy(sol.grid, F, z)


def jump_residual(sol):
    """max over nodes of |m+ - m- v| with m+- = I + C+-(mu (w+ + w-))."""
    op = getattr(sol, "_op", None)
    if op is None:
        Cp, Cm = boundary_operators(sol.grid)
    else:
        Cp, Cm = op.Cp, op.Cm
    F = sol.density()
    mp = IDENT + np.einsum("ij,jab->iab", Cp, F)
    mm = IDENT + np.einsum("ij,jab->iab", Cm, F)
    return float(np.max(np.abs(mp - mm @ sol.jd.v)))


def det_check(sol, probes):
    return float(max(abs(det2(reconstruct_m(sol, z)) - 1) for z in probes))


def moments(sol, count=3):
    """m_j = -(1/2 pi i) int mu (w+ + w-) s^(j-1) ds for j = 1..count."""
    F = sol.density()
    s = sol.grid.nodes
    w = sol.grid.weights
    return [-np.tensordot(w * s ** (j - 1), F, axes=(0, 0)) / (2j * np.pi) for j in range(1, count + 1)]


def reconstruct_u(sol):
    """(u, imaginary-part diagnostic) from (1/pi) int (mu (w+ + w-))_12 ds."""
    F = sol.density()
    val = np.sum(sol.grid.weights * F[:, 0, 1]) / np.pi
    return float(val.real), float(val.imag)


def u_nontangential(sol, radii=(20.0, 40.0, 80.0)):
    """Diagnostic only: -2i k m_12(k) along arg k = -pi/2, extrapolated to |k| = infinity
    by a fit in powers of 1/k.  The integral formula of reconstruct_u is the one to trust."""
    ks = -1j * np.asarray(radii, dtype=float)
    vals = np.array([-2j * k * reconstruct_m(sol, k)[0, 1] for k in ks])
    V = np.stack([np.ones_like(ks), 1 / ks, 1 / ks**2], axis=1)
    coef = np.linalg.lstsq(V, vals, rcond=None)[0]
    return complex(coef[0])


def recover_derivatives(sol, lam=None, min_decay=4.5):
    """(u, u_x, u_xx) from the first three moments.

    Matching powers of 1/k in m_x - ik[sigma3, m] = U m gives, for either sign
    of lambda,
        u    = -2i (m1)_12
        u_x  = 4 (m2)_12 - 2i u (m1)_22
        u_xx = lam u^3 + 8i (m3)_12 + 4 u (m2)_22 - 2i u_x (m1)_22.
    """
    lam = sol.jd.lam if lam is None else lam
    dec = sol.jd.info.get("decay", {})
    worst = min(dec.values()) if dec else np.inf
    if worst < min_decay:
        raise MomentDivergence(f"jump decays like k^-{worst:.2f}; the third moment needs {min_decay}")
    m1, m2, m3 = moments(sol)
    u = -2j * m1[0, 1]
    ux = 4 * m2[0, 1] - 2j * u * m1[1, 1]
    uxx = lam * u**3 + 8j * m3[0, 1] + 4 * u * m2[1, 1] - 2j * ux * m1[1, 1]
    return complex(u), complex(ux), complex(uxx)


def symmetry_gap(sol):
    """max |mu(-conj k) - conj(mu(k))| over nodes (real data)."""
    mu = sol.mu
    return float(np.max(np.abs(mu[sol.grid.mirror] - np.conj(mu))))


# ---------------------------------------------------------------------------
# One-call driver


def solve_point(sd, ha, x, t, tail_tol=1e-7, max_unknowns=2400, phase_per_panel=12.0,
                cond_limit=COND_LIMIT, nodes_per_panel=16):
    """Plan the grid, assemble the jump and solve at (x, t)."""
    breaks, info = plan_breaks(sd, ha, x, t, tail_tol, max_unknowns, phase_per_panel, nodes_per_panel)
    if breaks is None:
        grid = build_grid(nodes_per_panel=nodes_per_panel, breaks=[0.0, 1.0])
        jd = zero_jump(grid, sd.lam, x, t)
    else:
        grid = build_grid(nodes_per_panel=nodes_per_panel, breaks=breaks)
        jd = assemble_jump(sd, ha, x, t, grid)
    jd.info.update(info)
    sol = solve_mu(jd, cond_limit=cond_limit)
    sol.diagnostics["tail_estimate"] = info["tail_estimate"]
    return sol


# ---------------------------------------------------------------------------
# Real-line problem at t = 0 built from a, b only


@dataclass
class XOnlySetup:
    """a, b tabulated on a real-axis grid and the rational b_a, reusable across x."""

    lam: int
    base: object  # real-axis ContourGrid
    a: np.ndarray
    b: np.ndarray
    ba: object


def x_only_setup(p, R_max=60.0, panels=24, grading=1.35, nodes_per_panel=16, m=4):
    from . import xscatter
    from .contour import graded_breaks
    from .spectral import build_ha

    base = build_grid(nodes_per_panel=nodes_per_panel,
                      breaks={"real": graded_breaks(panels, R_max, grading), "D1": None, "D4": None})
    xl = xscatter.x_line(p)
    xc = xscatter.x_asym_coeffs(p, m, xl)
    _, bj = xc.ab_coeffs()
    a, b, _ = xscatter.spectral_ab(p, base.nodes.real + 0j, m=m, coeffs=xc, line=xl)
    _, b0, _ = xscatter.spectral_ab(p, [0.0])
    return XOnlySetup(p.lam, base, a, b, build_ha(b0[0], bj[:4]))


def x_only_rh(p, x, setup=None, phase_per_panel=12.0, tail_tol=1e-10):
    """u(x, 0) from the real-line problem whose jump is built from a and b.

    b is regularized by a rational b_a with poles in the lower half plane; the
    (1,2) entry of m is unchanged by that deformation in the lower half plane,
    so u is read off as usual.
    """
    if x < 0:
        raise OutOfDomain("x must be >= 0")
    if p.is_zero:
        return 0.0
    if setup is None:
        setup = x_only_setup(p)
    base = setup.base
    # truncate where the remaining regularized jump is negligible for u
    sel = base.ray == RayId.R0.value
    rad = base.radii[sel]
    amp = np.abs(setup.b[sel] - setup.ba(rad + 0j)) / np.abs(setup.a[sel])
    rate = _phase_rate("real", x, 0.0, rad)
    tails = np.array([_tail_estimate(rad, amp, np.ones_like(rad), rate, i) for i in range(len(rad))])
    bad = np.flatnonzero(tails > tail_tol)
    R = float(rad[min(bad[-1] + 1, len(rad) - 1)]) if bad.size else float(base.line_breaks["real"][1])
    R = max(R, float(base.line_breaks["real"][1]))
    br = _line_breaks(base.line_breaks["real"], R, "real", x, 0.0, phase_per_panel)
    grid = build_grid(nodes_per_panel=base.nodes_per_panel, breaks={"real": br, "D1": None, "D4": None})
    a = np.empty(len(grid), dtype=complex)
    b = np.empty(len(grid), dtype=complex)
    for ray in (RayId.R0, RayId.R180):
        sel = grid.ray == ray.value
        a[sel] = base.interpolate(setup.a, ray, grid.radii[sel])
        b[sel] = base.interpolate(setup.b, ray, grid.radii[sel])
    if np.min(np.abs(a)) < 1e-8:
        raise MkdvError("a vanishes on the real axis")
    k = grid.nodes.real + 0j
    bd = b - setup.ba(k)
    ph = guarded_exp(2j * k * x)
    upper = -bd / np.conj(a) * ph
    lower = setup.lam * np.conj(bd) / a * np.conj(ph)
    jd = JumpData(grid, float(x), 0.0, setup.lam, lower, upper)
    sol = solve_mu(jd)
    return reconstruct_u(sol)[0]


def positivity_check(sd, x, t):
    """Smallest eigenvalue of Re J over the real nodes (focusing case only)."""
    _check_point(x, t)
    if sd.lam != -1:
        return {"skipped": True, "reason": "only meaningful for lambda = -1"}
    real = sd.real_mask
    r = sd.r[real]
    if np.all(r == 0):
        return {"skipped": False, "min_eigenvalue": 1.0}
    k = sd.grid.nodes[real]
    e = np.exp(theta(k.real + 0j, x, t))
    J = np.empty((len(k), 2, 2), dtype=complex)
    J[:, 0, 0] = 1
    J[:, 0, 1] = -np.conj(r) * np.conj(e)
    J[:, 1, 0] = sd.lam * r * e
    J[:, 1, 1] = 1 - sd.lam * np.abs(r) ** 2
    ReJ = 0.5 * (J + np.conj(np.swapaxes(J, 1, 2)))
    ev = np.linalg.eigvalsh(ReJ)
    return {"skipped": False, "min_eigenvalue": float(ev[:, 0].min())}
