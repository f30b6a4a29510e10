"""x-part spectral problem: eigenfunctions normalized at infinity (X) and at
the origin (Y), the spectral functions a(k), b(k), the large-k coefficient
recursions and the truncated series.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .core import (
    IDENT, SIGMA3, BadParams, MkdvError, PanelLine, conj_sigma3, det2, guarded_exp,
    inv2, sigma_lambda, solve_column_backward, solve_matrix_forward,
)


class WrongHalfPlane(MkdvError):
    pass


class ToleranceNotMet(MkdvError):
    pass


K_SWITCH = 60.0
PANEL = 0.5
NODES = 16


def x_line(p, panel=PANEL, n=NODES):
    return PanelLine.uniform(p.L_trunc, panel, n)


@dataclass(frozen=True)
class XEigenSolution:
    k: complex
    column: int  # 1, 2, or 0 for the full matrix
    x: np.ndarray
    values: np.ndarray
    method: str

    def at_zero(self):
        return self.values[0]


def _generator(p, ks):
    """Matrix of the column system y' = [[2ik, u], [lam u, 0]] y."""
    ks = np.asarray(ks, dtype=complex)

    def gen(x):
        u = p(x)[:, None]
        M = np.zeros((len(x), len(ks), 2, 2), dtype=complex)
        M[..., 0, 0] = 2j * ks[None, :]
        M[..., 0, 1] = u
        M[..., 1, 0] = p.lam * u
        return M

    return gen


def _check_lower(ks):
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    if np.any(ks.imag > 1e-12 * np.maximum(1.0, np.abs(ks))):
        raise WrongHalfPlane("column 2 of X needs Im k <= 0")
    return ks


def x_col2_batch(p, ks, line=None):
    """Column 2 of X on the x-grid for many k at once: shape (nodes, K, 2)."""
    ks = _check_lower(ks)
    line = line or x_line(p)
    if p.is_zero:
        out = np.zeros((len(line.nodes), len(ks), 2), dtype=complex)
        out[..., 1] = 1.0
        return line, out
    start = np.zeros((len(ks), 2), dtype=complex)
    start[:, 1] = 1.0
    vals = solve_column_backward(line, _generator(p, ks), start)
    if not np.all(np.isfinite(vals)):
        raise ToleranceNotMet("column integration produced non-finite values")
    return line, vals


def solve_X_col2(p, k, tol=1e-12, line=None):
    """Second column of X(x, k) on [0, L_trunc], Im k <= 0."""
    line, vals = x_col2_batch(p, [k], line)
    if tol < 1e-15:
        raise ToleranceNotMet("requested tolerance is below double precision")
    return XEigenSolution(complex(k), 2, line.nodes, vals[:, 0, :], "ode")


def col1_from_col2(col2_at_conj, lam):
    """Column 1 of X at k from column 2 at conj(k), by the reflection symmetry."""
    c = np.asarray(col2_at_conj)
    out = np.empty_like(c)
    out[..., 0] = np.conj(c[..., 1])
    out[..., 1] = lam * np.conj(c[..., 0])
    return out


def X_full_real(p, ks, line=None):
    """Full X(x, k) for real k (both columns), shape (nodes, K, 2, 2)."""
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    if np.any(np.abs(ks.imag) > 0):
        raise WrongHalfPlane("both columns of X exist only for real k")
    line, c2 = x_col2_batch(p, ks, line)
    c1 = col1_from_col2(c2, p.lam)
    return line, np.stack([c1, c2], axis=-1)


def y_line(p, k, n=NODES):
    """Grid for Y: both exponentials e^{+-2ikx} live in Y, so panels shrink with |k|."""
    return x_line(p, panel=min(PANEL, 6.0 / max(abs(k), 1.0)), n=n)


def solve_Y(p, k, tol=1e-12, line=None):
    """Y(x, k) on [0, L_trunc] by forward integration from Y(0) = I."""
    line = line or y_line(p, k)
    if p.is_zero:
        vals = np.broadcast_to(IDENT, (len(line.nodes), 2, 2)).copy()
        return XEigenSolution(complex(k), 0, line.nodes, vals, "ode")

    def gen(x):
        # psi = Y e^{ikx sigma3} solves psi' = (ik sigma3 + U) psi
        u = p(x)[:, None]
        M = np.zeros((len(x), 1, 2, 2), dtype=complex)
        M[..., 0, 0] = 1j * k
        M[..., 1, 1] = -1j * k
        M[..., 0, 1] = u
        M[..., 1, 0] = p.lam * u
        return M

    psi, _ = solve_matrix_forward(line, gen, IDENT[None])
    x = line.nodes
    vals = psi[:, 0] * guarded_exp(-1j * k * x)[:, None, None] ** np.array([1, -1])[None, None, :]
    if not np.all(np.isfinite(vals)):
        raise ToleranceNotMet("forward integration overflowed")
    return XEigenSolution(complex(k), 0, x, vals, "ode")


def Y_from_X(p, ks, xs, line=None):
    """Y(x, k) for real k via Y = X e^{ikx sigma3-hat}(s^{-1}), s = X(0, k)."""
    line, X = X_full_real(p, ks, line)
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    s = X[0]
    sinv = inv2(s)
    out = []
    for x in np.atleast_1d(xs):
        Xx = line.interpolate(X.reshape(len(line.nodes), -1), [x]).reshape(len(ks), 2, 2)
        out.append(Xx @ conj_sigma3(sinv, 1j * ks * x))
    return np.array(out)


def spectral_ab(p, kgrid, K_switch=K_SWITCH, m=4, coeffs=None, line=None):
    """a(k) and b(k) for Im k <= 0.

    Nodes with |k| <= K_switch come from the column integration, the rest
    from the truncated series.  Returns (a, b, method) with method an array
    of 'ode'/'series' tags.
    """
    ks = _check_lower(kgrid)
    a = np.ones(len(ks), dtype=complex)
    b = np.zeros(len(ks), dtype=complex)
    method = np.where(np.abs(ks) > K_switch, "series", "ode")
    if p.is_zero:
        return a, b, method
    near = method == "ode"
    if np.any(near):
        _, vals = x_col2_batch(p, ks[near], line)
        b[near] = vals[0, :, 0]
        a[near] = vals[0, :, 1]
    if np.any(~near):
        coeffs = coeffs or x_asym_coeffs(p, m, line)
        Xh = hat_X0(coeffs, ks[~near])
        a[~near] = Xh[:, 1, 1]
        b[~near] = Xh[:, 0, 1]
    return a, b, method


# ---------------------------------------------------------------------------
# Large-k coefficients


@dataclass(frozen=True)
class XAsymCoeffs:
    m: int
    lam: int
    line: PanelLine
    X: list  # X[j] for j = 0..m+1, arrays (nodes, 2, 2); X[0] = I
    Z: list
    W: list

    @property
    def x(self):
        return self.line.nodes

    def at(self, name, j, x):
        """Coefficient `name` (X, Z or W) of order j interpolated at x."""
        table = getattr(self, name)[j]
        if x == 0:
            return table[0]
        if not 0 <= x <= self.line.length:
            raise BadParams(f"x = {x} outside the coefficient grid")
        return self.line.interpolate(table.reshape(len(table), 4), [x]).reshape(2, 2)

    def ab_coeffs(self):
        """Expansion coefficients a_j = (X_j(0))_22 and b_j = (X_j(0))_12, j = 1..m+1."""
        a = np.array([self.X[j][0, 1, 1] for j in range(1, self.m + 2)])
        b = np.array([self.X[j][0, 0, 1] for j in range(1, self.m + 2)])
        return a, b


def _jet_mul(A, B, q):
    """q-th derivative of the product A B from derivative ladders A[i], B[i]."""
    return sum(comb(q, i) * (A[i] @ B[q - i]) for i in range(q + 1))


def _offdiag_step(Xo, Xd, Ujet, depth):
    """Ladder of R = X_x^(o) - U X^(d) up to the given depth."""
    return [Xo[q + 1] - _jet_mul(Ujet, Xd, q) for q in range(depth + 1)]


def x_asym_coeffs(p, m=4, line=None):
    """Coefficients X_j, Z_j, W_j (j = 1..m+1) tabulated on the x-grid.

    Derivatives are propagated as ladders built from exact derivatives of u0,
    so no numerical differentiation enters; only the diagonal parts of X, Z
    and the off-diagonal parts of W need a quadrature.
    """
    if m < 1:
        raise BadParams("expansion order must be at least 1")
    line = line or x_line(p)
    x = line.nodes
    N = len(x)
    lam = p.lam
    top = m + 1
    base = np.array([[0, 1], [lam, 0]], dtype=complex)
    Ujet = [p(x, q)[:, None, None] * base for q in range(top + 1)]
    zero = np.zeros((N, 2, 2), dtype=complex)
    eye = np.broadcast_to(IDENT, (N, 2, 2)).copy()
    half_i_s3 = 0.5j * SIGMA3

    # ladders: lists of derivative arrays, depth top+1 for index 0
    def const_ladder(M0, depth):
        return [M0] + [zero] * depth

    X = [None] * (top + 1)
    Z = [None] * (top + 1)
    W = [None] * (top + 1)
    Xo, Xd = const_ladder(zero, top + 1), const_ladder(eye, top + 1)
    Zo, Zd = const_ladder(zero, top + 1), const_ladder(eye, top + 1)
    Wo, Wd = const_ladder(zero, top + 1), const_ladder(zero, top + 1)
    X[0], Z[0], W[0] = eye, eye, zero
    for j in range(top):
        depth = top - j - 1  # derivatives still needed for level j+1
        # X and Z share the recursion; they differ only in normalization
        new = {}
        for name, (Co, Cd) in (("X", (Xo, Xd)), ("Z", (Zo, Zd))):
            R = _offdiag_step(Co, Cd, Ujet, depth)
            No = [-half_i_s3 @ R[q] for q in range(depth + 1)]
            Dd = [half_i_s3 @ _jet_mul(Ujet, R, q) for q in range(depth + 1)]
            new[name] = (No, Dd)
        # W: roles of diagonal and off-diagonal parts swapped
        Rw = [Wd[q + 1] - _jet_mul(Ujet, Wo, q) for q in range(depth + 1)]
        Wd_new0 = [-half_i_s3 @ Rw[q] for q in range(depth + 1)]
        Wo_der = [half_i_s3 @ _jet_mul(Ujet, Rw, q) for q in range(depth + 1)]

        XoN, XdD = new["X"]
        ZoN, ZdD = new["Z"]
        Xd0 = -line.cumulative_from_right(XdD[0])
        Zd_int = line.cumulative_from_left(ZdD[0])
        Wo_int = line.cumulative_from_left(Wo_der[0])
        # normalization Z_j(0) + W_j(0) = 0, split into diagonal and off-diagonal parts
        Zd0 = Zd_int - Wd_new0[0][0]
        Wo0 = Wo_int - ZoN[0][0]
        Xd_new = [Xd0] + XdD[:depth]
        Zd_new = [Zd0] + ZdD[:depth]
        Wo_new = [Wo0] + Wo_der[:depth]
        Xo, Xd = XoN, Xd_new
        Zo, Zd = ZoN, Zd_new
        Wo, Wd = Wo_new, Wd_new0
        X[j + 1] = Xo[0] + Xd[0]
        Z[j + 1] = Zo[0] + Zd[0]
        W[j + 1] = Wo[0] + Wd[0]
    return XAsymCoeffs(m, lam, line, X, Z, W)


def _series(coeff_list, k, count):
    k = np.atleast_1d(np.asarray(k, dtype=complex))
    out = np.broadcast_to(IDENT, k.shape + (2, 2)).astype(complex)
    for j in range(1, count + 1):
        out = out + coeff_list[j] / k[:, None, None] ** j
    return out


def hat_X0(coeffs, ks):
    """X-hat(0, k) for many k."""
    return _series([c[0] if j else IDENT for j, c in enumerate(coeffs.X)], ks, coeffs.m + 1)


def hat_XY(coeffs, x, k):
    """(X-hat(x, k), Y-hat(x, k)) from the truncated series."""
    if k == 0:
        raise BadParams("the series needs k != 0")
    n = coeffs.m + 1
    Xh = IDENT.copy()
    Zh = IDENT.copy()
    Wh = np.zeros((2, 2), dtype=complex)
    for j in range(1, n + 1):
        Xh = Xh + coeffs.at("X", j, x) / k ** j
        Zh = Zh + coeffs.at("Z", j, x) / k ** j
        Wh = Wh + coeffs.at("W", j, x) / k ** j
    E = np.diag(guarded_exp(np.array([-2j * k * x, 2j * k * x])))
    return Xh, Zh + Wh @ E


# ---------------------------------------------------------------------------
# Successive approximations (test oracle)


def _filon_tail(x, f, kappa):
    """F(x_i) = int_{x_i}^{x_end} e^{kappa (x' - x_i)} f(x') dx' with f linear per cell.

    Requires Re kappa <= 0 so the recursion stays bounded.
    """
    h = np.diff(x)
    z = kappa * h
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    # int_0^h e^{kappa s} (1 - s/h) ds and int_0^h e^{kappa s} s/h ds
    ez = np.exp(z)
    w0 = np.where(small, h * (0.5 + z / 6 + z * z / 24), h * (ez - 1 - zs) / zs ** 2)
    w1 = np.where(small, h * (0.5 + z / 3 + z * z / 8), h * (ez * (zs - 1) + 1) / zs ** 2)
    F = np.zeros_like(f, dtype=complex)
    for i in range(len(x) - 2, -1, -1):
        F[i] = w0[i] * f[i] + w1[i] * f[i + 1] + ez[i] * F[i + 1]
    return F


def _picard_on(x, u, lam, k, l):
    psi1 = np.zeros(len(x), dtype=complex)
    psi2 = np.ones(len(x), dtype=complex)
    terms = [(psi1.copy(), psi2.copy())]
    t1, t2 = psi1, psi2
    for _ in range(l):
        n1 = -_filon_tail(x, u * t2, -2j * k)
        n2 = -_filon_tail(x, lam * u * t1, 0.0)
        t1, t2 = n1, n2
        terms.append((t1, t2))
    return terms


def picard_oracle_X(p, k, l=8, h=2e-3):
    """Partial sum of the successive approximations for column 2 of X.

    Independent of the production solver: uniform grid, Filon weights for the
    exponential kernel and one Richardson step.  Returns the solution object
    and the list of term norms max_x |Psi_l|.
    """
    if np.imag(k) > 0:
        raise WrongHalfPlane("column 2 of X needs Im k <= 0")
    if l > 12:
        raise BadParams("at most 12 successive approximations")
    L = p.L_trunc
    results = []
    for hh in (h, h / 2):
        n = int(np.ceil(L / hh))
        x = np.linspace(0.0, L, n + 1)
        results.append((x, _picard_on(x, p(x), p.lam, k, l)))
    (xc, tc), (xf, tf) = results
    # fine grid has the coarse grid at even indices
    comb_terms = []
    for (c1, c2), (f1, f2) in zip(tc, tf):
        comb_terms.append(((4 * f1[::2] - c1) / 3, (4 * f2[::2] - c2) / 3))
    total = np.zeros((len(xc), 2), dtype=complex)
    norms = []
    for a1, a2 in comb_terms:
        total[:, 0] += a1
        total[:, 1] += a2
        norms.append(float(max(np.max(np.abs(a1)), np.max(np.abs(a2)))))
    sol = XEigenSolution(complex(k), 2, xc, total, f"picard({l})")
    return sol, norms


def picard_oracle_Y(p, k, l=8, h=2e-3, x_end=None):
    """Successive approximations for Y on [0, x_end] (full matrix), same scheme."""
    x_end = p.L_trunc if x_end is None else x_end
    res = []
    for hh in (h, h / 2):
        n = int(np.ceil(x_end / hh))
        x = np.linspace(0.0, x_end, n + 1)
        u = p(x)
        # psi = Y e^{ikx sigma3}: psi' = (ik sigma3 + U) psi; Picard in the
        # interaction picture Y = I + int_0^x e^{-ik(x'-x) sigma3-hat}(U Y)
        Y = np.broadcast_to(IDENT, (len(x), 2, 2)).astype(complex)
        term = Y.copy()
        total = Y.copy()
        for _ in range(l):
            UY = np.zeros_like(term)
            UY[:, 0, :] = u[:, None] * term[:, 1, :]
            UY[:, 1, :] = p.lam * u[:, None] * term[:, 0, :]
            new = np.zeros_like(term)
            # (1,2) entry picks e^{2ik(x - x')}, (2,1) entry e^{-2ik(x - x')}
            for (r, c), kap in (((0, 0), 0.0), ((1, 1), 0.0), ((0, 1), 2j * k), ((1, 0), -2j * k)):
                new[:, r, c] = _filon_head(x, UY[:, r, c], kap)
            term = new
            total = total + term
        res.append((x, total))
    (xc, Tc), (xf, Tf) = res
    return XEigenSolution(complex(k), 0, xc, (4 * Tf[::2] - Tc) / 3, f"picard({l})")


def _filon_head(x, f, kappa):
    """G(x_i) = int_0^{x_i} e^{kappa (x_i - x')} f(x') dx', f linear per cell."""
    h = np.diff(x)
    z = kappa * h
    small = np.abs(z) < 1e-4
    zs = np.where(small, 1.0, z)
    ez = np.exp(z)
    # contribution of cell [x_{i}, x_{i+1}] to G(x_{i+1})
    w0 = np.where(small, h * (0.5 + z / 3 + z * z / 8), h * (ez * (zs - 1) + 1) / zs ** 2)
    w1 = np.where(small, h * (0.5 + z / 6 + z * z / 24), h * (ez - 1 - zs) / zs ** 2)
    G = np.zeros_like(f, dtype=complex)
    for i in range(len(x) - 1):
        G[i + 1] = ez[i] * G[i] + w0[i] * f[i] + w1[i] * f[i + 1]
    return G


def det_residual(M):
    return np.abs(det2(M) - 1.0)
