"""t-part spectral problem: eigenfunctions normalized at t = infinity (T) and
t = 0 (U), the spectral functions A(k), B(k), the three-term coefficient
recursions and the truncated series.
"""

from dataclasses import dataclass
from math import comb

import numpy as np

from .core import (
    IDENT, SIGMA3, BadParams, DerivUnavailable, MkdvError, PanelLine, conj_sigma3, guarded_exp,
    inv2, sigma_lambda, solve_column_backward, solve_matrix_forward,
)
from .xscatter import ToleranceNotMet, _filon_head, _filon_tail


class WrongRegion(MkdvError):
    pass


K_SWITCH_T = 25.0
PANEL = 0.5
NODES = 16


def t_line(p, panel=PANEL, n=NODES):
    return PanelLine.uniform(p.T_trunc, panel, n)


@dataclass(frozen=True)
class TEigenSolution:
    k: complex
    column: int  # 1, 2, or 0 for the full matrix
    t: np.ndarray
    values: np.ndarray
    method: str

    def at_zero(self):
        return self.values[0]


def _V_entries(p, t, ks):
    g0, g1, g2 = (p(t, j) for j in range(3))
    lam = p.lam
    k = np.asarray(ks, dtype=complex)[None, :]
    g0, g1, g2 = g0[:, None], g1[:, None], g2[:, None]
    v11 = -2j * lam * k * g0 ** 2
    v12 = -4 * k * k * g0 + 2j * k * g1 - 2 * lam * g0 ** 3 + g2
    v21 = -4 * lam * k * k * g0 - 2j * lam * k * g1 - 2 * g0 ** 3 + lam * g2
    return v11, v12, v21


def build_V(p, t, k):
    """The t-part potential matrix at the times t (array) and spectral values k.

    Shape (len(t), len(k), 2, 2); scalars are accepted for either argument.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    ks = np.atleast_1d(np.asarray(k, dtype=complex))
    v11, v12, v21 = _V_entries(p, t, ks)
    V = np.empty((len(t), len(ks), 2, 2), dtype=complex)
    V[..., 0, 0] = v11
    V[..., 1, 1] = -v11
    V[..., 0, 1] = v12
    V[..., 1, 0] = v21
    return V


def _col_generator(p, ks):
    ks = np.asarray(ks, dtype=complex)

    def gen(t):
        M = build_V(p, t, ks)
        M[..., 0, 0] += -8j * ks[None, :] ** 3
        return M

    return gen


def in_plus(k, tol=1e-12):
    """k in the closure of D1 u D3, i.e. Im k^3 >= 0 where Im k <= 0 flips sign."""
    k = np.asarray(k, dtype=complex)
    # on D+ the exponential e^{8ik^3 (t'-t)} with t' > t stays bounded: Im k^3 >= 0
    scale = np.maximum(1.0, np.abs(k) ** 3)
    return (k ** 3).imag >= -tol * scale


def t_col2_batch(p, ks, line=None):
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    if not np.all(in_plus(ks)):
        raise WrongRegion("column 2 of T needs Im k^3 >= 0")
    line = line or t_line(p)
    if p.is_zero:
        out = np.zeros((len(line.nodes), len(ks), 2), dtype=complex)
        out[..., 1] = 1.0
        return line, out
    start = np.zeros((len(ks), 2), dtype=complex)
    start[:, 1] = 1.0
    vals = solve_column_backward(line, _col_generator(p, ks), start)
    if not np.all(np.isfinite(vals)):
        raise ToleranceNotMet("column integration produced non-finite values")
    return line, vals


def solve_T_col2(p, k, tol=1e-12, line=None):
    """Second column of T(t, k) on [0, T_trunc] for k with Im k^3 >= 0."""
    line, vals = t_col2_batch(p, [k], line)
    return TEigenSolution(complex(k), 2, line.nodes, vals[:, 0, :], "ode")


def col1_from_col2(col2_at_conj, lam):
    c = np.asarray(col2_at_conj)
    out = np.empty_like(c)
    out[..., 0] = np.conj(c[..., 1])
    out[..., 1] = lam * np.conj(c[..., 0])
    return out


def T_full_on_contour(p, ks, line=None):
    """Both columns of T for k on the contour (Im k^3 = 0), shape (nodes, K, 2, 2)."""
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    if not (np.all(in_plus(ks)) and np.all(in_plus(np.conj(ks)))):
        raise WrongRegion("both columns of T exist only on the contour")
    line, c2 = t_col2_batch(p, ks, line)
    _, c2c = t_col2_batch(p, np.conj(ks), line)
    return line, np.stack([col1_from_col2(c2c, p.lam), c2], axis=-1)


def u_line(p, k, n=NODES):
    return t_line(p, panel=min(PANEL, 4.0 / max(abs(k) ** 3, 1.0)), n=n)


def solve_U(p, k, tol=1e-12, line=None):
    """U(t, k) on [0, T_trunc] by forward integration from U(0) = I.

    The panels shrink like |k|^-3 to follow e^{8ik^3 t}; for large |k| on the
    contour use U_from_T instead.
    """
    line = line or u_line(p, k)
    if p.is_zero:
        vals = np.broadcast_to(IDENT, (len(line.nodes), 2, 2)).copy()
        return TEigenSolution(complex(k), 0, line.nodes, vals, "ode")
    phase = -4j * k ** 3

    def gen(t):
        M = build_V(p, t, [k])
        M[..., 0, 0] += phase
        M[..., 1, 1] -= phase
        return M

    psi, _ = solve_matrix_forward(line, gen, IDENT[None])
    t = line.nodes
    vals = psi[:, 0] * guarded_exp(-phase * t)[:, None, None] ** np.array([1, -1])[None, None, :]
    if not np.all(np.isfinite(vals)):
        raise ToleranceNotMet("forward integration overflowed")
    return TEigenSolution(complex(k), 0, t, vals, "ode")


def U_from_T(p, ks, ts, line=None):
    """U(t, k) on the contour via U = T e^{-4ik^3 t sigma3-hat}(S^{-1}), S = T(0, k)."""
    line, T = T_full_on_contour(p, ks, line)
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    Sinv = inv2(T[0])
    out = []
    for t in np.atleast_1d(ts):
        Tt = line.interpolate(T.reshape(len(line.nodes), -1), [t]).reshape(len(ks), 2, 2)
        out.append(Tt @ conj_sigma3(Sinv, -4j * ks ** 3 * t))
    return np.array(out)


def spectral_AB(p, kgrid, K_switch=K_SWITCH_T, m=4, coeffs=None, line=None):
    """A(k) and B(k) for k in the closure of D+; series beyond K_switch."""
    ks = np.atleast_1d(np.asarray(kgrid, dtype=complex))
    if not np.all(in_plus(ks)):
        raise WrongRegion("A, B are tabulated on the closure of D+ only")
    A = np.ones(len(ks), dtype=complex)
    B = np.zeros(len(ks), dtype=complex)
    method = np.where(np.abs(ks) > K_switch, "series", "ode")
    if p.is_zero:
        return A, B, method
    near = method == "ode"
    if np.any(near):
        _, vals = t_col2_batch(p, ks[near], line)
        B[near] = vals[0, :, 0]
        A[near] = vals[0, :, 1]
    if np.any(~near):
        coeffs = coeffs or t_asym_coeffs(p, m, line)
        Th = hat_T0(coeffs, ks[~near])
        A[~near] = Th[:, 1, 1]
        B[~near] = Th[:, 0, 1]
    return A, B, method


# ---------------------------------------------------------------------------
# Large-k coefficients


@dataclass(frozen=True)
class TAsymCoeffs:
    m: int
    lam: int
    line: PanelLine
    T: list  # j = 0..m+3, arrays (nodes, 2, 2)
    V: list
    W: list

    @property
    def t(self):
        return self.line.nodes

    @property
    def count(self):
        return self.m + 3

    def at(self, name, j, t):
        table = getattr(self, name)[j]
        if t == 0:
            return table[0]
        if not 0 <= t <= self.line.length:
            raise BadParams(f"t = {t} outside the coefficient grid")
        return self.line.interpolate(table.reshape(len(table), 4), [t]).reshape(2, 2)


def _jmul(A, B, q):
    """q-th derivative of the product of two ladders (scalars stored as (N, 1, 1))."""
    return sum(comb(q, i) * _prod(A[i], B[q - i]) for i in range(q + 1))


def _prod(a, b):
    if a.shape[-1] == 1 or b.shape[-1] == 1:
        return a * b
    return a @ b


def _ladder(A, B, depth):
    return [_jmul(A, B, q) for q in range(depth + 1)]


class _Data:
    """Derivative ladders of the scalar combinations of g0, g1, g2 that appear
    in the recursions, stored as (N, 1, 1) arrays so they broadcast onto
    matrices."""

    def __init__(self, p, t, depth):
        self.lam = lam = p.lam
        self.depth = depth
        g = []
        for j in range(3):
            try:
                g.append([p(t, j, q)[:, None, None] for q in range(depth + 2)])
            except DerivUnavailable as exc:
                raise DerivUnavailable(f"recursion needs {depth + 1} derivatives of g{j}") from exc
        self.g0, self.g1, self.g2 = g
        d = depth + 1
        sq = _ladder(self.g0, self.g0, d)
        cube = _ladder(sq, self.g0, d)
        quart = _ladder(cube, self.g0, d)
        g2g0 = _ladder(self.g2, self.g0, d)
        g1sq = _ladder(self.g1, self.g1, d)
        self.g0sq = sq
        self.c_g2m2 = [a - 2 * lam * b for a, b in zip(self.g2, cube)]  # g2 - 2 lam g0^3
        self.c_g2m1 = [a - lam * b for a, b in zip(self.g2, cube)]  # g2 - lam g0^3
        self.c_g1g0sq = _ladder(self.g1, sq, d)
        self.c_quad = [3 * a - 2 * lam * b + lam * c for a, b, c in zip(quart, g2g0, g1sq)]
        self.c_sq_mix = _ladder([lam * a - b for a, b in zip(self.g2, cube)], sq, d)
        self.c_g0cube_g1 = _ladder(cube, self.g1, d)
        self.c_last = _ladder(self.c_g2m1, [lam * a - 2 * b for a, b in zip(self.g2, cube)], d)


def _off_step(D, Am1, Am2, Am3, Qm1, Qm2, Qm3, depth):
    """Algebraic part of level j from levels j-1, j-2, j-3 (ladders).

    A stands for the part given algebraically (off-diagonal for T and V,
    diagonal for W) and Q for the part obtained by quadrature.
    """
    lam = D.lam
    s3 = SIGMA3
    sl = sigma_lambda(lam)
    s3sl = s3 @ sl
    out = []
    for q in range(depth + 1):
        inner = (Am3[q + 1]
                 + 4 * (s3sl @ _jmul(D.g0, Qm1, q))
                 + 2j * lam * (s3 @ _jmul(D.g0sq, Am2, q))
                 - 2j * (sl @ _jmul(D.g1, Qm2, q))
                 - (s3sl @ _jmul(D.c_g2m2, Qm3, q)))
        out.append(0.125j * (s3 @ inner))
    return out


def _diag_rate(D, Am1, Am2, Am3, Qm1, Qm2, Qm3, depth):
    """Ladder of the time derivative of the quadrature part at level j."""
    lam = D.lam
    s3 = SIGMA3
    sl = sigma_lambda(lam)
    s3sl = s3 @ sl
    out = []
    for q in range(depth + 1):
        r = (0.5j * (sl @ _jmul(D.g0, Am1[1:], q))
             + 0.25 * (s3sl @ _jmul(D.g1, Am2[1:], q))
             - 0.125j * (sl @ _jmul(D.c_g2m1, Am3[1:], q))
             - 0.5j * lam * (sl @ _jmul(D.c_g1g0sq, Am1, q))
             + 0.5j * (s3 @ _jmul(D.c_quad, Qm1, q))
             - 0.25 * (s3sl @ _jmul(D.c_sq_mix, Am2, q))
             + 0.25 * _jmul(D.c_g0cube_g1, Qm2, q)
             + 0.125j * (s3 @ _jmul(D.c_last, Qm3, q)))
        out.append(r)
    return out


def diag_rate_by_elimination(D, A, Q, j, Qj=None, Qj1=None):
    """Value of the time derivative of the quadrature part at level j from the
    unsimplified diagonal balance, with the algebraic parts of levels j+1 and
    j+2 substituted from the off-diagonal relation.

    The quadrature parts of levels j and j+1 cancel, so they default to zero;
    passing actual values must not change the result.  Cross-check for the
    production rate; A and Q map level -> ladder.
    """
    lam = D.lam
    s3 = SIGMA3
    sl = sigma_lambda(lam)
    s3sl = s3 @ sl
    zero = [np.zeros_like(A[j][0])] * 2
    Qj = zero if Qj is None else [Qj, Qj]
    Qj1 = zero if Qj1 is None else [Qj1, Qj1]
    A1 = _off_step(D, None, A[j - 1], A[j - 2], Qj, Q[j - 1], Q[j - 2], 0)[0]
    A2 = _off_step(D, None, A[j], A[j - 1], Qj1, Qj, Q[j - 1], 0)[0]
    return (-4 * (s3sl @ (D.g0[0] * A2))
            - 2j * lam * (s3 @ (D.g0sq[0] * Qj1[0]))
            + 2j * (sl @ (D.g1[0] * A1))
            + s3sl @ (D.c_g2m2[0] * A[j][0]))


def _depth_plan(J):
    """Derivative depths per level so that every ladder entry consumed exists."""
    need_a = {j: 0 for j in range(-2, J + 1)}
    need_q = {j: 0 for j in range(-2, J + 1)}
    for j in range(J, 0, -1):
        qa, qq = need_a[j], need_q[j]
        need_a[j - 3] = max(need_a[j - 3], qa + 1)
        for i in (1, 2, 3):
            need_q[j - i] = max(need_q[j - i], qa, qq - 1)
            need_a[j - i] = max(need_a[j - i], qa, max(qq, 1))
    return need_a, need_q


def t_asym_coeffs(p, m=4, line=None):
    """Coefficients T_j, V_j, W_j for j = 1..m+3 on the t-grid."""
    if m < 1:
        raise BadParams("expansion order must be at least 1")
    line = line or t_line(p)
    t = line.nodes
    N = len(t)
    J = m + 3
    need_a, need_q = _depth_plan(J)
    top = max(max(need_a.values()), max(need_q.values())) + 2
    D = _Data(p, t, top)
    zero = np.zeros((N, 2, 2), dtype=complex)
    eye = np.broadcast_to(IDENT, (N, 2, 2)).astype(complex)

    def ladders(base_a, base_q):
        A = {-2: [zero] * (top + 2), -1: [zero] * (top + 2), 0: [base_a] + [zero] * (top + 1)}
        Q = {-2: [zero] * (top + 2), -1: [zero] * (top + 2), 0: [base_q] + [zero] * (top + 1)}
        return A, Q

    # T: algebraic = off-diagonal, quadrature = diagonal from the right end
    At, Qt = ladders(zero, eye)
    Av, Qv = ladders(zero, eye)
    Aw, Qw = ladders(zero, zero)
    for j in range(1, J + 1):
        da, dq = need_a[j], need_q[j]
        rate_depth = max(dq - 1, 0)
        for A, Q, mode in ((At, Qt, "T"), (Av, Qv, "V"), (Aw, Qw, "W")):
            A[j] = _off_step(D, A[j - 1], A[j - 2], A[j - 3], Q[j - 1], Q[j - 2], Q[j - 3], da)
            rate = _diag_rate(D, A[j - 1], A[j - 2], A[j - 3], Q[j - 1], Q[j - 2], Q[j - 3], rate_depth)
            if mode == "T":
                Q[j] = [-line.cumulative_from_right(rate[0])] + rate[:dq]
            else:
                Q[j] = [line.cumulative_from_left(rate[0])] + rate[:dq]
        # V_j(0) + W_j(0) = 0: V's quadrature part is diagonal, W's is off-diagonal
        Qv[j][0] = Qv[j][0] - Aw[j][0][0]
        Qw[j][0] = Qw[j][0] - Av[j][0][0]
    T = [At[j][0] + Qt[j][0] for j in range(J + 1)]
    V = [Av[j][0] + Qv[j][0] for j in range(J + 1)]
    W = [Aw[j][0] + Qw[j][0] for j in range(J + 1)]
    coeffs = TAsymCoeffs(m, p.lam, line, T, V, W)
    object.__setattr__(coeffs, "_ladders", {"T": (At, Qt), "V": (Av, Qv), "W": (Aw, Qw), "data": D})
    return coeffs


def hat_T0(coeffs, ks):
    ks = np.atleast_1d(np.asarray(ks, dtype=complex))
    out = np.broadcast_to(IDENT, ks.shape + (2, 2)).astype(complex)
    for j in range(1, coeffs.count + 1):
        out = out + coeffs.T[j][0] / ks[:, None, None] ** j
    return out


def hat_TU(coeffs, t, k):
    """(T-hat(t, k), U-hat(t, k)) from the truncated series."""
    if k == 0:
        raise BadParams("the series needs k != 0")
    Th = IDENT.astype(complex)
    Vh = IDENT.astype(complex)
    Wh = np.zeros((2, 2), dtype=complex)
    for j in range(1, coeffs.count + 1):
        Th = Th + coeffs.at("T", j, t) / k ** j
        Vh = Vh + coeffs.at("V", j, t) / k ** j
        Wh = Wh + coeffs.at("W", j, t) / k ** j
    E = np.diag(guarded_exp(np.array([8j * k ** 3 * t, -8j * k ** 3 * t])))
    return Th, Vh + Wh @ E


# ---------------------------------------------------------------------------
# Successive approximations (test oracle)


def picard_oracle_T(p, k, l=8, h=2e-3):
    """Partial sum of successive approximations for column 2 of T.

    Uniform grid, Filon weights for e^{8ik^3 (t'-t)}, one Richardson step.
    Returns (solution, term norms).
    """
    if not in_plus(k):
        raise WrongRegion("column 2 of T needs Im k^3 >= 0")
    if l > 12:
        raise BadParams("at most 12 successive approximations")
    runs = []
    for hh in (h, h / 2):
        n = int(np.ceil(p.T_trunc / hh))
        t = np.linspace(0.0, p.T_trunc, n + 1)
        V = build_V(p, t, [k])[:, 0]
        kap = 8j * k ** 3
        p1 = np.zeros(len(t), dtype=complex)
        p2 = np.ones(len(t), dtype=complex)
        terms = [(p1, p2)]
        for _ in range(l):
            n1 = -_filon_tail(t, V[:, 0, 0] * p1 + V[:, 0, 1] * p2, kap)
            n2 = -_filon_tail(t, V[:, 1, 0] * p1 + V[:, 1, 1] * p2, 0.0)
            p1, p2 = n1, n2
            terms.append((p1, p2))
        runs.append((t, terms))
    (tc, cterms), (_, fterms) = runs
    total = np.zeros((len(tc), 2), dtype=complex)
    norms = []
    for (c1, c2), (f1, f2) in zip(cterms, fterms):
        a1, a2 = (4 * f1[::2] - c1) / 3, (4 * f2[::2] - c2) / 3
        total[:, 0] += a1
        total[:, 1] += a2
        norms.append(float(max(np.abs(a1).max(), np.abs(a2).max())))
    return TEigenSolution(complex(k), 2, tc, total, f"picard({l})"), norms


def picard_oracle_U(p, k, l=8, h=2e-3, t_end=None):
    """Successive approximations for U on [0, t_end]."""
    t_end = p.T_trunc if t_end is None else t_end
    res = []
    kap = 8j * k ** 3
    for hh in (h, h / 2):
        n = int(np.ceil(t_end / hh))
        t = np.linspace(0.0, t_end, n + 1)
        V = build_V(p, t, [k])[:, 0]
        term = np.broadcast_to(IDENT, (len(t), 2, 2)).astype(complex)
        total = term.copy()
        for _ in range(l):
            VU = V @ term
            new = np.zeros_like(term)
            for (r, c), kk in (((0, 0), 0.0), ((1, 1), 0.0), ((0, 1), -kap), ((1, 0), kap)):
                new[:, r, c] = _filon_head(t, VU[:, r, c], kk)
            term = new
            total = total + term
        res.append((t, total))
    (tc, Tc), (_, Tf) = res
    return TEigenSolution(complex(k), 0, tc, (4 * Tf[::2] - Tc) / 3, f"picard({l})")
