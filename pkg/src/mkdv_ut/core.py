"""Shared primitives: 2x2 matrix helpers, Pauli matrices, panel discretizations
of a half line, and the evaluable data profiles u0(x) and g0, g1, g2(t).

Matrices are numpy arrays whose last two axes have shape (2, 2), so stacks of
matrices (one per node, per k, ...) are handled by the same functions.
"""

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre
from scipy import special
from scipy.interpolate import make_interp_spline


class MkdvError(Exception):
    """Base class for all errors raised by this package."""


class RangeError(MkdvError):
    pass


class OutOfDomain(MkdvError):
    pass


class DerivUnavailable(MkdvError):
    pass


class BadParams(MkdvError):
    pass


class ConfigError(MkdvError):
    pass


# Exponents above this overflow a double.
EXP_LIMIT = 700.0

IDENT = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)


def mat2(a, b, c, d):
    """Stack entries (broadcast together) into [[a, b], [c, d]]."""
    a, b, c, d = np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (a, b, c, d)))
    out = np.empty(a.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a
    out[..., 0, 1] = b
    out[..., 1, 0] = c
    out[..., 1, 1] = d
    return out


def det2(A):
    return A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]


def inv2(A):
    d = det2(A)
    out = np.empty_like(A)
    out[..., 0, 0] = A[..., 1, 1] / d
    out[..., 1, 1] = A[..., 0, 0] / d
    out[..., 0, 1] = -A[..., 0, 1] / d
    out[..., 1, 0] = -A[..., 1, 0] / d
    return out


def check_finite(A, what="matrix"):
    if not np.all(np.isfinite(A)):
        raise RangeError(f"non-finite entries in {what}")
    return A


def sigma_lambda(lam):
    """The matrix [[0, 1], [-lam, 0]]."""
    if lam not in (1, -1):
        raise BadParams(f"lambda must be +1 or -1, got {lam!r}")
    return np.array([[0, 1], [-lam, 0]], dtype=complex)


def symmetry_pauli(lam):
    """sigma_1 for the defocusing sign, sigma_2 for the focusing sign."""
    return SIGMA1 if lam == 1 else SIGMA2


def diag_part(A):
    out = np.zeros_like(A)
    out[..., 0, 0] = A[..., 0, 0]
    out[..., 1, 1] = A[..., 1, 1]
    return out


def offdiag_part(A):
    out = np.zeros_like(A)
    out[..., 0, 1] = A[..., 0, 1]
    out[..., 1, 0] = A[..., 1, 0]
    return out


def conj_sigma3(A, phi):
    """diag(e^phi, e^-phi) A diag(e^-phi, e^phi).

    Diagonal entries are untouched; the (1,2) entry is scaled by e^{2 phi}
    and the (2,1) entry by e^{-2 phi}.
    """
    A = np.asarray(A, dtype=complex)
    phi = np.asarray(phi, dtype=complex)
    if not np.all(np.isfinite(phi)):
        raise RangeError("phase is not finite")
    re2 = np.abs(2 * phi.real)
    if np.any(re2 > EXP_LIMIT):
        raise RangeError(f"|Re 2 phi| = {float(np.max(re2)):.3g} exceeds the exponent range")
    out = A.copy()
    out[..., 0, 1] = A[..., 0, 1] * np.exp(2 * phi)
    out[..., 1, 0] = A[..., 1, 0] * np.exp(-2 * phi)
    return out


def guarded_exp(z):
    """exp(z) that refuses to overflow."""
    z = np.asarray(z, dtype=complex)
    if np.any(z.real > EXP_LIMIT):
        raise RangeError(f"exponent {float(np.max(z.real)):.3g} overflows")
    return np.exp(z)


# ---------------------------------------------------------------------------
# Panel discretization of [0, L]


@lru_cache(maxsize=None)
def radau_rule(n):
    """Left Gauss-Radau nodes and weights on [-1, 1] (node -1 included)."""
    if n < 2:
        raise BadParams("Radau rule needs at least 2 nodes")
    c = np.zeros(n + 1)
    c[n - 1] = 1.0
    c[n] = 1.0
    roots = legendre.legroots(c)
    roots = np.sort(roots.real)
    # P_{n-1} + P_n vanishes at -1, the other n-1 roots are interior.
    roots[0] = -1.0
    # the companion-matrix roots lose a few digits for larger n; polish them
    dc = legendre.legder(c)
    for _ in range(3):
        roots[1:] -= legendre.legval(roots[1:], c) / legendre.legval(roots[1:], dc)
    pn1 = legendre.legval(roots, np.eye(n)[n - 1])
    w = (1 - roots) / (n * n * pn1 ** 2)
    w[0] = 2.0 / (n * n)
    return roots, w


@lru_cache(maxsize=None)
def _panel_matrices(n):
    """Cumulative integration and differentiation matrices on Radau nodes.

    Q[i, j] = int_{-1}^{xi_i} l_j, D[i, j] = l_j'(xi_i), with l_j the
    Lagrange basis on the nodes.
    """
    xi, w = radau_rule(n)
    V = legendre.legvander(xi, n - 1)
    Vinv = np.linalg.inv(V)
    Q = np.zeros((n, n))
    D = np.zeros((n, n))
    for m in range(n):
        e = np.zeros(n)
        e[m] = 1.0
        anti = legendre.legint(e, lbnd=-1)
        Q[:, :] += np.outer(legendre.legval(xi, anti), Vinv[m])
        D[:, :] += np.outer(legendre.legval(xi, legendre.legder(e)), Vinv[m])
    return Q, D, w


@dataclass(frozen=True)
class PanelLine:
    """Piecewise Radau discretization of [0, L].

    Every panel carries n nodes including its left end, so the union of nodes
    contains every breakpoint except L itself.
    """

    breaks: np.ndarray
    n: int = 16

    @classmethod
    def uniform(cls, length, panel=0.5, n=16):
        npan = max(1, int(math.ceil(length / panel)))
        return cls(np.linspace(0.0, length, npan + 1), n)

    @property
    def length(self):
        return float(self.breaks[-1])

    @property
    def npanels(self):
        return len(self.breaks) - 1

    @property
    def half(self):
        return 0.5 * np.diff(self.breaks)

    @property
    def nodes(self):
        xi, _ = radau_rule(self.n)
        a = self.breaks[:-1, None]
        return (a + self.half[:, None] * (xi[None, :] + 1)).ravel()

    @property
    def weights(self):
        _, w = radau_rule(self.n)
        return (self.half[:, None] * w[None, :]).ravel()

    def _split(self, f):
        f = np.asarray(f)
        return f.reshape((self.npanels, self.n) + f.shape[1:])

    def integrate(self, f):
        """Integral over [0, L] of nodal values f (leading axis = nodes)."""
        return np.tensordot(self.weights, np.asarray(f), axes=(0, 0))

    def cumulative_from_right(self, f):
        """Nodal values of int_x^L f."""
        Q, _, w = _panel_matrices(self.n)
        fp = self._split(f)
        h = self.half.reshape((-1,) + (1,) * (fp.ndim - 1))
        part = h * np.tensordot(Q, fp, axes=(1, 1)).swapaxes(0, 1)  # int from left end of panel
        full = h[:, 0] * np.tensordot(w, fp, axes=(0, 1))
        tail = np.cumsum(full[::-1], axis=0)[::-1]  # int from left end of panel p to L
        return (tail[:, None] - part).reshape(np.asarray(f).shape)

    def cumulative_from_left(self, f):
        """Nodal values of int_0^x f."""
        Q, _, w = _panel_matrices(self.n)
        fp = self._split(f)
        h = self.half.reshape((-1,) + (1,) * (fp.ndim - 1))
        part = h * np.tensordot(Q, fp, axes=(1, 1)).swapaxes(0, 1)
        full = h[:, 0] * np.tensordot(w, fp, axes=(0, 1))
        head = np.concatenate([np.zeros_like(full[:1]), np.cumsum(full, axis=0)[:-1]])
        return (head[:, None] + part).reshape(np.asarray(f).shape)

    def differentiate(self, f):
        _, D, _ = _panel_matrices(self.n)
        fp = self._split(f)
        h = self.half.reshape((-1,) + (1,) * (fp.ndim - 1))
        return (np.tensordot(D, fp, axes=(1, 1)).swapaxes(0, 1) / h).reshape(np.asarray(f).shape)

    def interpolate(self, f, x):
        """Evaluate the piecewise interpolant of nodal values f at points x."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        xi, _ = radau_rule(self.n)
        fp = self._split(f)
        p = np.clip(np.searchsorted(self.breaks, x, side="right") - 1, 0, self.npanels - 1)
        loc = (x - self.breaks[p]) / self.half[p] - 1.0
        V = legendre.legvander(xi, self.n - 1)
        coef = np.linalg.solve(V, fp.reshape(self.npanels, self.n, -1).transpose(1, 0, 2).reshape(self.n, -1))
        coef = coef.reshape(self.n, self.npanels, -1)
        basis = legendre.legvander(loc, self.n - 1)  # (len x, n)
        out = np.einsum("qn,nqr->qr", basis, coef[:, p, :])
        return out.reshape(x.shape + fp.shape[2:])


def solve_column_backward(line, generator, y_end):
    """Integrate y' = M(x) y from x = L down to 0 by Radau collocation.

    generator(x) returns M at the nodes x with shape (len(x), K, 2, 2), one
    matrix per spectral parameter.  y_end has shape (K, 2).  Returns nodal
    values with shape (len(line.nodes), K, 2).  The collocation is L-stable,
    so fast modes that the panels cannot resolve are damped instead of
    amplified.
    """
    Q, _, w = _panel_matrices(line.n)
    n = line.n
    xi, _ = radau_rule(n)
    y = np.asarray(y_end, dtype=complex)
    K = y.shape[0]
    out = np.empty((line.npanels * n, K, 2), dtype=complex)
    eye = np.eye(2 * n)
    for p in range(line.npanels - 1, -1, -1):
        a, h = line.breaks[p], line.half[p]
        xs = a + h * (xi + 1)
        M = generator(xs)  # (n, K, 2, 2)
        # y_i = y_R - h * sum_j (w_j - Q_ij) M_j y_j
        S = h * (w[None, :] - Q)  # (n, n)
        big = np.einsum("ij,jkab->kiajb", S, M).reshape(K, 2 * n, 2 * n)
        big += eye
        rhs = np.broadcast_to(y[:, None, :], (K, n, 2)).reshape(K, 2 * n)
        sol = np.linalg.solve(big, rhs[..., None])[..., 0].reshape(K, n, 2)
        out[p * n:(p + 1) * n] = sol.transpose(1, 0, 2)
        y = sol[:, 0, :]
    return out


def solve_matrix_forward(line, generator, y0):
    """Integrate Y' = M(x) Y from 0 up to L, Y(0) = y0 (shape (K, 2, 2)).

    Returns nodal values (len(nodes), K, 2, 2) and the value at x = L.
    """
    Q, _, w = _panel_matrices(line.n)
    n = line.n
    xi, _ = radau_rule(n)
    Y = np.asarray(y0, dtype=complex)
    K = Y.shape[0]
    out = np.empty((line.npanels * n, K, 2, 2), dtype=complex)
    for p in range(line.npanels):
        a, h = line.breaks[p], line.half[p]
        xs = a + h * (xi + 1)
        M = generator(xs)
        # y_i = y_0 + h sum_j Q_ij M_j y_j for i >= 1, y_0 given
        S = h * Q
        big = -np.einsum("ij,jkab->kiajb", S, M).reshape(K, 2 * n, 2 * n)
        big += np.eye(2 * n)
        # row block 0 is the known left value
        big[:, 0:2, :] = 0.0
        big[:, 0, 0] = 1.0
        big[:, 1, 1] = 1.0
        rhs = np.broadcast_to(Y[:, None, :, :], (K, n, 2, 2)).reshape(K, 2 * n, 2).copy()
        sol = np.linalg.solve(big, rhs).reshape(K, n, 2, 2)
        out[p * n:(p + 1) * n] = sol.transpose(1, 0, 2, 3)
        MY = np.einsum("jkab,kjbc->kjac", M, sol)
        Y = Y + h * np.einsum("j,kjac->kac", w, MY)
    return out, Y


# ---------------------------------------------------------------------------
# Real curves with derivatives (building blocks of the profiles)


def _sech_derivative_poly(p):
    """Coefficients {(i, j): c} with d^p sech/dz^p = sum c sech^i tanh^j."""
    poly = {(1, 0): 1.0}
    for _ in range(p):
        nxt = {}
        for (i, j), c in poly.items():
            nxt[(i, j + 1)] = nxt.get((i, j + 1), 0.0) - i * c
            if j > 0:
                nxt[(i + 2, j - 1)] = nxt.get((i + 2, j - 1), 0.0) + j * c
        poly = {key: c for key, c in nxt.items() if c != 0.0}
    return poly


def sech_derivative(z, p):
    z = np.asarray(z, dtype=float)
    e = np.exp(-2 * np.abs(z))
    s = 2 * np.sqrt(e) / (1 + e)  # sech without overflow
    t = np.tanh(z)
    out = np.zeros_like(z)
    for (i, j), c in _sech_derivative_poly(p).items():
        out = out + c * s ** i * t ** j
    return out


class Curve:
    """A smooth real function f(s) on s >= 0 with analytic derivatives."""

    max_deriv = 8

    def value(self, s, n=0):
        raise NotImplementedError

    def tail_bound(self, L):
        """Upper estimate of int_L^infinity (1 + s) |f(s)| ds."""
        raise NotImplementedError

    def support_length(self, tol):
        """A length beyond which |f| stays below tol."""
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


class ZeroCurve(Curve):
    max_deriv = 99

    def value(self, s, n=0):
        return np.zeros_like(np.asarray(s, dtype=float))

    def tail_bound(self, L):
        return 0.0

    def support_length(self, tol):
        return 1.0

    def to_json(self):
        return {"kind": "preset", "name": "zero", "params": {}}


@dataclass(frozen=True)
class ExponentialCurve(Curve):
    alpha: float
    beta: float

    def __post_init__(self):
        if not self.beta > 0:
            raise BadParams("exponential decay rate must be positive")

    def value(self, s, n=0):
        s = np.asarray(s, dtype=float)
        return self.alpha * (-self.beta) ** n * np.exp(-self.beta * s)

    def tail_bound(self, L):
        a, b = abs(self.alpha), self.beta
        return a * math.exp(-b * L) * ((1 + L) / b + 1 / b ** 2)

    def support_length(self, tol):
        return max(1.0, math.log(max(abs(self.alpha), tol) / tol) / self.beta)

    def to_json(self):
        return {"kind": "preset", "name": "exponential", "params": {"alpha": self.alpha, "beta": self.beta}}


@dataclass(frozen=True)
class GaussianCurve(Curve):
    alpha: float
    beta: float
    x0: float = 0.0

    def __post_init__(self):
        if not self.beta > 0:
            raise BadParams("Gaussian width parameter must be positive")

    def value(self, s, n=0):
        y = np.asarray(s, dtype=float) - self.x0
        rb = math.sqrt(self.beta)
        herm = special.eval_hermite(n, rb * y)
        return self.alpha * (-rb) ** n * herm * np.exp(-self.beta * y * y)

    def tail_bound(self, L):
        a, b = abs(self.alpha), self.beta
        y0 = L - self.x0
        rb = math.sqrt(b)
        part1 = (1 + self.x0) * math.sqrt(math.pi) / (2 * rb) * math.erfc(rb * y0)
        part2 = math.exp(-b * y0 * y0) / (2 * b)
        return a * max(part1 + part2, 0.0)

    def support_length(self, tol):
        ratio = max(abs(self.alpha), tol) / tol
        return max(1.0, self.x0 + math.sqrt(math.log(ratio) / self.beta))

    def to_json(self):
        return {"kind": "preset", "name": "gaussian",
                "params": {"alpha": self.alpha, "beta": self.beta, "x0": self.x0}}


@dataclass(frozen=True)
class SechCurve(Curve):
    """amp * (d/dz)^order sech(z) evaluated at z = rate * s + shift."""

    amp: float
    rate: float
    shift: float
    order: int = 0

    def value(self, s, n=0):
        z = self.rate * np.asarray(s, dtype=float) + self.shift
        return self.amp * self.rate ** n * sech_derivative(z, self.order + n)

    def _envelope(self):
        return 2.0 * sum(abs(c) for c in _sech_derivative_poly(self.order).values())

    def tail_bound(self, L):
        # |sech^(p)(z)| <= C e^{-|z|} because every monomial carries a sech factor
        C = abs(self.amp) * self._envelope()
        r = abs(self.rate)
        z = self.rate * L + self.shift
        if z < 0:
            # crude but monotone: bound the integrand by C on the part with z < 0
            return C * ((1 + L) / r + 1 / r ** 2)
        return C * math.exp(-z) * ((1 + L) / r + 1 / r ** 2)

    def support_length(self, tol):
        C = abs(self.amp) * self._envelope()
        z_needed = math.log(max(C, tol) / tol)
        return max(1.0, (z_needed - self.shift) / self.rate)

    def to_json(self):
        return {"kind": "preset", "name": "sech",
                "params": {"amp": self.amp, "rate": self.rate, "shift": self.shift, "order": self.order}}


class SplineCurve(Curve):
    """Quintic interpolating spline of sampled data; zero beyond the samples."""

    max_deriv = 5

    def __init__(self, s, f):
        s = np.asarray(s, dtype=float)
        f = np.asarray(f, dtype=float)
        if s.ndim != 1 or s.shape != f.shape or len(s) < 7:
            raise BadParams("a table needs matching x and u arrays with at least 7 samples")
        if np.any(np.diff(s) <= 0) or s[0] > 0:
            raise BadParams("table abscissae must increase and start at 0")
        self.s = s
        self.f = f
        self.spline = make_interp_spline(s, f, k=5)
        self._warned = False
        self._rate, self._amp = self._fit_tail()

    def _fit_tail(self):
        m = min(10, len(self.s) // 2)
        ss, ff = self.s[-m:], np.abs(self.f[-m:])
        if np.all(ff == 0):
            return math.inf, 0.0
        if np.any(ff == 0) or not np.all(np.diff(np.log(ff)) < 0):
            return 0.0, float(np.max(ff))
        slope, icpt = np.polyfit(ss, np.log(ff), 1)
        return float(-slope), float(math.exp(icpt))

    def value(self, s, n=0):
        s = np.asarray(s, dtype=float)
        inside = (s >= self.s[0]) & (s <= self.s[-1])
        if not np.all(inside) and not self._warned:
            warnings.warn("table profile evaluated outside its samples; using 0 there "
                          "(the extension is discontinuous)", RuntimeWarning, stacklevel=2)
            self._warned = True
        out = np.where(inside, self.spline(np.clip(s, self.s[0], self.s[-1]), n), 0.0)
        return out

    def tail_bound(self, L):
        end = self.s[-1]
        if self._rate == math.inf:
            beyond = 0.0
        elif self._rate <= 0:
            beyond = math.inf
        else:
            b = self._rate
            beyond = self._amp * math.exp(-b * end) * ((1 + end) / b + 1 / b ** 2)
        if L >= end:
            if self._rate in (0.0,) or beyond == math.inf:
                return math.inf
            b = self._rate
            return 0.0 if b == math.inf else self._amp * math.exp(-b * L) * ((1 + L) / b + 1 / b ** 2)
        grid = np.linspace(L, end, 2001)
        vals = (1 + grid) * np.abs(self.spline(grid))
        return float(np.trapezoid(vals, grid)) + beyond

    def support_length(self, tol):
        return float(self.s[-1])

    def to_json(self):
        return {"kind": "table", "x": self.s.tolist(), "u": self.f.tolist()}


def curve_from_json(desc):
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ConfigError(f"profile descriptor must be an object with a 'kind' field: {desc!r}")
    kind = desc["kind"]
    if kind == "table":
        unknown = set(desc) - {"kind", "x", "u", "name", "params"}
        if unknown:
            raise ConfigError(f"unknown table keys {sorted(unknown)}")
        return SplineCurve(desc["x"], desc["u"])
    if kind != "preset":
        raise ConfigError(f"unknown profile kind {kind!r}")
    name = desc.get("name")
    params = dict(desc.get("params", {}))
    builders = {
        "zero": ZeroCurve,
        "exponential": ExponentialCurve,
        "gaussian": GaussianCurve,
        "sech": SechCurve,
    }
    if name not in builders:
        raise ConfigError(f"unknown preset {name!r}")
    try:
        return builders[name](**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for preset {name!r}: {exc}") from None


# ---------------------------------------------------------------------------
# Profiles


DEFAULT_TAIL_TOL = 1e-16


@dataclass(frozen=True)
class InitialProfile:
    """Initial datum u0(x) on x >= 0 and the sign lambda."""

    lam: int
    curve: Curve
    L_trunc: float = None
    deriv_order: int = 5
    name: str = ""

    def __post_init__(self):
        if self.lam not in (1, -1):
            raise BadParams("lambda must be +1 or -1")
        if self.L_trunc is None:
            object.__setattr__(self, "L_trunc", float(self.curve.support_length(DEFAULT_TAIL_TOL)))
        if not self.L_trunc > 0:
            raise BadParams("truncation length must be positive")
        if self.deriv_order < 5 or self.deriv_order > self.curve.max_deriv:
            object.__setattr__(self, "deriv_order", min(max(self.deriv_order, 5), self.curve.max_deriv))

    def __call__(self, x, deriv=0):
        if deriv > self.deriv_order:
            raise DerivUnavailable(f"derivative {deriv} requested, {self.deriv_order} available")
        return self.curve.value(x, deriv)

    @property
    def is_zero(self):
        return isinstance(self.curve, ZeroCurve)

    def tail_bound(self, L=None):
        return self.curve.tail_bound(self.L_trunc if L is None else L)

    def to_json(self):
        return self.curve.to_json()


@dataclass(frozen=True)
class BoundaryProfile:
    """Boundary data g0, g1, g2 on t >= 0 and the sign lambda."""

    lam: int
    g0: Curve
    g1: Curve = field(default_factory=ZeroCurve)
    g2: Curve = field(default_factory=ZeroCurve)
    T_trunc: float = None
    name: str = ""

    def __post_init__(self):
        if self.lam not in (1, -1):
            raise BadParams("lambda must be +1 or -1")
        if self.T_trunc is None:
            T = max(c.support_length(DEFAULT_TAIL_TOL) for c in (self.g0, self.g1, self.g2))
            object.__setattr__(self, "T_trunc", float(T))
        if not self.T_trunc > 0:
            raise BadParams("truncation length must be positive")

    @property
    def curves(self):
        return (self.g0, self.g1, self.g2)

    @property
    def is_zero(self):
        return all(isinstance(c, ZeroCurve) for c in self.curves)

    def __call__(self, t, j=0, deriv=0):
        limit = (3, 2, 2)[j]
        if deriv > limit and deriv > self.curves[j].max_deriv - 1:
            raise DerivUnavailable(f"derivative {deriv} of g{j} unavailable")
        return self.curves[j].value(t, deriv)

    def tail_bound(self, T=None):
        T = self.T_trunc if T is None else T
        return max(c.tail_bound(T) for c in self.curves)

    def to_json(self):
        return {"g0": self.g0.to_json(), "g1": self.g1.to_json(), "g2": self.g2.to_json()}


def eval_profile(p, point, deriv=0):
    """Value of the requested derivative of a profile at one point."""
    length = p.L_trunc if isinstance(p, InitialProfile) else p.T_trunc
    if not 0 <= point <= length:
        raise OutOfDomain(f"point {point} outside [0, {length}]")
    if isinstance(p, InitialProfile):
        return float(p(point, deriv))
    return float(p(point, 0, deriv))


def initial_from_json(desc, lam):
    return InitialProfile(lam, curve_from_json(desc), name=desc.get("name", "table"))


def boundary_from_json(desc, lam):
    """Boundary descriptor: a single preset/table for g0, or an object with g0, g1, g2."""
    if isinstance(desc, dict) and "g0" in desc:
        unknown = set(desc) - {"g0", "g1", "g2"}
        if unknown:
            raise ConfigError(f"unknown boundary keys {sorted(unknown)}")
        curves = [curve_from_json(desc.get(f"g{j}", {"kind": "preset", "name": "zero"})) for j in range(3)]
        return BoundaryProfile(lam, *curves)
    if isinstance(desc, dict) and desc.get("kind") == "table":
        unknown = set(desc) - {"kind", "x", "u", "g1", "g2"}
        if unknown:
            raise ConfigError(f"unknown table keys {sorted(unknown)}")
        t = desc["x"]
        curves = [SplineCurve(t, desc["u"])]
        for key in ("g1", "g2"):
            curves.append(SplineCurve(t, desc[key]) if key in desc else ZeroCurve())
        return BoundaryProfile(lam, *curves)
    return BoundaryProfile(lam, curve_from_json(desc))


def zero_initial(lam=1):
    return InitialProfile(lam, ZeroCurve(), L_trunc=1.0, name="zero")


def zero_boundary(lam=1):
    return BoundaryProfile(lam, ZeroCurve(), T_trunc=1.0, name="zero")
