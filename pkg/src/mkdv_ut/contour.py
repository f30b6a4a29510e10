"""The jump contour: three lines through the origin at angles 0, pi/3, 2pi/3,
split into six rays, the four sectors between them, and quadrature grids.

Ray orientation: rays at angles 0, 2pi/3, -2pi/3 point away from the origin,
the other three point towards it.  With this choice the sectors D1 and D3
lie to the left of the contour.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import BadParams

ANGLE_TOL = 1e-12


class RayId(Enum):
    """The six rays, valued by their angle index (angle = index * pi/3)."""

    R0 = 0
    R60 = 1
    R120 = 2
    R180 = 3
    R240 = 4  # -2pi/3
    R300 = 5  # -pi/3

    @property
    def angle(self):
        a = self.value * np.pi / 3
        return a if a <= np.pi else a - 2 * np.pi

    @property
    def direction(self):
        return np.exp(1j * self.angle)

    @property
    def orientation(self):
        """+1 when the ray is traversed outward, -1 when inward."""
        return 1 if self.value % 2 == 0 else -1

    @property
    def mirror(self):
        """Ray hit by k -> -conj(k)."""
        return RayId((3 - self.value) % 6)

    @property
    def line(self):
        """'real' for the real axis, 'D1' for the rays bounding D1, 'D4' for D4."""
        if self in (RayId.R0, RayId.R180):
            return "real"
        if self in (RayId.R240, RayId.R300):
            return "D1"
        return "D4"


class Region(Enum):
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    D4 = "D4"
    ORIGIN = "origin"
    RAY = "ray"


def classify(k):
    """Region of a point: (Region, RayId or None).

    Points within ANGLE_TOL radians of a ray count as on that ray.
    """
    k = complex(k)
    if not np.isfinite(k.real) or not np.isfinite(k.imag):
        raise BadParams("k must be finite")
    if k == 0:
        return Region.ORIGIN, None
    arg = np.angle(k)
    for ray in RayId:
        d = (arg - ray.angle + np.pi) % (2 * np.pi) - np.pi
        if abs(d) <= ANGLE_TOL:
            return Region.RAY, ray
    if -2 * np.pi / 3 < arg < -np.pi / 3:
        return Region.D1, None
    if np.pi / 3 < arg < 2 * np.pi / 3:
        return Region.D4, None
    if 0 < arg < np.pi / 3 or arg > 2 * np.pi / 3:
        return Region.D3, None
    return Region.D2, None


def in_plus_side(k):
    """True for k in D1 or D3 (left of the contour)."""
    reg, _ = classify(k)
    return reg in (Region.D1, Region.D3)


LINES = ("real", "D1", "D4")


@dataclass(frozen=True)
class ContourGrid:
    """Composite Gauss-Legendre nodes on the six rays.

    Nodes are stored ray by ray (R0 first), panel by panel, with radius
    increasing inside each ray.  The two rays of a line share their panel
    breaks, so k -> -conj(k) maps nodes onto nodes exactly.
    """

    nodes: np.ndarray  # complex
    weights: np.ndarray  # complex, ds along the orientation
    ray: np.ndarray  # int ray index per node
    radii: np.ndarray  # |node|
    line_breaks: dict  # line -> panel boundaries in |k| (None when the line is absent)
    nodes_per_panel: int
    mirror: np.ndarray = field(repr=False)  # index of the node at -conj(k)
    panel: np.ndarray = field(repr=False)  # global panel number per node
    panel_bounds: np.ndarray = field(repr=False)  # (n_panels, 2) radii
    conjugate: np.ndarray = field(repr=False)  # index of the node at conj(k)

    def __len__(self):
        return len(self.nodes)

    @property
    def breaks(self):
        """The shared break list when all three lines use the same one."""
        vals = [b for b in self.line_breaks.values() if b is not None]
        if all(len(b) == len(vals[0]) and np.array_equal(b, vals[0]) for b in vals):
            return vals[0]
        raise BadParams("grid has line-dependent breaks")

    @property
    def R_max(self):
        return float(max(b[-1] for b in self.line_breaks.values() if b is not None))

    def on(self, *lines):
        """Boolean mask of nodes on the given lines ('real', 'D1', 'D4')."""
        want = [r.value for r in RayId if r.line in lines]
        return np.isin(self.ray, want)

    def ray_mask(self, ray):
        return self.ray == ray.value

    def integrate(self, f):
        """sum_i w_i f(k_i) along the oriented contour; f given at the nodes."""
        f = np.asarray(f)
        return np.tensordot(self.weights, f, axes=(0, 0))

    def spacing(self):
        """Local node spacing: panel length over nodes per panel."""
        b = self.panel_bounds[self.panel]
        return (b[:, 1] - b[:, 0]) / self.nodes_per_panel

    def interpolate(self, values, ray, radii):
        """Panelwise polynomial interpolation of node values along one ray.

        Radii outside the ray's extent give NaN.
        """
        radii = np.atleast_1d(np.asarray(radii, dtype=float))
        idx = np.flatnonzero(self.ray == ray.value)
        out = np.full(radii.shape, np.nan, dtype=complex)
        if idx.size == 0:
            return out
        n = self.nodes_per_panel
        br = self.line_breaks[ray.line]
        which = np.searchsorted(br, radii, side="right") - 1
        which[radii == br[-1]] = len(br) - 2
        xg, bw = _gl_bary(n)
        vals = np.asarray(values)[idx].reshape(-1, n)
        for p in np.unique(which):
            if p < 0 or p >= len(br) - 1:
                continue
            sel = which == p
            a, b = br[p], br[p + 1]
            s = (2 * radii[sel] - a - b) / (b - a)
            out[sel] = _bary_eval(xg, bw, vals[p], s)
        return out

    def to_json(self):
        return {
            "breaks": {k: (None if v is None else v.tolist()) for k, v in self.line_breaks.items()},
            "nodes_per_panel": self.nodes_per_panel,
        }

    @classmethod
    def from_json(cls, d):
        br = d["breaks"]
        if not isinstance(br, dict):
            br = {line: br for line in LINES}
        return build_grid(nodes_per_panel=d["nodes_per_panel"], breaks=br)


def _gl_bary(n):
    xg, wg = np.polynomial.legendre.leggauss(n)
    bw = (-1.0) ** np.arange(n) * np.sqrt((1 - xg**2) * wg)
    return xg, bw


def _bary_eval(xg, bw, vals, s):
    d = s[:, None] - xg[None, :]
    exact = np.isclose(d, 0.0, atol=1e-15, rtol=0)
    d[exact] = 1.0
    c = bw / d
    out = (c @ vals) / c.sum(axis=1)
    hit = exact.any(axis=1)
    if hit.any():
        out[hit] = vals[np.argmax(exact[hit], axis=1)]
    return out


def gl_diff_matrix(n):
    """Differentiation matrix on n Gauss-Legendre nodes of [-1, 1]."""
    xg, bw = _gl_bary(n)
    d = xg[:, None] - xg[None, :]
    np.fill_diagonal(d, 1.0)
    D = (bw[None, :] / bw[:, None]) / d
    np.fill_diagonal(D, 0.0)
    np.fill_diagonal(D, -D.sum(axis=1))
    return D


def graded_breaks(panels_per_ray, R_max, grading):
    """[0, r0] followed by geometric panels from r0 to R_max."""
    r0 = R_max * grading ** (-(panels_per_ray - 1))
    b = np.concatenate([[0.0], r0 * grading ** np.arange(panels_per_ray)])
    b[-1] = R_max
    return b


def _check_breaks(b):
    b = np.asarray(b, dtype=float)
    if b.ndim != 1 or len(b) < 2 or b[0] != 0 or np.any(np.diff(b) <= 0):
        raise BadParams("breaks must start at 0 and increase")
    return b


def build_grid(panels_per_ray=24, nodes_per_panel=16, R_max=60.0, grading=1.35, breaks=None):
    """Gauss-Legendre grid on the six rays truncated at R_max.

    The default layout is graded towards the origin.  `breaks` overrides it,
    either with one increasing list of radii starting at 0 or with a dict
    mapping 'real', 'D1', 'D4' to such lists (None drops that line).
    """
    if nodes_per_panel < 4:
        raise BadParams("nodes_per_panel must be >= 4")
    if breaks is None:
        if panels_per_ray < 2 or not R_max > 1 or not grading > 1:
            raise BadParams("need panels_per_ray >= 2, R_max > 1, grading > 1")
        breaks = graded_breaks(panels_per_ray, R_max, grading)
    if isinstance(breaks, dict):
        unknown = set(breaks) - set(LINES)
        if unknown:
            raise BadParams(f"unknown lines {sorted(unknown)}")
        line_breaks = {ln: (None if breaks.get(ln) is None else _check_breaks(breaks[ln])) for ln in LINES}
        d1, d4 = line_breaks["D1"], line_breaks["D4"]
        if (d1 is None) != (d4 is None) or (d1 is not None and not np.array_equal(d1, d4)):
            # the D4 rays are laid out as conjugates of the D1 rays
            raise BadParams("the D1 and D4 lines need identical breaks")
    else:
        b = _check_breaks(breaks)
        line_breaks = {ln: b for ln in LINES}
    if all(b is None for b in line_breaks.values()):
        raise BadParams("grid needs at least one line")
    xg, wg = np.polynomial.legendre.leggauss(nodes_per_panel)
    per_ray = {}
    for ray in RayId:
        b = line_breaks[ray.line]
        if b is None:
            per_ray[ray] = (np.empty(0), np.empty(0), np.empty((0, 2)))
            continue
        lo, hi = b[:-1, None], b[1:, None]
        per_ray[ray] = ((0.5 * (hi - lo) * (xg + 1) + lo).ravel(), (0.5 * (hi - lo) * wg).ravel(),
                        np.column_stack([b[:-1], b[1:]]))
    counts = [len(per_ray[r][0]) for r in RayId]
    offs = np.concatenate([[0], np.cumsum(counts)])
    N = offs[-1]
    nodes = np.empty(N, dtype=complex)
    weights = np.empty(N, dtype=complex)
    def put(ray, vals, wts):
        sl = slice(offs[ray.value], offs[ray.value + 1])
        nodes[sl], weights[sl] = vals, wts

    def get(ray):
        sl = slice(offs[ray.value], offs[ray.value + 1])
        return nodes[sl], weights[sl]

    # R0 and R240 are laid out directly; the other four follow by exact
    # reflections so that -conj(k) and conj(k) of a node are nodes bit for bit
    for ray in (RayId.R0, RayId.R240):
        radii, dr, _ = per_ray[ray]
        put(ray, radii * ray.direction, dr * ray.direction * ray.orientation)
        n, w = get(ray)
        put(ray.mirror, -np.conj(n), np.conj(w))
    n, w = get(RayId.R300)
    put(RayId.R60, np.conj(n), np.conj(w))
    n, w = get(RayId.R60)
    put(RayId.R120, -np.conj(n), np.conj(w))
    rays = np.repeat(np.arange(6), counts)
    radii = np.concatenate([per_ray[r][0] for r in RayId])
    # -conj maps ray j to ray 3-j at the same radius
    mirror = np.concatenate([offs[r.mirror.value] + np.arange(counts[r.value]) for r in RayId])
    conjugate = np.concatenate([offs[(6 - r.value) % 6] + np.arange(counts[r.value]) for r in RayId])
    bounds = np.concatenate([per_ray[r][2] for r in RayId])
    panel = np.arange(N) // nodes_per_panel
    return ContourGrid(nodes, weights, rays, radii, line_breaks, nodes_per_panel, mirror, panel, bounds,
                       conjugate)


def segment_integral_inv(z, start, end):
    """int_start^end ds / (s - z) along the straight segment, z off the segment.

    The argument of the ratio is the angle the segment subtends at z, always
    inside (-pi, pi), so the principal logarithm is the continuous one.
    """
    ratio = (end - z) / (start - z)
    return np.log(np.abs(ratio)) + 1j * np.angle(ratio)


def contour_integral_inv(z, R_max):
    """int_Gamma ds/(s - z) over the truncated oriented contour."""
    total = 0j
    for ray in RayId:
        far = R_max * ray.direction
        start, end = (0.0, far) if ray.orientation > 0 else (far, 0.0)
        total += segment_integral_inv(z, start, end)
    return total


def contour_integral_inv2(z, R_max):
    """int_Gamma ds/(s - z)^2 over the truncated oriented contour."""
    total = 0j
    for ray in RayId:
        far = R_max * ray.direction
        start, end = (0.0, far) if ray.orientation > 0 else (far, 0.0)
        total += 1 / (start - z) - 1 / (end - z)
    return total


def residue_oracle(f_poles):
    """(1/2 pi i) int_Gamma f for f = sum c_j/(k - z_j), decaying faster than 1/k.

    Closing each sector, the integral equals the sum of residues in D1 u D3
    (left of the contour).  f_poles is a list of (c_j, z_j).
    """
    return sum(c for c, z in f_poles if in_plus_side(z))
