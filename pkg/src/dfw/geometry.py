"""Domains, quadrature, boundary sampling and expansion centers in 1D and 2D."""
from dataclasses import dataclass
import csv
import math

import numpy as np

__all__ = [
    "Domain",
    "QuadratureRule",
    "BoundarySet",
    "NodeSet",
    "CsvFormatError",
    "build_domain",
    "quadrature",
    "boundary_discretize",
    "farthest_point_sample",
    "default_centers",
    "pairwise_distance",
    "read_point_csv",
]

KINDS = ("interval", "rectangle", "disk", "polygon")


class CsvFormatError(ValueError):
    """Malformed point-cloud CSV; ``line`` is the 1-based offending line."""

    def __init__(self, message, line):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Domain:
    kind: str
    params: tuple
    n: int
    measure: float

    @property
    def diameter(self):
        if self.kind == "interval":
            a, b = self.params
            return b - a
        if self.kind == "disk":
            return 2.0 * self.params[1]
        v = self.vertices
        return float(pairwise_distance(v, v).max())

    @property
    def vertices(self):
        """Counter-clockwise corner list for rectangles and polygons."""
        if self.kind == "rectangle":
            x0, y0, x1, y1 = self.params
            return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=float)
        if self.kind == "polygon":
            return np.array(self.params, dtype=float)
        raise AttributeError(f"{self.kind} has no vertices")

    @property
    def centroid(self):
        if self.kind == "interval":
            return np.array([0.5 * sum(self.params)])
        if self.kind == "disk":
            return np.array(self.params[0], dtype=float)
        q = quadrature(self, 6)
        return q.weights @ q.nodes / q.weights.sum()

    @property
    def boundary_measure(self):
        if self.kind == "interval":
            return 2.0
        if self.kind == "disk":
            return 2.0 * math.pi * self.params[1]
        v = self.vertices
        return float(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum())

    def contains(self, points, tol=0.0):
        """Boolean mask of points in the closed domain, widened by ``tol``."""
        p = np.asarray(points, dtype=float)
        if self.kind == "interval":
            x = p.reshape(-1)
            a, b = self.params
            return (x >= a - tol) & (x <= b + tol)
        p = p.reshape(-1, 2)
        if self.kind == "disk":
            c, rad = self.params
            return np.linalg.norm(p - np.asarray(c), axis=1) <= rad + tol
        if self.kind == "rectangle":
            x0, y0, x1, y1 = self.params
            return (p[:, 0] >= x0 - tol) & (p[:, 0] <= x1 + tol) & (p[:, 1] >= y0 - tol) & (p[:, 1] <= y1 + tol)
        # the crossing test is ambiguous on the boundary itself; accept points on edges
        on_edge = _distance_to_edges(p, self.vertices) <= max(tol, 1e-12 * self.diameter)
        return _crossing_number(p, self.vertices) | on_edge

    def to_config(self):
        if self.kind == "interval":
            return {"kind": "interval", "a": self.params[0], "b": self.params[1]}
        if self.kind == "rectangle":
            return {"kind": "rectangle", "corners": [list(self.params[:2]), list(self.params[2:])]}
        if self.kind == "disk":
            return {"kind": "disk", "center": list(self.params[0]), "radius": self.params[1]}
        return {"kind": "polygon", "vertices": [list(v) for v in self.params]}


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, values):
        return np.asarray(values).T @ self.weights if np.ndim(values) > 1 else float(np.dot(self.weights, values))

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class BoundarySet:
    points: np.ndarray
    normals: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class NodeSet:
    centers: np.ndarray
    collocation: np.ndarray = None


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def build_domain(kind, **params):
    """Build a domain.

    ``interval``: ``a``, ``b``. ``rectangle``: ``corners=[[x0, y0], [x1, y1]]``.
    ``disk``: ``center``, ``radius``. ``polygon``: ``vertices`` (any orientation,
    stored counter-clockwise).
    """
    if kind == "interval":
        a, b = float(params["a"]), float(params["b"])
        _finite(a, b)
        if not b > a:
            raise ValueError("interval needs a < b")
        return Domain("interval", (a, b), 1, b - a)
    if kind == "rectangle":
        (x0, y0), (x1, y1) = params["corners"]
        x0, y0, x1, y1 = map(float, (x0, y0, x1, y1))
        _finite(x0, y0, x1, y1)
        if not (x1 > x0 and y1 > y0):
            raise ValueError("rectangle needs lower-left and upper-right corners with positive extent")
        return Domain("rectangle", (x0, y0, x1, y1), 2, (x1 - x0) * (y1 - y0))
    if kind == "disk":
        c = tuple(float(t) for t in params.get("center", (0.0, 0.0)))
        rad = float(params["radius"])
        _finite(*c, rad)
        if len(c) != 2 or not rad > 0:
            raise ValueError("disk needs a 2D center and radius > 0")
        return Domain("disk", (c, rad), 2, math.pi * rad * rad)
    if kind == "polygon":
        v = np.asarray(params["vertices"], dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("polygon needs at least 3 two-dimensional vertices")
        _finite(*v.ravel())
        area = _signed_area(v)
        if abs(area) <= 1e-14 * max(1.0, float(np.abs(v).max()) ** 2):
            raise ValueError("polygon has zero area")
        if area < 0:
            v = v[::-1]
        if not _is_simple(v):
            raise ValueError("polygon is self-intersecting")
        return Domain("polygon", tuple(tuple(p) for p in v), 2, abs(area))
    raise ValueError(f"unknown domain kind {kind!r}; expected one of {KINDS}")


def _finite(*vals):
    if not all(math.isfinite(x) for x in vals):
        raise ValueError("domain parameters must be finite")


def _signed_area(v):
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_cross(p1, p2, q1, q2):
    d1, d2 = _orient(q1, q2, p1), _orient(q1, q2, p2)
    d3, d4 = _orient(p1, p2, q1), _orient(p1, p2, q2)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 * d2 < 0 and d3 * d4 < 0:
        return True

    def on_seg(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    return any(d == 0 and on_seg(*s) for d, s in
               ((d1, (q1, q2, p1)), (d2, (q1, q2, p2)), (d3, (p1, p2, q1)), (d4, (p1, p2, q2))))


def _is_simple(v):
    m = len(v)
    for i in range(m):
        for j in range(i + 1, m):
            if j == i + 1 or (i == 0 and j == m - 1):
                continue
            if _segments_cross(v[i], v[(i + 1) % m], v[j], v[(j + 1) % m]):
                return False
    return len({tuple(p) for p in v}) == m


def _crossing_number(p, v):
    x, y = p[:, 0][:, None], p[:, 1][:, None]
    x1, y1 = v[:, 0][None, :], v[:, 1][None, :]
    x2, y2 = np.roll(v[:, 0], -1)[None, :], np.roll(v[:, 1], -1)[None, :]
    straddle = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    return (np.sum(straddle & (x < xint), axis=1) % 2) == 1


def _distance_to_edges(p, v):
    a = v[None, :, :]
    b = np.roll(v, -1, axis=0)[None, :, :]
    ab = b - a
    t = np.clip(np.sum((p[:, None, :] - a) * ab, axis=2) / np.sum(ab * ab, axis=2), 0.0, 1.0)
    proj = a + t[..., None] * ab
    return np.linalg.norm(p[:, None, :] - proj, axis=2).min(axis=1)


def _triangulate(v):
    """Ear clipping for a simple counter-clockwise polygon."""
    idx = list(range(len(v)))
    tris = []
    guard = 0
    while len(idx) > 3:
        m = len(idx)
        for k in range(m):
            i0, i1, i2 = idx[k - 1], idx[k], idx[(k + 1) % m]
            a, b, c = v[i0], v[i1], v[i2]
            if _orient(a, b, c) <= 0:
                continue
            others = [v[j] for j in idx if j not in (i0, i1, i2)]
            if any(_orient(a, b, q) >= 0 and _orient(b, c, q) >= 0 and _orient(c, a, q) >= 0 for q in others):
                continue
            tris.append((a, b, c))
            del idx[k]
            break
        guard += 1
        if guard > 10 * len(v):
            raise ValueError("triangulation failed; polygon may be degenerate")
    tris.append(tuple(v[j] for j in idx))
    return tris


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------

def _gauss(k, a, b, panels=1):
    x, w = np.polynomial.legendre.leggauss(k)
    edges = np.linspace(a, b, panels + 1)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(lo + half * (x + 1.0))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def quadrature(domain, resolution, panels=1):
    """Positive-weight interior rule with ``resolution`` Gauss points per direction.

    ``panels`` splits intervals and rectangle sides into equal sub-panels
    (a composite rule), useful when the integrand has kinks.
    """
    resolution = int(resolution)
    if resolution < 4:
        raise ValueError("resolution must be >= 4")
    kind = domain.kind
    if kind == "interval":
        x, w = _gauss(resolution, *domain.params, panels)
        return QuadratureRule(x[:, None], w)
    if kind == "rectangle":
        x0, y0, x1, y1 = domain.params
        x, wx = _gauss(resolution, x0, x1, panels)
        y, wy = _gauss(resolution, y0, y1, panels)
        X, Y = np.meshgrid(x, y, indexing="ij")
        return QuadratureRule(np.column_stack([X.ravel(), Y.ravel()]), np.outer(wx, wy).ravel())
    if kind == "disk":
        (cx, cy), rad = domain.params
        r, wr = _gauss(resolution, 0.0, rad, panels)
        m = 2 * resolution
        th = 2.0 * math.pi * np.arange(m) / m
        R, T = np.meshgrid(r, th, indexing="ij")
        W = np.outer(wr * r, np.full(m, 2.0 * math.pi / m))
        pts = np.column_stack([cx + (R * np.cos(T)).ravel(), cy + (R * np.sin(T)).ravel()])
        return QuadratureRule(pts, W.ravel())
    # polygon: collapsed (Duffy) tensor Gauss on each triangle
    u, wu = _gauss(resolution, 0.0, 1.0)
    U, V = np.meshgrid(u, u, indexing="ij")
    s, t = U.ravel(), (V * (1.0 - U)).ravel()
    wref = np.outer(wu, wu).ravel() * (1.0 - U.ravel())
    nodes, weights = [], []
    for a, b, c in _triangulate(domain.vertices):
        a, b, c = map(np.asarray, (a, b, c))
        jac = abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
        nodes.append(a + np.outer(s, b - a) + np.outer(t, c - a))
        weights.append(jac * wref)
    return QuadratureRule(np.vstack(nodes), np.concatenate(weights))


# ---------------------------------------------------------------------------
# boundary
# ---------------------------------------------------------------------------

def boundary_discretize(domain, count):
    """Points (nearly) evenly spaced in arc length, with unit outward normals.

    On polygons each edge receives a share of ``count`` proportional to its
    length and the points sit at the midpoints of equal sub-segments, so no
    point lands on a corner; each carries its sub-segment length as weight. An interval's
    boundary is its two endpoints with unit weights.
    """
    count = int(count)
    if count < 8:
        raise ValueError("count must be >= 8")
    if domain.kind == "interval":
        a, b = domain.params
        return BoundarySet(np.array([[a], [b]]), np.array([[-1.0], [1.0]]), np.ones(2))
    if domain.kind == "disk":
        (cx, cy), rad = domain.params
        th = 2.0 * math.pi * (np.arange(count) + 0.5) / count
        nrm = np.column_stack([np.cos(th), np.sin(th)])
        pts = np.array([cx, cy]) + rad * nrm
        return BoundarySet(pts, nrm, np.full(count, 2.0 * math.pi * rad / count))
    v = domain.vertices
    edges = np.roll(v, -1, axis=0) - v
    lengths = np.linalg.norm(edges, axis=1)
    if count < len(v):
        raise ValueError(f"count must be at least the number of edges ({len(v)})")
    # largest-remainder allocation, at least one point per edge, so that no
    # point ever lands on a corner
    share = count * lengths / lengths.sum()
    alloc = np.maximum(1, np.floor(share).astype(int))
    while alloc.sum() > count:
        alloc[np.argmax(np.where(alloc > 1, alloc - share, -np.inf))] -= 1
    while alloc.sum() < count:
        alloc[np.argmax(share - alloc)] += 1
    pts, nrm, wts = [], [], []
    for a, e, ln, m in zip(v, edges, lengths, alloc):
        t = (np.arange(m) + 0.5) / m
        pts.append(a + np.outer(t, e))
        nrm.append(np.tile([e[1] / ln, -e[0] / ln], (m, 1)))
        wts.append(np.full(m, ln / m))
    return BoundarySet(np.vstack(pts), np.vstack(nrm), np.concatenate(wts))


# ---------------------------------------------------------------------------
# centers and distances
# ---------------------------------------------------------------------------

def farthest_point_sample(points, count, start=None):
    """Greedy farthest-point subset of ``points``; deterministic.

    Starts at ``start`` (an index) or at the point closest to the centroid.
    """
    p = np.asarray(points, dtype=float)
    if p.ndim == 1:
        p = p[:, None]
    count = int(count)
    if not 1 <= count <= len(p):
        raise ValueError(f"count must be in [1, {len(p)}]")
    if start is None:
        start = int(np.argmin(np.linalg.norm(p - p.mean(axis=0), axis=1)))
    chosen = [start]
    dist = np.linalg.norm(p - p[start], axis=1)
    for _ in range(count - 1):
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.linalg.norm(p - p[nxt], axis=1))
    return p[chosen]


def default_centers(domain, count, resolution=None):
    """Quasi-uniform expansion centers thinned from interior quadrature nodes."""
    if resolution is None:
        per_dir = int(math.ceil(math.sqrt(count))) if domain.n == 2 else count
        resolution = max(8, 2 * per_dir)
    nodes = quadrature(domain, resolution).nodes
    return farthest_point_sample(nodes, count)


def pairwise_distance(A, B):
    """Euclidean distance matrix ``M[i, j] = |A_i - B_j|``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if B.ndim == 1:
        B = B[:, None]
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    return np.linalg.norm(A[:, None, :] - B[None, :, :], axis=-1)


def read_point_csv(path, dimension=None):
    """Read ``x1[,x2],f`` samples; returns (points of shape (m, n), values)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise CsvFormatError("empty file", 1)
    header = [h.strip() for h in rows[0]]
    if header not in (["x1", "f"], ["x1", "x2", "f"]):
        raise CsvFormatError("header must be 'x1,f' or 'x1,x2,f'", 1)
    n = len(header) - 1
    if dimension is not None and n != dimension:
        raise CsvFormatError(f"expected {dimension} coordinate columns, found {n}", 1)
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != n + 1:
            raise CsvFormatError(f"expected {n + 1} fields, found {len(row)}", lineno)
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise CsvFormatError(f"non-numeric field in {row!r}", lineno) from None
        if not all(math.isfinite(x) for x in vals):
            raise CsvFormatError("non-finite value", lineno)
        data.append(vals)
    if not data:
        raise CsvFormatError("no data rows", len(rows) + 1)
    arr = np.array(data)
    return arr[:, :n], arr[:, n]
