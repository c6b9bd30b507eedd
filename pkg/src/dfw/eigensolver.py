"""Scale eigenvalues of distance-kernel bases by scanning a subspace-angle indicator.

For a trial scale ``lam`` the basis ``Phi_n(lam |x - x_k|)`` (and/or its
derivative flavor) is sampled on three row blocks:

* boundary rows carrying the boundary condition (values for Dirichlet,
  normal derivatives / lam for Neumann), weighted by sqrt(arc weight);
* PDE-residual rows ``(lap u + lam^2 u) / lam^2`` at interior points, needed
  only when the derivative flavor is present since Phi_n itself solves the
  Helmholtz equation exactly;
* interior normalization rows, weighted by sqrt(quadrature weight).

An orthonormal basis ``Q`` of the sampled column space is split the same
way, and the indicator is the smallest singular value of the constraint
part of ``Q``. It lies in [0, 1] and vanishes exactly when some combination
of basis functions satisfies the boundary condition and the PDE while being
nonzero inside, i.e. when ``lam`` is an eigenvalue.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import os

import numpy as np
from scipy.optimize import minimize_scalar

from . import geometry as geo
from .kernels import regular_shape, regular_shape_deriv

__all__ = ["EigenProblem", "EigenResult", "basis_matrix", "indicator", "eigen_scan", "worker_count"]

FLAVORS = ("phi", "dphi", "both")
CONDITIONS = ("dirichlet", "neumann", "mixed")
# singular values below this fraction of the largest are treated as numerical rank loss
_RANK_TOL = 1e-11


def worker_count():
    """Thread count for parallel scans (``DFW_THREADS``; unset or 0 means CPU count)."""
    env = os.environ.get("DFW_THREADS", "").strip()
    count = int(env) if env else 0
    if count < 0:
        raise ValueError("DFW_THREADS must be >= 0")
    return count or os.cpu_count() or 1


@dataclass(frozen=True)
class EigenProblem:
    """Geometry, boundary condition and basis of a scale-eigenvalue problem.

    ``neumann_mask`` marks Neumann boundary points for ``condition="mixed"``;
    the remaining points are Dirichlet. ``centers`` hold the expansion
    centers of the ``Phi`` columns and ``dphi_centers`` those of the
    derivative columns (defaults: interior farthest-point nodes, and a ring
    just outside the domain respectively, since the derivative kernel has
    a kink at its own center).
    """

    domain: geo.Domain
    condition: str = "dirichlet"
    flavor: str = "phi"
    boundary_count: int = 40
    interior_resolution: int = None
    centers: np.ndarray = None
    dphi_centers: np.ndarray = None
    neumann_mask: np.ndarray = None
    boundary: geo.BoundarySet = field(init=False, repr=False)
    interior: geo.QuadratureRule = field(init=False, repr=False)

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ValueError(f"condition must be one of {CONDITIONS}")
        if self.flavor not in FLAVORS:
            raise ValueError(f"flavor must be one of {FLAVORS}")
        dom = self.domain
        bnd = geo.boundary_discretize(dom, self.boundary_count)
        res = self.interior_resolution or (16 if dom.n == 1 else 12)
        quad = geo.quadrature(dom, res)
        object.__setattr__(self, "boundary", bnd)
        object.__setattr__(self, "interior", quad)

        if self.condition == "mixed":
            if self.neumann_mask is None:
                raise ValueError("mixed condition requires neumann_mask over the boundary points")
            mask = np.asarray(self.neumann_mask, dtype=bool)
            if mask.shape != (len(bnd),):
                raise ValueError(f"neumann_mask must have length {len(bnd)}")
        else:
            mask = np.full(len(bnd), self.condition == "neumann")
        object.__setattr__(self, "neumann_mask", mask)

        uses_phi = self.flavor in ("phi", "both")
        uses_dphi = self.flavor in ("dphi", "both")
        if uses_phi:
            c = self.centers
            if c is None:
                c = geo.default_centers(dom, 6 if dom.n == 1 else max(8, (3 * self.boundary_count) // 4))
            object.__setattr__(self, "centers", _points(c, dom.n))
        else:
            object.__setattr__(self, "centers", np.empty((0, dom.n)))
        if uses_dphi:
            c = self.dphi_centers
            if c is None:
                c = _exterior_ring(dom, 6 if dom.n == 1 else max(8, (3 * self.boundary_count) // 4))
            object.__setattr__(self, "dphi_centers", _points(c, dom.n))
        else:
            object.__setattr__(self, "dphi_centers", np.empty((0, dom.n)))

        ncols = len(self.centers) + len(self.dphi_centers)
        if len(bnd) + len(quad) < ncols:
            raise ValueError("more basis functions than collocation rows")
        for pts, what in ((self.centers, "centers"), (self.dphi_centers, "derivative centers"),
                          (bnd.points, "boundary points")):
            if len(pts) > 1 and _min_separation(pts) <= 1e-12 * max(dom.diameter, 1.0):
                raise ValueError(f"coincident {what}; the collocation matrix is rank deficient")

    @property
    def n(self):
        return self.domain.n

    def with_domain_scaled(self, factor):
        """Same problem on the domain dilated about the origin by ``factor``."""
        cfg = self.domain.to_config()
        kind = cfg.pop("kind")
        if kind == "interval":
            cfg = {"a": cfg["a"] * factor, "b": cfg["b"] * factor}
        elif kind == "rectangle":
            cfg = {"corners": (np.asarray(cfg["corners"]) * factor).tolist()}
        elif kind == "disk":
            cfg = {"center": (np.asarray(cfg["center"]) * factor).tolist(), "radius": cfg["radius"] * factor}
        else:
            cfg = {"vertices": (np.asarray(cfg["vertices"]) * factor).tolist()}
        return EigenProblem(
            geo.build_domain(kind, **cfg), self.condition, self.flavor, self.boundary_count,
            self.interior_resolution,
            None if self.flavor == "dphi" else self.centers * factor,
            None if self.flavor == "phi" else self.dphi_centers * factor,
            self.neumann_mask if self.condition == "mixed" else None,
        )


def _points(p, n):
    p = np.asarray(p, dtype=float)
    if p.ndim == 1:
        p = p[:, None] if n == 1 else p[None, :]
    if p.shape[1] != n:
        raise ValueError(f"points must have {n} coordinates")
    return p


def _min_separation(p):
    d = geo.pairwise_distance(p, p)
    np.fill_diagonal(d, np.inf)
    return d.min()


def _exterior_ring(domain, count):
    if domain.n == 1:
        a, b = domain.params
        off = 0.25 * (b - a) * (1.0 + np.arange(count // 2 + count % 2))
        return np.concatenate([a - off, b + off[: count // 2]])[:, None]
    c = domain.centroid
    radius = 0.5 * domain.diameter * 1.25
    th = 2.0 * math.pi * np.arange(count) / count
    return c + radius * np.column_stack([np.cos(th), np.sin(th)])


# ---------------------------------------------------------------------------
# column evaluation
# ---------------------------------------------------------------------------

def _shape_derivs(n, z, order):
    """Phi, Phi', Phi'', Phi''' of the normalized shape at z (> 0 where needed)."""
    p0 = np.asarray(regular_shape(n, z))
    p1 = np.asarray(regular_shape_deriv(n, z))
    if order < 2:
        return p0, p1, None, None
    with np.errstate(divide="ignore", invalid="ignore"):
        p2 = -p0 - (n - 1) * p1 / z
        p3 = -p1 - (n - 1) * (p2 / z - p1 / z**2)
    # limits at the origin from the even/odd series
    p2 = np.where(z == 0, -1.0 / n, p2)
    p3 = np.where(z == 0, 0.0, p3)
    return p0, p1, p2, p3


def _blocks(problem, lam, points, normals=None):
    """Values (and normal derivatives / lam) of every column at ``points``."""
    n = problem.n
    vals, dnorm = [], []
    for centers, deriv in ((problem.centers, False), (problem.dphi_centers, True)):
        if len(centers) == 0:
            continue
        diff = points[:, None, :] - centers[None, :, :]
        r = np.linalg.norm(diff, axis=-1)
        z = lam * r
        p0, p1, p2, _ = _shape_derivs(n, z, 2 if deriv else 1)
        vals.append(p1 if deriv else p0)
        if normals is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                cos = np.einsum("ikd,id->ik", diff, normals) / r
            cos = np.where(r == 0, 0.0, cos)
            dnorm.append((p2 if deriv else p1) * cos)
    value = np.hstack(vals)
    return value, (np.hstack(dnorm) if normals is not None else None)


def basis_matrix(problem, lam, points):
    """Columns (Phi at ``centers``, then Phi' at ``dphi_centers``) evaluated at ``points``."""
    return _blocks(problem, lam, _points(points, problem.n))[0]


def _pde_rows(problem, lam, points):
    """(lap + lam^2) u / lam^2 for the derivative columns; zero for Phi columns."""
    n = problem.n
    cols = []
    if len(problem.centers):
        cols.append(np.zeros((len(points), len(problem.centers))))
    if len(problem.dphi_centers):
        r = geo.pairwise_distance(points, problem.dphi_centers)
        z = lam * r
        _, p1, p2, p3 = _shape_derivs(n, z, 3)
        with np.errstate(divide="ignore", invalid="ignore"):
            res = p3 + (n - 1) * p2 / z + p1
        cols.append(np.where(z == 0, 0.0, res))
    return np.hstack(cols)


def _system(problem, lam):
    bnd, quad = problem.boundary, problem.interior
    value, dnorm = _blocks(problem, lam, bnd.points, bnd.normals)
    mask = problem.neumann_mask
    brows = np.where(mask[:, None], dnorm, value) * np.sqrt(bnd.weights)[:, None]
    sw = np.sqrt(quad.weights)[:, None]
    interior, _ = _blocks(problem, lam, quad.nodes)
    blocks = [brows]
    if len(problem.dphi_centers):
        blocks.append(_pde_rows(problem, lam, quad.nodes) * sw)
    constraint = np.vstack(blocks)
    return constraint, interior * sw


def _decompose(problem, lam):
    constraint, interior = _system(problem, lam)
    A = np.vstack([constraint, interior])
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    rank = int(np.sum(s > _RANK_TOL * s[0]))
    Qc = U[: len(constraint), :rank]
    u, sig, wt = np.linalg.svd(Qc, full_matrices=False)
    return sig[-1], Vt[:rank].T, s[:rank], wt[-1]


def indicator(problem, lam):
    """Subspace-angle indicator in [0, 1]; zero at an eigenvalue."""
    if not lam > 0:
        raise ValueError("lam must be > 0")
    return float(_decompose(problem, lam)[0])


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------

@dataclass
class EigenResult:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    grid: np.ndarray
    curve: np.ndarray
    problem: EigenProblem = field(repr=False)
    rejected: list = field(default_factory=list)

    @classmethod
    def from_eigenvalues(cls, problem, eigenvalues):
        """Wrap known eigenvalues (e.g. analytic ones) so eigenfunctions can be built."""
        lams = np.asarray(eigenvalues, dtype=float).reshape(-1)
        if np.any(lams <= 0) or np.any(np.diff(lams) <= 0):
            raise ValueError("eigenvalues must be positive and strictly increasing")
        res = np.array([indicator(problem, lam) for lam in lams])
        return cls(lams, res, np.empty(0), np.empty(0), problem)

    def coefficients(self, j):
        """Expansion coefficients over (centers, dphi_centers) of eigenfunction j."""
        _, V, s, y = _decompose(self.problem, self.eigenvalues[j])
        return V @ (y / s)

    def eigenfunction(self, j):
        """Callable evaluating eigenfunction j, normalized to unit L2 on the domain."""
        lam = float(self.eigenvalues[j])
        coef = self.coefficients(j)
        problem = self.problem
        quad = problem.interior

        def raw(x):
            pts = _points(x, problem.n)
            return _blocks(problem, lam, pts)[0] @ coef

        vals = raw(quad.nodes)
        norm = math.sqrt(float(quad.weights @ vals**2))
        sign = 1.0 if vals[np.argmax(np.abs(vals))] >= 0 else -1.0
        return lambda x: sign * raw(x) / norm

    def to_records(self):
        return [{"lambda": float(l), "residual": float(r)} for l, r in zip(self.eigenvalues, self.residuals)]


def eigen_scan(problem, lam_range, grid=200, refine_tol=1e-8, threshold=1e-6, workers=None):
    """Scan ``indicator`` on a uniform grid and refine its local minima.

    Minima closer than two grid steps are merged. Each survivor is refined by
    golden-section search and accepted when the refined indicator is below
    ``threshold`` and below both neighbouring grid values. Rejected
    candidates are reported in ``rejected`` as (lambda, residual) pairs.
    """
    lo, hi = map(float, lam_range)
    if not 0 < lo < hi:
        raise ValueError("need 0 < lam_lo < lam_hi")
    grid = int(grid)
    if grid < 50:
        raise ValueError("grid must be >= 50")
    lams = np.linspace(lo, hi, grid)
    nworkers = workers or worker_count()
    if nworkers > 1:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            curve = np.array(list(pool.map(lambda l: indicator(problem, l), lams)))
    else:
        curve = np.array([indicator(problem, l) for l in lams])

    minima = [k for k in range(1, grid - 1) if curve[k] <= curve[k - 1] and curve[k] < curve[k + 1]]
    merged = []
    for k in minima:
        if merged and k - merged[-1] <= 2:
            if curve[k] < curve[merged[-1]]:
                merged[-1] = k
            continue
        merged.append(k)

    found, resid, rejected = [], [], []
    for k in merged:
        a, b, c = lams[k - 1], lams[k], lams[k + 1]
        opt = minimize_scalar(lambda l: indicator(problem, l), bracket=(a, b, c), method="golden",
                              tol=max(refine_tol / b, 1e-15))
        lam = float(opt.x)
        val = float(opt.fun)
        if not a <= lam <= c:
            lam, val = float(b), float(curve[k])
        if val < threshold and val < curve[k - 1] and val < curve[k + 1]:
            found.append(lam)
            resid.append(val)
        else:
            rejected.append((lam, val))
    order = np.argsort(found)
    return EigenResult(np.array(found)[order], np.array(resid)[order], lams, curve, problem, rejected)
