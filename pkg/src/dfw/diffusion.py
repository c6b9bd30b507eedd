"""Meshfree analytical solution of homogeneous diffusion by eigenmode expansion.

The initial data ``R`` is expanded in the Helmholtz eigenfunctions of the
domain, each built from regular distance kernels around one shared set of
centers; mode ``j`` then decays like ``exp(-gamma_j^2 kappa t)``. Pure
Neumann problems carry an extra constant mode.
"""

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .eigensolver import EigenProblem, EigenResult, basis_matrix, eigen_scan

__all__ = [
    "DiffusionProblem",
    "DiffusionMode",
    "DiffusionSolution",
    "DegenerateModeError",
    "solve_diffusion",
    "evaluate_solution",
    "mode_coefficients",
    "robin_admissible",
]


class DegenerateModeError(ValueError):
    """The eigenmode has (numerically) zero norm on the quadrature."""


def robin_admissible(a):
    """Sign check for ``du/dn + a u = 0``: eigenvalues stay nonnegative when ``a >= 0``.

    Robin problems are not solved here; this only answers the sign question.
    """
    return bool(a >= 0)


@dataclass(frozen=True)
class DiffusionProblem:
    """``u_t = kappa lap u`` with homogeneous boundary data and initial state ``R``.

    ``initial`` is a callable or samples on :attr:`quadrature` nodes.
    ``boundary_values`` exists only to reject inhomogeneous or time-dependent
    data with a clear message.
    """

    domain: geo.Domain
    kappa: float
    initial: object
    condition: str = "dirichlet"
    neumann_mask: np.ndarray = None
    resolution: int = None
    boundary_count: int = 40
    flavor: str = "phi"
    boundary_values: object = 0.0
    quadrature: geo.QuadratureRule = field(init=False, repr=False)
    samples: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            raise ValueError("kappa must be a finite positive number")
        if self.condition == "robin":
            raise ValueError("Robin conditions are not a solver path; see robin_admissible for the sign check")
        if callable(self.boundary_values):
            raise ValueError("time-dependent boundary conditions cannot be handled by separation of variables")
        if np.any(np.asarray(self.boundary_values, dtype=float) != 0):
            raise ValueError("only homogeneous boundary conditions are supported")
        res = self.resolution or (48 if self.domain.n == 1 else 24)
        quad = geo.quadrature(self.domain, res, panels=2 if self.domain.n == 1 else 1)
        R = self.initial
        if callable(R):
            R = R(quad.nodes[:, 0] if self.domain.n == 1 else quad.nodes)
        R = np.asarray(R, dtype=float).reshape(-1)
        if R.shape != (len(quad),):
            raise ValueError(f"initial samples must have one value per quadrature node ({len(quad)})")
        if not np.all(np.isfinite(R)):
            raise ValueError("initial data must be finite")
        object.__setattr__(self, "quadrature", quad)
        object.__setattr__(self, "samples", R)

    @property
    def pure_neumann(self):
        if self.condition == "neumann":
            return True
        return self.condition == "mixed" and bool(np.all(self.neumann_mask))

    def eigen_problem(self):
        return EigenProblem(self.domain, self.condition, self.flavor, self.boundary_count,
                            neumann_mask=self.neumann_mask)


@dataclass(frozen=True)
class DiffusionMode:
    """One eigenmode: ``coeffs`` are ``A_jk`` over the shared columns (centers, then derivative centers)."""

    gamma: float
    coeffs: np.ndarray
    amplitude: float
    norm_coeffs: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class DiffusionSolution:
    problem_n: int
    kappa: float
    centers: np.ndarray
    dphi_centers: np.ndarray
    modes: tuple
    a0: float
    residual: float
    method: str
    eigen: EigenResult = field(repr=False, compare=False, default=None)

    @property
    def gammas(self):
        return np.array([m.gamma for m in self.modes])

    @property
    def amplitudes(self):
        return np.array([m.amplitude for m in self.modes])

    def __call__(self, points, t):
        return evaluate_solution(self, points, t)

    def with_initial(self, problem):
        """Project another initial state onto the same eigenmodes."""
        return _project(problem, self.eigen, self.method)

    def to_json(self):
        return json.dumps({
            "n": self.problem_n,
            "kappa": self.kappa,
            "centers": self.centers.tolist(),
            "dphi_centers": self.dphi_centers.tolist(),
            "a0": self.a0,
            "residual": self.residual,
            "method": self.method,
            "modes": [{"gamma": m.gamma, "amplitude": m.amplitude, "coeffs": m.coeffs.tolist()}
                      for m in self.modes],
        }, sort_keys=True)


class _Columns:
    # the minimal interface basis_matrix needs, rebuilt from a solution
    def __init__(self, sol):
        self.n = sol.problem_n
        self.centers = sol.centers
        self.dphi_centers = sol.dphi_centers


def mode_coefficients(R, mode_values, quadrature):
    """``int R v / int v^2`` on the quadrature rule."""
    R = np.asarray(R, dtype=float).reshape(-1)
    v = np.asarray(mode_values, dtype=float).reshape(-1)
    w = quadrature.weights
    den = float(w @ (v * v))
    if den <= 1e-14 * float(np.sum(w)):
        raise DegenerateModeError("eigenmode has vanishing norm on the quadrature")
    return float(w @ (R * v)) / den


def _project(problem, eig, method):
    quad = problem.quadrature
    R = problem.samples
    w = quad.weights
    ep = eig.problem
    a0 = 0.0
    target = R
    if problem.pure_neumann:
        a0 = 2.0 * float(w @ R) / float(np.sum(w))
        target = R - a0 / 2
    raw = []
    for j, gamma in enumerate(eig.eigenvalues):
        c = eig.coefficients(j)
        v = basis_matrix(ep, gamma, quad.nodes) @ c
        norm = math.sqrt(float(w @ v**2))
        if norm <= 1e-7 * math.sqrt(float(np.sum(w))):
            raise DegenerateModeError(f"eigenmode {j} (gamma={gamma!r}) has vanishing norm")
        # same convention as EigenResult.eigenfunction: unit L2 norm, largest value positive
        norm = norm if v[np.argmax(np.abs(v))] >= 0 else -norm
        raw.append((float(gamma), c / norm, v / norm))
    if method == "orthogonality":
        amps = [mode_coefficients(target, v, quad) for _, _, v in raw]
    elif method == "least_squares":
        if raw:
            V = np.column_stack([v for _, _, v in raw]) * np.sqrt(w)[:, None]
            amps = np.linalg.lstsq(V, target * np.sqrt(w), rcond=1e-12)[0].tolist()
        else:
            amps = []
    else:
        raise ValueError("method must be 'orthogonality' or 'least_squares'")
    modes = tuple(DiffusionMode(g, a * c, float(a), c) for (g, c, _), a in zip(raw, amps))
    approx = a0 / 2 + sum((a * v for (_, _, v), a in zip(raw, amps)), np.zeros_like(R))
    scale = math.sqrt(float(w @ R**2))
    resid = math.sqrt(float(w @ (R - approx) ** 2)) / scale if scale > 0 else 0.0
    return DiffusionSolution(problem.domain.n, float(problem.kappa), ep.centers, ep.dphi_centers, modes,
                             float(a0), resid, method, eig)


def solve_diffusion(problem, lam_range=None, modes=None, *, eigenvalues=None, method="orthogonality", grid=200):
    """Expand the initial data in eigenmodes found in ``lam_range`` (or given as ``eigenvalues``).

    ``modes`` caps how many of the lowest eigenvalues are kept. Fewer than
    ``modes`` eigenvalues in range gives a partial solution and a warning.
    """
    if modes is not None and modes < 1:
        raise ValueError("mode budget must be >= 1")
    ep = problem.eigen_problem()
    if eigenvalues is not None:
        eig = EigenResult.from_eigenvalues(ep, eigenvalues)
    else:
        if lam_range is None:
            raise ValueError("give lam_range or eigenvalues")
        eig = eigen_scan(ep, lam_range, grid=grid)
    if modes is not None:
        if len(eig.eigenvalues) < modes:
            warnings.warn(f"only {len(eig.eigenvalues)} eigenvalue(s) found, {modes} requested", RuntimeWarning,
                          stacklevel=2)
        eig = EigenResult(eig.eigenvalues[:modes], eig.residuals[:modes], eig.grid, eig.curve, ep, eig.rejected)
    return _project(problem, eig, method)


def evaluate_solution(solution, points, t):
    """``a0/2 + sum_j exp(-gamma_j^2 kappa t) sum_k A_jk Phi(gamma_j |x - x_k|)``."""
    if not t >= 0:
        raise ValueError("t must be >= 0")
    cols = _Columns(solution)
    pts = np.asarray(points, dtype=float)
    if solution.problem_n == 1 and pts.ndim == 1:
        pts = pts[:, None]
    out = np.full(len(pts), solution.a0 / 2)
    for m in solution.modes:
        decay = math.exp(-m.gamma**2 * solution.kappa * t)
        if decay == 0.0:
            continue
        out += decay * (basis_matrix(cols, m.gamma, pts) @ m.coeffs)
    return out
