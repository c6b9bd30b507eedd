"""Anisotropic fitting with convection-diffusion kernel dictionaries.

A dictionary is the cartesian product of drift directions, scale parameters
and centers. Entry ``(i, j, k)`` is the convection-diffusion kernel with
velocity ``speed_j * direction_i``, diffusivity ``D_j`` and reaction ``k_j``,
translated to center ``x_k``. Series are fitted by ridge-regularized least
squares; there is no orthogonality to lean on.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import json
import math
import warnings

import numpy as np

from .eigensolver import worker_count
from .kernels import ConvectionParams, KernelFamily, KernelSpec

__all__ = [
    "RidgeletDictionary",
    "RidgeletSeries",
    "build_direction_sweep",
    "scale_parameters",
    "fit_ridgelet",
    "evaluate_ridgelet",
]

BRANCHES = {"general": KernelFamily.CONVDIFF_GENERAL, "rapid": KernelFamily.CONVDIFF_RAPID}


def scale_parameters(rhos, speed=1.0, diffusivity=1.0):
    """``(speed, D, k)`` rows reaching each ``rho`` with ``k = D (rho^2 - (speed / 2D)^2)``."""
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    floor = speed / (2.0 * diffusivity)
    if np.any(rhos < floor * (1 - 1e-12)):
        raise ValueError(f"rho must be >= speed / 2D = {floor!r}")
    react = np.maximum(diffusivity * (rhos**2 - floor**2), 0.0)
    return np.column_stack([np.full(len(rhos), float(speed)), np.full(len(rhos), float(diffusivity)), react])


@dataclass(frozen=True)
class RidgeletDictionary:
    """Directions x scale parameters x centers.

    ``params`` has one ``(speed, diffusivity, reaction)`` row per scale. The
    scale ``rho`` is derived from the row, but the row itself is kept since
    different rows can share a rho.
    """

    directions: np.ndarray
    params: np.ndarray
    centers: np.ndarray
    branch: str = "rapid"

    def __post_init__(self):
        if self.branch not in BRANCHES:
            raise ValueError(f"branch must be one of {sorted(BRANCHES)}")
        d = np.atleast_2d(np.asarray(self.directions, dtype=float))
        c = np.asarray(self.centers, dtype=float)
        n = d.shape[1]
        c = c.reshape(-1, n) if c.size else np.zeros((0, n))
        p = np.asarray(self.params, dtype=float).reshape(-1, 3)
        norms = np.linalg.norm(d, axis=1)
        if np.any(norms == 0) or not np.all(np.isfinite(d)):
            raise ValueError("directions must be finite and nonzero")
        d = d / norms[:, None]
        if np.any(p[:, 0] < 0) or np.any(p[:, 1] <= 0) or np.any(p[:, 2] < 0):
            raise ValueError("need speed >= 0, diffusivity > 0, reaction >= 0")
        object.__setattr__(self, "directions", d)
        object.__setattr__(self, "params", p)
        object.__setattr__(self, "centers", c)
        if np.any(self.rhos <= 0):
            raise ValueError("every scale must have rho > 0")

    @property
    def n(self):
        return self.directions.shape[1]

    @property
    def rhos(self):
        speed, D, k = self.params.T
        return np.sqrt((speed / (2 * D)) ** 2 + k / D)

    @property
    def size(self):
        return len(self.directions) * len(self.params) * len(self.centers)

    def __len__(self):
        return self.size

    def kernel(self, i, j):
        """KernelSpec for direction ``i`` and scale row ``j``."""
        speed, D, k = self.params[j]
        conv = ConvectionParams(tuple(speed * self.directions[i]), D, k)
        return KernelSpec(BRANCHES[self.branch], self.n, convection=conv)

    def design_matrix(self, points, workers=None):
        """Columns ordered ``(i, j, k)`` with the center index fastest."""
        pts = np.asarray(points, dtype=float)
        pts = pts[:, None] if pts.ndim == 1 and self.n == 1 else pts.reshape(-1, self.n)
        nd, ns, nc = len(self.directions), len(self.params), len(self.centers)
        A = np.empty((len(pts), nd * ns * nc))
        blocks = [(i, j) for i in range(nd) for j in range(ns)]

        def fill(ij):
            i, j = ij
            col = (i * ns + j) * nc
            A[:, col:col + nc] = self.kernel(i, j).matrix(pts, self.centers)

        nworkers = min(workers or worker_count(), len(blocks)) if blocks else 1
        if nworkers > 1:
            with ThreadPoolExecutor(max_workers=nworkers) as pool:
                list(pool.map(fill, blocks))
        else:
            for ij in blocks:
                fill(ij)
        return A

    def rotated(self, R):
        """Rotate directions and centers by the orthogonal matrix ``R``."""
        R = np.asarray(R, dtype=float)
        return RidgeletDictionary(self.directions @ R.T, self.params, self.centers @ R.T, self.branch)

    def to_dict(self):
        return {"directions": self.directions.tolist(), "params": self.params.tolist(),
                "centers": self.centers.tolist(), "branch": self.branch}


def build_direction_sweep(m, scales, centers, *, speed=1.0, diffusivity=1.0, branch="rapid"):
    """``m`` directions evenly spaced on the unit circle, starting at angle 0.

    ``scales`` are rho values (converted with :func:`scale_parameters`) or an
    array of ``(speed, D, k)`` rows.
    """
    if int(m) != m or m < 1:
        raise ValueError("direction count must be a positive integer")
    m = int(m)
    angles = 2 * np.pi * np.arange(m) / m
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    # make multiples of a quarter turn exact
    dirs[np.abs(dirs) < 1e-15] = 0.0
    dirs[np.abs(np.abs(dirs) - 1) < 1e-15] = np.sign(dirs[np.abs(np.abs(dirs) - 1) < 1e-15])
    scales = np.asarray(scales, dtype=float)
    params = scales if scales.ndim == 2 else scale_parameters(scales, speed, diffusivity)
    return RidgeletDictionary(dirs, params, centers, branch)


@dataclass
class RidgeletSeries:
    dictionary: RidgeletDictionary
    coeffs: np.ndarray
    a0: float = 0.0
    residual: float = float("nan")
    ridge: float = 0.0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if len(self.coeffs) != self.dictionary.size:
            raise ValueError("one coefficient per dictionary entry is required")

    def __call__(self, points):
        return evaluate_ridgelet(self, points)

    def to_json(self):
        return json.dumps({"dictionary": self.dictionary.to_dict(), "coeffs": self.coeffs.tolist(),
                           "a0": self.a0, "residual": self.residual, "ridge": self.ridge}, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        d = doc["dictionary"]
        dic = RidgeletDictionary(d["directions"], d["params"], d["centers"], d["branch"])
        return cls(dic, doc["coeffs"], doc["a0"], doc["residual"], doc["ridge"])


def _relative_residual(f, fitted, w):
    num = float(w @ (f - fitted) ** 2)
    den = float(w @ f**2)
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return math.sqrt(num / den)


def fit_ridgelet(samples, dictionary, ridge=1e-12, *, weights=None, constant=True):
    """Minimize ``sum_s w_s (f_s - series(x_s))^2 + ridge |alpha|^2``.

    ``samples`` is a ``(points, values)`` pair. The constant ``a0 / 2`` is not
    penalized. A zero ridge with at least as many entries as samples is
    replaced by ``1e-10 |A|_2^2`` and a warning.
    """
    points, values = samples
    if dictionary.size == 0:
        raise ValueError("dictionary is empty")
    f = np.asarray(values, dtype=float).reshape(-1)
    if len(f) < 1:
        raise ValueError("at least one sample is required")
    if not np.all(np.isfinite(f)):
        raise ValueError("sample values must be finite")
    if not ridge >= 0:
        raise ValueError("ridge must be >= 0")
    w = np.ones(len(f)) if weights is None else np.asarray(weights, dtype=float).reshape(-1)
    if w.shape != f.shape or np.any(w <= 0):
        raise ValueError("weights must be positive, one per sample")
    A = dictionary.design_matrix(points)
    if A.shape[0] != len(f):
        raise ValueError("points and values differ in length")
    sw = np.sqrt(w)
    Aw = A * sw[:, None]
    if ridge == 0 and dictionary.size >= len(f):
        ridge = 1e-10 * np.linalg.norm(Aw, 2) ** 2
        warnings.warn(f"dictionary size {dictionary.size} >= {len(f)} samples; using ridge {ridge!r}",
                      RuntimeWarning, stacklevel=2)
    cols = np.hstack([sw[:, None], Aw]) if constant else Aw
    lead = 1 if constant else 0
    if ridge > 0:
        pen = np.zeros((dictionary.size, cols.shape[1]))
        pen[:, lead:] = math.sqrt(ridge) * np.eye(dictionary.size)
        M = np.vstack([cols, pen])
        rhs = np.concatenate([f * sw, np.zeros(dictionary.size)])
    else:
        M, rhs = cols, f * sw
    sol = np.linalg.lstsq(M, rhs, rcond=None)[0]
    half_a0 = float(sol[0]) if constant else 0.0
    series = RidgeletSeries(dictionary, sol[lead:], 2.0 * half_a0, ridge=float(ridge))
    series.residual = _relative_residual(f, half_a0 + A @ series.coeffs, w)
    return series


def evaluate_ridgelet(series, points):
    """``a0/2 + sum_ijk alpha_ijk u(x - x_k)``."""
    return 0.5 * series.a0 + series.dictionary.design_matrix(points) @ series.coeffs
