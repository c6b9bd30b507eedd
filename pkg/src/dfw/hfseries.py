"""Multiscale distance-kernel series on bounded domains.

A function is split as ``f = f0 + a0/2 + sum_j sum_k c_jk Phi_n(lam_j |x - x_k|)``
where ``f0`` is harmonic and carries the boundary data, ``lam_j`` are scale
eigenvalues of the domain and ``x_k`` are expansion centers. Also provides
the edge-corrected 1D trigonometric series and an expressibility diagnostic.
"""
from dataclasses import dataclass, field
import json
import math

import numpy as np

from . import geometry as geo
from .kernels import KernelSpec, regular_shape, regular_shape_deriv

__all__ = [
    "HarmonicPart",
    "HarmonicFitError",
    "ScaleBlock",
    "HFSeries",
    "EdgeCorrectedSeries1D",
    "ExpressibilityReport",
    "harmonic_part",
    "fit_hf_series",
    "evaluate_series",
    "parseval_check",
    "threshold_coefficients",
    "fit_edge_corrected_1d",
    "expressibility_check",
]

FLAVORS = ("phi", "dphi", "both")


# ---------------------------------------------------------------------------
# harmonic part
# ---------------------------------------------------------------------------

class HarmonicFitError(RuntimeError):
    def __init__(self, message, diagnostics):
        super().__init__(f"{message} (diagnostics: {diagnostics})")
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class HarmonicPart:
    """Harmonic function: ``c0 + c1 x`` in 1D, ``c0 + sum_m s_m ln|x - y_m|`` in 2D."""

    n: int
    constant: float
    slope: float = 0.0
    sources: np.ndarray = None
    strengths: np.ndarray = None
    fit_residual: float = 0.0

    def __call__(self, points):
        p = np.asarray(points, dtype=float)
        if self.n == 1:
            return self.constant + self.slope * p.reshape(-1)
        p = p.reshape(-1, 2)
        if self.sources is None or len(self.sources) == 0:
            return np.full(len(p), self.constant)
        return self.constant + np.log(geo.pairwise_distance(p, self.sources)) @ self.strengths

    @classmethod
    def zero(cls, n):
        return cls(n, 0.0)

    def to_dict(self):
        d = {"constant": self.constant}
        if self.n == 1:
            d["slope"] = self.slope
        else:
            d["sources"] = [] if self.sources is None else self.sources.tolist()
            d["strengths"] = [] if self.strengths is None else self.strengths.tolist()
        return d

    @classmethod
    def from_dict(cls, n, d):
        if n == 1:
            return cls(1, float(d["constant"]), float(d.get("slope", 0.0)))
        src = np.asarray(d.get("sources", []), dtype=float).reshape(-1, 2)
        return cls(2, float(d["constant"]), 0.0, src, np.asarray(d.get("strengths", []), dtype=float))


def _source_ring(domain, count, offset):
    c = domain.centroid
    if domain.kind == "disk":
        reach = domain.params[1]
    else:
        reach = float(np.linalg.norm(domain.vertices - c, axis=1).max())
    radius = reach + offset * domain.diameter
    th = 2.0 * math.pi * np.arange(count) / count
    return c + radius * np.column_stack([np.cos(th), np.sin(th)])


def harmonic_part(domain, boundary, values, condition="dirichlet", sources=None, offset=0.3,
                  pin_value=0.0, tol=1e-3):
    """Harmonic function matching boundary data in least squares.

    In 2D this is a method-of-fundamental-solutions fit: ``ln`` sources on a
    circle ``offset * diameter`` outside the domain plus a constant. Neumann
    data determine the function up to a constant, which is pinned so that
    the first boundary point takes ``pin_value``. A relative fit residual
    above ``tol`` raises :class:`HarmonicFitError`.
    """
    if condition not in ("dirichlet", "neumann"):
        raise ValueError("condition must be 'dirichlet' or 'neumann'")
    g = np.asarray(values, dtype=float).reshape(-1)
    if g.shape != (len(boundary),):
        raise ValueError("one boundary value per boundary point is required")
    if not np.all(np.isfinite(g)):
        raise ValueError("boundary data must be finite")
    if domain.n == 1:
        (a,), (b,) = boundary.points
        if condition == "dirichlet":
            slope = (g[1] - g[0]) / (b - a)
            return HarmonicPart(1, g[0] - slope * a, slope)
        # outward derivatives -c1 at a and c1 at b must agree
        slope = 0.5 * (g[1] - g[0])
        mismatch = abs(g[1] + g[0])
        if mismatch > tol * max(1.0, abs(slope)):
            raise HarmonicFitError("Neumann data incompatible with a linear harmonic function",
                                   {"mismatch": mismatch})
        return HarmonicPart(1, pin_value - slope * a, slope, fit_residual=mismatch)

    if sources is None:
        sources = _source_ring(domain, max(8, min(64, len(boundary) // 2)), offset)
    src = np.asarray(sources, dtype=float)
    diff = boundary.points[:, None, :] - src[None, :, :]
    r2 = np.sum(diff * diff, axis=-1)
    sw = np.sqrt(boundary.weights)
    if condition == "dirichlet":
        A = np.hstack([np.ones((len(g), 1)), 0.5 * np.log(r2)])
        rhs = g
    else:
        dn = np.einsum("imd,id->im", diff, boundary.normals) / r2
        A = np.hstack([np.zeros((len(g), 1)), dn])
        rhs = g
    A_w = A * sw[:, None]
    rhs_w = rhs * sw
    if condition == "neumann":
        pin = np.concatenate([[1.0], 0.5 * np.log(r2[0])]) * math.sqrt(boundary.weights.sum())
        A_w = np.vstack([A_w, pin])
        rhs_w = np.concatenate([rhs_w, [pin_value * math.sqrt(boundary.weights.sum())]])
    coef, *_ = np.linalg.lstsq(A_w, rhs_w, rcond=1e-13)
    scale = max(np.linalg.norm(rhs_w), 1e-300)
    resid = float(np.linalg.norm(A_w @ coef - rhs_w) / scale) if np.linalg.norm(rhs_w) > 0 else 0.0
    if resid > tol:
        raise HarmonicFitError("harmonic fit did not reproduce the boundary data",
                               {"relative_residual": resid, "sources": len(src), "condition": condition})
    return HarmonicPart(2, float(coef[0]), 0.0, src, coef[1:], resid)


# ---------------------------------------------------------------------------
# series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaleBlock:
    """Coefficients of one scale; for ``both`` the Phi part precedes the Phi' part."""

    lam: float
    flavor: str
    coeffs: np.ndarray


@dataclass
class HFSeries:
    n: int
    centers: np.ndarray
    blocks: list
    a0: float = 0.0
    harmonic: HarmonicPart = None
    domain: geo.Domain = None
    residual: float = float("nan")

    def __post_init__(self):
        lams = [b.lam for b in self.blocks]
        if any(b2 <= b1 for b1, b2 in zip(lams, lams[1:])):
            raise ValueError("scales must be strictly increasing")
        k = len(self.centers)
        for b in self.blocks:
            if len(b.coeffs) != (2 * k if b.flavor == "both" else k):
                raise ValueError("coefficient vector length must match the center count")

    def __call__(self, points, truncation=None):
        return evaluate_series(self, points, truncation)

    @property
    def scales(self):
        return np.array([b.lam for b in self.blocks])

    def to_json(self):
        doc = {
            "dimension": self.n,
            "domain": self.domain.to_config() if self.domain is not None else None,
            "centers": self.centers.tolist(),
            "scales": [{"lambda": b.lam, "flavor": b.flavor, "coeffs": b.coeffs.tolist()} for b in self.blocks],
            "harmonic": self.harmonic.to_dict() if self.harmonic is not None else None,
            "a0": self.a0,
            "residual": self.residual,
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        n = int(doc["dimension"])
        dom = None
        if doc.get("domain"):
            cfg = dict(doc["domain"])
            dom = geo.build_domain(cfg.pop("kind"), **cfg)
        harm = HarmonicPart.from_dict(n, doc["harmonic"]) if doc.get("harmonic") else None
        blocks = [ScaleBlock(float(s["lambda"]), s["flavor"], np.asarray(s["coeffs"], dtype=float))
                  for s in doc["scales"]]
        centers = np.asarray(doc["centers"], dtype=float).reshape(-1, n)
        return cls(n, centers, blocks, float(doc.get("a0", 0.0)), harm, dom, float(doc.get("residual", "nan")))


def _points(p, n):
    p = np.asarray(p, dtype=float)
    if n == 1 and p.ndim == 1:
        p = p[:, None]
    return p.reshape(-1, n)


def _columns(n, lam, flavor, points, centers):
    z = lam * geo.pairwise_distance(points, centers)
    if flavor == "phi":
        return np.asarray(regular_shape(n, z))
    if flavor == "dphi":
        return np.asarray(regular_shape_deriv(n, z))
    return np.hstack([regular_shape(n, z), regular_shape_deriv(n, z)])


def evaluate_series(series, points, truncation=None):
    """``f0 + a0/2 + sum`` over the first ``truncation`` scales (all by default)."""
    p = _points(points, series.n)
    out = np.full(len(p), 0.5 * series.a0)
    if series.harmonic is not None:
        out = out + series.harmonic(p)
    blocks = series.blocks if truncation is None else series.blocks[: int(truncation)]
    for b in blocks:
        out = out + _columns(series.n, b.lam, b.flavor, p, series.centers) @ b.coeffs
    return out


def _relative_residual(values, fitted, weights):
    num = float(weights @ (values - fitted) ** 2)
    den = float(weights @ values**2)
    if den == 0.0:
        return 0.0 if num == 0.0 else math.inf
    return math.sqrt(num / den)


def fit_hf_series(points, values, eigenvalues, centers=None, flavor="phi", method="least_squares",
                  domain=None, weights=None, harmonic=None, constant=False, ridge=None):
    """Fit series coefficients to samples.

    ``eigenvalues`` is an ``EigenResult`` or a sequence of scales. With
    ``method="orthogonality"`` every coefficient is the quadrature ratio
    ``<r, Phi_jk> / <Phi_jk, Phi_jk>`` of the residual ``r = f - f0 - a0/2``;
    this is exact only when the (j, k) basis functions are mutually
    orthogonal (e.g. one center at the middle of a disk). ``least_squares``
    solves the full ridge-regularized weighted system; ``ridge`` defaults to
    1e-10 times the largest Gram eigenvalue and ``ridge=0`` demands at least
    as many samples as coefficients.
    """
    if flavor not in FLAVORS:
        raise ValueError(f"flavor must be one of {FLAVORS}")
    if method not in ("orthogonality", "least_squares"):
        raise ValueError("method must be 'orthogonality' or 'least_squares'")
    lams = np.asarray(getattr(eigenvalues, "eigenvalues", eigenvalues), dtype=float).reshape(-1)
    if lams.size == 0:
        raise ValueError("at least one eigenvalue is required")
    if np.any(np.diff(lams) <= 0) or np.any(lams <= 0):
        raise ValueError("eigenvalues must be positive and strictly increasing")
    n = domain.n if domain is not None else (1 if np.ndim(points) == 1 else np.shape(points)[1])
    p = _points(points, n)
    f = np.asarray(values, dtype=float).reshape(-1)
    if len(f) != len(p):
        raise ValueError("points and values differ in length")
    if not np.all(np.isfinite(f)) or not np.all(np.isfinite(p)):
        raise ValueError("samples must be finite")
    if centers is None:
        if n == 1 and domain is not None:
            centers = np.array([[domain.params[0]]])
        elif domain is not None:
            centers = domain.centroid[None, :]
        else:
            raise ValueError("centers are required without a domain")
    c = _points(centers, n)
    if weights is None:
        measure = domain.measure if domain is not None else 1.0
        w = np.full(len(f), measure / len(f))
    else:
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.shape != f.shape or np.any(w <= 0):
            raise ValueError("weights must be positive, one per sample")

    r = f - (harmonic(p) if harmonic is not None else 0.0)
    A = np.hstack([_columns(n, lam, flavor, p, c) for lam in lams])
    width = A.shape[1] // len(lams)

    if method == "orthogonality":
        half_a0 = float(w @ r / w.sum()) if constant else 0.0
        rr = r - half_a0
        norms = w @ A**2
        coef = np.where(norms > 0, (w * rr) @ A / np.where(norms > 0, norms, 1.0), 0.0)
    else:
        if constant:
            A_full = np.hstack([np.ones((len(f), 1)), A])
        else:
            A_full = A
        sw = np.sqrt(w)
        Aw = A_full * sw[:, None]
        if ridge is None:
            top = np.linalg.norm(Aw, 2) ** 2
            ridge = 1e-10 * top
        if ridge < 0:
            raise ValueError("ridge must be >= 0")
        if ridge == 0 and len(f) < A_full.shape[1]:
            raise ValueError(f"{len(f)} samples cannot determine {A_full.shape[1]} coefficients without regularization")
        if ridge > 0:
            M = np.vstack([Aw, math.sqrt(ridge) * np.eye(A_full.shape[1])])
            rhs = np.concatenate([r * sw, np.zeros(A_full.shape[1])])
        else:
            M, rhs = Aw, r * sw
        sol, *_ = np.linalg.lstsq(M, rhs, rcond=None)
        half_a0 = float(sol[0]) if constant else 0.0
        coef = sol[1:] if constant else sol

    blocks = [ScaleBlock(float(lam), flavor, coef[j * width:(j + 1) * width].copy()) for j, lam in enumerate(lams)]
    series = HFSeries(n, c, blocks, 2.0 * half_a0, harmonic, domain)
    series.residual = _relative_residual(f, evaluate_series(series, p), w)
    return series


def parseval_check(series, quadrature, f):
    """Relative gap between the residual energy and the sum of coefficient energies.

    ``f`` is a callable or its values at the quadrature nodes. No radial weight
    enters the inner products.
    """
    p = quadrature.nodes
    vals = f(p) if callable(f) else np.asarray(f, dtype=float)
    resid = vals - 0.5 * series.a0 - (series.harmonic(p) if series.harmonic is not None else 0.0)
    energy = float(quadrature.weights @ resid**2)
    if energy == 0.0:
        return 0.0
    total = 0.0
    for b in series.blocks:
        cols = _columns(series.n, b.lam, b.flavor, p, series.centers)
        total += float(b.coeffs**2 @ (quadrature.weights @ cols**2))
    return abs(energy - total) / energy


def threshold_coefficients(series, cutoff):
    """Copy of ``series`` with coefficients of magnitude below ``cutoff`` zeroed."""
    blocks = [ScaleBlock(b.lam, b.flavor, np.where(np.abs(b.coeffs) < cutoff, 0.0, b.coeffs)) for b in series.blocks]
    return HFSeries(series.n, series.centers, blocks, series.a0, series.harmonic, series.domain, series.residual)


# ---------------------------------------------------------------------------
# edge-corrected 1D trigonometric series
# ---------------------------------------------------------------------------

VARIANTS = ("plain", "eq24", "eq25", "eq26")


@dataclass(frozen=True)
class EdgeCorrectedSeries1D:
    """Polynomial boundary terms plus a trigonometric series on ``[a, b]``.

    ``plain``: sine series in ``k pi (x - a) / l`` (odd reflection, no correction).
    ``eq24``: linear ramp through Q(a), Q(b) plus that sine series.
    ``eq25``: ``x Q'(a) + (x^2/2 - a x)(Q'(b) - Q'(a))/l`` plus a cosine series.
    ``eq26``: both polynomial groups plus a full Fourier series in
    ``2 k pi (x - a) / l``, as printed.
    """

    a: float
    b: float
    variant: str
    values: tuple = None
    slopes: tuple = None
    cos_coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))
    sin_coeffs: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def length(self):
        return self.b - self.a

    @property
    def frequency_factor(self):
        return 2.0 if self.variant == "eq26" else 1.0

    def polynomial(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        l = self.length
        if self.variant in ("eq24", "eq26"):
            qa, qb = self.values
            out = out + qa + (x - self.a) / l * (qb - qa)
        if self.variant in ("eq25", "eq26"):
            da, db = self.slopes
            out = out + x * da + (0.5 * x * x - self.a * x) / l * (db - da)
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        theta = self.frequency_factor * math.pi * (x - self.a) / self.length
        out = self.polynomial(x)
        if self.cos_coeffs.size:
            k = np.arange(self.cos_coeffs.size)
            out = out + np.cos(np.multiply.outer(theta, k)) @ self.cos_coeffs
        if self.sin_coeffs.size:
            k = np.arange(1, self.sin_coeffs.size + 1)
            out = out + np.sin(np.multiply.outer(theta, k)) @ self.sin_coeffs
        return out


def fit_edge_corrected_1d(q, interval, variant, modes, values=None, slopes=None, resolution=None):
    """Fit an edge-corrected series to ``q`` (a callable) on ``interval``.

    Trigonometric coefficients are orthogonality integrals of ``q`` minus the
    polynomial terms, evaluated by composite Gauss-Legendre quadrature.
    Cosine coefficients are indexed from k = 0 (the constant term enters with
    weight 1, not 1/2); sine coefficients from k = 1.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    a, b = map(float, interval)
    if not b > a:
        raise ValueError("interval needs a < b")
    modes = int(modes)
    if modes < 1:
        raise ValueError("modes must be >= 1")
    if variant in ("eq24", "eq26") and values is None:
        raise ValueError(f"{variant} requires boundary values Q(a), Q(b)")
    if variant in ("eq25", "eq26") and slopes is None:
        raise ValueError(f"{variant} requires boundary derivatives Q'(a), Q'(b)")
    shell = EdgeCorrectedSeries1D(a, b, variant,
                                  None if values is None else tuple(map(float, values)),
                                  None if slopes is None else tuple(map(float, slopes)))
    l = b - a
    per_panel = 16
    panels = resolution or max(8, 2 * modes)
    rule = geo.quadrature(geo.build_domain("interval", a=a, b=b), per_panel, panels=panels)
    x = rule.nodes[:, 0]
    w = rule.weights
    resid = np.asarray(q(x), dtype=float) - shell.polynomial(x)
    theta = shell.frequency_factor * math.pi * (x - a) / l
    cos_c = np.zeros(0)
    sin_c = np.zeros(0)
    if variant in ("plain", "eq24"):
        k = np.arange(1, modes + 1)
        sin_c = 2.0 / l * (np.sin(np.outer(k, theta)) @ (w * resid))
    elif variant == "eq25":
        k = np.arange(0, modes + 1)
        cos_c = 2.0 / l * (np.cos(np.outer(k, theta)) @ (w * resid))
        cos_c[0] *= 0.5
    else:
        k = np.arange(0, modes + 1)
        cos_c = 2.0 / l * (np.cos(np.outer(k, theta)) @ (w * resid))
        cos_c[0] *= 0.5
        ks = np.arange(1, modes + 1)
        sin_c = 2.0 / l * (np.sin(np.outer(ks, theta)) @ (w * resid))
    return EdgeCorrectedSeries1D(a, b, variant, shell.values, shell.slopes, cos_c, sin_c)


# ---------------------------------------------------------------------------
# expressibility diagnostic
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExpressibilityReport:
    radii: np.ndarray
    l1: np.ndarray
    l2: np.ndarray
    flag: str


def expressibility_check(f, spec, radii=(1.0, 2.0, 4.0, 8.0, 16.0), center=None, resolution=24,
                         rel_tol=0.01, zero_tol=1e-300):
    """Estimate ``int |f k|`` and ``int |f k|^2`` over growing balls.

    ``f`` is a callable on points of shape (m, n); the kernel ``spec`` is
    centered at ``center`` (origin by default). The flag is ``degenerate``
    when every estimate vanishes, ``admissible`` when both estimates change
    by less than ``rel_tol`` over the last two radii, ``divergent`` when the
    increments do not shrink, and ``undetermined`` otherwise.
    """
    n = spec.n
    if n not in (1, 2):
        raise ValueError("expressibility check supports n = 1 and n = 2")
    ctr = np.zeros(n) if center is None else np.asarray(center, dtype=float).reshape(n)
    radii = np.asarray(radii, dtype=float)
    if radii.size < 3 or np.any(np.diff(radii) <= 0):
        raise ValueError("need at least three increasing radii")
    l1, l2 = [], []
    for R in radii:
        if n == 1:
            dom = geo.build_domain("interval", a=ctr[0] - R, b=ctr[0] + R)
            rule = geo.quadrature(dom, resolution, panels=max(2, 2 * int(math.ceil(R))))
        else:
            dom = geo.build_domain("disk", center=ctr, radius=R)
            rule = geo.quadrature(dom, resolution, panels=max(1, int(math.ceil(R))))
        with np.errstate(over="ignore", invalid="ignore"):
            fv = np.asarray(f(rule.nodes), dtype=float).reshape(-1)
            kv = _kernel_at(spec, rule.nodes - ctr)
            prod = np.abs(fv * kv)
            l1.append(float(rule.weights @ prod))
            l2.append(float(rule.weights @ prod**2))
    l1, l2 = np.array(l1), np.array(l2)
    if np.all(np.abs(l1) <= zero_tol) and np.all(np.abs(l2) <= zero_tol):
        flag = "degenerate"
    elif not (np.all(np.isfinite(l1)) and np.all(np.isfinite(l2))):
        flag = "divergent"
    else:
        def rel(v):
            return abs(v[-1] - v[-2]) / max(abs(v[-1]), zero_tol)

        def growing(v):
            inc = np.diff(v)
            return inc[-1] >= inc[-2] > 0 or (inc[-1] > 0 and rel(v) > 0.5)

        if rel(l1) < rel_tol and rel(l2) < rel_tol:
            flag = "admissible"
        elif growing(l1) or growing(l2):
            flag = "divergent"
        else:
            flag = "undetermined"
    return ExpressibilityReport(radii, l1, l2, flag)


def _kernel_at(spec, d):
    if spec.family.anisotropic:
        return np.asarray(spec(d))
    r = np.linalg.norm(d, axis=-1)
    if spec.family.singular and spec.n > 1:
        r = np.where(r == 0, np.finfo(float).tiny, r)
    return np.asarray(spec.radial(r))
