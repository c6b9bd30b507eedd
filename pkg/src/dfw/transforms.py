"""Quadrature-based distance-function wavelet transforms.

Every transform here is a plain weighted sum: a kernel dilated by the scale
``lam`` and centered at a location ``xi`` is integrated against samples of
``f`` on a source quadrature rule. Supported plans:

``hft``
    complex Helmholtz kernel (outgoing by default, incoming on request).
``j`` / ``y``
    real regular / singular Helmholtz kernels. ``j`` on a finite domain divides
    by ``C_J(lam, xi) = int Phi(lam |x - xi|)^2 dx`` and can subtract a
    harmonic part first.
``psi``
    the composite kernel ``Phi' - i Phi``.
``hlt``
    modified Helmholtz decaying kernel in the literature normalization; use
    :func:`hlt_forward`.
``convdiff``
    anisotropic convection-diffusion fundamental solution, swept over a list
    of flow directions.

The kernel at scale ``lam`` is the unit-scale profile dilated, ``g(lam r)``.
"""

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import geometry as geo
from .kernels import ConvectionParams, KernelFamily, KernelSpec, unit_sphere_surface

__all__ = [
    "TransformPlan",
    "SpectralField",
    "AdmissibilityReport",
    "lambda_grid",
    "make_plan",
    "forward_transform",
    "inverse_transform",
    "admissibility",
    "hlt_forward",
    "finite_j_normalizer",
]

KINDS = ("hft", "j", "y", "psi", "convdiff")
_SKIP_LIMIT = 0.01

_FAMILY = {
    "j": KernelFamily.HELMHOLTZ_REGULAR,
    "y": KernelFamily.HELMHOLTZ_SINGULAR,
    "psi": KernelFamily.PSI_COMPOSITE,
}


# ---------------------------------------------------------------------------
# grids and plans
# ---------------------------------------------------------------------------

def lambda_grid(lam_max, count):
    """Midpoint grid on (0, lam_max]: nodes (k - 1/2) h with weights h."""
    if not lam_max > 0 or count < 1:
        raise ValueError("need lam_max > 0 and count >= 1")
    h = lam_max / count
    return (np.arange(count) + 0.5) * h, np.full(count, h)


def _trapezoid_weights(lams):
    # trapezoid on the grid, with [0, lam_1] closed by a constant extension
    w = np.zeros_like(lams)
    d = np.diff(lams)
    w[:-1] += d / 2
    w[1:] += d / 2
    w[0] += lams[0]
    return w


@dataclass(frozen=True)
class TransformPlan:
    """Everything a forward or inverse transform needs besides the data.

    ``xi`` are the locations, ``xi_weights`` their integration weights (needed
    only for inversion), ``source`` the quadrature rule the samples of ``f``
    live on. ``directions`` and ``convection`` are used by ``convdiff`` plans,
    whose scale axis holds ``rho`` values.
    """

    kind: str
    n: int
    lambdas: np.ndarray
    lambda_weights: np.ndarray
    xi: np.ndarray
    source: geo.QuadratureRule
    xi_weights: np.ndarray = None
    orientation: str = "outgoing"
    domain: geo.Domain = None
    harmonic: object = None
    finite: bool = True
    convection: ConvectionParams = None
    directions: np.ndarray = None
    _unit: KernelSpec = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        lams = np.asarray(self.lambdas, dtype=float).reshape(-1)
        if lams.size == 0 or np.any(lams <= 0) or np.any(np.diff(lams) <= 0) or not np.all(np.isfinite(lams)):
            raise ValueError("lambda grid must be finite, strictly increasing and > 0")
        lw = np.asarray(self.lambda_weights, dtype=float).reshape(-1)
        if lw.shape != lams.shape or np.any(lw < 0):
            raise ValueError("lambda weights must match the grid and be >= 0")
        xi = np.asarray(self.xi, dtype=float).reshape(-1, self.n)
        if self.source.nodes.shape[1] != self.n:
            raise ValueError("source quadrature dimension differs from plan dimension")
        xw = None
        if self.xi_weights is not None:
            xw = np.asarray(self.xi_weights, dtype=float).reshape(-1)
            if xw.shape != (len(xi),):
                raise ValueError("xi weights must match the xi grid")
        if self.orientation not in ("outgoing", "incoming"):
            raise ValueError("orientation must be 'outgoing' or 'incoming'")
        object.__setattr__(self, "lambdas", lams)
        object.__setattr__(self, "lambda_weights", lw)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "xi_weights", xw)
        if self.kind == "convdiff":
            if self.convection is None:
                raise ValueError("convdiff plans need convection parameters")
            dirs = self.directions
            if dirs is None:
                v = np.asarray(self.convection.velocity)
                speed = np.linalg.norm(v)
                dirs = (v / speed if speed > 0 else np.eye(self.n)[0])[None, :]
            dirs = np.asarray(dirs, dtype=float).reshape(-1, self.n)
            norms = np.linalg.norm(dirs, axis=1)
            if np.any(norms == 0):
                raise ValueError("directions must be nonzero")
            object.__setattr__(self, "directions", dirs / norms[:, None])
            if np.any(lams < self.drift_rate):
                raise ValueError(f"convdiff scales rho must be >= |v|/2D = {self.drift_rate!r}")
        else:
            if self.kind == "hft":
                fam = (KernelFamily.HELMHOLTZ_OUTGOING if self.orientation == "outgoing"
                       else KernelFamily.HELMHOLTZ_INCOMING)
            else:
                fam = _FAMILY[self.kind]
            object.__setattr__(self, "_unit", KernelSpec(fam, self.n, 1.0))

    @property
    def drift_rate(self):
        c = self.convection
        return float(np.linalg.norm(c.velocity)) / (2.0 * c.diffusivity)

    @property
    def shape(self):
        base = (len(self.lambdas), len(self.xi))
        return (len(self.directions),) + base if self.kind == "convdiff" else base

    @property
    def singular(self):
        if self.kind == "convdiff":
            return self.n > 1
        return self._unit.family.singular and self.n > 1

    def kernel(self, lam, d, direction=None):
        """Kernel at scale ``lam`` for displacements ``d`` (shape (..., n))."""
        d = np.asarray(d, dtype=float)
        if self.kind == "convdiff":
            c = self.convection
            speed = float(np.linalg.norm(c.velocity))
            vel = speed * (self.directions[0] if direction is None else np.asarray(direction, dtype=float))
            react = max(c.diffusivity * (lam**2 - (speed / (2 * c.diffusivity)) ** 2), 0.0)
            spec = KernelSpec(KernelFamily.CONVDIFF_FUNDAMENTAL, self.n,
                              convection=ConvectionParams(tuple(vel), c.diffusivity, react))
            return spec(d)
        r = np.linalg.norm(d, axis=-1)
        return self._unit.radial(lam * r)


def make_plan(kind, source, lambdas, xi, *, lambda_weights=None, xi_weights=None, domain=None, **kw):
    """Build a plan. Without ``lambda_weights`` the trapezoid rule on the grid is used."""
    lams = np.asarray(lambdas, dtype=float).reshape(-1)
    if lambda_weights is None:
        if lams.size and (np.any(lams <= 0) or np.any(np.diff(lams) <= 0)):
            raise ValueError("lambda grid must be strictly increasing and > 0")
        lambda_weights = _trapezoid_weights(lams) if lams.size else lams
    n = source.nodes.shape[1]
    return TransformPlan(kind, n, lams, lambda_weights, xi, source, xi_weights=xi_weights, domain=domain, **kw)


# ---------------------------------------------------------------------------
# spectral field
# ---------------------------------------------------------------------------

@dataclass
class SpectralField:
    """Transform values indexed ``[lambda, xi]`` (``[direction, lambda, xi]`` for convdiff)."""

    values: np.ndarray
    plan: TransformPlan
    cj: np.ndarray = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.plan.shape:
            raise ValueError(f"field shape {self.values.shape} != plan shape {self.plan.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("spectral field has non-finite entries")

    def projection_energy(self):
        """``|F|^2 C_J`` per cell: the squared norm of f's projection onto each kernel.

        Only finite-domain ``j`` fields carry ``C_J``.
        """
        if self.cj is None:
            raise ValueError("projection energy needs a finite-domain j field")
        return np.abs(self.values) ** 2 * self.cj

    def to_csv(self):
        """CSV text with columns ``lambda, xi_1[, xi_2], re, im``.

        ``convdiff`` fields carry leading ``dir_1[, dir_2]`` columns.
        """
        p = self.plan
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        xi_cols = [f"xi_{i + 1}" for i in range(p.n)]
        if p.kind == "convdiff":
            w.writerow([f"dir_{i + 1}" for i in range(p.n)] + ["lambda"] + xi_cols + ["re", "im"])
            for a, d in enumerate(p.directions):
                for i, lam in enumerate(p.lambdas):
                    for k, x in enumerate(p.xi):
                        v = self.values[a, i, k]
                        w.writerow([repr(float(t)) for t in d] + [repr(float(lam))]
                                   + [repr(float(t)) for t in x] + [repr(float(v.real)), repr(float(v.imag))])
        else:
            w.writerow(["lambda"] + xi_cols + ["re", "im"])
            for i, lam in enumerate(p.lambdas):
                for k, x in enumerate(p.xi):
                    v = self.values[i, k]
                    w.writerow([repr(float(lam))] + [repr(float(t)) for t in x] + [repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# forward transform
# ---------------------------------------------------------------------------

def _samples(f, plan):
    if callable(f):
        f = f(plan.source.nodes if plan.n > 1 else plan.source.nodes[:, 0])
    f = np.asarray(f, dtype=float).reshape(-1)
    if f.shape != (len(plan.source),):
        raise ValueError("samples must align with the source quadrature nodes")
    if not np.all(np.isfinite(f)):
        raise ValueError("samples must be finite")
    return f


_BLOCK = 256


def _blocks(plan):
    for start in range(0, len(plan.xi), _BLOCK):
        yield start, plan.xi[start:start + _BLOCK][:, None, :] - plan.source.nodes[None, :, :]


def _cell_sums(plan, wf, lam, direction=None):
    """F(lam, xi_k) for every xi_k; conj(kernel) integrated against w f."""
    weights = plan.source.weights
    out = np.empty(len(plan.xi), dtype=complex)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(plan.source.nodes))))
    total = float(np.sum(np.abs(weights)))
    for start, d in _blocks(plan):
        hit = None
        if plan.singular:
            hit = np.linalg.norm(d, axis=2) <= tol
            for row in np.nonzero(hit.any(axis=1))[0]:
                x = plan.xi[start + row]
                frac = float(np.sum(np.abs(weights[hit[row]]))) / total
                if frac > _SKIP_LIMIT:
                    raise ValueError(f"singular kernel: {frac:.3%} of quadrature weight coincides with xi={x}")
                warnings.warn(f"skipping {int(hit[row].sum())} quadrature node(s) at xi={x} (singular kernel)",
                              RuntimeWarning, stacklevel=3)
            if hit.any():
                d = d.copy()
                d[hit] = 1.0  # any nonzero displacement; the entries are zeroed below
            else:
                hit = None
        kv = np.asarray(plan.kernel(lam, d, direction), dtype=complex)
        if hit is not None:
            kv[hit] = 0.0
        out[start:start + len(kv)] = kv.real @ wf - 1j * (kv.imag @ wf)
    return out


def _cj(plan, lam):
    vals = np.empty(len(plan.xi))
    for start, d in _blocks(plan):
        kv = np.asarray(plan.kernel(lam, d), dtype=float)
        vals[start:start + len(kv)] = kv**2 @ plan.source.weights
    return vals


def forward_transform(f, plan):
    """``F(lam, xi) = sum_q w_q f(x_q) conj(g(lam |xi - x_q|))`` on every grid cell.

    ``f`` is an array of samples on the plan's source nodes or a callable.
    For a finite-domain ``j`` plan the harmonic part is subtracted first and
    each cell is divided by ``C_J(lam, xi)``.
    """
    f = _samples(f, plan)
    if plan.kind == "j" and plan.harmonic is not None:
        f = f - np.asarray(plan.harmonic(plan.source.nodes), dtype=float).reshape(-1)
    wf = plan.source.weights * f
    if plan.kind == "convdiff":
        vals = np.stack([np.stack([_cell_sums(plan, wf, lam, d) for lam in plan.lambdas])
                         for d in plan.directions])
        return SpectralField(vals, plan)
    vals = np.stack([_cell_sums(plan, wf, lam) for lam in plan.lambdas])
    if plan.kind == "j" and plan.finite:
        cj = np.stack([_cj(plan, lam) for lam in plan.lambdas])
        if np.any(cj <= 1e-14 * float(np.sum(plan.source.weights))):
            raise ValueError("C_J vanishes for some (lambda, xi) cell")
        return SpectralField(vals / cj, plan, cj)
    return SpectralField(vals, plan)


# ---------------------------------------------------------------------------
# admissibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdmissibilityReport:
    """``C = 1/2 int |G|^2/|lam| dlam`` over the truncated range plus tail estimates.

    ``C`` is None when ``convergent`` is False. ``tails`` are the estimated
    contributions of (0, lam_min) and (lam_max, inf).
    """

    C: float
    convergent: bool
    tails: tuple
    lam_range: tuple
    reason: str = ""


def _radial_rule(r_max, panels, order, grading=30):
    # uniform panels, the first one split geometrically toward r = 0
    x, wx = np.polynomial.legendre.leggauss(order)
    h = r_max / panels
    edges = np.concatenate([[0.0], h * 0.5 ** np.arange(grading, 0, -1), np.linspace(h, r_max, panels)])
    a, b = edges[:-1, None], edges[1:, None]
    r = (0.5 * (b - a) * x + 0.5 * (b + a)).ravel()
    w = (0.5 * (b - a) * wx).ravel()
    return r, w


def _radial_fourier(profile, n, omegas, r_max, order):
    """n-dimensional Fourier transform of a radial profile, truncated at ``r_max``.

    Each frequency gets its own panel count (about two panels per period).
    """
    nu = n / 2.0 - 1.0
    out = np.empty(len(omegas), dtype=complex)
    for i, om in enumerate(omegas):
        r, w = _radial_rule(r_max, max(8, int(math.ceil(om * r_max / math.pi))), order)
        g = np.asarray(profile(r), dtype=complex)
        if n == 1:
            ker = 2.0 * np.cos(om * r)
        else:
            # (2 pi)^{n/2} omega^{-nu} int g(r) J_nu(omega r) r^{n/2} dr
            ker = (2 * math.pi) ** (n / 2.0) * special.jv(nu, om * r) * r ** (n / 2.0) * om ** (-nu)
        out[i] = (g * ker) @ w
    return out


def _support_radius(profile, n, tail_tol):
    """Radius beyond which |g| r^(n-1) stays below tail_tol times its peak, or None."""
    r = np.geomspace(1e-6, 1e4, 4000)
    with np.errstate(all="ignore"):
        g = np.asarray(profile(r), dtype=complex)
    weight = np.abs(g) * r ** (n - 1)
    if not np.all(np.isfinite(weight)):
        return None
    big = np.nonzero(weight > tail_tol * max(float(np.max(weight)), 1e-300))[0]
    if big.size == 0 or big[-1] >= len(r) - 1:
        return None
    return float(r[big[-1] + 1])


def admissibility(kernel, lam_range=(1e-3, 1e2), resolution=16, *, n=None, r_max=None, tail_tol=1e-10):
    """Numerical admissibility constant of a radial analyzing kernel.

    ``kernel`` is a :class:`KernelSpec` (its unit-scale radial profile is used)
    or a callable profile ``g(r)`` together with ``n``. ``resolution`` is the
    number of Gauss points per radial panel and per log-frequency panel.
    """
    lo, hi = map(float, lam_range)
    if not (0 < lo < hi):
        raise ValueError("lambda range must satisfy 0 < lo < hi")
    if isinstance(kernel, KernelSpec):
        if kernel.family.anisotropic:
            raise ValueError("admissibility needs an isotropic kernel")
        n = kernel.n
        profile = kernel.with_scale(1.0).radial
    else:
        if n is None:
            raise ValueError("callable profiles need the dimension n")
        profile = kernel
    if r_max is None:
        r_max = _support_radius(profile, n, tail_tol)
        if r_max is None:
            return AdmissibilityReport(None, False, (math.inf, math.inf), (lo, hi),
                                       "profile does not decay; its Fourier transform is not a function")
    r_max = float(r_max)
    order = int(resolution)
    # Gauss-Legendre in log(lambda); integrand |G|^2 / lambda dlambda = |G|^2 dlog(lambda)
    t, wt = np.polynomial.legendre.leggauss(order)
    decades = max(1, int(math.ceil(math.log10(hi / lo))))
    edges = np.linspace(math.log(lo), math.log(hi), 4 * decades + 1)
    a, b = edges[:-1, None], edges[1:, None]
    s = (0.5 * (b - a) * t + 0.5 * (b + a)).ravel()
    ws = (0.5 * (b - a) * wt).ravel()
    G = _radial_fourier(profile, n, np.exp(s), r_max, order)
    G2 = np.abs(G) ** 2
    C = float(G2 @ ws)
    # local power laws at both ends give the tail integrals
    ends = _radial_fourier(profile, n, np.array([lo, 2 * lo, hi / 2, hi]), r_max, order)
    e2 = np.abs(ends) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        p_lo = math.log(e2[1] / e2[0]) / math.log(2) if e2[0] > 0 and e2[1] > 0 else math.inf
        p_hi = math.log(e2[3] / e2[2]) / math.log(2) if e2[2] > 0 and e2[3] > 0 else -math.inf
    peak = max(float(np.max(G2)), 1e-300)
    if e2[0] <= 1e-28 * peak:
        tail_lo = 0.0
    elif p_lo > 0.1:
        tail_lo = float(e2[0]) / p_lo
    else:
        return AdmissibilityReport(None, False, (math.inf, None), (lo, hi),
                                   "|G(lambda)|^2 does not vanish as lambda -> 0")
    if e2[3] <= 1e-28 * peak:
        tail_hi = 0.0
    elif p_hi < -0.1:
        tail_hi = float(e2[3]) / -p_hi
    else:
        return AdmissibilityReport(None, False, (tail_lo, math.inf), (lo, hi),
                                   "|G(lambda)|^2 does not decay as lambda -> infinity")
    if not C > 0:
        return AdmissibilityReport(None, False, (tail_lo, tail_hi), (lo, hi), "C is zero")
    return AdmissibilityReport(C, True, (tail_lo, tail_hi), (lo, hi))


# ---------------------------------------------------------------------------
# inverse transform
# ---------------------------------------------------------------------------

def finite_j_normalizer(n, lam):
    """Radial Fourier inversion density ``(2 pi)^-n |S^{n-1}| lam^{n-1}`` (1/pi in 1D)."""
    return (2 * math.pi) ** (-n) * unit_sphere_surface(n) * np.asarray(lam, dtype=float) ** (n - 1)


def inverse_transform(field_, points, admissibility_report=None):
    """Reconstruct samples at ``points`` from a spectral field.

    ``j`` plans with ``finite=True`` use :func:`finite_j_normalizer` as the
    scale density and add the harmonic part back. All other plans need a
    convergent :class:`AdmissibilityReport`; the scale density is then
    ``lam^(2n-1) / C``.
    """
    plan = field_.plan
    if plan.xi_weights is None:
        raise ValueError("inversion needs xi weights on the plan")
    if plan.kind == "convdiff":
        raise ValueError("convdiff transforms have no inverse here")
    pts = np.asarray(points, dtype=float)
    if plan.n == 1 and pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2 or pts.shape[1] != plan.n:
        raise ValueError(f"points must have shape (m, {plan.n})")
    lams = plan.lambdas
    if plan.kind == "j" and plan.finite:
        density = finite_j_normalizer(plan.n, lams)
    else:
        rep = admissibility_report
        if rep is None or not rep.convergent:
            raise ValueError("inverse needs a convergent admissibility constant"
                             + ("" if rep is None else f" ({rep.reason})"))
        density = lams ** (2 * plan.n - 1) / rep.C
    coef = field_.values * (plan.lambda_weights * density)[:, None] * plan.xi_weights[None, :]
    out = np.zeros(len(pts), dtype=complex)
    d = pts[:, None, :] - plan.xi[None, :, :]
    for i, lam in enumerate(lams):
        if not np.any(coef[i]):
            continue
        kv = np.asarray(plan.kernel(lam, d), dtype=complex)
        out += kv @ coef[i]
    if plan.kind == "j" and plan.harmonic is not None:
        out += np.asarray(plan.harmonic(pts), dtype=float).reshape(-1)
    if plan.kind in ("j", "y"):
        return out.real
    return out


# ---------------------------------------------------------------------------
# Helmholtz-Laplace transform
# ---------------------------------------------------------------------------

def hlt_forward(f, mus, xi, quadrature, sigma):
    """``L(mu, xi) = sum_q w_q f(x_q) w_n(mu |xi - x_q|)`` with the literature-normalized kernel.

    ``sigma`` is the caller's growth bound of ``f``; every ``mu`` must exceed it.
    Returns an array of shape (len(mus), len(xi)).
    """
    mus = np.asarray(mus, dtype=float).reshape(-1)
    if np.any(mus <= sigma):
        raise ValueError(f"every mu must exceed sigma = {sigma!r}")
    n = quadrature.nodes.shape[1]
    xi = np.asarray(xi, dtype=float).reshape(-1, n)
    if callable(f):
        f = f(quadrature.nodes if n > 1 else quadrature.nodes[:, 0])
    f = np.asarray(f, dtype=float).reshape(-1)
    if f.shape != (len(quadrature),):
        raise ValueError("samples must align with the quadrature nodes")
    wf = quadrature.weights * f
    out = np.empty((len(mus), len(xi)))
    total = float(np.sum(quadrature.weights))
    for i, mu in enumerate(mus):
        spec = KernelSpec(KernelFamily.MODIFIED_DECAYING, n, mu, normalization="printed")
        for k, x in enumerate(xi):
            r = np.linalg.norm(x - quadrature.nodes, axis=1)
            keep = r > 0 if n > 1 else np.ones(len(r), bool)
            if n > 1 and not np.all(keep):
                if float(np.sum(quadrature.weights[~keep])) / total > _SKIP_LIMIT:
                    raise ValueError("singular kernel coincides with too much quadrature weight")
                warnings.warn(f"skipping quadrature node(s) at xi={x} (singular kernel)", RuntimeWarning,
                              stacklevel=2)
            out[i, k] = float(np.real(spec.radial(r[keep])) @ wf[keep])
    return out
