"""Kernel catalog: Helmholtz, modified Helmholtz and convection-diffusion solutions.

Every family is defined by its *shape*:

* regular (general) solutions are normalized to 1 at the origin, e.g.
  ``Phi_n(z) = Gamma(n/2) (z/2)**(1 - n/2) J_{n/2-1}(z)`` so ``Phi_3(z) = sin(z)/z``;
* singular (fundamental) solutions carry unit source strength, i.e. they solve
  ``-(lap u +/- s**2 u) = delta`` and their flux through a small sphere is -1.

The literature prefactors (``lambda**(n - 1/2)`` and friends) are available as
a separate multiplier, :func:`printed_prefactor`, and can be folded into a
:class:`KernelSpec` with ``normalization="printed"``.
"""
from dataclasses import dataclass, field
from enum import Enum
import math

import numpy as np
from scipy.special import gamma

from . import specfun as sf

__all__ = [
    "KernelFamily",
    "ConvectionParams",
    "KernelSpec",
    "DivergenceReport",
    "unit_sphere_surface",
    "regular_shape",
    "regular_shape_deriv",
    "growing_shape",
    "growing_shape_deriv",
    "helmholtz_regular",
    "helmholtz_regular_deriv",
    "helmholtz_singular",
    "helmholtz_complex",
    "psi_composite",
    "modified_helmholtz",
    "convdiff_kernel",
    "dimension_exp",
    "closed_form",
    "printed_prefactor",
    "divergence_check",
    "sommerfeld_residual",
]

DIMENSIONS = (1, 2, 3, 4, 5)
# below this argument the regular shapes are summed from their power series
_SERIES_CUT = 2.0
_SERIES_TERMS = 30


class KernelFamily(Enum):
    HELMHOLTZ_REGULAR = "helmholtz_regular"
    HELMHOLTZ_REGULAR_DERIV = "helmholtz_regular_deriv"
    HELMHOLTZ_SINGULAR = "helmholtz_singular"
    HELMHOLTZ_COSINE = "helmholtz_cosine"
    HELMHOLTZ_OUTGOING = "helmholtz_outgoing"
    HELMHOLTZ_INCOMING = "helmholtz_incoming"
    PSI_COMPOSITE = "psi_composite"
    MODIFIED_DECAYING = "modified_decaying"
    MODIFIED_GROWING = "modified_growing"
    CONVDIFF_FUNDAMENTAL = "convdiff_fundamental"
    CONVDIFF_GENERAL = "convdiff_general"
    CONVDIFF_RAPID = "convdiff_rapid"
    DIM_EXP_DECAY = "dim_exp_decay"
    DIM_EXP_GROWTH = "dim_exp_growth"
    DIM_EXP_OSCILLATORY = "dim_exp_oscillatory"

    @property
    def singular(self):
        return self in _SINGULAR

    @property
    def complex_valued(self):
        return self in _COMPLEX

    @property
    def anisotropic(self):
        return self in _CONVDIFF


_SINGULAR = {
    KernelFamily.HELMHOLTZ_SINGULAR,
    KernelFamily.HELMHOLTZ_OUTGOING,
    KernelFamily.HELMHOLTZ_INCOMING,
    KernelFamily.MODIFIED_DECAYING,
    KernelFamily.CONVDIFF_FUNDAMENTAL,
    KernelFamily.DIM_EXP_DECAY,
    KernelFamily.DIM_EXP_OSCILLATORY,
}
_COMPLEX = {
    KernelFamily.HELMHOLTZ_OUTGOING,
    KernelFamily.HELMHOLTZ_INCOMING,
    KernelFamily.PSI_COMPOSITE,
    KernelFamily.DIM_EXP_OSCILLATORY,
}
_CONVDIFF = {
    KernelFamily.CONVDIFF_FUNDAMENTAL,
    KernelFamily.CONVDIFF_GENERAL,
    KernelFamily.CONVDIFF_RAPID,
}


def unit_sphere_surface(n):
    """Surface measure of the unit sphere in R^n: 2 pi^(n/2) / Gamma(n/2)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def _check_dim(n):
    if n not in DIMENSIONS:
        raise ValueError(f"dimension must be one of {DIMENSIONS}, got {n}")


def _nu(n):
    return n / 2.0 - 1.0


# ---------------------------------------------------------------------------
# normalized regular shapes, functions of z = scale * r
# ---------------------------------------------------------------------------

def _series(n, z, sign, deriv=False):
    # Gamma(n/2) sum_m (sign z^2/4)^m / (m! Gamma(m + n/2)), or its z-derivative
    z = np.asarray(z, dtype=float)
    q = sign * 0.25 * z * z
    a = n / 2.0
    term = np.ones_like(z)
    total = np.zeros_like(z) if deriv else term.copy()
    for m in range(1, _SERIES_TERMS):
        term = term * q / (m * (m - 1 + a))
        if deriv:
            with np.errstate(divide="ignore", invalid="ignore"):
                total = total + np.where(z == 0, 0.0, 2 * m * term / z)
        else:
            total = total + term
    return total


def _blend(z, small, large):
    z = np.asarray(z, dtype=float)
    mask = z < _SERIES_CUT
    if not np.any(mask):
        return large(z)
    if np.all(mask):
        return small(z)
    out = np.empty_like(z)
    out[mask] = small(z[mask])
    out[~mask] = large(z[~mask])
    return out


def regular_shape(n, z):
    """Phi_n(z): regular Helmholtz solution normalized to Phi_n(0) = 1."""
    _check_dim(n)
    z = np.abs(np.asarray(z, dtype=float))
    if n == 1:
        out = np.cos(z)
    elif n == 2:
        out = sf.bessel_first_kind(0, z)
    else:
        large = {
            3: lambda t: np.sin(t) / t,
            4: lambda t: 2.0 * sf.bessel_first_kind(1, t) / t,
            5: lambda t: 3.0 * (np.sin(t) - t * np.cos(t)) / t**3,
        }[n]
        out = _blend(z, lambda t: _series(n, t, -1.0), large)
    return out if np.ndim(out) else float(out)


def regular_shape_deriv(n, z):
    """dPhi_n/dz, equal to -z Phi_{n+2}(z) / n."""
    _check_dim(n)
    z = np.abs(np.asarray(z, dtype=float))
    if n == 1:
        out = -np.sin(z)
    elif n == 2:
        out = -sf.bessel_first_kind(1, z)
    else:
        large = {
            3: lambda t: (t * np.cos(t) - np.sin(t)) / t**2,
            4: lambda t: 2.0 * (t * sf.bessel_first_kind(0, t) - 2.0 * sf.bessel_first_kind(1, t)) / t**2,
            5: lambda t: 3.0 * ((t * t - 3.0) * np.sin(t) + 3.0 * t * np.cos(t)) / t**4,
        }[n]
        out = _blend(z, lambda t: _series(n, t, -1.0, deriv=True), large)
    return out if np.ndim(out) else float(out)


def _growing_scaled(n, z):
    """exp(-z) * W_n(z), W_n the growing modified shape with W_n(0) = 1."""
    z = np.abs(np.asarray(z, dtype=float))
    if n == 1:
        return 0.5 * (1.0 + np.exp(-2.0 * z))
    if n == 2:
        return sf.modified_bessel_first_scaled(0, z)
    nu = _nu(n)
    c = gamma(nu + 1.0) * 2.0**nu

    def small(t):
        return _series(n, t, 1.0) * np.exp(-t)

    def large(t):
        return c * t ** (-nu) * sf.modified_bessel_first_scaled(nu, t)

    return _blend(z, small, large)


def growing_shape(n, z):
    """Regular modified-Helmholtz solution normalized to 1 at the origin.

    ``cosh z`` for n = 1, ``I_0(z)`` for n = 2, ``sinh(z)/z`` for n = 3, ...
    """
    _check_dim(n)
    z = np.abs(np.asarray(z, dtype=float))
    if np.any(z > sf.OVERFLOW_LIMIT):
        raise OverflowError("growing kernel overflows; use the rapid-decay family for far probes")
    out = _growing_scaled(n, z) * np.exp(z)
    return out if np.ndim(out) else float(out)


def growing_shape_deriv(n, z):
    """dW_n/dz = z W_{n+2}(z) / n."""
    _check_dim(n)
    z = np.abs(np.asarray(z, dtype=float))
    if n == 1:
        out = np.sinh(z)
    elif n == 2:
        out = sf.modified_bessel_first(1, z)
    else:
        large = {
            3: lambda t: (t * np.cosh(t) - np.sinh(t)) / t**2,
            4: lambda t: 2.0 * (t * sf.modified_bessel_first(0, t) - 2.0 * sf.modified_bessel_first(1, t)) / t**2,
            5: lambda t: 3.0 * ((t * t + 3.0) * np.sinh(t) - 3.0 * t * np.cosh(t)) / t**4,
        }[n]
        out = _blend(z, lambda t: _series(n, t, 1.0, deriv=True), large)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# unit-source fundamental solutions and their r-derivatives
# ---------------------------------------------------------------------------

def _positive_r(r):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("kernel is singular at r = 0")
    return r


def _helmholtz_parts(n, lam, r, deriv=False):
    """(J-part, Y-part) of the unit-source Helmholtz solution, or their r-derivatives.

    The incoming solution is ``J-part + i * Y-part`` where for n >= 2
    ``Y-part = -(1/4) (lam / (2 pi r))**nu Y_nu(lam r)``.
    """
    if n == 1:
        z = lam * r
        if deriv:
            return -np.sin(z) / 2.0, -np.cos(z) / 2.0
        return np.cos(z) / (2.0 * lam), -np.sin(z) / (2.0 * lam)
    nu = _nu(n)
    z = lam * r
    pref = 0.25 * (lam / (2.0 * math.pi)) ** nu
    rn = r ** (-nu)
    if not deriv:
        return pref * rn * sf.bessel_first_kind(nu, z), -pref * rn * sf.bessel_second_kind(nu, z)
    dj = rn * (lam * sf.bessel_first_kind_deriv(nu, z) - nu / r * sf.bessel_first_kind(nu, z))
    dy = rn * (lam * sf.bessel_second_kind_deriv(nu, z) - nu / r * sf.bessel_second_kind(nu, z))
    return pref * dj, -pref * dy


def _incoming(n, lam, r, deriv=False):
    # (i/4)(lam / 2 pi r)^nu (J + iY): the Y-part is real, the J-part imaginary.
    # In 1D this is (i / 2 lam) exp(i lam r).
    a, b = _helmholtz_parts(n, lam, r, deriv)
    return b + 1j * a


def _singular_real(n, lam, r, deriv=False):
    return _helmholtz_parts(n, lam, r, deriv)[1]


def _decaying(n, mu, r, deriv=False):
    if n == 1:
        e = np.exp(-mu * r)
        return -0.5 * e if deriv else e / (2.0 * mu)
    nu = _nu(n)
    z = mu * r
    pref = (2.0 * math.pi) ** (-n / 2.0) * mu**nu
    rn = r ** (-nu)
    if deriv:
        return pref * rn * (mu * sf.modified_bessel_second_deriv(nu, z) - nu / r * sf.modified_bessel_second(nu, z))
    return pref * rn * sf.modified_bessel_second(nu, z)


# ---------------------------------------------------------------------------
# convection parameters and the kernel handle
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConvectionParams:
    """Velocity, diffusivity and reaction of ``D lap u + v.grad u - k u = 0``."""

    velocity: tuple
    diffusivity: float
    reaction: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "velocity", tuple(float(v) for v in np.atleast_1d(self.velocity)))
        if not self.diffusivity > 0:
            raise ValueError("diffusivity must be > 0")
        if self.reaction < 0:
            raise ValueError("reaction must be >= 0")

    @property
    def rho(self):
        speed = math.hypot(*self.velocity) if len(self.velocity) > 1 else abs(self.velocity[0])
        return math.sqrt((speed / (2.0 * self.diffusivity)) ** 2 + self.reaction / self.diffusivity)

    def drift(self, d):
        """exp(-v.d / 2D) for displacements ``d`` of shape (..., n)."""
        v = np.asarray(self.velocity)
        return np.exp(-(np.asarray(d, dtype=float) @ v) / (2.0 * self.diffusivity))


_ZERO_SCALE_OK = {KernelFamily.HELMHOLTZ_REGULAR}


@dataclass(frozen=True)
class KernelSpec:
    """A fully parameterized basis function.

    ``scale`` is lambda (Helmholtz), mu (modified Helmholtz) or is ignored for
    the convection-diffusion families, whose scale rho follows from
    ``convection``.
    """

    family: KernelFamily
    n: int
    scale: float = 1.0
    convection: ConvectionParams = None
    normalization: str = "shape"
    _factor: complex = field(init=False, repr=False, compare=False, default=1.0)

    def __post_init__(self):
        fam = KernelFamily(self.family)
        object.__setattr__(self, "family", fam)
        _check_dim(self.n)
        if self.normalization not in ("shape", "printed"):
            raise ValueError("normalization must be 'shape' or 'printed'")
        if fam.anisotropic:
            if self.convection is None:
                raise ValueError(f"{fam.value} requires convection parameters")
            if len(self.convection.velocity) != self.n:
                raise ValueError("velocity length must equal the dimension")
            object.__setattr__(self, "scale", self.convection.rho)
        elif self.convection is not None:
            raise ValueError(f"{fam.value} takes no convection parameters")
        if self.scale < 0 or not np.isfinite(self.scale):
            raise ValueError("scale must be finite and >= 0")
        if self.scale == 0 and fam not in _ZERO_SCALE_OK:
            raise ValueError(f"scale 0 is only meaningful for {KernelFamily.HELMHOLTZ_REGULAR.value}")
        factor = printed_prefactor(fam, self.n, self.scale) if self.normalization == "printed" else 1.0
        object.__setattr__(self, "_factor", factor)

    @property
    def rho(self):
        return self.scale

    def with_scale(self, scale):
        return KernelSpec(self.family, self.n, scale, self.convection, self.normalization)

    # -- isotropic evaluation ------------------------------------------------
    def radial(self, r):
        """Kernel value as a function of distance (isotropic families only)."""
        if self.family.anisotropic:
            raise TypeError("anisotropic kernel needs displacements; pass d to KernelSpec")
        out = _radial_value(self.family, self.n, self.scale, np.asarray(r, dtype=float))
        out = out * self._factor if self._factor != 1.0 else out
        return out if np.ndim(out) else out[()]

    def radial_deriv(self, r):
        """d/dr of :meth:`radial`."""
        if self.family.anisotropic:
            raise TypeError("anisotropic kernel has no radial derivative")
        out = _radial_deriv(self.family, self.n, self.scale, np.asarray(r, dtype=float))
        out = out * self._factor if self._factor != 1.0 else out
        return out if np.ndim(out) else out[()]

    # -- general evaluation --------------------------------------------------
    def __call__(self, d):
        """Evaluate at displacements ``d = x - x_k`` of shape (..., n)."""
        d = _as_displacements(d, self.n)
        r = np.linalg.norm(d, axis=-1)
        if not self.family.anisotropic:
            return self.radial(r)
        out = _convdiff_value(self.family, self.n, self.convection, d, r) * self._factor
        return out if np.ndim(out) else out[()]

    def matrix(self, points, centers):
        """Kernel matrix M[i, k] = kernel(points[i] - centers[k])."""
        p = _as_points(points, self.n)
        c = _as_points(centers, self.n)
        d = p[:, None, :] - c[None, :, :]
        return self(d)


def _as_displacements(d, n):
    d = np.asarray(d, dtype=float)
    if n == 1 and (d.ndim == 0 or d.shape[-1] != 1):
        d = d[..., None]
    if d.shape[-1] != n:
        raise ValueError(f"displacements must have trailing dimension {n}")
    return d


def _as_points(p, n):
    p = np.asarray(p, dtype=float)
    if n == 1 and p.ndim == 1:
        p = p[:, None]
    if p.ndim != 2 or p.shape[1] != n:
        raise ValueError(f"points must have shape (m, {n})")
    return p


def _radial_value(fam, n, s, r):
    F = KernelFamily
    if fam in (F.HELMHOLTZ_REGULAR, F.HELMHOLTZ_COSINE):
        return np.asarray(regular_shape(n, s * r))
    if fam is F.HELMHOLTZ_REGULAR_DERIV:
        return np.asarray(regular_shape_deriv(n, s * r))
    if fam is F.PSI_COMPOSITE:
        return regular_shape_deriv(n, s * r) - 1j * np.asarray(regular_shape(n, s * r))
    if fam in (F.MODIFIED_GROWING, F.DIM_EXP_GROWTH):
        return np.asarray(growing_shape(n, s * r))
    if fam is F.HELMHOLTZ_SINGULAR:
        if n > 1:
            r = _positive_r(r)
        return _singular_real(n, s, r)
    if fam in (F.HELMHOLTZ_INCOMING, F.DIM_EXP_OSCILLATORY):
        if n > 1:
            r = _positive_r(r)
        return _incoming(n, s, r)
    if fam is F.HELMHOLTZ_OUTGOING:
        if n > 1:
            r = _positive_r(r)
        return np.conj(_incoming(n, s, r))
    if fam in (F.MODIFIED_DECAYING, F.DIM_EXP_DECAY):
        if n > 1:
            r = _positive_r(r)
        return _decaying(n, s, r)
    raise TypeError(f"{fam.value} is not isotropic")


def _radial_deriv(fam, n, s, r):
    F = KernelFamily
    if fam in (F.HELMHOLTZ_REGULAR, F.HELMHOLTZ_COSINE):
        return s * np.asarray(regular_shape_deriv(n, s * r))
    if fam is F.HELMHOLTZ_REGULAR_DERIV:
        # d/dz (-z Phi_{n+2}/n) via the Helmholtz ODE: Phi'' = -Phi - (n-1)/z Phi'
        z = s * r
        p1 = np.asarray(regular_shape_deriv(n, z))
        with np.errstate(divide="ignore", invalid="ignore"):
            p2 = -np.asarray(regular_shape(n, z)) - np.where(z == 0, p1 * 0 + 1.0 / n, (n - 1) * p1 / z)
            p2 = np.where(z == 0, -1.0 / n, p2)
        return s * p2
    if fam is F.PSI_COMPOSITE:
        dphi = _radial_deriv(F.HELMHOLTZ_REGULAR_DERIV, n, s, r)
        return dphi - 1j * _radial_deriv(F.HELMHOLTZ_REGULAR, n, s, r)
    if fam in (F.MODIFIED_GROWING, F.DIM_EXP_GROWTH):
        return s * np.asarray(growing_shape_deriv(n, s * r))
    r = _positive_r(r)
    if fam is F.HELMHOLTZ_SINGULAR:
        return _singular_real(n, s, r, deriv=True)
    if fam in (F.HELMHOLTZ_INCOMING, F.DIM_EXP_OSCILLATORY):
        return _incoming(n, s, r, deriv=True)
    if fam is F.HELMHOLTZ_OUTGOING:
        return np.conj(_incoming(n, s, r, deriv=True))
    if fam in (F.MODIFIED_DECAYING, F.DIM_EXP_DECAY):
        return _decaying(n, s, r, deriv=True)
    raise TypeError(f"{fam.value} is not isotropic")


def _convdiff_value(fam, n, conv, d, r):
    rho = conv.rho
    v = np.asarray(conv.velocity)
    adv = -(d @ v) / (2.0 * conv.diffusivity)
    F = KernelFamily
    if fam is F.CONVDIFF_FUNDAMENTAL:
        if np.any(r <= 0):
            raise ValueError("fundamental convection-diffusion kernel is singular at d = 0")
        return np.exp(adv) * _decaying(n, rho, r)
    if fam is F.CONVDIFF_GENERAL:
        return np.exp(adv + rho * r) * _growing_scaled(n, rho * r)
    if fam is F.CONVDIFF_RAPID:
        # exp(-2 rho r) W_n(rho r) = exp(-rho r) * [exp(-rho r) W_n(rho r)]
        return np.exp(adv - rho * r) * _growing_scaled(n, rho * r)
    raise TypeError(f"{fam.value} is not a convection-diffusion family")


# ---------------------------------------------------------------------------
# literature prefactors
# ---------------------------------------------------------------------------

def printed_prefactor(family, n, scale):
    """Multiplier turning the library shape into the published kernel expression.

    For the fundamental families the published kernels equal
    ``scale**1.5`` times the unit-source solution (up to a phase for n = 1);
    for the regular families the factor absorbs ``lambda**(n - 1/2)``, the
    ``(2 pi)**(1 - n/2)`` term and the origin normalization. For n = 1 the
    growing shape is ``cosh`` whereas the published form is ``exp``; the
    returned factor matches the two at the origin only.
    """
    fam = KernelFamily(family)
    _check_dim(n)
    s = float(scale)
    F = KernelFamily
    nu = _nu(n)
    if s == 0:
        return 1.0
    # (2 pi)^(-nu) / (Gamma(nu+1) 2^nu) converts z^-nu C_nu into the normalized shape
    shape_to_bessel = (2.0 * math.pi) ** (-nu) / (gamma(nu + 1.0) * 2.0**nu) if n > 1 else 1.0
    if fam in (F.HELMHOLTZ_REGULAR, F.HELMHOLTZ_REGULAR_DERIV, F.PSI_COMPOSITE):
        return 1.0 / (2.0 * math.sqrt(s)) if n == 1 else s ** (n - 0.5) / 4.0 * shape_to_bessel
    if fam is F.HELMHOLTZ_COSINE:
        return math.sqrt(s) / 2.0 if n == 1 else s ** (n - 0.5) / (2.0 * math.pi) * shape_to_bessel
    if fam in (F.MODIFIED_GROWING, F.DIM_EXP_GROWTH, F.CONVDIFF_GENERAL, F.CONVDIFF_RAPID):
        return math.sqrt(s) / 2.0 if n == 1 else s ** (n - 0.5) / (2.0 * math.pi) * shape_to_bessel
    if fam is F.HELMHOLTZ_SINGULAR:
        return -(s**1.5) / math.pi if n == 1 else -(2.0 / math.pi) * s**1.5
    if fam in (F.HELMHOLTZ_INCOMING, F.DIM_EXP_OSCILLATORY):
        return -1j * s**1.5 if n == 1 else s**1.5
    if fam in (F.HELMHOLTZ_OUTGOING, F.MODIFIED_DECAYING, F.DIM_EXP_DECAY, F.CONVDIFF_FUNDAMENTAL):
        return s**1.5
    raise ValueError(f"no prefactor for {fam.value}")


# ---------------------------------------------------------------------------
# convenience entry points
# ---------------------------------------------------------------------------

def helmholtz_regular(n, lam, r):
    """Phi_n(lam r); identically 1 when lam = 0."""
    if lam < 0:
        raise ValueError("lam must be >= 0")
    if np.any(np.asarray(r) < 0):
        raise ValueError("r must be >= 0")
    return KernelSpec(KernelFamily.HELMHOLTZ_REGULAR, n, lam).radial(r)


def helmholtz_regular_deriv(n, lam, r):
    return KernelSpec(KernelFamily.HELMHOLTZ_REGULAR_DERIV, n, lam).radial(r)


def helmholtz_singular(n, lam, r):
    """Real part of the unit-source Helmholtz fundamental solution.

    ``-(1/4) (lam / 2 pi r)**(n/2-1) Y_{n/2-1}(lam r)``; ``cos(lam r)/(4 pi r)`` in 3D.
    """
    if lam <= 0:
        raise ValueError("lam must be > 0")
    if np.any(np.asarray(r, dtype=float) <= 0):
        raise ValueError("singular Helmholtz kernel is undefined at r = 0")
    return KernelSpec(KernelFamily.HELMHOLTZ_SINGULAR, n, lam).radial(r)


def helmholtz_complex(n, lam, r, orientation="outgoing"):
    """Complex Helmholtz kernel; ``outgoing`` is the conjugate of ``incoming``.

    ``incoming`` is built on H^(1) (as the transform kernel g_n), ``outgoing``
    on H^(2); only the latter satisfies ``r (dh/dr + i lam h) -> 0``.
    """
    if lam <= 0:
        raise ValueError("lam must be > 0")
    if np.any(np.asarray(r, dtype=float) <= 0):
        raise ValueError("complex Helmholtz kernel is singular at r = 0")
    fam = {"outgoing": KernelFamily.HELMHOLTZ_OUTGOING, "incoming": KernelFamily.HELMHOLTZ_INCOMING}[orientation]
    return KernelSpec(fam, n, lam).radial(r)


def psi_composite(n, lam, r):
    return KernelSpec(KernelFamily.PSI_COMPOSITE, n, lam).radial(r)


def modified_helmholtz(n, mu, r, branch="decaying", normalization="shape"):
    if mu <= 0:
        raise ValueError("mu must be > 0")
    fam = {"decaying": KernelFamily.MODIFIED_DECAYING, "growing": KernelFamily.MODIFIED_GROWING}[branch]
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("r must be >= 0")
    return KernelSpec(fam, n, mu, normalization=normalization).radial(r)


def convdiff_kernel(spec, d):
    if not spec.family.anisotropic:
        raise ValueError("convdiff_kernel needs a convection-diffusion family")
    return spec(d)


def dimension_exp(n, lam, x, mode="decay"):
    """Dimension-dependent exponential; coincides with the matching kernel family."""
    fam = {
        "decay": KernelFamily.DIM_EXP_DECAY,
        "growth": KernelFamily.DIM_EXP_GROWTH,
        "oscillatory": KernelFamily.DIM_EXP_OSCILLATORY,
    }[mode]
    if lam <= 0:
        raise ValueError("lam must be > 0")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("x must be >= 0")
    return np.asarray(KernelSpec(fam, n, lam).radial(x), dtype=complex)[()]


# ---------------------------------------------------------------------------
# Appendix-style elementary closed forms
# ---------------------------------------------------------------------------

def closed_form(n, family, A1, A2, scale, r=None, d=None, convection=None):
    """Elementary closed form of the n-dimensional (n = 2..5) solutions.

    ``family`` is ``"helmholtz"``, ``"modified"`` or ``"convdiff"``. The two
    constants multiply the two independent solutions exactly as written in
    the classical tables, e.g. ``(A1 cos z + A2 sin z) / r`` for the 3D
    Helmholtz case, with ``z = scale * r``. For ``convdiff`` pass the
    displacement ``d`` (shape (..., n)) and ``convection``; the scale is rho.
    """
    if n not in (2, 3, 4, 5):
        raise ValueError("closed forms exist for n = 2..5")
    drift = 1.0
    if family == "convdiff":
        if convection is None or d is None:
            raise ValueError("convdiff closed form needs d and convection")
        d = _as_displacements(d, n)
        r = np.linalg.norm(d, axis=-1)
        scale = convection.rho
        drift = convection.drift(d)
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0) and (A2 != 0 or n > 2):
        raise ValueError("closed form divides by r; r must be > 0")
    z = scale * r
    if family == "helmholtz":
        forms = {
            2: lambda: A1 * sf.bessel_first_kind(0, z) + A2 * sf.bessel_second_kind(0, z),
            3: lambda: (A1 * np.cos(z) + A2 * np.sin(z)) / r,
            4: lambda: (A1 * sf.bessel_first_kind(1, z) + A2 * sf.bessel_second_kind(1, z)) / r,
            5: lambda: (A1 * (z * np.cos(z) - np.sin(z)) + A2 * (z * np.sin(z) + np.cos(z))) / r**3,
        }
    elif family == "modified":
        forms = {
            2: lambda: A1 * sf.modified_bessel_first(0, z) + A2 * sf.modified_bessel_second(0, z),
            3: lambda: (A1 * np.sinh(z) + A2 * np.exp(-z)) / r,
            4: lambda: (A1 * sf.modified_bessel_first(1, z) + A2 * sf.modified_bessel_second(1, z)) / r,
            5: lambda: (A1 * (z * np.cosh(z) - np.sinh(z)) + A2 * (z * np.exp(-z) + np.exp(-z))) / r**3,
        }
    elif family == "convdiff":
        forms = {
            2: lambda: A1 * sf.modified_bessel_first(0, z) + A2 * sf.modified_bessel_second(0, z),
            3: lambda: (A1 * np.cosh(z) + A2 * np.sinh(z)) / r,
            4: lambda: (A1 * sf.modified_bessel_first(1, z) + A2 * sf.modified_bessel_second(1, z)) / r,
            5: lambda: (A1 * (z * np.cosh(z) - np.sinh(z)) + A2 * (z * np.exp(-z) + np.exp(-z))) / r**3,
        }
    else:
        raise ValueError(f"unknown closed-form family {family!r}")
    out = drift * forms[n]()
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DivergenceReport:
    limit: complex
    residual: float
    fundamental: bool


def divergence_check(spec, radii=None):
    """Extrapolate ``r**(n-1) S_n(1) dk/dr`` to r -> 0.

    Two rounds of Richardson extrapolation on a geometric grid remove the
    ``O(r)`` and ``O(r**2)`` error terms. A unit-source fundamental solution gives -1.
    """
    if spec.family.anisotropic:
        raise TypeError("divergence check applies to isotropic families")
    n = spec.n
    if radii is None:
        radii = np.array([1e-2, 1e-3, 1e-4, 1e-5]) / max(spec.scale, 1e-300)
    radii = np.asarray(radii, dtype=float)
    flux = radii ** (n - 1) * unit_sphere_surface(n) * np.asarray(spec.radial_deriv(radii))
    # eliminate O(r) (the 1D kink) and then O(r**2) error terms
    vals = list(flux[-3:])
    rs = radii[-3:]
    for p in (1, 2):
        vals = [
            vals[i + 1] + (vals[i + 1] - vals[i]) / ((rs[i + p - 1] / rs[i + p]) ** p - 1.0)
            for i in range(len(vals) - 1)
        ]
    limit = vals[0]
    if np.isrealobj(limit) or abs(np.imag(limit)) < 1e-14:
        limit = float(np.real(limit))
    fundamental = spec.family.singular
    if not fundamental:
        limit = 0.0 if abs(limit) < 1e-8 else limit
    return DivergenceReport(limit=limit, residual=float(abs(limit + 1.0)), fundamental=fundamental)


def sommerfeld_residual(n, lam, r, orientation="outgoing", relative=False):
    """``|r (dh/dr + i lam h)|``; with ``relative`` divided by ``r lam |h|``."""
    spec = KernelSpec(
        {"outgoing": KernelFamily.HELMHOLTZ_OUTGOING, "incoming": KernelFamily.HELMHOLTZ_INCOMING}[orientation],
        n, lam,
    )
    r = np.asarray(r, dtype=float)
    h = spec.radial(r)
    res = np.abs(r * (spec.radial_deriv(r) + 1j * lam * h))
    if relative:
        res = res / (r * lam * np.abs(h))
    return res if np.ndim(res) else float(res)
