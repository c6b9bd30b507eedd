import cmath
import math

import numpy as np
import pytest

import oracles
from dfw import kernels as K
from dfw.kernels import ConvectionParams, KernelFamily as F, KernelSpec

SQ = math.sqrt(math.pi / 2)


# ---------------------------------------------------------------------------
# documented examples
# ---------------------------------------------------------------------------

def test_unit_sphere_surface():
    assert K.unit_sphere_surface(1) == pytest.approx(2.0)
    assert K.unit_sphere_surface(2) == pytest.approx(2 * math.pi)
    assert K.unit_sphere_surface(3) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_regular_unit_at_origin_and_zero_scale(n):
    assert K.helmholtz_regular(n, 0.0, 7.3) == 1.0
    assert K.helmholtz_regular(n, 2.5, 0.0) == 1.0


def test_regular_examples():
    assert abs(K.helmholtz_regular(3, math.pi, 1.0)) < 1e-15
    with pytest.raises(ValueError):
        K.helmholtz_regular(3, -1.0, 1.0)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_regular_shape_matches_oracle(n):
    z = np.linspace(0.05, 30, 60)
    nu = n / 2 - 1
    got = K.regular_shape(n, z)
    if n == 1:
        ref = np.cos(z)
    else:
        ref = np.array([math.gamma(n / 2) * (t / 2) ** (-nu) * oracles.f_j(nu, t) for t in z])
    assert np.max(np.abs(got - ref)) < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_regular_derivative_identity(n):
    # dPhi_n/dz = -z Phi_{n+2}(z) / n, with Phi_{n+2} from the oracle
    z = np.linspace(0.01, 25, 50)
    nu2 = (n + 2) / 2 - 1
    phi_n2 = np.array([math.gamma((n + 2) / 2) * (t / 2) ** (-nu2) * oracles.f_j(nu2, t) for t in z])
    assert np.max(np.abs(K.regular_shape_deriv(n, z) + z * phi_n2 / n)) < 1e-12


def test_singular_examples():
    assert abs(K.helmholtz_singular(3, 1.7, math.pi / 2 / 1.7)) < 1e-15
    # unit-source convention: A2 = -1/4 multiplies Y0 in 2D
    assert K.helmholtz_singular(2, 1.0, 1.0) == pytest.approx(-0.25 * oracles.f_y(0, 1.0), rel=1e-13)
    a2 = K.closed_form(3, "helmholtz", 1 / (4 * math.pi), 0.0, 1.0, r=2.0)
    assert K.helmholtz_singular(3, 1.0, 2.0) == pytest.approx(a2, rel=1e-12)
    with pytest.raises(ValueError):
        K.helmholtz_singular(3, 1.0, 0.0)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_complex_conjugacy(n):
    r = np.linspace(0.2, 9, 17)
    out = K.helmholtz_complex(n, 1.3, r, "outgoing")
    inc = K.helmholtz_complex(n, 1.3, r, "incoming")
    assert np.allclose(out, np.conj(inc), rtol=0, atol=1e-15)
    assert np.allclose(inc.real, K.helmholtz_singular(n, 1.3, r), atol=1e-15)
    with pytest.raises(ValueError):
        K.helmholtz_complex(n, 1.3, 0.0)


def test_one_dimensional_phase_has_unit_modulus():
    lam = 0.8
    r = np.linspace(0.1, 40, 33)
    g = K.helmholtz_complex(1, lam, r, "incoming")
    # shape is (i / 2 lam) exp(i lam r)
    assert np.allclose(np.abs(g) * 2 * lam, 1.0, atol=1e-15)
    assert np.allclose(g / (1j / (2 * lam)), np.cos(lam * r) + 1j * np.sin(lam * r), atol=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_sommerfeld_residual_decreasing(n):
    lam = 1.7
    radii = np.array([1e2, 1e3, 1e4]) / lam
    rel = K.sommerfeld_residual(n, lam, radii, relative=True)
    absolute = K.sommerfeld_residual(n, lam, radii)
    assert rel[1] < 1e-2
    assert np.all(np.diff(rel) < 0)
    assert np.all(np.diff(absolute) < 0)
    # the incoming wave does not radiate outward
    assert K.sommerfeld_residual(n, lam, radii[1], "incoming", relative=True) > 1.0


def test_sommerfeld_one_dimension_exact():
    assert np.all(K.sommerfeld_residual(1, 2.0, np.array([50.0, 500.0])) < 1e-12)


def test_modified_examples():
    assert K.modified_helmholtz(1, 1.0, 0.0) == 0.5
    for n in range(1, 6):
        assert K.modified_helmholtz(n, 1.0, 200.0) < 1e-80
    b2 = K.closed_form(3, "modified", 1.0, 0.0, 1.0, r=2.0)
    # sinh(z)/r equals growing_shape(z) * scale for the 3D shape sinh(z)/z
    assert K.modified_helmholtz(3, 1.0, 2.0, "growing") * 1.0 == pytest.approx(b2, rel=1e-12)
    assert K.modified_helmholtz(4, 2.0, 0.0, "growing") == 1.0
    with pytest.raises(ValueError):
        K.modified_helmholtz(2, 1.0, 0.0)
    assert K.modified_helmholtz(1, 1.0, 0.0, normalization="printed") == pytest.approx(0.5)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_modified_decaying_matches_oracle(n):
    nu = n / 2 - 1
    mu = 0.7
    for r in (0.05, 0.9, 4.0, 20.0):
        ref = (2 * math.pi) ** (-n / 2) * (mu / r) ** nu * oracles.f_k(nu, mu * r)
        assert K.modified_helmholtz(n, mu, r) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_growing_matches_oracle(n):
    nu = n / 2 - 1
    for z in (0.01, 0.5, 1.99, 2.01, 9.0, 40.0):
        ref = math.gamma(nu + 1) * 2**nu * z ** (-nu) * oracles.f_i(nu, z)
        assert K.growing_shape(n, z) == pytest.approx(ref, rel=1e-12)
        d = K.growing_shape_deriv(n, z)
        h = 1e-5
        fd = (K.growing_shape(n, z + h) - K.growing_shape(n, z - h)) / (2 * h)
        assert d == pytest.approx(fd, rel=1e-7)


def test_growing_overflow_guard():
    with pytest.raises(OverflowError):
        K.modified_helmholtz(3, 1.0, 800.0, "growing")


# ---------------------------------------------------------------------------
# closed forms vs Bessel forms
# ---------------------------------------------------------------------------

RGRID = np.logspace(-1, 1, 100)


def _bessel_forms(n, family, scale, r):
    """(branch for A1, branch for A2, envelope) evaluated with the oracle."""
    z = scale * r
    if family == "helmholtz":
        if n == 2:
            a, b = oracles.f_j(0, z), oracles.f_y(0, z)
        elif n == 3:
            a = -scale * SQ * z**-0.5 * oracles.f_y(0.5, z)
            b = scale * SQ * z**-0.5 * oracles.f_j(0.5, z)
        elif n == 4:
            a, b = oracles.f_j(1, z) / r, oracles.f_y(1, z) / r
        else:
            a = -scale**3 * SQ * z**-1.5 * oracles.f_j(1.5, z)
            b = -scale**3 * SQ * z**-1.5 * oracles.f_y(1.5, z)
        # oscillatory branches cross zero; measure error against the common envelope
        env = math.hypot(a, b)
        return a, b, env, env
    if n == 2:
        a, b = oracles.f_i(0, z), oracles.f_k(0, z)
    elif n == 3:
        cosh_branch = scale * SQ * z**-0.5 * oracles.f_i_neg_half(z)
        a = cosh_branch if family == "convdiff" else scale * SQ * z**-0.5 * oracles.f_i(0.5, z)
        b = (scale * SQ * z**-0.5 * oracles.f_i(0.5, z) if family == "convdiff"
             else scale / SQ * z**-0.5 * oracles.f_k(0.5, z))
    elif n == 4:
        a, b = oracles.f_i(1, z) / r, oracles.f_k(1, z) / r
    else:
        a = scale**3 * SQ * z**-1.5 * oracles.f_i(1.5, z)
        b = scale**3 / SQ * z**-1.5 * oracles.f_k(1.5, z)
    return a, b, abs(a), abs(b)


@pytest.mark.parametrize("family", ["helmholtz", "modified"])
@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_closed_forms_match_bessel(n, family):
    scale = 1.3
    worst = 0.0
    for r in RGRID:
        a, b, env_a, env_b = _bessel_forms(n, family, scale, r)
        ca = K.closed_form(n, family, 1.0, 0.0, scale, r=r)
        cb = K.closed_form(n, family, 0.0, 1.0, scale, r=r)
        worst = max(worst, abs(ca - a) / env_a, abs(cb - b) / env_b)
    assert worst <= 1e-10


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_convdiff_closed_forms_match_bessel(n):
    conv = ConvectionParams(velocity=[0.6] + [-0.2] * (n - 1), diffusivity=0.8, reaction=0.3)
    direction = np.ones(n) / math.sqrt(n)
    worst = 0.0
    for r in RGRID:
        d = r * direction
        drift = math.exp(-float(d @ np.array(conv.velocity)) / (2 * conv.diffusivity))
        a, b, env_a, env_b = _bessel_forms(n, "convdiff", conv.rho, r)
        ca = K.closed_form(n, "convdiff", 1.0, 0.0, None, d=d, convection=conv)
        cb = K.closed_form(n, "convdiff", 0.0, 1.0, None, d=d, convection=conv)
        worst = max(worst, abs(ca - drift * a) / (drift * env_a), abs(cb - drift * b) / (drift * env_b))
    assert worst <= 1e-10


def test_closed_form_examples():
    assert abs(K.closed_form(3, "helmholtz", 0.0, 1.0, 1.0, r=math.pi)) < 1e-16
    assert K.closed_form(3, "modified", 1.0, 0.0, 1.0, r=1.0) == pytest.approx(1.1752012, abs=1e-7)
    conv = ConvectionParams(velocity=[0.0, 0.0, 0.0], diffusivity=1.0, reaction=1.0)
    d = np.array([0.3, 0.4, 1.2])
    r = float(np.linalg.norm(d))
    # with v = 0 the drift is 1 and the sinh branch coincides with the modified table
    assert K.closed_form(3, "convdiff", 0.0, 2.0, None, d=d, convection=conv) == pytest.approx(
        K.closed_form(3, "modified", 2.0, 0.0, 1.0, r=r), rel=1e-14)
    with pytest.raises(ValueError):
        K.closed_form(3, "helmholtz", 0.0, 1.0, 1.0, r=0.0)
    with pytest.raises(ValueError):
        K.closed_form(1, "helmholtz", 0.0, 1.0, 1.0, r=1.0)


# ---------------------------------------------------------------------------
# differential equations
# ---------------------------------------------------------------------------

def _radial_laplacian(f, r, n, h=1e-3):
    # 6th-order central differences
    c1 = np.array([-1 / 60, 3 / 20, -3 / 4, 0, 3 / 4, -3 / 20, 1 / 60])
    c2 = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])
    vals = np.array([f(r + k * h) for k in range(-3, 4)])
    d1 = c1 @ vals / h
    d2 = c2 @ vals / h**2
    return d2 + (n - 1) / r * d1


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_regular_solves_helmholtz(n):
    lam = 1.4
    spec = KernelSpec(F.HELMHOLTZ_REGULAR, n, lam)
    for r in np.linspace(0.3, 8.0, 20):
        res = _radial_laplacian(spec.radial, r, n) + lam**2 * spec.radial(r)
        assert abs(res) < 1e-6


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_singular_solves_helmholtz(n):
    lam = 0.9
    spec = KernelSpec(F.HELMHOLTZ_SINGULAR, n, lam)
    for r in np.linspace(0.5, 8.0, 20):
        assert abs(_radial_laplacian(spec.radial, r, n) + lam**2 * spec.radial(r)) < 1e-6


@pytest.mark.parametrize("family", [F.MODIFIED_DECAYING, F.MODIFIED_GROWING])
@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_modified_solves_modified_helmholtz(n, family):
    mu = 1.1
    spec = KernelSpec(family, n, mu)
    for r in np.linspace(0.5, 6.0, 20):
        v = spec.radial(r)
        res = _radial_laplacian(spec.radial, r, n) - mu**2 * v
        assert abs(res) < 1e-6 * max(1.0, abs(v))


def _convdiff_residual(spec, x, h=1e-3):
    conv = spec.convection
    n = spec.n
    lap = 0.0
    grad = np.zeros(n)
    u0 = spec(x)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        up, um = spec(x + e), spec(x - e)
        up2, um2 = spec(x + 2 * e), spec(x - 2 * e)
        lap += (-up2 + 16 * up - 30 * u0 + 16 * um - um2) / (12 * h * h)
        grad[i] = (-up2 + 8 * up - 8 * um + um2) / (12 * h)
    res = conv.diffusivity * lap + np.dot(conv.velocity, grad) - conv.reaction * u0
    return res, abs(u0)


@pytest.mark.parametrize("family", [F.CONVDIFF_FUNDAMENTAL, F.CONVDIFF_GENERAL])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_convdiff_solves_pde(n, family):
    conv = ConvectionParams(velocity=[0.7, -0.4, 0.2][:n], diffusivity=0.6, reaction=0.5)
    spec = KernelSpec(family, n, convection=conv)
    rng = np.random.default_rng(3)
    for _ in range(10):
        x = rng.normal(size=n)
        x *= rng.uniform(0.5, 2.0) / np.linalg.norm(x)
        res, mag = _convdiff_residual(spec, x)
        assert abs(res) < 1e-5 * max(1.0, mag)


def test_convdiff_examples():
    conv = ConvectionParams(velocity=[0.0, 0.0], diffusivity=2.0, reaction=2.0)
    spec = KernelSpec(F.CONVDIFF_FUNDAMENTAL, 2, convection=conv)
    assert spec.rho == 1.0
    d = np.array([0.3, -1.1])
    assert spec(d) == pytest.approx(K.modified_helmholtz(2, 1.0, np.linalg.norm(d)), rel=1e-14)

    assert ConvectionParams(velocity=[2.0, 0.0], diffusivity=1.0).rho == 1.0
    assert ConvectionParams(velocity=[0.0, 2.0, 0.0], diffusivity=1.0, reaction=0.0).rho == 1.0

    v = np.array([0.8, 0.6])
    conv = ConvectionParams(velocity=v, diffusivity=0.5, reaction=0.2)
    for fam in (F.CONVDIFF_FUNDAMENTAL, F.CONVDIFF_GENERAL, F.CONVDIFF_RAPID):
        spec = KernelSpec(fam, 2, convection=conv)
        d = 0.9 * v
        assert spec(d) / spec(-d) == pytest.approx(math.exp(-v @ d / 0.5), rel=1e-12)
    with pytest.raises(ValueError):
        KernelSpec(F.CONVDIFF_FUNDAMENTAL, 2, convection=conv)(np.zeros(2))


def test_convection_params_validation():
    with pytest.raises(ValueError):
        ConvectionParams(velocity=[1.0], diffusivity=0.0)
    with pytest.raises(ValueError):
        ConvectionParams(velocity=[1.0], diffusivity=1.0, reaction=-0.1)
    with pytest.raises(ValueError):
        KernelSpec(F.CONVDIFF_GENERAL, 2)
    with pytest.raises(ValueError):
        KernelSpec(F.HELMHOLTZ_REGULAR, 2, 1.0, convection=ConvectionParams([1.0, 0.0], 1.0))
    with pytest.raises(ValueError):
        KernelSpec(F.CONVDIFF_GENERAL, 3, convection=ConvectionParams([1.0, 0.0], 1.0))
    with pytest.raises(ValueError):
        KernelSpec(F.MODIFIED_DECAYING, 2, 0.0)
    with pytest.raises(ValueError):
        KernelSpec(F.HELMHOLTZ_REGULAR, 6, 1.0)
    KernelSpec(F.HELMHOLTZ_REGULAR, 2, 0.0)


def test_family_tags():
    assert F.HELMHOLTZ_SINGULAR.singular and not F.HELMHOLTZ_SINGULAR.complex_valued
    assert F.HELMHOLTZ_OUTGOING.complex_valued and F.HELMHOLTZ_OUTGOING.singular
    assert F.CONVDIFF_RAPID.anisotropic and not F.CONVDIFF_RAPID.singular
    assert not F.HELMHOLTZ_REGULAR.singular and not F.PSI_COMPOSITE.singular


def test_anisotropy_witness():
    conv = ConvectionParams(velocity=[1.0, 0.0], diffusivity=1.0, reaction=0.5)
    d = np.array([1.0, 0.5])
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    for fam in (F.CONVDIFF_FUNDAMENTAL, F.CONVDIFF_GENERAL, F.CONVDIFF_RAPID):
        spec = KernelSpec(fam, 2, convection=conv)
        assert abs(spec(d) - spec(rot @ d)) > 1e-3 * abs(spec(d))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_rapid_kernel_decays_monotonically_along_axes(n):
    s = np.linspace(0.0, 60.0, 600)
    for reaction in (0.4, 0.0):
        conv = ConvectionParams(velocity=[1.5, -0.7, 0.4][:n], diffusivity=0.3, reaction=reaction)
        spec = KernelSpec(F.CONVDIFF_RAPID, n, convection=conv)
        assert spec(np.zeros(n)) == 1.0
        for axis in range(n):
            for sign in (1.0, -1.0):
                d = np.zeros((s.size, n))
                d[:, axis] = sign * s
                vals = spec(d)
                assert np.all(np.isfinite(vals))
                if reaction > 0:
                    assert np.all(np.diff(vals) < 0)
                else:
                    # upwind with k = 0 the decay rate tends to zero; allow round-off plateaus
                    assert np.all(np.diff(vals) < 1e-13)
                    assert vals[-1] < vals[0]


def test_rapid_kernel_relation_to_general():
    conv = ConvectionParams(velocity=[0.5, 0.5], diffusivity=1.0, reaction=1.0)
    d = np.array([0.4, -0.9])
    r = np.linalg.norm(d)
    g = KernelSpec(F.CONVDIFF_GENERAL, 2, convection=conv)(d)
    z = KernelSpec(F.CONVDIFF_RAPID, 2, convection=conv)(d)
    assert z == pytest.approx(g * math.exp(-2 * conv.rho * r), rel=1e-13)


# ---------------------------------------------------------------------------
# composite, dimension exponential, prefactors, divergence
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_psi_composite_components(n):
    r = np.linspace(0, 7, 29)
    psi = K.psi_composite(n, 1.2, r)
    assert np.array_equal(psi.real, K.helmholtz_regular_deriv(n, 1.2, r))
    assert np.array_equal(-psi.imag, K.helmholtz_regular(n, 1.2, r))


def test_dimension_exp_coincides_with_families():
    x = np.linspace(0.3, 5, 9)
    for n in range(1, 6):
        assert np.array_equal(K.dimension_exp(n, 1.1, x, "decay").real, K.modified_helmholtz(n, 1.1, x))
        assert np.array_equal(K.dimension_exp(n, 1.1, x, "growth").real,
                              K.modified_helmholtz(n, 1.1, x, "growing"))
        assert np.array_equal(K.dimension_exp(n, 1.1, x, "oscillatory"),
                              K.helmholtz_complex(n, 1.1, x, "incoming"))
    osc = K.dimension_exp(1, 2.0, x, "oscillatory")
    assert np.allclose(osc / osc[0], np.exp(2j * (x - x[0])), atol=1e-15)
    assert np.allclose(np.abs(osc), np.abs(osc[0]), atol=1e-16)


def test_dimension_exp_hankel_identity():
    # H1_nu(z) = (2 / i pi) exp(-i nu pi / 2) K_nu(-i z); at nu = 1/2 use the
    # closed form K_{1/2}(w) = sqrt(pi / 2w) exp(-w) on the principal branch.
    lam, x = 1.0, 2.0
    nu = 0.5
    w = -1j * lam * x
    k_half = cmath.sqrt(math.pi / (2 * w)) * cmath.exp(-w)
    h1 = 2 / (1j * math.pi) * cmath.exp(-1j * nu * math.pi / 2) * k_half
    rhs = 0.25j * (lam / (2 * math.pi * x)) ** nu * h1
    lhs = K.dimension_exp(3, lam, x, "oscillatory")
    assert abs(lhs - rhs) < 1e-10
    # without the phase factor the identity only holds for order zero
    unphased = rhs / cmath.exp(-1j * nu * math.pi / 2)
    assert abs(unphased - lhs) / abs(lhs) == pytest.approx(abs(1 - cmath.exp(1j * math.pi / 4)), rel=1e-10)


def test_printed_normalization_reproduces_printed_forms():
    lam, r = 1.7, 0.9
    z = lam * r
    # regular, n = 3: lam^(5/2)/4 (2 pi z)^(-1/2) J_{1/2}(z)
    spec = KernelSpec(F.HELMHOLTZ_REGULAR, 3, lam, normalization="printed")
    ref = lam**2.5 / 4 * (2 * math.pi * z) ** -0.5 * oracles.f_j(0.5, z)
    assert spec.radial(r) == pytest.approx(ref, rel=1e-13)
    # outgoing, n = 2: -i lam^(3/2)/4 (J0 - i Y0)
    spec = KernelSpec(F.HELMHOLTZ_OUTGOING, 2, lam, normalization="printed")
    ref = -0.25j * lam**1.5 * (oracles.f_j(0, z) - 1j * oracles.f_y(0, z))
    assert abs(spec.radial(r) - ref) < 1e-13
    # singular, n = 4: lam^(7/2)/(2 pi) (2 pi z)^(-1) Y_1(z)
    spec = KernelSpec(F.HELMHOLTZ_SINGULAR, 4, lam, normalization="printed")
    ref = lam**3.5 / (2 * math.pi) / (2 * math.pi * z) * oracles.f_y(1, z)
    assert spec.radial(r) == pytest.approx(ref, rel=1e-13)
    # cosine, n = 1: lam^(1/2)/2 cos z ; decaying, n = 5
    spec = KernelSpec(F.HELMHOLTZ_COSINE, 1, lam, normalization="printed")
    assert spec.radial(r) == pytest.approx(math.sqrt(lam) / 2 * math.cos(z), rel=1e-14)
    spec = KernelSpec(F.MODIFIED_DECAYING, 5, lam, normalization="printed")
    ref = lam**4.5 / (2 * math.pi) * (2 * math.pi * z) ** -1.5 * oracles.f_k(1.5, z)
    assert spec.radial(r) == pytest.approx(ref, rel=1e-13)
    spec = KernelSpec(F.HELMHOLTZ_INCOMING, 1, lam, normalization="printed")
    assert abs(spec.radial(r) - math.sqrt(lam) / 2 * cmath.exp(1j * z)) < 1e-14


def test_kernel_matrix_shape():
    spec = KernelSpec(F.HELMHOLTZ_REGULAR, 2, 2.0)
    pts = np.random.default_rng(0).uniform(size=(7, 2))
    ctr = pts[:3]
    m = spec.matrix(pts, ctr)
    assert m.shape == (7, 3)
    assert np.allclose(np.diag(m[:3]), 1.0)
    spec1 = KernelSpec(F.HELMHOLTZ_REGULAR, 1, 2.0)
    assert spec1.matrix(np.linspace(0, 1, 5), np.array([0.5])).shape == (5, 1)


def test_divergence_examples():
    assert K.divergence_check(KernelSpec(F.HELMHOLTZ_REGULAR, 3, 1.0)).limit == 0.0
    assert not K.divergence_check(KernelSpec(F.HELMHOLTZ_REGULAR, 3, 1.0)).fundamental
    rep = K.divergence_check(KernelSpec(F.MODIFIED_DECAYING, 2, 1.0))
    assert abs(rep.limit + 1) < 1e-3 and rep.fundamental
    rep = K.divergence_check(KernelSpec(F.HELMHOLTZ_SINGULAR, 3, 2.0))
    assert abs(rep.limit + 1) < 1e-3


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
@pytest.mark.parametrize("family", [F.MODIFIED_DECAYING, F.HELMHOLTZ_SINGULAR, F.HELMHOLTZ_OUTGOING])
def test_unit_source_everywhere(n, family):
    assert K.divergence_check(KernelSpec(family, n, 1.9)).residual < 1e-6
