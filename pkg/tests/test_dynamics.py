"""Model coefficients, chemical potential, and the three right-hand sides."""

import numpy as np
import pytest

from nsch import (
    ConfigError,
    ModelParams,
    PotentialParams,
    QuarticPotential,
    RegPotential,
    ScalarField,
    SingularityError,
    SingularPotential,
    State,
    UnsupportedModeError,
    VectorField,
    beta_cutoff,
    compute_mu,
    diff_ops,
    mobility,
    norms,
    rhs_phi,
    rhs_sigma,
    rhs_v,
    sigma_form_divergence,
    viscosity,
)

TWO_PI = 2.0 * np.pi


def quartic_params(**kw):
    return ModelParams(potential=QuarticPotential(), **kw)


def const_state(grid, phi_val, sig_val, v=None, t=0.0):
    shape = (grid.Nx, grid.Ny)
    return State(t=t,
                 phi=ScalarField(grid, phys=np.full(shape, float(phi_val))),
                 sigma=ScalarField(grid, phys=np.full(shape, float(sig_val))),
                 v=v)


# ---------------------------------------------------------------------------
# parameter validation


def test_viscosity_positivity_required():
    with pytest.raises(ConfigError, match=r"\(H2\)"):
        quartic_params(eta1=0.0)
    with pytest.raises(ConfigError, match=r"\(H2\)"):
        quartic_params(eta2=-1.0)


def test_mobility_order_required():
    with pytest.raises(ConfigError, match=r"\(H3\)"):
        quartic_params(m_lo=0.0)
    with pytest.raises(ConfigError, match=r"\(H3\)"):
        quartic_params(m_lo=2.0, m_hi=1.0)


def test_source_balance_required():
    with pytest.raises(ConfigError, match=r"\(H4\)"):
        quartic_params(alpha=-0.5)
    with pytest.raises(ConfigError, match=r"\(H4\)"):
        quartic_params(alpha=0.1, h_const=0.2)
    with pytest.raises(ConfigError, match=r"\(H4\)"):
        quartic_params(alpha=0.1, h_const=0.1)
    with pytest.raises(ConfigError, match=r"\(H4\)"):
        quartic_params(alpha=0.0, h_const=0.05)
    # boundary cases that must pass
    quartic_params(alpha=0.1, h_const=0.0999)
    quartic_params(alpha=0.0, h_const=0.0)


def test_reaction_signs_required():
    with pytest.raises(ConfigError, match=r"\(H5\)"):
        quartic_params(kappa=-1.0)
    with pytest.raises(ConfigError, match=r"\(H5\)"):
        quartic_params(b_star=-0.1)


def test_interface_and_plap_ranges():
    with pytest.raises(ConfigError, match=r"\(H6\)"):
        quartic_params(eps_interface=0.0)
    with pytest.raises(ConfigError):
        quartic_params(gamma_plap=0.6)
    with pytest.raises(ConfigError):
        quartic_params(gamma_plap=-0.1)
    quartic_params(gamma_plap=0.5)


def test_sigma_form_enum():
    with pytest.raises(ConfigError):
        quartic_params(sigma_eq_form="upwind")
    quartic_params(sigma_eq_form="linear_transport")


# ---------------------------------------------------------------------------
# coefficient blends


def test_viscosity_endpoints_and_clamp():
    p = quartic_params(eta1=3.0, eta2=1.0)
    assert viscosity(1.0, p) == 3.0
    assert viscosity(-1.0, p) == 1.0
    assert viscosity(0.0, p) == 2.0
    # values outside [-1, 1] are clamped, not extrapolated
    assert viscosity(5.0, p) == viscosity(1.0, p)
    assert viscosity(-7.0, p) == viscosity(-1.0, p)


def test_mobility_endpoints():
    p = quartic_params(m_lo=0.5, m_hi=2.0)
    assert mobility(1.0, p) == 2.0
    assert mobility(-1.0, p) == 0.5
    out = mobility(np.array([-3.0, 0.0, 3.0]), p)
    np.testing.assert_allclose(out, [0.5, 1.25, 2.0])


def test_beta_cutoff_profile():
    p = quartic_params(b_star=0.7)
    assert beta_cutoff(0.0, p) == 0.7
    assert beta_cutoff(1.0, p) == 0.7
    assert beta_cutoff(-1.0, p) == 0.7
    assert beta_cutoff(2.0, p) == 0.0
    assert beta_cutoff(-2.0, p) == 0.0
    assert beta_cutoff(3.5, p) == 0.0
    # midpoint of the Hermite ramp
    np.testing.assert_allclose(beta_cutoff(1.5, p), 0.35, rtol=1e-14)
    # C^1: one-sided slopes vanish at both ends of the ramp
    h = 1e-6
    assert abs(beta_cutoff(1.0 + h, p) - 0.7) < 1e-11
    assert abs(beta_cutoff(2.0 - h, p)) < 1e-11


# ---------------------------------------------------------------------------
# chemical potential


def test_mu_constant_state(torus32):
    p = quartic_params(chi=1.5, eps_interface=0.5)
    s = const_state(torus32, 0.4, 2.0)
    mu = s.mu(p)
    expect = (0.4**3 - 0.4) / 0.5 - 1.5 * 2.0
    np.testing.assert_allclose(mu.phys, expect, atol=1e-13)


def test_mu_quartic_eigenfunction(torus64):
    # phi = a cos(3x): cubic term only reaches mode 9, inside the dealias
    # ellipse, so the spectral answer is pointwise exact
    g = torus64
    a, k = 0.4, 3.0
    X, _ = np.meshgrid(g.x, g.y, indexing="ij")
    phi = ScalarField(g, phys=a * np.cos(k * X))
    sig = ScalarField(g, phys=np.zeros((64, 64)))
    p = quartic_params(eps_interface=0.7)
    mu = compute_mu(phi, sig, p)
    expect = 0.7 * k * k * phi.phys + (phi.phys**3 - phi.phys) / 0.7
    np.testing.assert_allclose(mu.phys, expect, atol=1e-12)


def test_mu_mean_identity(torus64, band_limited):
    # laplacian and p-laplace contribute nothing to the mean
    g = torus64
    phi = band_limited(g, K=10, seed=4, amp=0.6)
    sig = band_limited(g, K=10, seed=5, amp=0.5, mean=1.0)
    p = quartic_params(chi=2.0, gamma_plap=0.3, eps_interface=0.8)
    mu = compute_mu(phi, sig, p)
    expect = g.mean_phys(p.potential.psi_prime(phi.phys)) / 0.8 \
        - 2.0 * sig.mean()
    np.testing.assert_allclose(mu.mean(), expect, atol=1e-12)


def test_mu_chi_coupling_linear(torus32):
    g = torus32
    rng = np.random.default_rng(6)
    phi = ScalarField(g, phys=0.3 * rng.standard_normal((32, 32)))
    sig = ScalarField(g, phys=np.abs(rng.standard_normal((32, 32))))
    p0 = quartic_params(chi=0.0)
    p2 = quartic_params(chi=2.0)
    mu0 = compute_mu(phi, sig, p0)
    mu2 = compute_mu(phi, sig, p2)
    # difference is exactly -chi * (dealiased) sigma
    sig_d = ScalarField(g, hat=g.dealias_hat(sig.hat))
    np.testing.assert_allclose(mu2.phys - mu0.phys, -2.0 * sig_d.phys,
                               atol=1e-12)


def test_mu_regularized_potential(torus32):
    rp = RegPotential(PotentialParams(theta=1.0, theta_c=2.0), eps=0.05,
                      chi=1.0)
    p = ModelParams(potential=rp, chi=1.0)
    s = const_state(torus32, 0.5, 1.0)
    mu = s.mu(p)
    np.testing.assert_allclose(mu.phys, rp.psi_prime(0.5) - 1.0, atol=1e-13)


def test_mu_singular_guard(torus32):
    sp = SingularPotential(PotentialParams(theta=1.0, theta_c=2.0))
    p = ModelParams(potential=sp)
    s = const_state(torus32, 1.0, 0.0)
    with pytest.raises(SingularityError, match="grid point"):
        s.mu(p)
    # interior values are fine
    compute_mu(ScalarField(torus32, phys=np.full((32, 32), 0.9)),
               ScalarField(torus32, phys=np.zeros((32, 32))), p)


def test_mu_cached_per_params(torus32):
    p = quartic_params()
    s = const_state(torus32, 0.2, 0.0)
    assert s.mu(p) is s.mu(p)
    p2 = quartic_params(chi=1.0)
    assert s.mu(p2) is not None


# ---------------------------------------------------------------------------
# order-parameter equation


def test_rhs_phi_constant_state(torus32):
    p = quartic_params(alpha=0.5, h_const=0.2)
    s = const_state(torus32, 0.3, 1.0)
    out = rhs_phi(s, p)
    np.testing.assert_allclose(out.phys, -0.5 * 0.3 + 0.2, atol=1e-13)


def test_rhs_phi_mean_exact(torus64, band_limited):
    g = torus64
    p = quartic_params(alpha=0.7, h_const=0.3, chi=1.0, m_lo=0.5, m_hi=2.0)
    phi = band_limited(g, K=12, seed=11, amp=0.5, mean=0.1)
    sig = band_limited(g, K=12, seed=12, amp=0.3, mean=1.0)
    v = None
    s = State(t=0.0, phi=phi, sigma=sig, v=v)
    out = rhs_phi(s, p)
    np.testing.assert_allclose(out.mean(), -0.7 * phi.mean() + 0.3,
                               atol=1e-13)


def test_rhs_phi_constant_mobility_composition(torus64, band_limited):
    # with m constant the flux divergence collapses to m * lap(mu)
    g = torus64
    p = quartic_params(m_lo=1.7, m_hi=1.7, alpha=0.4, h_const=0.1)
    phi = band_limited(g, K=10, seed=13, amp=0.5)
    sig = ScalarField(g, phys=np.zeros((64, 64)))
    s = State(t=0.0, phi=phi, sigma=sig)
    out = rhs_phi(s, p)
    mu = s.mu(p)
    direct_hat = 1.7 * g.lap_hat(mu.hat) - 0.4 * phi.hat
    direct_hat = g.dealias_hat(direct_hat)
    direct_hat[0, 0] += 0.1
    np.testing.assert_allclose(out.hat, direct_hat, atol=1e-11)


def test_rhs_phi_transport_mean_free(torus64, band_limited):
    # adding a solenoidal transport term must not move the mean
    g = torus64
    p = quartic_params()
    phi = band_limited(g, K=8, seed=14, amp=0.5, mean=0.2)
    sig = ScalarField(g, phys=np.zeros((64, 64)))
    X, Y = np.meshgrid(g.x, g.y, indexing="ij")
    v = VectorField.from_phys(g, np.sin(X) * np.cos(Y),
                              -np.cos(X) * np.sin(Y))
    with_v = rhs_phi(State(t=0.0, phi=phi, sigma=sig, v=v), p)
    np.testing.assert_allclose(with_v.mean(), 0.0, atol=1e-14)


# ---------------------------------------------------------------------------
# concentration equation


def test_rhs_sigma_constant_state(torus32):
    p = quartic_params(kappa=0.3, b_star=0.8)
    s = const_state(torus32, 0.5, 2.0)  # inside |r| <= 1: beta = b_star
    out = rhs_sigma(s, p)
    np.testing.assert_allclose(out.phys, 0.8 * 2.0 - 0.3 * 4.0, atol=1e-13)


def test_rhs_sigma_reaction_mean(torus64, band_limited):
    g = torus64
    p = quartic_params(kappa=0.2, b_star=0.5, chi=1.0)
    phi = band_limited(g, K=10, seed=15, amp=0.4)
    sig = band_limited(g, K=10, seed=16, amp=0.3, mean=1.0)
    s = State(t=0.0, phi=phi, sigma=sig)
    out = rhs_sigma(s, p)
    react = beta_cutoff(phi.phys, p) * sig.phys - 0.2 * sig.phys**2
    np.testing.assert_allclose(out.mean(), g.mean_phys(react), atol=1e-13)


@pytest.mark.parametrize("form", ["cross_diffusion", "linear_transport"])
def test_rhs_sigma_eigenfunction(torus64, form):
    # constant sigma = s0, phi = a cos(kx): both forms give
    # chi * s0-or-1 * k^2 a cos(kx)
    g = torus64
    a, k, s0, chi = 0.3, 2.0, 1.5, 0.8
    X, _ = np.meshgrid(g.x, g.y, indexing="ij")
    phi = ScalarField(g, phys=a * np.cos(k * X))
    sig = ScalarField(g, phys=np.full((64, 64), s0))
    p = quartic_params(chi=chi, sigma_eq_form=form)
    out = rhs_sigma(State(t=0.0, phi=phi, sigma=sig), p)
    weight = s0 if form == "cross_diffusion" else 1.0
    np.testing.assert_allclose(out.phys, chi * weight * k * k * phi.phys,
                               atol=1e-11)


def test_sigma_form_divergence_identity(torus64, band_limited):
    # the two transport forms differ by exactly the reported divergence
    g = torus64
    phi = band_limited(g, K=9, seed=17, amp=0.5)
    sig = band_limited(g, K=9, seed=18, amp=0.4, mean=1.2)
    cross = quartic_params(chi=1.3, sigma_eq_form="cross_diffusion")
    lin = quartic_params(chi=1.3, sigma_eq_form="linear_transport")
    s = State(t=0.0, phi=phi, sigma=sig)
    gap = rhs_sigma(State(t=0.0, phi=phi, sigma=sig), lin).hat \
        - rhs_sigma(s, cross).hat
    reported = sigma_form_divergence(s, cross)
    np.testing.assert_allclose(gap, reported.hat, atol=1e-12)


def test_sigma_form_divergence_vanishes_at_unit_sigma(torus64, band_limited):
    g = torus64
    phi = band_limited(g, K=9, seed=19, amp=0.5)
    sig = ScalarField(g, phys=np.ones((64, 64)))
    s = State(t=0.0, phi=phi, sigma=sig)
    out = sigma_form_divergence(s, quartic_params(chi=2.0))
    assert norms(out, "L2") < 1e-11


# ---------------------------------------------------------------------------
# momentum equation


def test_rhs_v_constant_state(torus32):
    g = torus32
    ones = np.full((32, 32), 0.7)
    v = VectorField.from_phys(g, ones, -0.2 * ones)
    p = quartic_params(chi=1.0)
    s = const_state(g, 0.3, 1.0, v=v)
    out = rhs_v(s, p)
    assert norms(out.x, "L2") < 1e-12
    assert norms(out.y, "L2") < 1e-12


def test_rhs_v_requires_fluid(torus32):
    p = quartic_params()
    s = const_state(torus32, 0.0, 0.0, v=None)
    with pytest.raises(ConfigError):
        rhs_v(s, p)


def test_rhs_v_requires_torus(rect32):
    g = rect32
    z = np.zeros((g.Nx, g.Ny))
    p = quartic_params()
    s = State(t=0.0, phi=ScalarField(g, phys=z),
              sigma=ScalarField(g, phys=z),
              v=VectorField.from_phys(g, z, z.copy()))
    with pytest.raises(UnsupportedModeError):
        rhs_v(s, p)


def test_rhs_v_taylor_green(torus64):
    # phi = 0: constant viscosity (eta1+eta2)/2; the Taylor-Green
    # convection is a pure gradient, so rhs_v = eta_bar lap v = -2 eta_bar v
    g = torus64
    X, Y = np.meshgrid(g.x, g.y, indexing="ij")
    amp = 0.4
    v = VectorField.from_phys(g, amp * np.sin(X) * np.cos(Y),
                              -amp * np.cos(X) * np.sin(Y))
    p = quartic_params(eta1=3.0, eta2=1.0)
    s = const_state(g, 0.0, 0.0, v=v)
    out = rhs_v(s, p)
    np.testing.assert_allclose(out.x.phys, -2.0 * 2.0 * v.x.phys, atol=1e-11)
    np.testing.assert_allclose(out.y.phys, -2.0 * 2.0 * v.y.phys, atol=1e-11)


def test_rhs_v_output_solenoidal(torus64, band_limited):
    g = torus64
    phi = band_limited(g, K=8, seed=20, amp=0.5)
    sig = band_limited(g, K=8, seed=21, amp=0.5, mean=1.0)
    X, Y = np.meshgrid(g.x, g.y, indexing="ij")
    v = VectorField.from_phys(g, 0.3 * np.sin(2 * X) * np.cos(Y),
                              -0.6 * np.cos(2 * X) * np.sin(Y))
    p = quartic_params(chi=1.0, eta1=2.0, eta2=0.5)
    out = rhs_v(State(t=0.0, phi=phi, sigma=sig, v=v), p)
    div = diff_ops(out, "div")
    assert norms(div, "L2") < 1e-10


# ---------------------------------------------------------------------------
# energy-pairing cancellations between the equations


def _band_velocity(grid, K, seed, amp=0.5):
    rng = np.random.default_rng(seed)
    psi_hat = grid.to_hat(rng.standard_normal((grid.Nx, grid.Ny)))
    psi_hat *= grid.trunc_mask(K)
    psi_hat[0, 0] = 0.0
    vx = VectorField.from_hat(grid, 1j * grid.KY * psi_hat,
                              -1j * grid.KX * psi_hat)
    sup = max(norms(vx.x, "Linf"), norms(vx.y, "Linf"))
    scale = amp / sup if sup > 0 else 1.0
    return VectorField.from_hat(grid, vx.x.hat * scale, vx.y.hat * scale)


def test_transport_pairing_two_way(torus64, band_limited):
    # <-div(v phi), mu> + <mu grad phi, v> = 0 for solenoidal v: the phi
    # transport and the capillary force exchange energy exactly
    g = torus64
    for seed in range(5):
        phi = band_limited(g, K=14, seed=seed, amp=0.7, mean=0.1)
        mu = band_limited(g, K=14, seed=seed + 50, amp=1.0)
        v = _band_velocity(g, K=14, seed=seed + 100)
        transport = g.to_phys(-g.div_flux_hat(v.x.phys * phi.phys,
                                              v.y.phys * phi.phys))
        a = g.integral_phys(transport * mu.phys)
        gx, gy = g.grad_phys(phi.hat)
        b = g.integral_phys(mu.phys * (gx * v.x.phys + gy * v.y.phys))
        scale = max(abs(a), abs(b), 1.0)
        assert abs(a + b) < 1e-11 * scale, (seed, a, b)


def test_transport_pairing_three_way(torus64, band_limited):
    # <-div(v sigma), -chi phi> + <chi sigma grad phi, v> = 0: the sigma
    # transport against its chemical potential cancels the chemotactic force
    g = torus64
    chi = 1.7
    for seed in range(5):
        phi = band_limited(g, K=14, seed=seed + 200, amp=0.7)
        sig = band_limited(g, K=14, seed=seed + 300, amp=0.5, mean=1.0)
        v = _band_velocity(g, K=14, seed=seed + 400)
        transport = g.to_phys(-g.div_flux_hat(v.x.phys * sig.phys,
                                              v.y.phys * sig.phys))
        a = g.integral_phys(transport * (-chi * phi.phys))
        gx, gy = g.grad_phys(phi.hat)
        b = g.integral_phys(chi * sig.phys * (gx * v.x.phys + gy * v.y.phys))
        scale = max(abs(a), abs(b), 1.0)
        assert abs(a + b) < 1e-11 * scale, (seed, a, b)


def test_plap_pairing_nonnegative(torus64, band_limited):
    # <-div(|grad phi|^2 grad phi), phi> = integral |grad phi|^4 >= 0:
    # exact discrete integration by parts plus a pointwise square
    g = torus64
    for seed in range(20):
        phi = band_limited(g, K=20, seed=seed + 500, amp=1.5)
        gx, gy = g.grad_phys(phi.hat)
        w = gx * gx + gy * gy
        term = g.to_phys(-g.div_flux_hat(w * gx, w * gy))
        pairing = g.integral_phys(term * phi.phys)
        assert pairing >= -1e-10 * norms(phi, "H1") ** 4, (seed, pairing)
        quartic = g.integral_phys(w * w)
        np.testing.assert_allclose(pairing, quartic, rtol=1e-10)
