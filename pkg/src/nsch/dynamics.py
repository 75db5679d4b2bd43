"""Model parameters and semi-discrete right-hand sides.

The coupled system on the torus:

    v_t   = P[ -div(v (x) v) + div(2 eta(phi) Dv) + (mu + chi sigma) grad phi ]
    phi_t = div(m(phi) grad mu) - div(v phi) - alpha phi + h
    mu    = -gamma^8 div(|grad phi|^2 grad phi) - eps_i Lap phi
            + Psi'(phi)/eps_i - chi sigma
    sig_t = Lap sigma - div(v sigma) - chi div(sigma grad phi)
            + beta(phi) sigma - kappa sigma^2          (cross_diffusion)
    sig_t = Lap sigma - div(v sigma) - chi Lap phi
            + beta(phi) sigma - kappa sigma^2          (linear_transport)

P is the Leray projection.  Nonlinear products are formed pointwise in
physical space and the assembled right-hand sides are pushed through the
dealiasing projection, so every quantity the stepper advances lives inside
the 2/3 mask.  The linear_transport form replaces the cross-diffusion flux
by a plain comparison term; it loses the sign structure of the
concentration and exists for exactly that comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .exceptions import ConfigError, SingularityError, UnsupportedModeError
from .potential import RegPotential, SingularPotential
from .spectral import Grid, ScalarField, VectorField

__all__ = [
    "ModelParams",
    "State",
    "viscosity",
    "mobility",
    "beta_cutoff",
    "compute_mu",
    "rhs_phi",
    "rhs_sigma",
    "rhs_v",
]


@dataclass
class ModelParams:
    """Physical coefficients plus the potential in use."""

    potential: object
    eta1: float = 1.0
    eta2: float = 1.0
    m_lo: float = 1.0
    m_hi: float = 1.0
    chi: float = 0.0
    kappa: float = 0.0
    alpha: float = 0.0
    h_const: float = 0.0
    b_star: float = 0.0
    eps_interface: float = 1.0
    gamma_plap: float = 0.0
    sigma_eq_form: str = "cross_diffusion"

    def __post_init__(self):
        if self.eta1 <= 0 or self.eta2 <= 0:
            raise ConfigError(
                f"(H2): viscosities must be positive, got eta1={self.eta1}, "
                f"eta2={self.eta2}")
        if not 0 < self.m_lo <= self.m_hi:
            raise ConfigError(
                f"(H3): mobility bounds need 0 < m_lo <= m_hi, got "
                f"m_lo={self.m_lo}, m_hi={self.m_hi}")
        if self.alpha < 0:
            raise ConfigError(f"(H4): alpha must be nonnegative, got {self.alpha}")
        if self.alpha > 0 and abs(self.h_const) >= self.alpha:
            raise ConfigError(
                f"(H4): |h| must be < alpha, got h={self.h_const}, "
                f"alpha={self.alpha}")
        if self.alpha == 0 and self.h_const != 0:
            raise ConfigError("(H4): alpha = 0 requires h = 0")
        if self.kappa < 0:
            raise ConfigError(f"(H5): kappa must be nonnegative, got {self.kappa}")
        if self.b_star < 0:
            raise ConfigError(f"(H5): b_star must be nonnegative, got {self.b_star}")
        if self.eps_interface <= 0:
            raise ConfigError(
                f"(H6): interface thickness must be positive, got "
                f"{self.eps_interface}")
        if self.gamma_plap < 0 or self.gamma_plap > 0.5:
            raise ConfigError(
                f"gamma_plap must lie in [0, 1/2], got {self.gamma_plap}")
        if self.sigma_eq_form not in ("cross_diffusion", "linear_transport"):
            raise ConfigError(
                f"sigma_eq_form must be cross_diffusion or linear_transport, "
                f"got {self.sigma_eq_form!r}")


@dataclass
class State:
    """Solver state at one instant; mu is derived and cached lazily."""

    t: float
    phi: ScalarField
    sigma: ScalarField
    v: VectorField | None = None
    _mu: ScalarField | None = field(default=None, repr=False)
    _params: ModelParams | None = field(default=None, repr=False)

    def mu(self, p: ModelParams) -> ScalarField:
        if self._mu is None or self._params is not p:
            self._mu = compute_mu(self.phi, self.sigma, p)
            self._params = p
        return self._mu

    @property
    def grid(self) -> Grid:
        return self.phi.grid


# ---------------------------------------------------------------------------
# Coefficient functions (clamped linear blends)
# ---------------------------------------------------------------------------


def _clamp_unit(r):
    return np.clip(r, -1.0, 1.0)


def viscosity(r, p: ModelParams):
    rc = _clamp_unit(np.asarray(r, dtype=float))
    out = 0.5 * p.eta1 * (1.0 + rc) + 0.5 * p.eta2 * (1.0 - rc)
    return float(out) if np.ndim(r) == 0 else out


def mobility(r, p: ModelParams):
    rc = _clamp_unit(np.asarray(r, dtype=float))
    out = 0.5 * p.m_hi * (1.0 + rc) + 0.5 * p.m_lo * (1.0 - rc)
    return float(out) if np.ndim(r) == 0 else out


def beta_cutoff(r, p: ModelParams):
    """b_star inside the physical interval, C^1 Hermite ramp to zero on
    1 <= |r| <= 2, zero beyond."""
    a = np.abs(np.asarray(r, dtype=float))
    s = np.clip(a - 1.0, 0.0, 1.0)
    q = 1.0 - 3.0 * s * s + 2.0 * s * s * s
    out = p.b_star * np.where(a >= 2.0, 0.0, q)
    return float(out) if np.ndim(r) == 0 else out


# ---------------------------------------------------------------------------
# Chemical potential and right-hand sides
# ---------------------------------------------------------------------------


def _psi_prime_grid(phi_phys, p: ModelParams):
    pot = p.potential
    if isinstance(pot, SingularPotential):
        sup = float(np.max(np.abs(phi_phys)))
        if sup >= 1.0:
            idx = np.unravel_index(int(np.argmax(np.abs(phi_phys))), phi_phys.shape)
            raise SingularityError(
                f"singular potential hit |phi| = {sup:.12g} >= 1 at grid "
                f"point {idx}; use the regularized potential or refine")
    return pot.psi_prime(phi_phys)


def compute_mu(phi: ScalarField, sigma: ScalarField, p: ModelParams) -> ScalarField:
    """mu = -gamma^8 div(|grad phi|^2 grad phi) - eps_i Lap phi
           + Psi'(phi)/eps_i - chi sigma, dealiased."""
    g = phi.grid
    eps_i = p.eps_interface
    mu_hat = -eps_i * g.lap_hat(phi.hat)
    mu_hat = mu_hat + g.to_hat(_psi_prime_grid(phi.phys, p) / eps_i)
    if p.chi != 0.0:
        mu_hat = mu_hat - p.chi * sigma.hat
    if p.gamma_plap > 0.0:
        gx, gy = g.grad_phys(phi.hat)
        w = gx * gx + gy * gy
        coeff = p.gamma_plap**8
        mu_hat = mu_hat - coeff * g.div_flux_hat(w * gx, w * gy)
    return ScalarField(g, hat=g.dealias_hat(mu_hat))


def rhs_phi(s: State, p: ModelParams) -> ScalarField:
    """div(m(phi) grad mu) - div(v phi) - alpha phi + h."""
    g = s.grid
    mu = s.mu(p)
    mx, my = g.grad_phys(mu.hat)
    mphi = mobility(s.phi.phys, p)
    out_hat = g.div_flux_hat(mphi * mx, mphi * my)
    if s.v is not None:
        phi_p = s.phi.phys
        out_hat = out_hat - g.div_flux_hat(s.v.x.phys * phi_p, s.v.y.phys * phi_p)
    out_hat = g.dealias_hat(out_hat)
    if p.alpha != 0.0:
        out_hat = out_hat - p.alpha * s.phi.hat
    if p.h_const != 0.0:
        out_hat = out_hat.copy()
        out_hat[0, 0] += p.h_const
    return ScalarField(g, hat=out_hat)


def rhs_sigma(s: State, p: ModelParams) -> ScalarField:
    """Concentration right-hand side in the configured form."""
    g = s.grid
    sig_p = s.sigma.phys
    out_hat = g.lap_hat(s.sigma.hat)
    flux_hat = None
    if p.chi != 0.0:
        if p.sigma_eq_form == "cross_diffusion":
            gx, gy = g.grad_phys(s.phi.hat)
            flux_hat = g.div_flux_hat(sig_p * gx, sig_p * gy)
            out_hat = out_hat - p.chi * flux_hat
        else:
            out_hat = out_hat - p.chi * g.lap_hat(s.phi.hat)
    if s.v is not None:
        out_hat = out_hat - g.div_flux_hat(s.v.x.phys * sig_p, s.v.y.phys * sig_p)
    react = beta_cutoff(s.phi.phys, p) * sig_p
    if p.kappa != 0.0:
        react = react - p.kappa * sig_p * sig_p
    out_hat = out_hat + g.to_hat(react)
    return ScalarField(g, hat=g.dealias_hat(out_hat))


def sigma_form_divergence(s: State, p: ModelParams) -> ScalarField:
    """Difference between the two concentration transport forms:
    chi [ div(sigma grad phi) - Lap phi ].  Vanishes exactly when
    sigma == 1."""
    g = s.grid
    gx, gy = g.grad_phys(s.phi.hat)
    sig_p = s.sigma.phys
    diff_hat = g.div_flux_hat(sig_p * gx, sig_p * gy) - g.lap_hat(s.phi.hat)
    return ScalarField(g, hat=g.dealias_hat(p.chi * diff_hat))


def rhs_v(s: State, p: ModelParams) -> VectorField:
    """Leray-projected momentum right-hand side (torus only)."""
    g = s.grid
    if g.mode != "periodic_torus":
        raise UnsupportedModeError(
            "velocity transport is only available on the torus; the "
            "rectangle runs the fluid-free subsystem")
    if s.v is None:
        raise ConfigError("rhs_v called on a fluid-free state")
    vx, vy = s.v.x.phys, s.v.y.phys

    # convection in divergence form: div(v (x) v)
    fx_hat = -g.div_flux_hat(vx * vx, vy * vx)
    fy_hat = -g.div_flux_hat(vx * vy, vy * vy)

    # viscous stress div(2 eta(phi) Dv)
    dvx_dx, dvx_dy = g.grad_phys(s.v.x.hat)
    dvy_dx, dvy_dy = g.grad_phys(s.v.y.hat)
    eta_p = viscosity(s.phi.phys, p)
    sxx = 2.0 * eta_p * dvx_dx
    sxy = eta_p * (dvx_dy + dvy_dx)
    syy = 2.0 * eta_p * dvy_dy
    fx_hat = fx_hat + g.div_flux_hat(sxx, sxy)
    fy_hat = fy_hat + g.div_flux_hat(sxy, syy)

    # capillary + chemotactic force (mu + chi sigma) grad phi
    mu = s.mu(p)
    force = mu.phys + p.chi * s.sigma.phys
    gx, gy = g.grad_phys(s.phi.hat)
    fx_hat = fx_hat + g.to_hat(force * gx)
    fy_hat = fy_hat + g.to_hat(force * gy)

    fx_hat, fy_hat = g.leray_hat(g.dealias_hat(fx_hat), g.dealias_hat(fy_hat))
    return VectorField.from_hat(g, fx_hat, fy_hat)
