"""Diagnostics: the quantities the analysis says must balance.

The central object is the energy

    E = int [ 1/2 |v|^2 + gamma^8/4 |grad phi|^4 + eps_i/2 |grad phi|^2
              + Psi(phi)/eps_i + sigma (ln sigma - 1) - chi sigma phi ]

whose exact rate of change along solutions is

    dE/dt = -(D_visc + D_mu + D_fisher + D_logistic) + R_source.

energy_law_residual measures how far a discrete step is from that balance
using a midpoint (trapezoidal) average of the right-hand side, so a
second-order stepper leaves an O(dt^2) residual.  The remaining functions
monitor the mean dynamics envelope, concentration sign and mass, the
coercivity margin of the potential against the cross term, and the metric
governing continuous dependence on the data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .dynamics import ModelParams, State, beta_cutoff, mobility, viscosity
from .exceptions import CoercivityError, ConfigError
from .potential import RegPotential, SingularPotential
from .spectral import ScalarField, VectorField, norms

__all__ = [
    "DiagnosticsRecord",
    "energy",
    "dissipation_and_remainder",
    "energy_law_residual",
    "mass_envelope",
    "mass_monitor",
    "sigma_monitor",
    "coercivity_margin",
    "coercivity_floor",
    "pointwise_negativity_check",
    "uniqueness_metric",
    "make_record",
]

DEFAULT_ENTROPY_FLOOR = 1e-12


@dataclass
class DiagnosticsRecord:
    """One row of the diagnostics table; field order is the CSV column order."""

    t: float
    E_total: float
    E_kinetic: float
    E_gradient: float
    E_plap: float
    E_potential: float
    E_entropy: float
    E_cross: float
    D_visc: float
    D_mu: float
    D_fisher: float
    D_logistic: float
    R_source: float
    residual_energy: float
    mean_phi: float
    rho_star_margin: float
    sigma_min: float
    sigma_mass: float
    sigma_L2: float
    W_metric: float
    sigma_floor_frac: float

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def row(self):
        return [getattr(self, name) for name in self.columns()]


def _psi_values(phi_phys, p: ModelParams):
    pot = p.potential
    if isinstance(pot, SingularPotential):
        return pot.psi(phi_phys, clamped=True)
    return pot.psi(phi_phys)


def _floored_log(sig_phys, floor):
    return np.log(np.maximum(sig_phys, floor))


def energy(s: State, p: ModelParams, floor: float = DEFAULT_ENTROPY_FLOOR):
    """Return the energy pieces as a dict; E_total is their sum."""
    g = s.grid
    eps_i = p.eps_interface
    gx, gy = g.grad_phys(s.phi.hat)
    grad2 = gx * gx + gy * gy

    e_kin = 0.0
    if s.v is not None:
        e_kin = 0.5 * g.integral_phys(s.v.x.phys**2 + s.v.y.phys**2)
    e_grad = 0.5 * eps_i * g.integral_phys(grad2)
    e_plap = 0.25 * p.gamma_plap**8 * g.integral_phys(grad2 * grad2)
    e_pot = g.integral_phys(_psi_values(s.phi.phys, p)) / eps_i
    sig = s.sigma.phys
    e_ent = g.integral_phys(sig * (_floored_log(sig, floor) - 1.0))
    e_cross = -p.chi * g.integral_phys(sig * s.phi.phys)
    pieces = {
        "E_kinetic": e_kin,
        "E_gradient": e_grad,
        "E_plap": e_plap,
        "E_potential": e_pot,
        "E_entropy": e_ent,
        "E_cross": e_cross,
    }
    pieces["E_total"] = math.fsum(pieces.values())
    return pieces


def dissipation_and_remainder(s: State, p: ModelParams,
                              floor: float = DEFAULT_ENTROPY_FLOOR):
    """Dissipation pieces (D_logistic keeps its sign) and the source term."""
    g = s.grid
    mu = s.mu(p)
    sig = s.sigma.phys
    phi = s.phi.phys

    d_visc = 0.0
    if s.v is not None:
        dvx_dx, dvx_dy = g.grad_phys(s.v.x.hat)
        dvy_dx, dvy_dy = g.grad_phys(s.v.y.hat)
        dsym = (2.0 * dvx_dx**2 + 2.0 * dvy_dy**2 + (dvx_dy + dvy_dx) ** 2)
        d_visc = 0.5 * g.integral_phys(2.0 * viscosity(phi, p) * dsym)

    mx, my = g.grad_phys(mu.hat)
    d_mu = g.integral_phys(mobility(phi, p) * (mx * mx + my * my))

    logs = _floored_log(sig, floor)
    ln_hat = g.to_hat(logs)
    lx, ly = g.grad_phys(ln_hat)
    px, py = g.grad_phys(s.phi.hat)
    fx = lx - p.chi * px
    fy = ly - p.chi * py
    d_fisher = g.integral_phys(sig * (fx * fx + fy * fy))

    d_logistic = p.kappa * g.integral_phys(sig * sig * logs)

    beta = beta_cutoff(phi, p)
    r = g.integral_phys((-p.alpha * phi + p.h_const) * mu.phys)
    r += g.integral_phys(beta * sig * logs)
    r -= p.chi * g.integral_phys((beta * sig - p.kappa * sig * sig) * phi)

    frac = float(np.count_nonzero(sig < floor)) / sig.size
    return {
        "D_visc": d_visc,
        "D_mu": d_mu,
        "D_fisher": d_fisher,
        "D_logistic": d_logistic,
        "R_source": r,
        "sigma_floor_frac": frac,
    }


def energy_law_residual(before: State, after: State, p: ModelParams, dt: float,
                        floor: float = DEFAULT_ENTROPY_FLOOR):
    """[E(after) - E(before)]/dt + avg(D + D_logistic - R) over the step."""
    eb = energy(before, p, floor)["E_total"]
    ea = energy(after, p, floor)["E_total"]

    def g_of(s):
        d = dissipation_and_remainder(s, p, floor)
        return (d["D_visc"] + d["D_mu"] + d["D_fisher"] + d["D_logistic"]
                - d["R_source"])

    return (ea - eb) / dt + 0.5 * (g_of(before) + g_of(after))


def mass_envelope(t, phi0_mean: float, p: ModelParams):
    """Exact mean trajectory and its monotone bracket."""
    t = np.asarray(t, dtype=float)
    if p.alpha == 0.0:
        exact = np.full_like(t, phi0_mean)
        lo = hi = phi0_mean
    else:
        hstar = abs(p.h_const) / p.alpha
        decay = np.exp(-p.alpha * t)
        exact = phi0_mean * decay + (p.h_const / p.alpha) * (1.0 - decay)
        if phi0_mean >= hstar:
            lo, hi = -hstar, phi0_mean
        elif phi0_mean <= -hstar:
            lo, hi = phi0_mean, hstar
        else:
            lo, hi = -hstar, hstar
    return exact, lo, hi


def mass_monitor(s: State, p: ModelParams, phi0_mean: float):
    """Mean of phi against its exact law; margin to the invariant band.

    rho_star is the guaranteed distance of |mean phi| from 1:
    1 - rho_star = max(|mean phi0|, |h|/alpha).  The reported margin is
    (1 - rho_star) - |mean phi(t)|, nonnegative while the mean stays in
    the certified band.
    """
    mean_now = s.phi.mean()
    exact, lo, hi = mass_envelope(s.t, phi0_mean, p)
    exact = float(exact)
    hstar = abs(p.h_const) / p.alpha if p.alpha > 0 else 0.0
    bound = max(abs(phi0_mean), hstar)
    rho_star = 1.0 - bound
    violation = max(0.0, lo - mean_now, mean_now - hi)
    return {
        "mean_phi": mean_now,
        "exact_mean": exact,
        "deviation": mean_now - exact,
        "bracket": (lo, hi),
        "bracket_violation": violation,
        "rho_star": rho_star,
        "rho_star_margin": bound - abs(mean_now),
    }


def sigma_monitor(s: State, floor: float = DEFAULT_ENTROPY_FLOOR):
    g = s.grid
    sig = s.sigma.phys
    return {
        "sigma_min": float(np.min(sig)),
        "sigma_mass": g.integral_phys(sig),
        "sigma_L2": float(norms(s.sigma, "L2")),
        "sigma_entropy": g.integral_phys(sig * (_floored_log(sig, floor) - 1.0)),
    }


def coercivity_margin(s: State, p: ModelParams,
                      floor: float = DEFAULT_ENTROPY_FLOOR):
    """Margin of 1/2 int [Psi(phi) + sigma(ln sigma - 1)] over |chi| int |sigma phi|.

    The negative part of the margin is an instantaneous estimate of the
    additive constant the lower bound needs; zero for well-behaved states.
    """
    g = s.grid
    sig = s.sigma.phys
    phi = s.phi.phys
    half = 0.5 * (g.integral_phys(_psi_values(phi, p))
                  + g.integral_phys(sig * (_floored_log(sig, floor) - 1.0)))
    cross = abs(p.chi) * g.integral_phys(np.abs(sig * phi))
    margin = half - cross
    return {"margin": margin, "C_star_estimate": max(0.0, -margin)}


def coercivity_floor(rp: RegPotential, area: float = 1.0,
                     span: float = 12.0, samples: int = 24001):
    """A priori constant C* >= 0 with coercivity margin >= -C* for sigma >= 0.

    Minimizing 1/2 sigma(ln sigma - 1) - |chi| sigma |phi| over sigma >= 0
    pointwise gives sigma* = exp(2|chi||phi|) and leaves

        m(phi) = 1/2 Psi(phi) - 1/2 exp(2|chi||phi|),

    so the margin of any admissible state is >= area * min m.  The potential
    outgrows the cross exponential (rate 4(|chi|+1) > 2|chi|), hence the
    minimum is interior; it is located by dense sampling of [-span, span]
    and both endpoints must come out positive, else the span was too small.
    """
    phi = np.linspace(-span, span, samples)
    m = 0.5 * rp.psi(phi) - 0.5 * np.exp(2.0 * abs(rp.chi) * np.abs(phi))
    if not (m[0] > 0.0 and m[-1] > 0.0):
        raise CoercivityError(
            "coercivity_floor: minimum may lie outside the sampled span")
    return area * max(0.0, -float(np.min(m)))


def pointwise_negativity_check(rp: RegPotential, theta0: float,
                               phi_vals, sigma_vals):
    """Pointwise lower-bound combination on a (phi, sigma) sample grid:

        1/2 Psi0_reg(phi) - theta0/2 phi^2 + 1/2 sigma(ln sigma - 1)
            - |chi| sigma phi

    which is nonnegative for phi at or beyond the coercivity threshold and
    any sigma >= 0.  Returns the minimum over the grid.
    """
    phi_vals = np.asarray(phi_vals, dtype=float)
    sigma_vals = np.asarray(sigma_vals, dtype=float)
    if np.any(sigma_vals < 0):
        raise ConfigError("pointwise_negativity_check: sigma samples must be >= 0")
    P, S = np.meshgrid(phi_vals, sigma_vals, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore"):
        ent = np.where(S > 0.0, S * (np.log(np.where(S > 0, S, 1.0)) - 1.0), 0.0)
    vals = (0.5 * rp.psi0_reg(P) - 0.5 * theta0 * P * P + 0.5 * ent
            - abs(rp.chi) * S * P)
    return float(np.min(vals))


def uniqueness_metric(s1: State, s2: State):
    """W = ||v_diff||_{dual Stokes}^2 + ||phi_diff||_{dual H1}^2
         + ||sigma_diff||_{dual H1}^2 + |mean phi_diff|."""
    g = s1.grid
    phi_d = ScalarField(g, hat=s1.phi.hat - s2.phi.hat)
    sig_d = ScalarField(g, hat=s1.sigma.hat - s2.sigma.hat)
    w = norms(phi_d, "dual_H1") ** 2 + norms(sig_d, "dual_H1") ** 2
    w += abs(phi_d.mean())
    if s1.v is not None and s2.v is not None:
        v_d = VectorField.from_hat(g, s1.v.x.hat - s2.v.x.hat,
                                   s1.v.y.hat - s2.v.y.hat)
        w += norms(v_d, "dual_stokes") ** 2
    return float(w)


def make_record(s: State, p: ModelParams, phi0_mean: float,
                residual: float = float("nan"),
                w_metric: float = float("nan"),
                floor: float = DEFAULT_ENTROPY_FLOOR,
                e: dict | None = None,
                d: dict | None = None) -> DiagnosticsRecord:
    if e is None:
        e = energy(s, p, floor)
    if d is None:
        d = dissipation_and_remainder(s, p, floor)
    m = mass_monitor(s, p, phi0_mean)
    sm = sigma_monitor(s, floor)
    return DiagnosticsRecord(
        t=s.t,
        E_total=e["E_total"], E_kinetic=e["E_kinetic"],
        E_gradient=e["E_gradient"], E_plap=e["E_plap"],
        E_potential=e["E_potential"], E_entropy=e["E_entropy"],
        E_cross=e["E_cross"],
        D_visc=d["D_visc"], D_mu=d["D_mu"], D_fisher=d["D_fisher"],
        D_logistic=d["D_logistic"], R_source=d["R_source"],
        residual_energy=residual,
        mean_phi=m["mean_phi"], rho_star_margin=m["rho_star_margin"],
        sigma_min=sm["sigma_min"], sigma_mass=sm["sigma_mass"],
        sigma_L2=sm["sigma_L2"],
        W_metric=w_metric,
        sigma_floor_frac=d["sigma_floor_frac"],
    )
