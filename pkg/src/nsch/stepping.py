"""IMEX time integration.

Stiff constant-coefficient pieces are treated implicitly and are diagonal
in the spectral basis:

    phi:   -m_bar Lap^2 - s0 m_bar (-Lap) - alpha   (s0 = theta0 / (2 eps_i)
                                                     stabilization, optional)
    sigma: Lap
    v:     eta_bar Lap

with m_bar = (m_lo + m_hi)/2 and eta_bar = (eta1 + eta2)/2.  Everything
else (variable coefficients, transport, the quartic gradient flux, the
potential, reaction terms) is explicit; the splitting is of the linearly
implicit kind, N(u) = F(u) - L u, so the scheme is consistent for any L.

Orders: 1 is backward/forward Euler; 2 is BDF2 with extrapolated explicit
terms, bootstrapped (and rescued) by a one-step second-order IMEX
Runge-Kutta method so no step is only first-order accurate.

The zero mode of phi is special: every flux term has exactly zero mean, so
the discrete mean obeys d/dt mean = -alpha mean + h.  The stepper advances
that scalar law in closed form each step, making the mean dynamics exact
rather than merely second order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .diagnostics import (DEFAULT_ENTROPY_FLOOR, dissipation_and_remainder,
                          energy, make_record, uniqueness_metric)
from .dynamics import ModelParams, State, rhs_phi, rhs_sigma, rhs_v
from .exceptions import ConfigError, DivergenceError, StabilityError
from .initial import InitialData
from .potential import QuarticPotential, RegPotential, SingularPotential
from .spectral import Grid, ScalarField, VectorField

__all__ = ["SchemeConfig", "Stepper", "run", "twin_run"]

_ARS_GAMMA = 1.0 - 1.0 / math.sqrt(2.0)
_ARS_DELTA = 1.0 - 1.0 / (2.0 * _ARS_GAMMA)


@dataclass(frozen=True)
class SchemeConfig:
    dt: float
    t_end: float
    K: int | None = None            # Galerkin radius; None = dealias radius
    imex_order: int = 2
    stabilize: bool = True
    m_bar: float | None = None      # None = (m_lo + m_hi)/2
    eta_bar: float | None = None    # None = (eta1 + eta2)/2
    entropy_floor: float = DEFAULT_ENTROPY_FLOOR
    residual_trigger: float = math.inf
    max_halvings: int = 3

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_end < 0:
            raise ConfigError(f"t_end must be nonnegative, got {self.t_end}")
        if self.imex_order not in (1, 2):
            raise ConfigError(f"imex_order must be 1 or 2, got {self.imex_order}")
        if self.entropy_floor <= 0:
            raise ConfigError("entropy_floor must be positive")
        if self.residual_trigger <= 0:
            raise ConfigError("residual_trigger must be positive")
        if self.max_halvings < 0:
            raise ConfigError("max_halvings must be >= 0")


def _theta0_of(p: ModelParams) -> float:
    pot = p.potential
    if isinstance(pot, RegPotential):
        return float(pot.base.theta0)
    if isinstance(pot, SingularPotential):
        return float(pot.params.theta0)
    if isinstance(pot, QuarticPotential):
        return 1.0
    return 0.0


class Stepper:
    """Advances the spectral state; owns the implicit symbols and history."""

    def __init__(self, grid: Grid, params: ModelParams, cfg: SchemeConfig):
        self.grid = grid
        self.p = params
        self.cfg = cfg
        K = cfg.K if cfg.K is not None else grid.max_trunc_radius
        if K > grid.max_trunc_radius:
            raise ConfigError(
                f"K={K} exceeds the dealias-safe radius {grid.max_trunc_radius}")
        self.K = K
        self.proj = grid.dealias_mask & grid.trunc_mask(K)

        m_bar = cfg.m_bar if cfg.m_bar is not None else 0.5 * (params.m_lo + params.m_hi)
        eta_bar = cfg.eta_bar if cfg.eta_bar is not None else 0.5 * (params.eta1 + params.eta2)
        s0 = _theta0_of(params) / (2.0 * params.eps_interface) if cfg.stabilize else 0.0
        k2 = grid.K2
        self.L_phi = -(m_bar * k2 * k2 + s0 * m_bar * k2) - params.alpha
        self.L_sig = -k2
        self.L_v = -eta_bar * k2
        self.fluid = None  # resolved on first state

    # -- plumbing ------------------------------------------------------------

    def state_of(self, t: float, U: dict) -> State:
        g = self.grid
        v = None
        if "vx" in U:
            v = VectorField.from_hat(g, U["vx"], U["vy"])
        return State(t=t, phi=ScalarField(g, hat=U["phi"]),
                     sigma=ScalarField(g, hat=U["sig"]), v=v)

    def pack(self, init: InitialData) -> dict:
        U = {"phi": init.phi0.hat * self.proj, "sig": init.sigma0.hat * self.proj}
        if init.v0 is not None:
            U["vx"] = init.v0.x.hat * self.proj
            U["vy"] = init.v0.y.hat * self.proj
        return U

    def _symbols(self, key):
        if key == "phi":
            return self.L_phi
        if key == "sig":
            return self.L_sig
        return self.L_v

    def eval_N(self, t: float, U: dict) -> dict:
        """Explicit part N(u) = F(u) - L u, truncated to the Galerkin radius."""
        s = self.state_of(t, U)
        F = {"phi": rhs_phi(s, self.p).hat, "sig": rhs_sigma(s, self.p).hat}
        if "vx" in U:
            fv = rhs_v(s, self.p)
            F["vx"] = fv.x.hat
            F["vy"] = fv.y.hat
        out = {}
        for key, val in F.items():
            out[key] = val * self.proj - self._symbols(key) * U[key]
        return out

    def _mean_update(self, phi_bar: complex, dt: float):
        p = self.p
        if p.alpha == 0.0:
            return phi_bar + dt * p.h_const
        decay = math.exp(-p.alpha * dt)
        return phi_bar * decay + (p.h_const / p.alpha) * (1.0 - decay)

    def _finalize(self, U: dict, phi_bar_prev, dt: float) -> dict:
        U["phi"][0, 0] = self._mean_update(phi_bar_prev, dt)
        return U

    def _check_finite(self, U: dict, step: int):
        for key, arr in U.items():
            if not np.all(np.isfinite(arr)):
                raise DivergenceError(
                    f"non-finite values in {key} after step {step}", step=step)

    # -- elementary steps ------------------------------------------------------

    def step_be(self, t, U, dt):
        """Backward/forward Euler IMEX step."""
        N = self.eval_N(t, U)
        out = {}
        for key in U:
            L = self._symbols(key)
            out[key] = (U[key] + dt * N[key]) / (1.0 - dt * L)
        return self._finalize(out, U["phi"][0, 0], dt), N

    def step_ars2(self, t, U, dt):
        """One-step second-order IMEX Runge-Kutta (ARS(2,2,2))."""
        gam, dlt = _ARS_GAMMA, _ARS_DELTA
        N0 = self.eval_N(t, U)
        U1 = {}
        for key in U:
            L = self._symbols(key)
            U1[key] = (U[key] + dt * gam * N0[key]) / (1.0 - dt * gam * L)
        N1 = self.eval_N(t + gam * dt, U1)
        out = {}
        for key in U:
            L = self._symbols(key)
            rhs = (U[key] + dt * (dlt * N0[key] + (1.0 - dlt) * N1[key])
                   + dt * (1.0 - gam) * L * U1[key])
            out[key] = rhs / (1.0 - dt * gam * L)
        return self._finalize(out, U["phi"][0, 0], dt), N0

    def step_bdf2(self, t, U, U_prev, N_prev, dt):
        """BDF2 with extrapolated explicit terms."""
        N = self.eval_N(t, U)
        out = {}
        for key in U:
            L = self._symbols(key)
            nhat = 2.0 * N[key] - N_prev[key]
            out[key] = ((4.0 * U[key] - U_prev[key] + 2.0 * dt * nhat)
                        / (3.0 - 2.0 * dt * L))
        return self._finalize(out, U["phi"][0, 0], dt), N


def _num_steps(cfg: SchemeConfig) -> int:
    n = int(round(cfg.t_end / cfg.dt))
    if abs(n * cfg.dt - cfg.t_end) > 1e-9 * max(1.0, cfg.t_end):
        raise ConfigError(
            f"t_end={cfg.t_end} is not an integer multiple of dt={cfg.dt}")
    return n


def _g_of(d: dict) -> float:
    return d["D_visc"] + d["D_mu"] + d["D_fisher"] + d["D_logistic"] - d["R_source"]


def run(init: InitialData, cfg: SchemeConfig, params: ModelParams,
        grid: Grid | None = None, diag_every: int = 1, snapshot_every: int = 0,
        on_diag=None, on_snapshot=None, w_against=None):
    """Integrate to t_end.

    Diagnostics (including the per-step energy-law residual) are computed
    every step and a DiagnosticsRecord is emitted every diag_every steps
    plus at t = 0 and the final time.  Snapshots go to on_snapshot every
    snapshot_every steps (0 = never, final state always when enabled).
    w_against, if given, is a parallel run whose state distance feeds the
    W_metric column (used by twin_run).

    Returns (final State, list of emitted DiagnosticsRecords).
    """
    if grid is None:
        grid = init.phi0.grid
    stepper = Stepper(grid, params, cfg)
    n_steps = _num_steps(cfg)
    floor = cfg.entropy_floor

    U = stepper.pack(init)
    phi0_mean = float(np.real(U["phi"][0, 0]))
    t = 0.0
    state = stepper.state_of(t, U)

    records = []

    def emit(step, st, residual, e=None, d=None):
        w = float("nan")
        if w_against is not None:
            w = uniqueness_metric(st, w_against(step))
        rec = make_record(st, params, phi0_mean, residual=residual,
                          w_metric=w, floor=floor, e=e, d=d)
        records.append(rec)
        if on_diag is not None:
            on_diag(rec)

    e_prev = energy(state, params, floor)
    d_prev = dissipation_and_remainder(state, params, floor)
    emit(0, state, float("nan"), e=e_prev, d=d_prev)
    if on_snapshot is not None and snapshot_every > 0:
        on_snapshot(state, 0)

    U_prev = None
    N_prev = None
    for step in range(1, n_steps + 1):
        t_new = step * cfg.dt
        if cfg.imex_order == 1:
            U_new, N_here = stepper.step_be(t, U, cfg.dt)
        elif U_prev is None:
            U_new, N_here = stepper.step_ars2(t, U, cfg.dt)
        else:
            U_new, N_here = stepper.step_bdf2(t, U, U_prev, N_prev, cfg.dt)
        stepper._check_finite(U_new, step)
        state_new = stepper.state_of(t_new, U_new)
        e_new = energy(state_new, params, floor)
        d_new = dissipation_and_remainder(state_new, params, floor)
        residual = ((e_new["E_total"] - e_prev["E_total"]) / cfg.dt
                    + 0.5 * (_g_of(d_prev) + _g_of(d_new)))

        if abs(residual) > cfg.residual_trigger:
            # emergency halving: redo the macro step with one-step substeps
            rescued = False
            for j in range(1, cfg.max_halvings + 1):
                m = 2**j
                sub = cfg.dt / m
                U_try = U
                t_try = t
                for _ in range(m):
                    U_try, _n = stepper.step_ars2(t_try, U_try, sub)
                    t_try += sub
                stepper._check_finite(U_try, step)
                state_new = stepper.state_of(t_new, U_try)
                e_new = energy(state_new, params, floor)
                d_new = dissipation_and_remainder(state_new, params, floor)
                residual = ((e_new["E_total"] - e_prev["E_total"]) / cfg.dt
                            + 0.5 * (_g_of(d_prev) + _g_of(d_new)))
                if abs(residual) <= cfg.residual_trigger:
                    U_new = U_try
                    N_here = stepper.eval_N(t, U)
                    rescued = True
                    break
            if not rescued:
                raise StabilityError(
                    f"energy-law residual {residual:.3e} still above trigger "
                    f"{cfg.residual_trigger:.3e} after {cfg.max_halvings} "
                    f"halvings at step {step}")

        U_prev, N_prev = U, N_here
        U, t, state = U_new, t_new, state_new
        e_prev, d_prev = e_new, d_new

        if step % diag_every == 0 or step == n_steps:
            emit(step, state, residual, e=e_new, d=d_new)
        if on_snapshot is not None and snapshot_every > 0 and (
                step % snapshot_every == 0 or step == n_steps):
            on_snapshot(state, step)

    return state, records


def default_bump(grid: Grid) -> ScalarField:
    """The fixed mean-free perturbation shape used by twin runs."""
    X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
    return ScalarField(grid, phys=np.cos(2.0 * np.pi * X / grid.Lx)
                       * np.cos(2.0 * np.pi * Y / grid.Ly))


def twin_run(init: InitialData, delta: float, cfg: SchemeConfig,
             params: ModelParams, diag_every: int = 1):
    """Integrate the base and a delta-perturbed trajectory in lockstep.

    The perturbation is delta times the fixed smooth mean-free bump of
    default_bump applied to the prepared phi0.  Returns a list of
    (t, W) pairs sampled every diag_every steps, where W is the
    contraction metric between the two states.
    """
    grid = init.phi0.grid
    bump = default_bump(grid)
    pert = InitialData(
        v0=init.v0,
        phi0=ScalarField(grid, hat=init.phi0.hat + delta * bump.hat),
        sigma0=init.sigma0,
        gamma=init.gamma, n_mollify=init.n_mollify)

    stepper_a = Stepper(grid, params, cfg)
    stepper_b = Stepper(grid, params, cfg)
    Ua = stepper_a.pack(init)
    Ub = stepper_b.pack(pert)
    n_steps = _num_steps(cfg)

    out = []

    def w_now(t, Ua, Ub):
        sa = stepper_a.state_of(t, Ua)
        sb = stepper_b.state_of(t, Ub)
        return uniqueness_metric(sa, sb)

    out.append((0.0, w_now(0.0, Ua, Ub)))
    Ua_prev = Na_prev = Ub_prev = Nb_prev = None
    t = 0.0
    for step in range(1, n_steps + 1):
        if cfg.imex_order == 1:
            Ua_new, Na = stepper_a.step_be(t, Ua, cfg.dt)
            Ub_new, Nb = stepper_b.step_be(t, Ub, cfg.dt)
        elif Ua_prev is None:
            Ua_new, Na = stepper_a.step_ars2(t, Ua, cfg.dt)
            Ub_new, Nb = stepper_b.step_ars2(t, Ub, cfg.dt)
        else:
            Ua_new, Na = stepper_a.step_bdf2(t, Ua, Ua_prev, Na_prev, cfg.dt)
            Ub_new, Nb = stepper_b.step_bdf2(t, Ub, Ub_prev, Nb_prev, cfg.dt)
        stepper_a._check_finite(Ua_new, step)
        stepper_b._check_finite(Ub_new, step)
        Ua_prev, Na_prev = Ua, Na
        Ub_prev, Nb_prev = Ub, Nb
        Ua, Ub = Ua_new, Ub_new
        t = step * cfg.dt
        if step % diag_every == 0 or step == n_steps:
            out.append((t, w_now(t, Ua, Ub)))
    return out
