"""Initial data preparation.

The solver never starts from raw user fields.  The order parameter is
passed through the elliptic smoothing

    (I - gamma Laplacian) phi_g = (1 - gamma) phi0,

a spectral multiplication by (1-gamma) / (1 + gamma |k|^2), which pulls the
supremum strictly inside the physical interval: ||phi_g||_inf <= 1 - gamma
whenever ||phi0||_inf <= 1, while the mean scales exactly by (1-gamma).
The concentration is mollified by a heat half-step exp(-|k|^2 / n), which
keeps the mass exactly, preserves nonnegativity and does not increase the
entropy.  Both prepared fields are then truncated to the Galerkin radius K.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, DataError
from .spectral import Grid, ScalarField, VectorField, leray_project

__all__ = [
    "InitialData",
    "elliptic_smooth_phi0",
    "mollify_sigma0",
    "galerkin_truncate",
    "prepare_initial_data",
    "generate_phi0",
    "generate_sigma0",
    "generate_v0",
]

# Tiny negative values produced by roundoff in the mollifier are projected
# to zero; anything below this is treated as genuinely bad data.
_NEG_TOL = 1e-12
# Discrete slack on the continuum bound ||phi_g||_inf <= 1 - gamma.
_LINF_SLACK = 1e-8


@dataclass
class InitialData:
    """Prepared initial state: v0 solenoidal (None when fluid-free),
    phi0 smoothed and truncated, sigma0 mollified and truncated."""

    v0: VectorField | None
    phi0: ScalarField
    sigma0: ScalarField
    gamma: float
    n_mollify: float


def elliptic_smooth_phi0(phi0: ScalarField, gamma: float) -> ScalarField:
    """Apply the (I - gamma Lap)^(-1) (1-gamma) smoothing multiplier."""
    if not 0.0 < gamma <= 0.5:
        raise ConfigError(f"smoothing strength gamma must lie in (0, 1/2], got {gamma}")
    g = phi0.grid
    mult = (1.0 - gamma) / (1.0 + gamma * g.K2)
    out = ScalarField(g, hat=phi0.hat * mult)
    sup = float(np.max(np.abs(out.phys)))
    if sup > 1.0 - gamma + _LINF_SLACK:
        # The continuum bound can only fail here through under-resolution of
        # the input; surface it rather than clipping.
        raise DataError(
            f"elliptic smoothing produced sup {sup:.12g} > 1 - gamma = "
            f"{1.0 - gamma:.12g} (+{_LINF_SLACK:g} slack); input is not a "
            f"resolved field with ||phi0||_inf <= 1")
    return out


def mollify_sigma0(sigma0: ScalarField, n: float) -> ScalarField:
    """Heat-kernel mollification exp(-|k|^2 / n); mass preserved exactly."""
    if not n > 0:
        raise ConfigError(f"mollification index n must be positive, got {n}")
    g = sigma0.grid
    neg = float(np.min(sigma0.phys))
    if neg < -_NEG_TOL:
        raise DataError(
            f"sigma0 has negative values down to {neg:.6g}; concentrations "
            f"must be nonnegative")
    out_hat = sigma0.hat * np.exp(-g.K2 / n)
    out = ScalarField(g, hat=out_hat)
    phys = out.phys
    low = float(np.min(phys))
    if low < -_NEG_TOL:
        raise DataError(
            f"mollification produced values down to {low:.6g}, beyond the "
            f"roundoff tolerance {-_NEG_TOL:g}")
    if low < 0.0:
        phys = np.where(phys < 0.0, 0.0, phys)
        out = ScalarField(g, phys=phys)
    return out


def galerkin_truncate(f: ScalarField, K: int) -> ScalarField:
    """Zero all modes outside the radial index cutoff K."""
    return ScalarField(f.grid, hat=f.grid.truncate_hat(f.hat, K))


def prepare_initial_data(
    grid: Grid,
    phi0_raw: ScalarField,
    sigma0_raw: ScalarField,
    v0_raw: VectorField | None,
    gamma: float,
    n_mollify: float,
    K: int | None = None,
) -> InitialData:
    """Full preparation pipeline: smooth, mollify, truncate, project."""
    if K is None:
        K = grid.max_trunc_radius
    phi_s = elliptic_smooth_phi0(phi0_raw, gamma)
    sig_s = mollify_sigma0(sigma0_raw, n_mollify)

    # Truncation can push the sup back up; enlarge K (within the dealias-safe
    # range) until the truncated field keeps a gamma/2 safety margin.
    k_try = int(K)
    while True:
        phi_t = galerkin_truncate(phi_s, k_try)
        sup = float(np.max(np.abs(phi_t.phys)))
        if sup <= 1.0 - 0.5 * gamma:
            break
        if k_try >= grid.max_trunc_radius:
            raise DataError(
                f"truncated order parameter has sup {sup:.6g} > 1 - gamma/2 "
                f"even at the maximal cutoff K={k_try}; refine the grid")
        k_try = min(grid.max_trunc_radius, max(k_try + 1, int(k_try * 1.25)))
    sig_t = galerkin_truncate(sig_s, k_try)
    # re-project truncation ripples of the concentration
    sphys = sig_t.phys
    if float(np.min(sphys)) < 0.0:
        sig_t = ScalarField(grid, phys=np.where(sphys < 0.0, 0.0, sphys))

    v0 = None
    if v0_raw is not None:
        vx = grid.truncate_hat(v0_raw.x.hat, k_try)
        vy = grid.truncate_hat(v0_raw.y.hat, k_try)
        v0 = leray_project(VectorField.from_hat(grid, vx, vy))
    return InitialData(v0=v0, phi0=phi_t, sigma0=sig_t, gamma=gamma,
                       n_mollify=n_mollify)


# ---------------------------------------------------------------------------
# Built-in generators
# ---------------------------------------------------------------------------


def _meshgrid(grid: Grid):
    return np.meshgrid(grid.x, grid.y, indexing="ij")


def generate_phi0(grid: Grid, kind: str, mean: float = 0.0, amp: float = 0.8,
                  width: float = 0.15, seed: int = 0, modes: int = 6) -> ScalarField:
    """Order-parameter generators: random | stripe | droplet | constant."""
    X, Y = _meshgrid(grid)
    if kind == "constant":
        return ScalarField(grid, phys=np.full((grid.Nx, grid.Ny), mean))
    if kind == "random":
        rng = np.random.default_rng(seed)
        noise = rng.standard_normal((grid.Nx, grid.Ny))
        hat = grid.to_hat(noise)
        k0 = 2.0 * np.pi * modes / max(grid.Lx, grid.Ly)
        hat *= np.exp(-grid.K2 / (2.0 * k0 * k0))
        hat[0, 0] = 0.0
        f = grid.to_phys(hat)
        sup = float(np.max(np.abs(f)))
        f = f * (amp / sup) if sup > 0 else f
        f = f + mean
        return ScalarField(grid, phys=f)
    if kind == "stripe":
        s = np.sin(2.0 * np.pi * X / grid.Lx)
        f = mean + amp * np.tanh(s / width)
        return ScalarField(grid, phys=f)
    if kind == "droplet":
        cx, cy = 0.5 * grid.Lx, 0.5 * grid.Ly
        r2 = (np.minimum(np.abs(X - cx), grid.Lx - np.abs(X - cx)) ** 2
              + np.minimum(np.abs(Y - cy), grid.Ly - np.abs(Y - cy)) ** 2)
        radius = 0.25 * min(grid.Lx, grid.Ly)
        f = mean + amp * np.tanh((radius - np.sqrt(r2)) / (width * radius))
        return ScalarField(grid, phys=f)
    raise ConfigError(f"unknown phi0 generator {kind!r}")


def generate_sigma0(grid: Grid, kind: str, level: float = 1.0, amp: float = 1.0,
                    width: float = 0.5, seed: int = 0) -> ScalarField:
    """Concentration generators: constant | blob | mix (smooth positive)."""
    X, Y = _meshgrid(grid)
    if kind == "constant":
        return ScalarField(grid, phys=np.full((grid.Nx, grid.Ny), level))
    if kind == "blob":
        # periodic analogue of a Gaussian bump; strictly nonnegative
        cx, cy = 0.5 * grid.Lx, 0.5 * grid.Ly
        sx = (2.0 * np.pi * width / grid.Lx) ** 2
        sy = (2.0 * np.pi * width / grid.Ly) ** 2
        bump = np.exp((np.cos(2.0 * np.pi * (X - cx) / grid.Lx) - 1.0) / sx
                      + (np.cos(2.0 * np.pi * (Y - cy) / grid.Ly) - 1.0) / sy)
        return ScalarField(grid, phys=level + amp * bump)
    if kind == "mix":
        f = level + amp * (0.5 * np.cos(2.0 * np.pi * X / grid.Lx)
                           * np.cos(2.0 * np.pi * Y / grid.Ly))
        if float(np.min(f)) < 0:
            raise DataError("sigma0 mix generator produced negative values; "
                            "reduce amp or raise level")
        return ScalarField(grid, phys=f)
    raise ConfigError(f"unknown sigma0 generator {kind!r}")


def generate_v0(grid: Grid, kind: str, amp: float = 0.1, seed: int = 0) -> VectorField | None:
    """Velocity generators: zero | taylor_green | random (solenoidal)."""
    if kind == "none":
        return None
    X, Y = _meshgrid(grid)
    if kind == "zero":
        z = np.zeros((grid.Nx, grid.Ny))
        return VectorField.from_phys(grid, z, z.copy())
    if kind == "taylor_green":
        ax = 2.0 * np.pi / grid.Lx
        ay = 2.0 * np.pi / grid.Ly
        vx = amp * np.sin(ax * X) * np.cos(ay * Y)
        vy = -amp * (ax / ay) * np.cos(ax * X) * np.sin(ay * Y)
        return VectorField.from_phys(grid, vx, vy)
    if kind == "random":
        rng = np.random.default_rng(seed)
        hat = grid.to_hat(rng.standard_normal((grid.Nx, grid.Ny)))
        k0 = 2.0 * np.pi * 4.0 / max(grid.Lx, grid.Ly)
        psi_hat = hat * np.exp(-grid.K2 / (2.0 * k0 * k0))
        psi_hat[0, 0] = 0.0
        # velocity from a stream function is automatically solenoidal
        vx_hat = 1j * grid.KY * psi_hat
        vy_hat = -1j * grid.KX * psi_hat
        v = VectorField.from_hat(grid, vx_hat, vy_hat)
        sup = max(float(np.max(np.abs(v.x.phys))), float(np.max(np.abs(v.y.phys))))
        if sup > 0:
            v = VectorField.from_hat(grid, vx_hat * (amp / sup), vy_hat * (amp / sup))
        return v
    raise ConfigError(f"unknown v0 generator {kind!r}")
