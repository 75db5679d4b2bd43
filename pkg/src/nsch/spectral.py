"""Spectral grids, transforms and differential operators.

Two grid modes:

  periodic_torus     - full complex FFT on [0,Lx) x [0,Ly), wavenumbers
                       2*pi*j/L; all operators available.
  neumann_rectangle  - cosine basis (DCT-II on cell midpoints) encoding
                       homogeneous Neumann walls, wavenumbers pi*j/L.
                       Raw gradients are only exposed inside composite
                       operators (gradient samples / flux divergence);
                       velocity transport is unsupported.

Coefficients are normalised so the zero mode equals the spatial mean.
Nonlinear products are formed in physical space and pushed back through
dealias(), which zeroes everything outside two thirds of the resolvable
radius.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .exceptions import ConfigError, PreconditionError, UnsupportedModeError

__all__ = ["Grid", "ScalarField", "VectorField", "norms", "diff_ops"]


def _workers():
    try:
        return max(1, int(os.environ.get("NSCH_THREADS", "1")))
    except ValueError:
        return 1


class Grid:
    """Uniform rectangular grid plus cached spectral tables."""

    def __init__(self, mode: str, Lx: float, Ly: float, Nx: int, Ny: int):
        if mode not in ("periodic_torus", "neumann_rectangle"):
            raise ConfigError(f"grid mode must be periodic_torus or "
                              f"neumann_rectangle, got {mode!r}")
        for name, n in (("Nx", Nx), ("Ny", Ny)):
            if n < 8 or n % 2:
                raise ConfigError(f"{name} must be even and >= 8, got {n}")
        if Lx <= 0 or Ly <= 0:
            raise ConfigError("domain extents must be positive")
        self.mode = mode
        self.Lx, self.Ly = float(Lx), float(Ly)
        self.Nx, self.Ny = int(Nx), int(Ny)
        self.area = self.Lx * self.Ly
        self.hx = self.Lx / self.Nx
        self.hy = self.Ly / self.Ny

        if mode == "periodic_torus":
            self.x = np.arange(self.Nx) * self.hx
            self.y = np.arange(self.Ny) * self.hy
            kx = 2.0 * np.pi * np.fft.fftfreq(self.Nx, d=self.hx)
            ky = 2.0 * np.pi * np.fft.fftfreq(self.Ny, d=self.hy)
            self.kx = kx
            self.ky = ky
            self.KX = kx[:, None]
            self.KY = ky[None, :]
            # integer mode indices for truncation radii
            jx = np.fft.fftfreq(self.Nx) * self.Nx
            jy = np.fft.fftfreq(self.Ny) * self.Ny
            self._JX = jx[:, None]
            self._JY = jy[None, :]
            self.quad_w = None  # Parseval weight is uniform for the full DFT
        else:
            # cell midpoints; DCT-II sampling
            self.x = (np.arange(self.Nx) + 0.5) * self.hx
            self.y = (np.arange(self.Ny) + 0.5) * self.hy
            kx = np.pi * np.arange(self.Nx) / self.Lx
            ky = np.pi * np.arange(self.Ny) / self.Ly
            self.kx = kx
            self.ky = ky
            self.KX = kx[:, None]
            self.KY = ky[None, :]
            self._JX = np.arange(self.Nx, dtype=float)[:, None]
            self._JY = np.arange(self.Ny, dtype=float)[None, :]
            wx = np.full(self.Nx, 2.0)
            wx[0] = 1.0
            wy = np.full(self.Ny, 2.0)
            wy[0] = 1.0
            self.quad_w = wx[:, None] * wy[None, :]

        self.K2 = self.KX**2 + self.KY**2
        # 2/3 rule: keep modes inside two thirds of the Nyquist ellipse.
        # Nyquist index is N/2 on the torus (full waves) and N on the
        # rectangle (half waves), which is the same physical wavenumber
        # pi*N/L in both modes.
        nyq_x = self.Nx / 2 if mode == "periodic_torus" else self.Nx
        nyq_y = self.Ny / 2 if mode == "periodic_torus" else self.Ny
        frac = (self._JX / nyq_x) ** 2 + (self._JY / nyq_y) ** 2
        self.dealias_mask = frac <= (2.0 / 3.0) ** 2
        # largest integer truncation radius that stays inside the mask
        self.max_trunc_radius = int(np.floor(2.0 / 3.0 * min(nyq_x, nyq_y)))
        self._inv_k2 = np.zeros_like(self.K2)
        nz = self.K2 > 0
        self._inv_k2[nz] = 1.0 / self.K2[nz]

    # -- transforms ---------------------------------------------------------

    def to_hat(self, f):
        if self.mode == "periodic_torus":
            return sfft.fft2(f, workers=_workers()) / (self.Nx * self.Ny)
        return sfft.dctn(f, type=2, workers=_workers()) / (4.0 * self.Nx * self.Ny)

    def to_phys(self, fhat):
        if self.mode == "periodic_torus":
            return sfft.ifft2(fhat * (self.Nx * self.Ny), workers=_workers()).real
        return sfft.idctn(fhat * (4.0 * self.Nx * self.Ny), type=2, workers=_workers())

    # -- diagonal operators --------------------------------------------------

    def lap_hat(self, fhat):
        return -self.K2 * fhat

    def bilap_hat(self, fhat):
        return self.K2 * self.K2 * fhat

    def inv_lap_zero_mean_hat(self, fhat):
        """u with laplacian(u) = -(f - mean f) and mean(u) = 0."""
        return fhat * self._inv_k2

    def dealias_hat(self, fhat):
        return fhat * self.dealias_mask

    def trunc_mask(self, K: int):
        if K > self.max_trunc_radius:
            raise ConfigError(
                f"truncation radius {K} exceeds the dealias-safe maximum "
                f"{self.max_trunc_radius}")
        return (self._JX**2 + self._JY**2) <= float(K) ** 2

    def truncate_hat(self, fhat, K: int):
        return fhat * self.trunc_mask(K)

    # -- gradients and divergences -------------------------------------------

    def grad_hat(self, fhat):
        """Spectral gradient (torus only: the rectangle gradient leaves the
        cosine basis and is available only through grad_phys/div_flux_hat)."""
        if self.mode != "periodic_torus":
            raise UnsupportedModeError(
                "raw spectral gradient is undefined in the cosine basis; use "
                "grad_phys or a composite operator")
        return 1j * self.KX * fhat, 1j * self.KY * fhat

    def grad_phys(self, fhat):
        """Physical-space samples of the gradient of the represented field."""
        if self.mode == "periodic_torus":
            gx, gy = self.grad_hat(fhat)
            return self.to_phys(gx), self.to_phys(gy)
        # cosine -> sine along the differentiated axis
        w = _workers()
        sx = -self.KX * fhat  # sine coefficients, frequency jx shifted down
        gx = sfft.idst(
            np.vstack([sx[1:, :] * (2.0 * self.Nx), np.zeros((1, self.Ny))]),
            type=2, axis=0, workers=w)
        gx = sfft.idct(gx * (2.0 * self.Ny), type=2, axis=1, workers=w)
        sy = -self.KY * fhat
        gy = sfft.idst(
            np.hstack([sy[:, 1:] * (2.0 * self.Ny), np.zeros((self.Nx, 1))]),
            type=2, axis=1, workers=w)
        gy = sfft.idct(gy * (2.0 * self.Nx), type=2, axis=0, workers=w)
        return gx, gy

    def div_flux_hat(self, fx, fy):
        """Divergence of a physical-space flux, returned spectrally.

        On the rectangle the flux components are expanded in the sine basis
        along their own axis (odd extension = zero normal flux at the
        walls), which differentiates back into the cosine basis.
        """
        if self.mode == "periodic_torus":
            return (1j * self.KX * self.to_hat(fx)
                    + 1j * self.KY * self.to_hat(fy))
        w = _workers()
        ax = sfft.dst(fx, type=2, axis=0, workers=w) / (2.0 * self.Nx)
        ax = sfft.dct(ax, type=2, axis=1, workers=w) / (2.0 * self.Ny)
        # sine frequency jx = row + 1; d/dx sin(kx) = k cos(kx)
        out = np.zeros((self.Nx, self.Ny))
        out[1:, :] = self.kx[1:, None] * ax[:-1, :]
        ay = sfft.dst(fy, type=2, axis=1, workers=w) / (2.0 * self.Ny)
        ay = sfft.dct(ay, type=2, axis=0, workers=w) / (2.0 * self.Nx)
        out[:, 1:] += self.ky[None, 1:] * ay[:, :-1]
        return out

    def leray_hat(self, vx_hat, vy_hat):
        """Projection onto divergence-free fields; zero mode untouched.

        The Nyquist rows have no conjugate partner, so inputs carrying
        energy there lose real/spectral consistency; callers dealias
        first (all internal users do).
        """
        if self.mode != "periodic_torus":
            raise UnsupportedModeError("Leray projection requires the torus")
        kdotv = self.KX * vx_hat + self.KY * vy_hat
        factor = kdotv * self._inv_k2
        return vx_hat - self.KX * factor, vy_hat - self.KY * factor

    # -- quadrature and norms --------------------------------------------------

    def mean_phys(self, f):
        return float(np.mean(f))

    def integral_phys(self, f):
        return float(np.mean(f)) * self.area

    def _spec_square_sum(self, fhat):
        if self.mode == "periodic_torus":
            return float(np.sum(np.abs(fhat) ** 2))
        return float(np.sum(self.quad_w * fhat * fhat))

    def _spec_weighted_sum(self, fhat, weight):
        if self.mode == "periodic_torus":
            return float(np.sum(weight * np.abs(fhat) ** 2))
        return float(np.sum(weight * self.quad_w * fhat * fhat))

    def l2_hat(self, fhat):
        return np.sqrt(self.area * self._spec_square_sum(fhat))

    def h1_hat(self, fhat):
        return np.sqrt(self.area * self._spec_weighted_sum(fhat, 1.0 + self.K2))

    def dual_h1_hat(self, fhat):
        return np.sqrt(self.area * self._spec_weighted_sum(fhat, 1.0 / (1.0 + self.K2)))

    def v0_dual_hat(self, fhat):
        """|| grad inv_lap (f - mean) ||, the mean-free dual seminorm."""
        return np.sqrt(self.area * self._spec_weighted_sum(fhat, self._inv_k2))


class ScalarField:
    """A scalar field holding paired physical and spectral representations,
    each computed lazily from the other."""

    __slots__ = ("grid", "_phys", "_hat")

    def __init__(self, grid: Grid, phys=None, hat=None):
        if phys is None and hat is None:
            raise ConfigError("ScalarField needs phys or hat data")
        if phys is not None:
            phys = np.asarray(phys, dtype=float)
            if phys.shape != (grid.Nx, grid.Ny):
                raise ConfigError(
                    f"field shape {phys.shape} does not match grid "
                    f"({grid.Nx}, {grid.Ny})")
        self.grid = grid
        self._phys = phys
        self._hat = hat

    @property
    def phys(self):
        if self._phys is None:
            self._phys = self.grid.to_phys(self._hat)
        return self._phys

    @property
    def hat(self):
        if self._hat is None:
            self._hat = self.grid.to_hat(self._phys)
        return self._hat

    def mean(self):
        return float(np.real(self.hat[0, 0])) if self._hat is not None \
            else float(np.mean(self._phys))


class VectorField:
    """Two-component field (velocity)."""

    __slots__ = ("grid", "x", "y")

    def __init__(self, grid: Grid, x: ScalarField, y: ScalarField):
        self.grid = grid
        self.x = x
        self.y = y

    @classmethod
    def from_phys(cls, grid, fx, fy):
        return cls(grid, ScalarField(grid, phys=fx), ScalarField(grid, phys=fy))

    @classmethod
    def from_hat(cls, grid, fx_hat, fy_hat):
        return cls(grid, ScalarField(grid, hat=fx_hat), ScalarField(grid, hat=fy_hat))


# ---------------------------------------------------------------------------
# Public op wrappers
# ---------------------------------------------------------------------------


def diff_ops(f, op: str):
    """grad / div / laplacian / bilaplacian on fields.

    grad maps ScalarField -> VectorField (torus only), div maps
    VectorField -> ScalarField, laplacian/bilaplacian act on scalars in
    either mode.
    """
    if op == "grad":
        if not isinstance(f, ScalarField):
            raise ConfigError("diff_ops: grad acts on a ScalarField")
        g = f.grid
        gx, gy = g.grad_hat(f.hat)
        return VectorField.from_hat(g, gx, gy)
    if op == "div":
        if not isinstance(f, VectorField):
            raise ConfigError("diff_ops: div acts on a VectorField")
        g = f.grid
        if g.mode != "periodic_torus":
            raise UnsupportedModeError(
                "raw divergence is undefined in the cosine basis; use "
                "div_flux_hat")
        return ScalarField(
            g, hat=1j * g.KX * f.x.hat + 1j * g.KY * f.y.hat)
    if op == "laplacian":
        return ScalarField(f.grid, hat=f.grid.lap_hat(f.hat))
    if op == "bilaplacian":
        return ScalarField(f.grid, hat=f.grid.bilap_hat(f.hat))
    raise ConfigError(f"diff_ops: unknown op {op!r}")


def inv_laplacian_zero_mean(f: ScalarField):
    return ScalarField(f.grid, hat=f.grid.inv_lap_zero_mean_hat(f.hat))


def dealias(f):
    if isinstance(f, VectorField):
        g = f.grid
        return VectorField.from_hat(g, g.dealias_hat(f.x.hat), g.dealias_hat(f.y.hat))
    return ScalarField(f.grid, hat=f.grid.dealias_hat(f.hat))


def leray_project(v: VectorField):
    g = v.grid
    px, py = g.leray_hat(v.x.hat, v.y.hat)
    return VectorField.from_hat(g, px, py)


def _require_solenoidal(v: VectorField):
    g = v.grid
    div_hat = 1j * g.KX * v.x.hat + 1j * g.KY * v.y.hat
    scale = max(g.l2_hat(v.x.hat), g.l2_hat(v.y.hat), 1e-300)
    if g.l2_hat(div_hat) > 1e-10 * scale:
        raise PreconditionError("dual_stokes norm requires a solenoidal field")


def norms(f, kind: str):
    """L2 | H1 | Linf | mean | dual_H1 | dual_stokes.

    dual_H1 is the (-Laplacian + I)^(-1/2) multiplier norm on scalars.
    dual_stokes applies the |k|^(-1) multiplier to a solenoidal velocity on
    the torus; the constant mode (outside the Stokes inverse) enters with
    unit weight.
    """
    if isinstance(f, VectorField):
        g = f.grid
        if kind == "L2":
            return float(np.hypot(g.l2_hat(f.x.hat), g.l2_hat(f.y.hat)))
        if kind == "Linf":
            return float(max(np.max(np.abs(f.x.phys)), np.max(np.abs(f.y.phys))))
        if kind == "H1":
            return float(np.hypot(g.h1_hat(f.x.hat), g.h1_hat(f.y.hat)))
        if kind == "dual_stokes":
            if g.mode != "periodic_torus":
                raise UnsupportedModeError("dual_stokes requires the torus")
            _require_solenoidal(f)
            w = g._inv_k2.copy()
            w[0, 0] = 1.0
            s = g._spec_weighted_sum(f.x.hat, w) + g._spec_weighted_sum(f.y.hat, w)
            return float(np.sqrt(g.area * s))
        raise ConfigError(f"norms: unsupported kind {kind!r} for vector fields")
    g = f.grid
    if kind == "L2":
        return float(g.l2_hat(f.hat))
    if kind == "H1":
        return float(g.h1_hat(f.hat))
    if kind == "Linf":
        return float(np.max(np.abs(f.phys)))
    if kind == "mean":
        return f.mean()
    if kind == "dual_H1":
        return float(g.dual_h1_hat(f.hat))
    if kind == "dual_stokes":
        raise PreconditionError("dual_stokes is defined for velocity fields")
    raise ConfigError(f"norms: unknown kind {kind!r}")
