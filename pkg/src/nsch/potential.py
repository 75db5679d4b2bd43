"""Free-energy potentials for the phase field.

The physical potential is the logarithmic double-well

    Psi(r) = theta/2 [(1-r) ln(1-r) + (1+r) ln(1+r)] + theta_c/2 (1 - r^2),

finite only on [-1, 1].  For analysis and for robust numerics it is split
as Psi = Psi0 - theta0/2 r^2 with Psi0 the convex logarithmic part
(normalised so Psi0(0) = Psi0'(0) = 0) and, by default, theta0 = theta_c.

RegPotential replaces Psi0' outside [-1+eps, 1-eps] by a C^1 extension
whose outer growth rate depends on the chemotactic strength chi: linear on
the collar up to |r| = 2, exponential with rate 4(|chi|+1) beyond.  The
exponential growth is what buys coercivity of the free energy against the
-chi sigma phi cross term, quantified by find_r_star below.

All evaluators accept scalars or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import CoercivityError, ConfigError, DomainError, SingularityError

__all__ = [
    "PotentialParams",
    "RegPotential",
    "SingularPotential",
    "QuarticPotential",
    "psi_singular",
    "psi0",
    "psi0_prime",
    "psi0_second",
    "psi_quartic",
    "young_f",
    "young_g",
    "young_gap",
    "find_r_star",
]

# Diagnostics may evaluate the singular potential on fields that graze the
# pure phases; clamped evaluation pulls the argument this far inside.
_CLAMP_GAP = 1e-14


@dataclass(frozen=True)
class PotentialParams:
    """Coefficients of the logarithmic potential.

    theta   - absolute temperature (convex part coefficient), theta > 0
    theta_c - critical temperature, theta < theta_c
    theta0  - concave-part coefficient in the split Psi = Psi0 - theta0/2 r^2;
              defaults to theta_c.
    """

    theta: float = 1.0
    theta_c: float = 2.0
    theta0: float | None = None

    def __post_init__(self):
        if not self.theta > 0:
            raise ConfigError(f"(H1): theta must be positive, got {self.theta}")
        if not self.theta < self.theta_c:
            raise ConfigError(
                f"(H1): need 0 < theta < theta_c, got theta={self.theta}, "
                f"theta_c={self.theta_c}"
            )
        if self.theta0 is None:
            object.__setattr__(self, "theta0", float(self.theta_c))


def _as_array(r):
    arr = np.asarray(r, dtype=float)
    return arr, np.isscalar(r) or arr.ndim == 0


def psi_singular(r, p: PotentialParams):
    """Logarithmic double well; domain [-1, 1], limit theta*ln2 at r = +-1."""
    arr, scalar = _as_array(r)
    if np.any(np.abs(arr) > 1.0):
        bad = float(arr.flat[np.argmax(np.abs(arr))])
        raise DomainError(f"psi_singular: argument {bad} outside [-1, 1]")
    out = psi0(arr, p) + 0.5 * p.theta_c * (1.0 - arr * arr)
    return float(out) if scalar else out


def psi0(r, p: PotentialParams):
    """Convex logarithmic part; psi0(0) = psi0'(0) = 0, limit theta*ln2 at +-1."""
    arr, scalar = _as_array(r)
    if np.any(np.abs(arr) > 1.0):
        bad = float(arr.flat[np.argmax(np.abs(arr))])
        raise DomainError(f"psi0: argument {bad} outside [-1, 1]")
    onem = 1.0 - arr
    onep = 1.0 + arr
    # x ln x -> 0 as x -> 0; evaluate with the limit filled in.
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = np.where(onem > 0.0, onem * np.log(np.where(onem > 0.0, onem, 1.0)), 0.0)
        t2 = np.where(onep > 0.0, onep * np.log(np.where(onep > 0.0, onep, 1.0)), 0.0)
    out = 0.5 * p.theta * (t1 + t2)
    return float(out) if scalar else out


def _clamp_interior(arr):
    return np.clip(arr, -1.0 + _CLAMP_GAP, 1.0 - _CLAMP_GAP)


def psi0_prime(r, p: PotentialParams, clamped: bool = False):
    """psi0'(r) = theta/2 ln((1+r)/(1-r)) on the open interval (-1, 1).

    clamped=True pulls arguments to |r| <= 1 - 1e-14 first; meant for
    diagnostics on fields that touch the pure phases, never for dynamics.
    """
    arr, scalar = _as_array(r)
    if clamped:
        arr = _clamp_interior(arr)
    elif np.any(np.abs(arr) >= 1.0):
        bad = float(arr.flat[np.argmax(np.abs(arr))])
        raise SingularityError(f"psi0_prime: argument {bad} outside (-1, 1)")
    out = 0.5 * p.theta * np.log((1.0 + arr) / (1.0 - arr))
    return float(out) if scalar else out


def psi0_second(r, p: PotentialParams, clamped: bool = False):
    """psi0''(r) = theta / (1 - r^2) >= theta on (-1, 1)."""
    arr, scalar = _as_array(r)
    if clamped:
        arr = _clamp_interior(arr)
    elif np.any(np.abs(arr) >= 1.0):
        bad = float(arr.flat[np.argmax(np.abs(arr))])
        raise SingularityError(f"psi0_second: argument {bad} outside (-1, 1)")
    out = p.theta / (1.0 - arr * arr)
    return float(out) if scalar else out


def psi_quartic(r, variant: str = "value"):
    """Polynomial double well (1 - r^2)^2 / 4 or its derivative r^3 - r."""
    arr, scalar = _as_array(r)
    if variant == "value":
        out = 0.25 * (1.0 - arr * arr) ** 2
    elif variant == "prime":
        out = arr**3 - arr
    else:
        raise ConfigError(f"psi_quartic: unknown variant {variant!r}")
    return float(out) if scalar else out


# ---------------------------------------------------------------------------
# Regularized potential
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegPotential:
    """C^1 regularization of psi0' with chi-dependent exponential growth.

    Five branches, glued C^1 at the knots -2, -1+eps, 1-eps, 2:

      r <= -2        mirrored exponential decay toward A_minus
      -2 < r < -1+eps  linear continuation from the left collar point
      |r| <= 1-eps   psi0' itself
      1-eps < r < 2  linear continuation from the right collar point
      r >= 2         A_plus + psi0''(1-eps) exp(4(|chi|+1) r - 8(|chi|+1)
                                                - ln 4(|chi|+1))

    eps must satisfy psi0'(1-eps) >= 1 (and its mirror), which bounds the
    admissible regularization strength for the given theta.
    """

    base: PotentialParams = field(default_factory=PotentialParams)
    eps: float = 0.05
    chi: float = 0.0

    # cached branch data (filled in __post_init__)
    knots: tuple = field(init=False, repr=False)
    _d1_hi: float = field(init=False, repr=False)
    _d2_hi: float = field(init=False, repr=False)
    _d1_lo: float = field(init=False, repr=False)
    _d2_lo: float = field(init=False, repr=False)
    _rate: float = field(init=False, repr=False)
    _shift: float = field(init=False, repr=False)
    _gap: float = field(init=False, repr=False)
    _f_hi: float = field(init=False, repr=False)
    _f_lo: float = field(init=False, repr=False)
    _f_two: float = field(init=False, repr=False)
    _f_mtwo: float = field(init=False, repr=False)

    def __post_init__(self):
        p = self.base
        if not 0.0 < self.eps < 1.0:
            raise ConfigError(f"RegPotential: eps must lie in (0, 1), got {self.eps}")
        hi = 1.0 - self.eps
        d1_hi = psi0_prime(hi, p)
        d1_lo = psi0_prime(-hi, p)
        if d1_hi < 1.0 or d1_lo > -1.0:
            raise ConfigError(
                f"RegPotential: eps={self.eps} too large for theta={p.theta}; "
                f"need psi0'(1-eps) >= 1, got {d1_hi:.6g}"
            )
        d2_hi = psi0_second(hi, p)
        d2_lo = psi0_second(-hi, p)
        ac = abs(self.chi)
        rate = 4.0 * (ac + 1.0)
        shift = 8.0 * (ac + 1.0) + math.log(4.0 * (ac + 1.0))
        gap = (4.0 * ac + 3.0) / (4.0 * (ac + 1.0))

        object.__setattr__(self, "knots", (-2.0, -1.0 + self.eps, hi, 2.0))
        object.__setattr__(self, "_d1_hi", d1_hi)
        object.__setattr__(self, "_d2_hi", d2_hi)
        object.__setattr__(self, "_d1_lo", d1_lo)
        object.__setattr__(self, "_d2_lo", d2_lo)
        object.__setattr__(self, "_rate", rate)
        object.__setattr__(self, "_shift", shift)
        object.__setattr__(self, "_gap", gap)

        # antiderivative continuity constants
        f_hi = psi0(hi, p)
        f_lo = psi0(-hi, p)
        f_two = f_hi + d1_hi * (2.0 - hi) + 0.5 * d2_hi * (2.0 - hi) ** 2
        f_mtwo = f_lo + d1_lo * (-2.0 + hi) + 0.5 * d2_lo * (-2.0 + hi) ** 2
        object.__setattr__(self, "_f_hi", f_hi)
        object.__setattr__(self, "_f_lo", f_lo)
        object.__setattr__(self, "_f_two", f_two)
        object.__setattr__(self, "_f_mtwo", f_mtwo)

    # -- branch masks: 0 far left, 1 left collar, 2 interior, 3 right collar,
    #    4 far right.  Knots at +-2 belong to the outer branches, the collar
    #    knots to the interior (so "interior agreement is exact" inclusively).
    def _masks(self, arr):
        lo = -1.0 + self.eps
        hi = 1.0 - self.eps
        m0 = arr <= -2.0
        m1 = (arr > -2.0) & (arr < lo)
        m2 = (arr >= lo) & (arr <= hi)
        m3 = (arr > hi) & (arr < 2.0)
        m4 = arr >= 2.0
        return m0, m1, m2, m3, m4

    def branches_at(self, knot: float):
        """(left, right) branch indices meeting at the given knot."""
        for i, k in enumerate(self.knots):
            if k == knot:
                return i, i + 1
        raise ConfigError(f"branches_at: {knot} is not a knot of this potential")

    def prime_branch(self, r, which: int):
        """Evaluate a single branch formula of psi0_reg_prime (for knot tests)."""
        arr, scalar = _as_array(r)
        p = self.base
        hi = 1.0 - self.eps
        lo = -1.0 + self.eps
        if which == 0:
            out = (
                self._d1_lo
                - self._d2_lo * (self._gap + self.eps)
                - self._d2_lo * np.exp(-self._rate * arr - self._shift)
            )
        elif which == 1:
            out = self._d1_lo + self._d2_lo * (arr - lo)
        elif which == 2:
            out = psi0_prime(arr, p)
        elif which == 3:
            out = self._d1_hi + self._d2_hi * (arr - hi)
        elif which == 4:
            out = (
                self._d1_hi
                + self._d2_hi * (self._gap + self.eps)
                + self._d2_hi * np.exp(self._rate * arr - self._shift)
            )
        else:
            raise ConfigError(f"prime_branch: branch index {which} outside 0..4")
        return float(out) if scalar else out

    def second_branch(self, r, which: int):
        """Single-branch second derivative (one-sided derivative at knots)."""
        arr, scalar = _as_array(r)
        if which == 0:
            out = self._d2_lo * self._rate * np.exp(-self._rate * arr - self._shift)
        elif which == 1:
            out = self._d2_lo * np.ones_like(arr)
        elif which == 2:
            out = psi0_second(arr, self.base)
        elif which == 3:
            out = self._d2_hi * np.ones_like(arr)
        elif which == 4:
            out = self._d2_hi * self._rate * np.exp(self._rate * arr - self._shift)
        else:
            raise ConfigError(f"second_branch: branch index {which} outside 0..4")
        return float(out) if scalar else out

    def value_branch(self, r, which: int):
        """Single-branch antiderivative (for knot continuity tests)."""
        arr, scalar = _as_array(r)
        hi = 1.0 - self.eps
        lo = -1.0 + self.eps
        rate, shift = self._rate, self._shift
        if which == 0:
            a_minus = self._d1_lo - self._d2_lo * (self._gap + self.eps)
            out = (
                self._f_mtwo
                + a_minus * (arr + 2.0)
                + self._d2_lo / rate * (np.exp(-rate * arr - shift) - np.exp(2.0 * rate - shift))
            )
        elif which == 1:
            out = self._f_lo + self._d1_lo * (arr - lo) + 0.5 * self._d2_lo * (arr - lo) ** 2
        elif which == 2:
            out = psi0(arr, self.base)
        elif which == 3:
            out = self._f_hi + self._d1_hi * (arr - hi) + 0.5 * self._d2_hi * (arr - hi) ** 2
        elif which == 4:
            a_plus = self._d1_hi + self._d2_hi * (self._gap + self.eps)
            out = (
                self._f_two
                + a_plus * (arr - 2.0)
                + self._d2_hi / rate * (np.exp(rate * arr - shift) - np.exp(2.0 * rate - shift))
            )
        else:
            raise ConfigError(f"value_branch: branch index {which} outside 0..4")
        return float(out) if scalar else out

    def _piecewise(self, arr, evaluator):
        out = np.empty_like(arr)
        for which, mask in enumerate(self._masks(arr)):
            if np.any(mask):
                out[mask] = evaluator(arr[mask], which)
        return out

    def psi0_reg_prime(self, r):
        arr, scalar = _as_array(r)
        out = self._piecewise(arr, self.prime_branch)
        return float(out) if scalar else out

    def psi0_reg_second(self, r):
        arr, scalar = _as_array(r)
        out = self._piecewise(arr, self.second_branch)
        return float(out) if scalar else out

    def psi0_reg(self, r):
        """Antiderivative of psi0_reg_prime with psi0_reg(0) = 0."""
        arr, scalar = _as_array(r)
        out = self._piecewise(arr, self.value_branch)
        return float(out) if scalar else out

    def psi_reg_prime(self, r):
        arr, scalar = _as_array(r)
        out = self.psi0_reg_prime(arr) - self.base.theta0 * arr
        return float(out) if scalar else out

    def psi_reg(self, r):
        arr, scalar = _as_array(r)
        out = self.psi0_reg(arr) - 0.5 * self.base.theta0 * arr * arr
        return float(out) if scalar else out

    # uniform interface used by the dynamics and diagnostics
    def psi(self, r):
        return self.psi_reg(r)

    def psi_prime(self, r):
        return self.psi_reg_prime(r)

    @property
    def name(self):
        return "regularized"


class SingularPotential:
    """Uniform-interface wrapper around the logarithmic potential.

    Evaluation outside the open interval raises SingularityError naming the
    offending grid point; diagnostics may pass clamped=True instead.
    """

    def __init__(self, params: PotentialParams):
        self.params = params

    def psi(self, r, clamped: bool = False):
        arr, scalar = _as_array(r)
        if clamped:
            arr = np.clip(arr, -1.0, 1.0)
        self._check(arr, strict=False)
        out = psi_singular(arr, self.params)
        return float(out) if scalar else out

    def psi_prime(self, r, clamped: bool = False):
        arr, scalar = _as_array(r)
        if clamped:
            arr = _clamp_interior(arr)
        else:
            self._check(arr, strict=True)
        p = self.params
        out = psi0_prime(arr, p, clamped=True) - p.theta0 * arr
        return float(out) if scalar else out

    def _check(self, arr, strict):
        over = np.abs(arr) >= 1.0 if strict else np.abs(arr) > 1.0
        if np.any(over):
            idx = np.unravel_index(int(np.argmax(np.abs(arr))), arr.shape) if arr.ndim else ()
            raise SingularityError(
                f"singular potential evaluated at grid point {idx} where "
                f"phi = {float(np.max(np.abs(arr))):.6g} (|phi| must stay < 1)"
            )

    @property
    def name(self):
        return "singular"


class QuarticPotential:
    """Uniform-interface wrapper around the polynomial double well."""

    def psi(self, r):
        return psi_quartic(r, "value")

    def psi_prime(self, r):
        return psi_quartic(r, "prime")

    @property
    def name(self):
        return "quartic"


# ---------------------------------------------------------------------------
# Generalized Young inequality  a b <= f(a) + g(b)
# ---------------------------------------------------------------------------


def young_f(a):
    arr, scalar = _as_array(a)
    if np.any(arr < 0.0):
        raise DomainError("young_f: argument must be nonnegative")
    out = np.expm1(arr) - arr
    return float(out) if scalar else out


def young_g(b):
    arr, scalar = _as_array(b)
    if np.any(arr < 0.0):
        raise DomainError("young_g: argument must be nonnegative")
    out = (arr + 1.0) * np.log1p(arr) - arr
    return float(out) if scalar else out


def young_gap(a, b):
    """f(a) + g(b) - a b >= 0 for a, b >= 0; zero exactly on b = e^a - 1."""
    aa, sa = _as_array(a)
    bb, sb = _as_array(b)
    out = young_f(aa) + young_g(bb) - aa * bb
    return float(out) if (sa and sb) else out


# ---------------------------------------------------------------------------
# Coercivity thresholds
# ---------------------------------------------------------------------------


def _deficit_factory(rp: RegPotential, mode: str, variant: str):
    theta0 = rp.base.theta0
    ac = abs(rp.chi)
    if variant == "entropy":
        rho = 2.0 * ac + 1.0
        lin = 2.0 * ac
        const = 1.0
    elif variant == "quadratic":
        rho = 4.0 * ac + 1.0
        lin = 4.0 * ac
        const = 0.0
    else:
        raise ConfigError(f"find_r_star: unknown variant {variant!r}")

    sign = 1.0 if mode == "upper" else -1.0
    if mode not in ("upper", "lower"):
        raise ConfigError(f"find_r_star: unknown mode {mode!r}")

    def deficit(s):
        # evaluated on s >= 2; the actual argument is r = sign * s
        r = sign * s
        with np.errstate(over="ignore", invalid="ignore"):
            target = np.exp(rho * s) + theta0 * s * s + lin * s + const
            return rp.psi0_reg(r) - target

    def deficit_sign(s):
        # robust to overflow: compare leading exponents when both sides blow up
        val = deficit(np.asarray(s, dtype=float))
        if np.all(np.isfinite(val)):
            return np.sign(val)
        # log-space comparison of the dominant exponential terms
        lead_reg = math.log(rp._d2_hi / rp._rate) + rp._rate * float(s) - rp._shift
        lead_tgt = rho * float(s)
        return np.sign(lead_reg - lead_tgt)

    return deficit, deficit_sign, sign


def find_r_star(
    rp: RegPotential,
    mode: str = "upper",
    variant: str = "entropy",
    horizon: float = 200.0,
    tol: float = 1e-9,
):
    """Smallest threshold r* >= 2 past which the regularized potential
    dominates the coercivity target

        entropy variant:   exp((2|chi|+1) r) + theta0 r^2 + 2|chi| r + 1
        quadratic variant: exp((4|chi|+1) r) + theta0 r^2 + 4|chi| r

    mode='lower' returns the mirrored threshold r_star <= -2 for the
    reflected target.  Raises CoercivityError if no threshold is certified
    inside the horizon.
    """
    deficit, deficit_sign, sign = _deficit_factory(rp, mode, variant)

    n = 4096
    s_grid = np.linspace(2.0, horizon, n)
    sgn = np.empty(n)
    vals = deficit(s_grid)
    finite = np.isfinite(vals)
    sgn[finite] = np.sign(vals[finite])
    for i in np.nonzero(~finite)[0]:
        sgn[i] = deficit_sign(s_grid[i])

    if sgn[-1] < 0:
        raise CoercivityError(
            f"find_r_star: deficit still negative at horizon {horizon} "
            f"(chi={rp.chi}, eps={rp.eps})"
        )
    neg = np.nonzero(sgn < 0)[0]
    if len(neg) == 0:
        return sign * 2.0
    i_last = int(neg[-1])
    lo, hi = s_grid[i_last], s_grid[i_last + 1]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if deficit_sign(mid) < 0:
            lo = mid
        else:
            hi = mid
    return sign * hi
