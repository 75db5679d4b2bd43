"""Plain-text run configuration.

Format: one `key = value` per line, `#` starts a comment, keys are dotted
namespaces (model.chi, scheme.dt).  Unknown keys are errors, as are
duplicates; every value is validated at load time and constraint
violations are reported under the hypothesis name they break, e.g.
"(H4): |h_const| must be < alpha".

The full key set with defaults is in DEFAULTS below; a minimal file needs
only scheme.t_end.  Values "auto" are resolved downstream (scheme.K picks
the dealias radius; model.theta0 picks theta_c).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

from .exceptions import ConfigError, DataError
from .dynamics import ModelParams
from .initial import (InitialData, generate_phi0, generate_sigma0,
                      generate_v0, prepare_initial_data)
from .potential import (PotentialParams, QuarticPotential, RegPotential,
                        SingularPotential)
from .spectral import Grid, ScalarField, VectorField
from .stepping import SchemeConfig

__all__ = ["RunConfig", "load_config", "parse_config_text", "DEFAULTS"]

_AUTO = "auto"

# key -> (type, default, choices). type "float"/"int"/"bool"/"str";
# "float_auto"/"int_auto" additionally accept the string "auto" (stored None).
DEFAULTS = {
    "grid.mode": ("str", "periodic_torus",
                  ("periodic_torus", "neumann_rectangle")),
    "grid.Lx": ("float", 1.0, None),
    "grid.Ly": ("float", 1.0, None),
    "grid.Nx": ("int", 128, None),
    "grid.Ny": ("int", 128, None),

    "model.potential": ("str", "regularized",
                        ("regularized", "singular", "quartic")),
    "model.theta": ("float", 1.0, None),
    "model.theta_c": ("float", 2.0, None),
    "model.theta0": ("float_auto", None, None),
    "model.eps_reg": ("float", 0.05, None),
    "model.eta1": ("float", 1.0, None),
    "model.eta2": ("float", 1.0, None),
    "model.m_lo": ("float", 1.0, None),
    "model.m_hi": ("float", 1.0, None),
    "model.chi": ("float", 0.0, None),
    "model.kappa": ("float", 0.0, None),
    "model.alpha": ("float", 0.0, None),
    "model.h_const": ("float", 0.0, None),
    "model.b_star": ("float", 0.0, None),
    "model.eps_interface": ("float", 1.0, None),
    "model.gamma_plap": ("float", 0.0, None),
    "model.sigma_eq_form": ("str", "cross_diffusion",
                            ("cross_diffusion", "linear_transport")),

    "init.phi0": ("str", "random", ("constant", "random", "stripe", "droplet")),
    "init.phi0_mean": ("float", 0.0, None),
    "init.phi0_amp": ("float", 0.8, None),
    "init.phi0_width": ("float", 0.15, None),
    "init.phi0_modes": ("int", 6, None),
    "init.sigma0": ("str", "constant", ("constant", "blob", "mix")),
    "init.sigma0_level": ("float", 1.0, None),
    "init.sigma0_amp": ("float", 1.0, None),
    "init.sigma0_width": ("float", 0.5, None),
    "init.v0": ("str", "none", ("none", "zero", "taylor_green", "random")),
    "init.v0_amp": ("float", 0.1, None),
    "init.gamma": ("float", 0.1, None),
    "init.n_mollify": ("int", 4, None),
    "init.from_snapshot": ("str", "", None),

    "scheme.dt": ("float", 1e-3, None),
    "scheme.t_end": ("float", None, None),   # the one required key
    "scheme.K": ("int_auto", None, None),
    "scheme.imex_order": ("int", 2, None),
    "scheme.stabilize": ("bool", True, None),
    "scheme.entropy_floor": ("float", 1e-12, None),
    "scheme.residual_trigger": ("float", float("inf"), None),
    "scheme.max_halvings": ("int", 3, None),

    "output.directory": ("str", "out", None),
    "output.diag_interval": ("int", 1, None),
    "output.snapshot_interval": ("int", 0, None),
    "output.figures": ("bool", True, None),

    "seed": ("int", 0, None),
}

_REQUIRED = ("scheme.t_end",)


def _parse_value(key, raw, lineno):
    kind, _default, choices = DEFAULTS[key]
    if kind in ("float_auto", "int_auto") and raw == _AUTO:
        return None
    try:
        if kind == "bool":
            if raw not in ("true", "false"):
                raise ValueError
            return raw == "true"
        if kind in ("int", "int_auto"):
            return int(raw, 10)
        if kind in ("float", "float_auto"):
            return float(raw)
    except ValueError:
        raise ConfigError(
            f"line {lineno}: cannot parse '{raw}' as {kind} for {key}") from None
    if choices is not None and raw not in choices:
        raise ConfigError(
            f"line {lineno}: {key} must be one of {', '.join(choices)}, got '{raw}'")
    return raw


@dataclass(frozen=True)
class RunConfig:
    """Flat, validated key-value configuration for one run."""

    values: dict

    def __getitem__(self, key):
        return self.values[key]

    def fingerprint(self) -> str:
        """Stable hash of the effective configuration (defaults included)."""
        lines = []
        for key in sorted(self.values):
            val = self.values[key]
            lines.append(f"{key}={val!r}")
        blob = "\n".join(lines).encode("ascii")
        return hashlib.sha256(blob).hexdigest()[:16]

    # -- builders ----------------------------------------------------------

    def build_grid(self) -> Grid:
        return Grid(mode=self["grid.mode"], Lx=self["grid.Lx"],
                    Ly=self["grid.Ly"], Nx=self["grid.Nx"], Ny=self["grid.Ny"])

    def build_potential(self):
        kind = self["model.potential"]
        pp = PotentialParams(theta=self["model.theta"],
                             theta_c=self["model.theta_c"],
                             theta0=self["model.theta0"])
        if kind == "regularized":
            return RegPotential(pp, eps=self["model.eps_reg"],
                                chi=self["model.chi"])
        if kind == "singular":
            return SingularPotential(pp)
        return QuarticPotential()

    def build_params(self) -> ModelParams:
        return ModelParams(
            potential=self.build_potential(),
            eta1=self["model.eta1"], eta2=self["model.eta2"],
            m_lo=self["model.m_lo"], m_hi=self["model.m_hi"],
            chi=self["model.chi"], kappa=self["model.kappa"],
            alpha=self["model.alpha"], h_const=self["model.h_const"],
            b_star=self["model.b_star"],
            eps_interface=self["model.eps_interface"],
            gamma_plap=self["model.gamma_plap"],
            sigma_eq_form=self["model.sigma_eq_form"])

    def build_scheme(self) -> SchemeConfig:
        return SchemeConfig(
            dt=self["scheme.dt"], t_end=self["scheme.t_end"],
            K=self["scheme.K"], imex_order=self["scheme.imex_order"],
            stabilize=self["scheme.stabilize"],
            entropy_floor=self["scheme.entropy_floor"],
            residual_trigger=self["scheme.residual_trigger"],
            max_halvings=self["scheme.max_halvings"])

    def build_initial(self, grid: Grid) -> InitialData:
        snap = self["init.from_snapshot"]
        if snap:
            from .output import read_snapshot
            _grid_s, _t, fields = read_snapshot(snap)
            if _grid_s.Nx != grid.Nx or _grid_s.Ny != grid.Ny:
                raise DataError(
                    f"snapshot grid {_grid_s.Nx}x{_grid_s.Ny} does not match "
                    f"configured grid {grid.Nx}x{grid.Ny}")
            if "phi" not in fields or "sigma" not in fields:
                raise DataError("snapshot must contain phi and sigma fields")
            phi0 = ScalarField(grid, phys=fields["phi"])
            sigma0 = ScalarField(grid, phys=fields["sigma"])
            v0 = None
            if "vx" in fields and "vy" in fields:
                v0 = VectorField.from_phys(grid, fields["vx"], fields["vy"])
        else:
            seed = self["seed"]
            phi0 = generate_phi0(grid, self["init.phi0"],
                                 mean=self["init.phi0_mean"],
                                 amp=self["init.phi0_amp"],
                                 width=self["init.phi0_width"],
                                 modes=self["init.phi0_modes"], seed=seed)
            sigma0 = generate_sigma0(grid, self["init.sigma0"],
                                     level=self["init.sigma0_level"],
                                     amp=self["init.sigma0_amp"],
                                     width=self["init.sigma0_width"],
                                     seed=seed + 1)
            v0 = generate_v0(grid, self["init.v0"],
                             amp=self["init.v0_amp"], seed=seed + 2)
        return prepare_initial_data(grid, phi0, sigma0, v0,
                                    gamma=self["init.gamma"],
                                    n_mollify=self["init.n_mollify"],
                                    K=self["scheme.K"])


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    values = {}
    seen_lines = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}, line {lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"{source}, line {lineno}: unknown key '{key}'")
        if key in values:
            raise ConfigError(
                f"{source}, line {lineno}: duplicate key '{key}' "
                f"(first set on line {seen_lines[key]})")
        if not raw:
            raise ConfigError(f"{source}, line {lineno}: empty value for '{key}'")
        values[key] = _parse_value(key, raw, lineno)
        seen_lines[key] = lineno

    for key in _REQUIRED:
        if key not in values:
            raise ConfigError(f"{source}: missing required key '{key}'")
    for key, (_kind, default, _choices) in DEFAULTS.items():
        values.setdefault(key, default)

    cfg = RunConfig(values=values)
    # Build every parameter object now so constraint violations surface at
    # load time with their hypothesis names.
    cfg.build_grid()
    cfg.build_params()
    cfg.build_scheme()
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return parse_config_text(text, source=path)
