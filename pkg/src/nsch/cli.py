"""Command line front end.

    nsch run <config>                 integrate and write CSV + snapshots
    nsch check-potential <config>     regularized-potential property table
    nsch compare-forms <config>       paired runs, the two sigma equation forms
    nsch twin-run <config> [--delta-ladder 1e-3,1e-4,1e-5]

Exit codes: 0 success, 1 configuration or input error, 2 numerical
divergence or failed stability rescue, 3 I/O failure.  NSCH_THREADS caps
the transform worker pool.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .config import RunConfig, load_config
from .exceptions import (CoercivityError, ConfigError, DataError,
                         DivergenceError, DomainError, IoError, NschError,
                         PreconditionError, SingularityError, StabilityError,
                         UnsupportedModeError)
from .output import DiagnosticsWriter, write_snapshot
from .potential import (PotentialParams, RegPotential, find_r_star, young_gap)
from .stepping import run as run_integration
from .stepping import twin_run

_CONFIG_ERRORS = (ConfigError, DomainError, DataError, PreconditionError,
                  UnsupportedModeError)
_NUMERIC_ERRORS = (DivergenceError, StabilityError, SingularityError,
                   CoercivityError)


def _outdir(cfg: RunConfig) -> str:
    path = cfg["output.directory"]
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output directory {path}: {exc}") from None
    return path


def cmd_run(cfg: RunConfig) -> int:
    outdir = _outdir(cfg)
    grid = cfg.build_grid()
    params = cfg.build_params()
    scheme = cfg.build_scheme()
    init = cfg.build_initial(grid)

    csv_path = os.path.join(outdir, "diagnostics.csv")
    snap_every = cfg["output.snapshot_interval"]

    def on_snapshot(state, step):
        write_snapshot(os.path.join(outdir, f"snapshot_{step:06d}.bin"), state)

    with DiagnosticsWriter(csv_path, cfg.fingerprint()) as writer:
        final, _records = run_integration(
            init, scheme, params, grid=grid,
            diag_every=cfg["output.diag_interval"],
            snapshot_every=snap_every,
            on_diag=writer.write,
            on_snapshot=on_snapshot if snap_every > 0 else None)

    if cfg["output.figures"]:
        from . import figures
        from .output import read_diagnostics_csv
        _fp, header, data = read_diagnostics_csv(csv_path)
        if data.shape[0] >= 2:
            figures.energy_figure(header, data, os.path.join(outdir, "energy.png"))
        figures.fields_figure(final, os.path.join(outdir, "fields_final.png"))
    print(f"run finished at t={final.t:g}; diagnostics in {csv_path}")
    return 0


_EPS_GRID = (0.01, 0.05, 0.1)
_CHI_GRID = (0.0, 0.5, -0.5, 2.0, -2.0)


def _potential_row(pp: PotentialParams, eps: float, chi: float):
    rp = RegPotential(pp, eps=eps, chi=chi)
    jump = 0.0
    for knot in rp.knots:
        left, right = rp.branches_at(knot)
        jump = max(jump,
                   abs(rp.value_branch(knot, left) - rp.value_branch(knot, right)),
                   abs(rp.prime_branch(knot, left) - rp.prime_branch(knot, right)))
    r = np.linspace(-10.0, 10.0, 10_000)
    convexity_min = float(np.min(rp.psi0_reg_second(r)))
    sign_min = float(np.min(r * rp.psi0_reg_prime(r)))
    ri = np.linspace(-1.0 + 1e-6, 1.0 - 1e-6, 4001)
    from .potential import psi0
    domination_max = float(np.max(rp.psi0_reg(ri) - psi0(ri, pp)))
    r_up = find_r_star(rp, mode="upper")
    r_lo = find_r_star(rp, mode="lower")
    a = np.linspace(0.0, 50.0, 50)
    b = np.linspace(0.0, 50.0, 50)
    gap_min = float(np.min(young_gap(a[:, None], b[None, :])))
    return (eps, chi, jump, convexity_min, sign_min, domination_max,
            r_up, r_lo, gap_min)


def cmd_check_potential(cfg: RunConfig) -> int:
    outdir = _outdir(cfg)
    pp = PotentialParams(theta=cfg["model.theta"], theta_c=cfg["model.theta_c"],
                         theta0=cfg["model.theta0"])
    header = ("eps,chi,knot_jump_max,convexity_min,sign_min,domination_max,"
              "r_star_upper,r_star_lower,young_gap_min")
    path = os.path.join(outdir, "potential_check.csv")
    rows = []
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(f"# nsch-fingerprint: {cfg.fingerprint()}\n")
            fh.write(header + "\n")
            for eps in _EPS_GRID:
                for chi in _CHI_GRID:
                    row = _potential_row(pp, eps, chi)
                    rows.append(row)
                    fh.write(",".join("%.17g" % v for v in row) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None

    if cfg["output.figures"]:
        from . import figures
        pots = [RegPotential(pp, eps=eps, chi=cfg["model.chi"])
                for eps in _EPS_GRID]
        figures.potential_figure(pots, os.path.join(outdir, "potential.png"))

    worst = max(r[2] for r in rows)
    print(f"potential table in {path}; worst knot jump {worst:.3e}")
    return 0


def cmd_compare_forms(cfg: RunConfig) -> int:
    outdir = _outdir(cfg)
    grid = cfg.build_grid()
    scheme = cfg.build_scheme()
    init = cfg.build_initial(grid)

    series = {}
    for form in ("cross_diffusion", "linear_transport"):
        sub = RunConfig(values={**cfg.values, "model.sigma_eq_form": form})
        params = sub.build_params()
        _final, records = run_integration(
            init, scheme, params, grid=grid,
            diag_every=cfg["output.diag_interval"])
        series[form] = ([r.t for r in records], [r.sigma_min for r in records])

    path = os.path.join(outdir, "compare_forms.csv")
    ta, ma = series["cross_diffusion"]
    tb, mb = series["linear_transport"]
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(f"# nsch-fingerprint: {cfg.fingerprint()}\n")
            fh.write("t,sigma_min_cross_diffusion,sigma_min_linear_transport\n")
            for t, a, b in zip(ta, ma, mb):
                fh.write("%.17g,%.17g,%.17g\n" % (t, a, b))
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None

    if cfg["output.figures"]:
        from . import figures
        figures.sigma_compare_figure(
            ta, ma, tb, mb, ("cross_diffusion", "linear_transport"),
            os.path.join(outdir, "compare_forms.png"))
    print(f"paired sigma_min series in {path}; "
          f"final min cross={ma[-1]:.3e} linear={mb[-1]:.3e}")
    return 0


def cmd_twin_run(cfg: RunConfig, deltas) -> int:
    outdir = _outdir(cfg)
    grid = cfg.build_grid()
    params = cfg.build_params()
    scheme = cfg.build_scheme()
    init = cfg.build_initial(grid)

    ladder = {}
    for delta in deltas:
        ladder[delta] = twin_run(init, delta, scheme, params,
                                 diag_every=cfg["output.diag_interval"])

    path = os.path.join(outdir, "twin_run.csv")
    ts = [p[0] for p in ladder[deltas[0]]]
    try:
        with open(path, "w", encoding="ascii", newline="\n") as fh:
            fh.write(f"# nsch-fingerprint: {cfg.fingerprint()}\n")
            fh.write("t," + ",".join(f"W_delta_{d:g}" for d in deltas) + "\n")
            for i, t in enumerate(ts):
                vals = [ladder[d][i][1] for d in deltas]
                fh.write("%.17g," % t
                         + ",".join("%.17g" % v for v in vals) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None

    if cfg["output.figures"]:
        from . import figures
        figures.twin_figure(ladder, os.path.join(outdir, "twin_run.png"))
    print(f"twin-run W series in {path}")
    return 0


def _build_parser():
    ap = argparse.ArgumentParser(prog="nsch", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("run", "check-potential", "compare-forms"):
        p = sub.add_parser(name)
        p.add_argument("config")
    p = sub.add_parser("twin-run")
    p.add_argument("config")
    p.add_argument("--delta-ladder", default="1e-3,1e-4,1e-5",
                   help="comma-separated perturbation sizes")
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "check-potential":
            return cmd_check_potential(cfg)
        if args.command == "compare-forms":
            return cmd_compare_forms(cfg)
        deltas = [float(tok) for tok in args.delta_ladder.split(",") if tok]
        if not deltas:
            raise ConfigError("--delta-ladder needs at least one value")
        return cmd_twin_run(cfg, deltas)
    except _CONFIG_ERRORS as exc:
        print(f"nsch: config error: {exc}", file=sys.stderr)
        return 1
    except _NUMERIC_ERRORS as exc:
        print(f"nsch: numerical failure: {exc}", file=sys.stderr)
        return 2
    except IoError as exc:
        print(f"nsch: I/O error: {exc}", file=sys.stderr)
        return 3
    except NschError as exc:  # anything else deliberate
        print(f"nsch: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
