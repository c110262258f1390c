"""``horizon-lab`` command line front end.

Exit codes: 0 success, 1 configuration error, 2 numerical error or a
failed verification, 3 I/O error.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from . import store
from .angular import AngularMode
from .config import COMMANDS, RunConfig, derived_alpha, derived_epsilon, parse_config
from .entropy import ETA, IDENTITY, QUADRATIC, u_functional
from .errors import ConfigError, HorizonLabError
from .geometry import BlackHole
from .kernels import limiting_kernel
from .opalpha import Interval, default_node_count, quadrature_nodes
from .radial import T12Strategy
from .studies import (ScalingStudyConfig, bh_entropy, schatten_growth_study,
                      scaling_study_limiting, u0_limit_study_full, widom_prediction)

FUNCTIONS = {"eta": ETA, "quadratic": QUADRATIC, "identity": IDENTITY}


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="horizon-lab",
                                description="Entanglement entropy scaling studies for Dirac modes "
                                            "near a Schwarzschild horizon.")
    p.add_argument("command", nargs="?", help="one of: " + ", ".join(COMMANDS))
    p.add_argument("action", nargs="?", help="cache action: ls or gc")
    p.add_argument("--command", dest="command_flag")
    p.add_argument("--config", type=Path, help="configuration file (section.key = value)")
    p.add_argument("--mass", type=float)
    p.add_argument("--fermion-mass", type=float)
    p.add_argument("--mode-k", type=float)
    p.add_argument("--mode-n", type=int)
    p.add_argument("--lambda-override", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--alpha-list", help="comma separated alpha values")
    p.add_argument("--u0", type=float)
    p.add_argument("--rho", type=float)
    p.add_argument("--grid-n", type=int)
    p.add_argument("--t12-strategy")
    p.add_argument("--t12-value", type=complex)
    p.add_argument("--function", choices=sorted(FUNCTIONS))
    p.add_argument("--seed", type=int)
    p.add_argument("--output-dir")
    p.add_argument("--output-format", choices=("csv", "json"))
    return p


def _config_from_args(args) -> RunConfig:
    command = args.command_flag or args.command
    if command is None:
        raise ConfigError("no command given")
    text = args.config.read_text(encoding="utf-8") if args.config else ""
    overrides = {name: getattr(args, name) for name in (
        "mass", "fermion_mass", "mode_k", "mode_n", "lambda_override", "epsilon", "alpha", "u0",
        "rho", "grid_n", "t12_strategy", "t12_value", "function", "seed", "output_dir",
        "output_format")}
    if args.alpha_list:
        overrides["alpha_list"] = tuple(float(x) for x in args.alpha_list.split(","))
    overrides["command"] = command
    if command == "cache":
        overrides["cache_action"] = args.action or "ls"
    if "scale.epsilon" not in text and "scale.alpha" not in text \
            and args.epsilon is None and args.alpha is None:
        overrides["alpha"] = 64.0
    return parse_config(text, **overrides)


def _mode(cfg: RunConfig) -> AngularMode:
    if cfg.lambda_override is not None:
        return AngularMode(cfg.mode_k, cfg.mode_n, cfg.lambda_override)
    return AngularMode.compute(cfg.mode_k, cfg.mode_n)


def _row(study_id, cfg, mode=None, **values):
    row = {"study_id": study_id, "M": cfg.mass, "m": cfg.fermion_mass, "rho": cfg.rho}
    if mode is not None:
        row.update(k=mode.k, n=mode.n, **{"lambda": mode.lam})
    row.update(values)
    return row


def _study_rows(study_id, cfg, study, channel):
    fit = study.channel_fits[channel]
    return [_row(f"{study_id}-ch{channel}", cfg, alpha=r.alpha, u0=r.region.u0,
                 trace_restricted=r.trace_restricted, trace_masked=r.trace_masked,
                 d_value=r.d_value, slope=fit.slope, slope_err=fit.slope_err,
                 r_squared=fit.r_squared)
            for r in study.per_channel[channel]]


def _scaling_cfg(cfg: RunConfig) -> ScalingStudyConfig:
    return ScalingStudyConfig(M=cfg.mass, m=cfg.fermion_mass, rho=cfg.rho,
                              alpha_list=tuple(cfg.alpha_list))


def cmd_scaling_study(cfg, out):
    study = scaling_study_limiting(_scaling_cfg(cfg), FUNCTIONS[cfg.function])
    rows = _study_rows("scaling", cfg, study, 1) + _study_rows("scaling", cfg, study, 2)
    for a, total in zip(cfg.alpha_list, study.totals):
        rows.append(_row("scaling-total", cfg, alpha=a, d_value=total, slope=study.fit.slope,
                         slope_err=study.fit.slope_err, r_squared=study.fit.r_squared))
    data = "".join(f"{np.log(a)!r} {t!r}\n" for a, t in zip(cfg.alpha_list, study.totals))
    (Path(cfg.output_dir) / "scaling.dat").parent.mkdir(parents=True, exist_ok=True)
    (Path(cfg.output_dir) / "scaling.dat").write_text("# ln(alpha) d_total\n" + data)
    out(f"slope {study.fit.slope:.6f} (r^2 {study.fit.r_squared:.6f})")
    return rows, {"slope": study.fit.slope, "intercept": study.fit.intercept}


def cmd_mode_entropy(cfg, out):
    mode = _mode(cfg)
    study = scaling_study_limiting(_scaling_cfg(cfg))
    s_kn = study.fit.slope / 2
    out(f"k={mode.k} n={mode.n} lambda={mode.lam:.10f} S_kn={s_kn:.6f}")
    rows = [_row("mode-entropy", cfg, mode, alpha=a, d_value=t, slope=study.fit.slope,
                 slope_err=study.fit.slope_err, r_squared=study.fit.r_squared)
            for a, t in zip(cfg.alpha_list, study.totals)]
    return rows, {"S_kn": s_kn, "lambda": mode.lam}


def cmd_widom_check(cfg, out):
    f = FUNCTIONS[cfg.function if cfg.function != "eta" else "quadratic"]
    comp = widom_prediction(f, 1, _scaling_cfg(cfg))
    out(f"predicted {comp.predicted_slope:.6f} measured {comp.measured_slope:.6f} "
        f"relative error {comp.relative_error:.4f}")
    row = _row("widom", cfg, slope=comp.measured_slope, slope_err=comp.fit.slope_err,
               r_squared=comp.fit.r_squared)
    return [row], {"predicted": comp.predicted_slope, "measured": comp.measured_slope}


def cmd_u0_study(cfg, out):
    mode = _mode(cfg)
    eps = derived_epsilon(cfg)
    u0_list = [cfg.u0, cfg.u0 - 20.0 * cfg.mass, cfg.u0 - 40.0 * cfg.mass]
    strategies = [T12Strategy()]
    if cfg.t12_strategy == "constant" and cfg.t12_value != 0:
        strategies.append(T12Strategy("constant", cfg.t12_value))
    study = u0_limit_study_full(mode, cfg.fermion_mass, eps, u0_list, cfg.rho, strategies,
                                BlackHole(cfg.mass))
    rows = [_row(f"u0-{label}", cfg, mode, alpha=r.result.alpha, u0=u0,
                 trace_restricted=r.result.trace_restricted, trace_masked=r.result.trace_masked,
                 d_value=r.result.d_value)
            for (label, u0), r in sorted(study.table.items())]
    out(f"stabilization {study.stabilization:.3e} spread {study.spread:.3e}")
    return rows, {"stabilization": study.stabilization, "spread": study.spread}


def cmd_schatten_growth(cfg, out):
    study = schatten_growth_study(Interval(0.0, 1.0), (0.0, 1.0), 1.0, cfg.alpha_list)
    rows = [_row("schatten", cfg, alpha=p.alpha, d_value=p.value, slope=study.fit.slope,
                 r_squared=study.fit.r_squared) for p in study.points]
    out(f"slope {study.fit.slope:.6f} r^2 {study.fit.r_squared:.6f}")
    return rows, {"slope": study.fit.slope, "r_squared": study.fit.r_squared}


def verify_checks(seed: int = 0):
    """Cheap invariant checks as ``(name, passed, detail)`` triples."""
    from .radial import horizon_bound, integrate_f_ode
    from .spectral import complement_duality_check
    from .studies import limiting_masked_density

    rng = np.random.default_rng(seed)
    checks = []
    u = u_functional(ETA, 1.0)
    checks.append(("U(1; eta) = pi^2/3", abs(u - np.pi ** 2 / 3) < 1e-8, f"{u!r}"))
    dens = limiting_masked_density(ETA, 1.0, 64.0)
    target = 64.0 * np.pi / 12
    checks.append(("masked density alpha pi / (12 M)", abs(dens / target - 1) < 1e-4, f"{dens!r}"))
    worst = 0.0
    for _ in range(20):
        d = int(rng.integers(2, 13))
        q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        r = int(rng.integers(1, d))
        proj = q[:, :r] @ q[:, :r].conj().T
        mask = rng.integers(0, 2, size=d).astype(bool)
        inside, outside = complement_duality_check(proj, mask)
        worst = max(worst, abs(inside - outside))
    checks.append(("complement duality", worst < 1e-10, f"{worst:.2e}"))
    checks.append(("bh_entropy(M=1, eps=0.1) = 100/6",
                   bh_entropy(M=1.0, eps=0.1).S_BH == 100 / 6, ""))
    mode = AngularMode.compute(0.5, 1, 1000)
    checks.append(("lambda(k=1/2, n=1) = 3/2", abs(mode.lam - 1.5) < 1e-6, f"{mode.lam!r}"))
    bh = BlackHole(1.0)
    grid = np.linspace(-120.0, -20.0, 201)
    sol = integrate_f_ode(0.3, 1.5, 0.1, bh, -120.0, -20.0, (1, 0), 1e-10, grid)
    bound = horizon_bound(0.1, 1.5, bh, -20.0)
    rp, rm = sol.remainder()
    ok = bool(np.all(np.hypot(np.abs(rp), np.abs(rm)) <= bound(grid)))
    checks.append(("corrected horizon bound", ok, ""))
    return checks


def cmd_verify_suite(cfg, out):
    rows, failed = [], 0
    for name, ok, detail in verify_checks(cfg.seed):
        out(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
        failed += not ok
    return rows, {"failed": failed}


def cmd_dump_kernel(cfg, out):
    alpha = derived_alpha(cfg)
    region = Interval(cfg.u0, cfg.rho)
    n = cfg.grid_n or min(512, default_node_count(alpha, cfg.rho, cfg.mass))
    nodes, weights = quadrature_nodes(region, n)
    K = limiting_kernel(1, cfg.mass, alpha, nodes[:, None], nodes[None, :])
    path = Path(cfg.output_dir) / "kernel.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("i,j,u,v,weight_u,re,im\n")
        for i in range(n):
            for j in range(n):
                fh.write(f"{i},{j},{nodes[i]!r},{nodes[j]!r},{weights[i]!r},"
                         f"{K[i, j].real!r},{K[i, j].imag!r}\n")
    out(f"wrote {path}")
    return None, None


def cmd_cache(cfg, out):
    if cfg.cache_action == "ls":
        for name, key in store.cache_list():
            out(f"{name}  {key}")
    elif cfg.cache_action == "gc":
        out(f"removed {store.cache_gc()}")
    else:
        raise ConfigError(f"unknown cache action {cfg.cache_action!r}")
    return None, None


HANDLERS = {
    "mode-entropy": cmd_mode_entropy, "scaling-study": cmd_scaling_study,
    "widom-check": cmd_widom_check, "u0-study": cmd_u0_study,
    "schatten-growth": cmd_schatten_growth, "verify-suite": cmd_verify_suite,
    "dump-kernel": cmd_dump_kernel, "cache": cmd_cache,
}


def run_command(cfg: RunConfig, out=print) -> int:
    rows, summary = HANDLERS[cfg.command](cfg, out)
    if rows is not None:
        stem = cfg.command.replace("-", "_")
        store.write_results(rows, cfg.output_format, cfg.output_dir, stem, summary)
    if cfg.command == "verify-suite" and summary["failed"]:
        return 2
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return run_command(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return exc.exit_code
    except HorizonLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
