"""``wave-lab`` command line: run one configured experiment and write its reports.

Exit codes: 0 every verdict passed, 1 a verdict failed, 2 bad arguments or
config schema, 3 a numerical guard tripped, 4 the output path is unwritable.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from .config import EXPERIMENTS, SchemaError, load_config
from .energy import corollary_bounds, verify_energy_estimate
from .errors import PreconditionError, WaveLabError
from .fd_oracle import FdGrid, compare, fd_solve
from .galerkin import NodalSource, integrate
from .lifting import solve_nonhomogeneous
from .report import Report, Verdict, emit_report, fit_block
from .singular import regularize_at
from .vws import (basis_at, consistency_experiment, existence_sweep, realize,
                  uniqueness_experiment)

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_GUARD, EXIT_IO = 0, 1, 2, 3, 4

DEFAULT_TOLERANCES = {
    "gronwall_rtol": 1e-6,
    "gronwall_atol": 1e-12,
    "energy_drift_factor": 10.0,
    "energy_ratio_max": 50.0,
    "corollary_ratio_max": 100.0,
    "v_system_agreement": 5e-3,
    "trace_error": 1e-6,
    "r2_min": 0.99,
    "bounded_N": 0.1,
    "max_discrepancy": 2e-4,
}


def _tol(cfg, key):
    return cfg.tolerances.get(key, DEFAULT_TOLERANCES.get(key))


def _single_eps(cfg):
    """The eps used by single-solve experiments; singular data need ``eps.value``."""
    p = cfg.problem
    if not p.all_smooth and cfg.eps_value is None:
        raise SchemaError("eps.value", "singular data in a single solve need an explicit eps.value")
    return cfg.eps_value if cfg.eps_value is not None else float(p.eps_grid[0])


def _realized(cfg):
    eps = _single_eps(cfg)
    basis = basis_at(cfg.problem, eps)
    # smooth data are used as given unless listed under 'regularize'
    real = realize(cfg.problem, eps, basis, mollify=cfg.eps_value is not None)
    traj = integrate(real.system, real.d0, real.d1, cfg.problem.T, cfg.problem.dt)
    return eps, basis, real, traj


def _gronwall_verdict(cfg, rep):
    return Verdict("eta(t_n) <= exp(t_n)(eta(0) + int xi) * (1 + rtol) + atol at every sample",
                   {"rtol": _tol(cfg, "gronwall_rtol"), "atol": _tol(cfg, "gronwall_atol")},
                   rep.max_gronwall_excess, rep.passed)


def run_solve(cfg, threads):
    _, _, real, traj = _realized(cfg)
    rep = verify_energy_estimate(traj, real.system, _tol(cfg, "gronwall_rtol"), _tol(cfg, "gronwall_atol"))
    report = Report(cfg.name, "solve", ["t", "eta", "gronwall_bound"],
                    [(t, e, g) for t, e, g in zip(rep.times, rep.eta_values, rep.gronwall_bound_values)])
    drift = float(np.max(np.abs(rep.eta_values - rep.eta_values[0])))
    report.results = {"m": real.system.m, "dt": traj.dt, "steps": traj.n_samples - 1,
                      "eta0": rep.eta_values[0], "max_eta_deviation": drift}
    report.verdicts.append(_gronwall_verdict(cfg, rep))
    free = real.system.source is None or getattr(real.system.source, "is_zero", False)
    if free:
        bound = _tol(cfg, "energy_drift_factor") * traj.dt**2 * (1 + rep.eta_values[0])
        report.verdicts.append(Verdict("|eta(t_n) - eta(0)| <= c dt^2 (1 + eta(0)) for an unforced problem",
                                       bound, drift, drift <= bound))
    return report


def run_verify_energy(cfg, threads):
    _, _, real, traj = _realized(cfg)
    rep = verify_energy_estimate(traj, real.system, _tol(cfg, "gronwall_rtol"), _tol(cfg, "gronwall_atol"))
    cor = corollary_bounds(traj, real.system)
    report = Report(cfg.name, "verify-energy", ["t", "eta", "xi", "gronwall_bound"],
                    list(zip(rep.times, rep.eta_values, rep.xi_values, rep.gronwall_bound_values)))
    report.results = {
        "energy_estimate": {"lhs": rep.lhs, "rhs": rep.rhs, "ratio": rep.ratio,
                            "lhs_terms": rep.lhs_terms, "rhs_terms": rep.rhs_terms},
        "solution_bounds": {"lhs": cor.lhs, "brackets": cor.brackets, "ratios": cor.ratios,
                            "skipped": cor.skipped,
                            "v_system_agreement": cor.v_system_agreement,
                            "v_system_derivative_agreement": cor.v_system_derivative_agreement},
    }
    report.verdicts.append(_gronwall_verdict(cfg, rep))
    cap = _tol(cfg, "energy_ratio_max")
    report.verdicts.append(Verdict("energy estimate LHS/RHS finite and within the corpus envelope",
                                   cap, rep.ratio, math.isfinite(rep.ratio) and rep.ratio <= cap))
    cap = _tol(cfg, "corollary_ratio_max")
    for key, ratio in cor.ratios.items():
        report.verdicts.append(Verdict(f"solution bound {key}: LHS/bracket finite and within the envelope",
                                       cap, ratio, math.isfinite(ratio) and ratio <= cap))
    if cor.v_system_agreement is not None:
        tol = _tol(cfg, "v_system_agreement")
        report.verdicts.append(Verdict("differentiated system v matches numerical d/dt u in L2(0,T;L2)",
                                       tol, cor.v_system_agreement, cor.v_system_agreement <= tol))
    for key, reason in cor.skipped.items():
        report.notes.append(f"{key} skipped: {reason}")
    return report


def _smooth_or_none(spec):
    return None if spec.is_zero else spec.smooth


def run_lift_solve(cfg, threads):
    p = cfg.problem
    if not p.all_smooth:
        raise SchemaError("problem", "lift-solve takes smooth data; use sweep-existence for singular data")
    basis = basis_at(p, float(p.eps_grid[0]))
    f = None
    if p.f:
        f = NodalSource([a for a, _ in p.f], [spec.smooth(basis.nodes) for _, spec in p.f])
    sol = solve_nonhomogeneous(_smooth_or_none(p.V), f, _smooth_or_none(p.u0), _smooth_or_none(p.u1),
                               p.bdata, basis, p.T, p.dt)
    left, right = sol.endpoint_traces()
    times = sol.trajectory.times
    g0 = np.array([float(p.bdata.g0(t)) for t in times])
    g1 = np.array([float(p.bdata.g1(t)) for t in times])
    trace_err = float(max(np.max(np.abs(left - g0)), np.max(np.abs(right - g1))))
    report = Report(cfg.name, "lift-solve", ["t", "u_left", "u_right", "g0", "g1"],
                    list(zip(times, left, right, g0, g1)))
    report.results = {"consistency_residuals": sol.consistency.residuals, "m_norm": sol.m_norm,
                      "estimate_bracket": sol.estimate_bracket, "estimate_ratio": sol.estimate_ratio,
                      "max_trace_error": trace_err}
    tol = _tol(cfg, "trace_error")
    report.verdicts.append(Verdict("endpoint values of u* + G equal g0, g1 at every sample", tol,
                                   trace_err, trace_err <= tol))
    report.verdicts.append(Verdict("lifted a-priori estimate ratio is finite", "finite", sol.estimate_ratio,
                                   math.isfinite(sol.estimate_ratio)))
    return report


def run_sweep_existence(cfg, threads):
    res = existence_sweep(cfg.problem, threads, _tol(cfg, "r2_min"), _tol(cfg, "bounded_N"))
    keys = list(res.data_norms)
    rows = [(e, n, *[res.data_norms[k][i] for k in keys], res.modes[i], res.steps[i])
            for i, (e, n) in enumerate(zip(res.eps_grid, res.m_norms))]
    report = Report(cfg.name, "sweep-existence", ["eps", "m_norm", *keys, "modes", "dt"], rows)
    report.results = {"fit": fit_block(res.fit), "verdict": res.verdict, "moderate_order": res.verdict_N,
                      "data_fits": {k: fit_block(v) for k, v in res.data_fits.items()}}
    report.notes.extend(res.notes)
    tol = {"r2_min": _tol(cfg, "r2_min"), "bounded_N": _tol(cfg, "bounded_N")}
    report.verdicts.append(Verdict("solution net is moderate: fitted N <= bounded_N or R^2 >= r2_min", tol,
                                   {"fitted_N": res.fit.fitted_N, "r_squared": res.fit.r_squared},
                                   res.verdict == "moderate"))
    if "max_N" in cfg.tolerances:
        cap = cfg.tolerances["max_N"]
        report.verdicts.append(Verdict("fitted growth exponent N <= max_N", cap, res.fit.fitted_N,
                                       res.fit.fitted_N <= cap))
    return report


def _comparison_report(cfg, kind, res, invariant):
    rows = [(e, n, res.modes[i], res.steps[i]) for i, (e, n) in enumerate(zip(res.eps_grid, res.norms))]
    report = Report(cfg.name, kind, ["eps", "norm", "modes", "dt"], rows)
    report.results = {"fit": fit_block(res.fit), "verdict": res.verdict}
    report.verdicts.append(Verdict(invariant, {"min_decay_slope_exclusive": 0.0}, res.fit.decay_slope, res.passed))
    if "min_slope" in cfg.tolerances:
        cap = cfg.tolerances["min_slope"]
        ok = res.fit.identically_zero or res.fit.decay_slope >= cap
        report.verdicts.append(Verdict("log-log decay slope >= min_slope", cap, res.fit.decay_slope, ok))
    if "max_terminal" in cfg.tolerances:
        cap = cfg.tolerances["max_terminal"]
        report.verdicts.append(Verdict("norm at the smallest eps <= max_terminal", cap, res.norms[-1],
                                       res.norms[-1] <= cap))
    if not cfg.problem.bdata.is_zero:
        report.notes.append("boundary data g held fixed across eps")
    return report


def run_sweep_uniqueness(cfg, threads):
    res = uniqueness_experiment(cfg.problem, cfg.alt_mollifiers, threads)
    return _comparison_report(cfg, "sweep-uniqueness", res,
                              "difference of two regularised nets decays in eps (positive slope) or vanishes")


def run_sweep_consistency(cfg, threads):
    res = consistency_experiment(cfg.problem, threads)
    return _comparison_report(cfg, "sweep-consistency", res,
                              "||u - u_eps||_M strictly decreases over the finer half of the eps grid")


def _on_grid_times(times, step):
    return all(abs(t / step - round(t / step)) < 1e-9 * max(1.0, t / step) for t in times)


def run_oracle_compare(cfg, threads):
    p, osets = cfg.problem, cfg.oracle
    for step, path in ((p.dt, "problem.dt"), (osets.dt, "oracle.dt")):
        if not _on_grid_times(osets.checkpoints, step):
            raise SchemaError("oracle.checkpoints", f"checkpoints must be multiples of {path} = {step}")
    eps, basis, real, traj = _realized(cfg)
    L = p.length
    mollify = cfg.eps_value is not None
    dx = L / (osets.nx + 1)
    if not p.all_smooth and dx > eps / 4:
        raise PreconditionError(f"FD grid too coarse for mollified data: dx = {dx:.4g} > eps/4 = {eps / 4:.4g}")

    def field(spec, name):
        if spec.is_zero:
            return None
        return lambda x: regularize_at(spec, p.mollifier(name), eps, x, L, mollify and name in p.regularize_smooth)

    def source(t, x):
        out = np.zeros_like(x)
        for a, spec in p.f:
            out = out + float(a(t)) * field(spec, "f")(x)
        return out

    grid = FdGrid.create(L, osets.nx, osets.dt, field(p.V, "V"), field(p.u0, "u0"), field(p.u1, "u1"))
    fd = fd_solve(grid, source if p.f else None, None if p.bdata.is_zero else p.bdata, p.T)
    per = [compare(traj, basis, fd, [t], real.lifting) for t in osets.checkpoints]
    report = Report(cfg.name, "oracle-compare", ["t", "l2_discrepancy"], list(zip(osets.checkpoints, per)))
    worst = float(max(per))
    report.results = {"max_discrepancy": worst, "m": basis.m, "nx": osets.nx, "fd_dt": osets.dt,
                      "spectral_dt": traj.dt, "eps": eps if not p.all_smooth or mollify else None}
    tol = _tol(cfg, "max_discrepancy")
    report.verdicts.append(Verdict("max L2 discrepancy between spectral and FD solutions", tol, worst,
                                   worst <= tol))
    return report


RUNNERS = {
    "solve": run_solve,
    "verify-energy": run_verify_energy,
    "lift-solve": run_lift_solve,
    "sweep-existence": run_sweep_existence,
    "sweep-uniqueness": run_sweep_uniqueness,
    "sweep-consistency": run_sweep_consistency,
    "oracle-compare": run_oracle_compare,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="wave-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=True, help="JSON or YAML experiment file")
        cmd.add_argument("--out", default=".", help="output directory (default: current)")
        cmd.add_argument("--threads", type=int, default=1, help="worker threads for eps sweeps")
    return parser


def run(command, config_path, out_dir=".", threads=1):
    """Execute one experiment; returns the exit code."""
    if threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return EXIT_SCHEMA
    try:
        cfg = load_config(config_path)
        if cfg.experiment is not None and cfg.experiment != command:
            raise SchemaError("experiment", f"config is for {cfg.experiment!r}, not {command!r}")
        report = RUNNERS[command](cfg, threads)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except WaveLabError as exc:
        print(f"guard violation [{exc.guard}]: {exc}", file=sys.stderr)
        return EXIT_GUARD
    try:
        paths = emit_report(report, out_dir, cfg.raw, __version__)
    except OSError as exc:
        print(f"error: cannot write reports to {out_dir!r}: {exc}", file=sys.stderr)
        return EXIT_IO
    for v in report.verdicts:
        print(f"{'PASS' if v.passed else 'FAIL'}  {v.invariant}")
    print(f"wrote {paths[0]} and {paths[1]}")
    return EXIT_OK if report.passed else EXIT_FAIL


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run(args.command, args.config, args.out, args.threads)


if __name__ == "__main__":
    sys.exit(main())
