"""Epsilon sweeps for very weak solutions: existence, uniqueness, consistency.

Singular data (Dirac parts) are always mollified; smooth data only when
named in ``regularize_smooth``. The boundary data g are never regularised.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .energy import m_norm, m_norm_difference
from .errors import ConsistencyError, InvalidArgumentError, PreconditionError
from .galerkin import NodalSource, assemble_system, integrate, step_count
from .lifting import BoundaryData, LiftedProblem, check_consistency
from .singular import (
    DistributionSpec,
    Mollifier,
    loglog_fit,
    project_distribution,
    refine_for,
    regularize,
    regularize_at,
    sup_norm,
    validate_eps_grid,
    default_eps_grid,
)
from .spectral_core import EigenBasis, Interval, check_nonnegative, h20_norm, norm

DATA_NAMES = ("V", "u0", "u1", "f")
R2_MIN = 0.99
BOUNDED_N = 0.1


@dataclass(frozen=True)
class VwsProblem:
    """Wave problem with possibly singular data and an epsilon grid.

    ``f`` is a tuple of ``(time_function, DistributionSpec)`` pairs.
    ``modes_per_inverse_eps`` switches on resolved representatives: the
    mode count at each eps becomes ``max(m, ceil(kappa L / (pi eps)))`` and
    the step is capped by the stability guard.
    """

    V: DistributionSpec = field(default_factory=DistributionSpec)
    u0: DistributionSpec = field(default_factory=DistributionSpec)
    u1: DistributionSpec = field(default_factory=DistributionSpec)
    f: tuple = ()
    bdata: BoundaryData = field(default_factory=BoundaryData)
    length: float = math.pi
    T: float = 1.0
    dt: float = 1e-3
    m: int = 64
    eps_grid: tuple = tuple(default_eps_grid())
    mollifiers: dict = field(default_factory=dict)
    regularize_smooth: frozenset = frozenset()
    modes_per_inverse_eps: float | None = None
    quad_panels: int = 64
    quad_order: int = 8

    def __post_init__(self):
        validate_eps_grid(self.eps_grid)
        self.V.validate(self.length, as_potential=True)
        for spec in (self.u0, self.u1) + tuple(s for _, s in self.f):
            spec.validate(self.length)
        unknown = set(self.regularize_smooth) - set(DATA_NAMES)
        if unknown:
            raise InvalidArgumentError(f"unknown data names in regularize_smooth: {sorted(unknown)}")

    def mollifier(self, name):
        return self.mollifiers.get(name, Mollifier())

    def with_mollifiers(self, mollifiers):
        return _replace(self, mollifiers=dict(mollifiers))

    @property
    def all_smooth(self):
        return all(spec.is_smooth for spec in (self.V, self.u0, self.u1) + tuple(s for _, s in self.f))


def _replace(problem, **changes):
    import dataclasses
    return dataclasses.replace(problem, **changes)


def modes_at(problem, eps):
    if problem.modes_per_inverse_eps is None:
        return problem.m
    return max(problem.m, int(math.ceil(problem.modes_per_inverse_eps * problem.length / (math.pi * eps))))


def basis_at(problem, eps):
    interval = Interval(problem.length, problem.quad_panels, problem.quad_order)
    interval = refine_for(interval, problem.V, eps)
    for _, spec in problem.f:
        interval = refine_for(interval, spec, eps)
    return EigenBasis(interval, modes_at(problem, eps))


@dataclass(frozen=True)
class Realization:
    """One regularised problem on a given basis, ready to integrate."""

    system: object
    d0: np.ndarray
    d1: np.ndarray
    lifting: LiftedProblem | None
    data_norms: dict


def realize(problem, eps, basis, mollify=True):
    """Regularise the data at ``eps`` and assemble the lifted Galerkin system.

    With ``mollify=False`` smooth data are used as given (the direct solve
    of the consistency experiment).
    """
    def smooth_on(name):
        return mollify and name in problem.regularize_smooth

    L = basis.length
    V_nodes = None
    v_inf = 0.0
    if not problem.V.is_zero:
        V_nodes = check_nonnegative(regularize(problem.V, problem.mollifier("V"), eps, basis, smooth_on("V")),
                                    "regularised potential")
        v_inf = sup_norm(problem.V, problem.mollifier("V"), eps, basis, smooth_on("V"))

    source = None
    if problem.f:
        psi = problem.mollifier("f")
        parts = [regularize(spec, psi, eps, basis, smooth_on("f")) for _, spec in problem.f]
        source = NodalSource([a for a, _ in problem.f], parts)

    d0 = project_distribution(problem.u0, problem.mollifier("u0"), eps, basis, smooth_on("u0"))
    d1 = project_distribution(problem.u1, problem.mollifier("u1"), eps, basis, smooth_on("u1"))
    data_norms = {
        "V_inf": v_inf,
        "u0_H20": h20_norm(d0, basis),
        "u1_H10": norm("H10", d1, basis),
    }

    lifting = None
    if not problem.bdata.is_zero:
        def trace(spec, name):
            return lambda x: regularize_at(spec, problem.mollifier(name), eps, x, L, smooth_on(name))
        report = check_consistency(trace(problem.u0, "u0"), trace(problem.u1, "u1"), problem.bdata, L)
        if not report.passed:
            raise ConsistencyError(f"eps = {eps}: boundary data inconsistent with initial data {report.residuals}")
        lifting = LiftedProblem(problem.bdata, L)
        source = lifting.modified_source(source, V_nodes, basis.nodes)
        d0 = d0 - lifting.coefficients(0.0, basis.m, 0)
        d1 = d1 - lifting.coefficients(0.0, basis.m, 1)

    system = assemble_system(V_nodes, source, basis)
    return Realization(system, d0, d1, lifting, data_norms)


def _step(problem, *systems):
    if problem.modes_per_inverse_eps is None:
        return problem.dt
    guard = min(s.max_stable_dt() for s in systems)
    if problem.dt <= guard:
        return problem.dt
    # shrink to a step that still divides T evenly
    return problem.T / step_count(problem.T, 0.999 * guard)


def _f_h1_norm(problem, basis, eps, times, smooth_flag):
    if not problem.f:
        return 0.0
    psi = problem.mollifier("f")
    parts = [regularize(spec, psi, eps, basis, smooth_flag) for _, spec in problem.f]
    src = NodalSource([a for a, _ in problem.f], parts)
    dsrc = src.derivative()
    w = basis.weights
    vals = np.array([np.sum(w * src(t) ** 2) + np.sum(w * dsrc(t) ** 2) for t in times])
    return math.sqrt(float(np.trapezoid(vals, times)))


def _map(func, items, threads):
    if threads <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


@dataclass(frozen=True)
class SweepResult:
    eps_grid: np.ndarray
    m_norms: np.ndarray
    fit: object
    data_norms: dict
    data_fits: dict
    verdict: str
    verdict_N: float | None
    modes: tuple
    steps: tuple
    notes: tuple = ()


def _fit_or_none(eps, values):
    values = np.asarray(values, dtype=float)
    if np.all(values == 0) or np.all(values > 0):
        return loglog_fit(eps, values)
    return None


def existence_sweep(problem, threads=1, r2_min=R2_MIN, bounded_n=BOUNDED_N):
    """Solve the regularised problem at each eps and fit the growth of the solution norm.

    The net is declared moderate when it is bounded (fitted N <= ``bounded_n``)
    or follows a power law with R^2 >= ``r2_min``.
    """
    eps_grid = validate_eps_grid(problem.eps_grid)

    def one(eps):
        basis = basis_at(problem, eps)
        real = realize(problem, eps, basis)
        dt = _step(problem, real.system)
        try:
            traj = integrate(real.system, real.d0, real.d1, problem.T, dt)
        except Exception as exc:
            exc.args = (f"eps = {eps}: {exc.args[0] if exc.args else exc}",) + exc.args[1:]
            raise
        norms = dict(real.data_norms)
        norms["f_H1L2"] = _f_h1_norm(problem, basis, eps, traj.times, "f" in problem.regularize_smooth)
        return m_norm(traj, real.system), norms, basis.m, dt

    results = _map(one, list(eps_grid), threads)
    m_norms = np.array([r[0] for r in results])
    data_norms = {key: np.array([r[1][key] for r in results]) for key in results[0][1]}
    fit = loglog_fit(eps_grid, m_norms)
    data_fits = {key: _fit_or_none(eps_grid, vals) for key, vals in data_norms.items()}

    if fit.identically_zero or fit.fitted_N <= bounded_n:
        verdict, order = "moderate", max(0.0, fit.fitted_N) if not fit.identically_zero else 0.0
    elif fit.r_squared >= r2_min:
        verdict, order = "moderate", fit.fitted_N
    else:
        verdict, order = "not-moderate", None
    notes = ("boundary data g held fixed across eps",) if not problem.bdata.is_zero else ()
    return SweepResult(eps_grid, m_norms, fit, data_norms, data_fits, verdict, order,
                       tuple(r[2] for r in results), tuple(r[3] for r in results), notes)


@dataclass(frozen=True)
class ComparisonResult:
    eps_grid: np.ndarray
    norms: np.ndarray
    fit: object
    verdict: str
    passed: bool
    modes: tuple
    steps: tuple


def uniqueness_experiment(problem, alt_mollifiers, threads=1):
    """||u_eps - u~_eps|| in the space-time norm for two mollifier families.

    Both nets are solved on the same basis and time grid; the difference is
    weighted by the first net's potential. A decaying norm (positive slope)
    is consistent with a negligible difference.
    """
    eps_grid = validate_eps_grid(problem.eps_grid)
    alt = problem.with_mollifiers({**{n: problem.mollifier(n) for n in DATA_NAMES}, **alt_mollifiers})

    def one(eps):
        basis = basis_at(problem, eps)
        a = realize(problem, eps, basis)
        b = realize(alt, eps, basis)
        dt = _step(problem, a.system, b.system)
        ta = integrate(a.system, a.d0, a.d1, problem.T, dt)
        tb = integrate(b.system, b.d0, b.d1, problem.T, dt)
        return m_norm_difference(ta, tb, a.system), basis.m, dt

    results = _map(one, list(eps_grid), threads)
    norms = np.array([r[0] for r in results])
    fit = loglog_fit(eps_grid, norms)
    ok = fit.identically_zero or fit.decay_slope > 0
    verdict = "negligible-consistent" if ok else "not-negligible"
    return ComparisonResult(eps_grid, norms, fit, verdict, ok,
                            tuple(r[1] for r in results), tuple(r[2] for r in results))


def consistency_experiment(problem, threads=1, tail=None):
    """||u - u_eps|| where u solves the unregularised smooth problem.

    Convergent when the norms strictly decrease over the last ``tail`` grid
    points (default: the finer half of the grid).
    """
    if not problem.all_smooth:
        raise PreconditionError("consistency needs smooth data; found Dirac components")
    eps_grid = validate_eps_grid(problem.eps_grid)
    if problem.modes_per_inverse_eps is not None:
        raise PreconditionError("consistency compares on one fixed basis; unset modes_per_inverse_eps")
    basis = basis_at(problem, float(eps_grid[0]))
    direct = realize(problem, float(eps_grid[0]), basis, mollify=False)
    reference = integrate(direct.system, direct.d0, direct.d1, problem.T, problem.dt)

    def one(eps):
        real = realize(problem, eps, basis)
        traj = integrate(real.system, real.d0, real.d1, problem.T, problem.dt)
        return m_norm_difference(reference, traj, real.system)

    norms = np.array(_map(one, list(eps_grid), threads))
    fit = loglog_fit(eps_grid, norms)
    n_tail = tail or max(2, (len(eps_grid) + 1) // 2)
    tail_vals = norms[-n_tail:]
    ok = bool(fit.identically_zero or np.all(np.diff(tail_vals) < 0))
    verdict = "convergent" if ok else "not-convergent"
    return ComparisonResult(eps_grid, norms, fit, verdict, ok,
                            (basis.m,) * len(eps_grid), (problem.dt,) * len(eps_grid))
