"""Nonhomogeneous Dirichlet data through the linear lift G(t, x).

In one dimension the boundary trace is the pair of endpoint values, so
G(t, x) = g0(t)(1 - x/L) + g1(t) x/L extends them with Lap G = 0 and the
solution is u~ = u* + G where u* has homogeneous boundary values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import catalog
from .energy import m_norm
from .errors import ConsistencyError
from .galerkin import NodalSource, assemble_system, integrate
from .spectral_core import check_nonnegative, h20_norm, norm, project, sample

CONSISTENCY_TOL = 1e-10


@dataclass(frozen=True)
class BoundaryData:
    """Endpoint values g0 at x = 0 and g1 at x = L; both need ``derivative()``."""

    g0: object = catalog.ZERO_T
    g1: object = catalog.ZERO_T

    @property
    def is_zero(self):
        return getattr(self.g0, "is_zero", False) and getattr(self.g1, "is_zero", False)

    def derivatives(self, order):
        g0, g1 = self.g0, self.g1
        for _ in range(order):
            g0, g1 = g0.derivative(), g1.derivative()
        return g0, g1


@dataclass(frozen=True)
class ConsistencyReport:
    residuals: dict
    tolerance: float
    passed: bool


def _value(func, x):
    if func is None:
        return 0.0
    return float(np.asarray(func(np.array([x], dtype=float)), dtype=float).ravel()[0])


def check_consistency(u0, u1, bdata, length, tol=CONSISTENCY_TOL):
    """Compare g(0), g_t(0) with the endpoint values of u0, u1."""
    g0t, g1t = bdata.derivatives(1)
    residuals = {
        "g0_vs_u0": abs(float(bdata.g0(0.0)) - _value(u0, 0.0)),
        "g1_vs_u0": abs(float(bdata.g1(0.0)) - _value(u0, length)),
        "dg0_vs_u1": abs(float(g0t(0.0)) - _value(u1, 0.0)),
        "dg1_vs_u1": abs(float(g1t(0.0)) - _value(u1, length)),
    }
    return ConsistencyReport(residuals, tol, all(r <= tol for r in residuals.values()))


class LiftedProblem:
    """The lift G with its time derivatives and closed-form eigen-coefficients."""

    def __init__(self, bdata, length):
        self.bdata = bdata
        self.length = float(length)
        self._d1 = bdata.derivatives(1)
        self._d2 = bdata.derivatives(2)

    def _profiles(self, x):
        x = np.asarray(x, dtype=float)
        return 1.0 - x / self.length, x / self.length

    def G(self, t, x):
        left, right = self._profiles(x)
        return float(self.bdata.g0(t)) * left + float(self.bdata.g1(t)) * right

    def G_t(self, t, x):
        left, right = self._profiles(x)
        return float(self._d1[0](t)) * left + float(self._d1[1](t)) * right

    def G_tt(self, t, x):
        left, right = self._profiles(x)
        return float(self._d2[0](t)) * left + float(self._d2[1](t)) * right

    def profile_coefficients(self, m):
        """Coefficients of 1 - x/L and x/L against w_1..w_m."""
        k = np.arange(1, m + 1)
        base = math.sqrt(2.0 / self.length) * self.length / (k * np.pi)
        return base, base * (-1.0) ** (k + 1)

    def coefficients(self, t, m, order=0):
        a, b = self.profile_coefficients(m)
        g0, g1 = self.bdata.derivatives(order)
        return float(g0(t)) * a + float(g1(t)) * b

    def modified_source(self, f, V_nodes, nodes):
        """f* = f - G_tt + Lap G - V G (Lap G = 0) as a node provider."""
        left, right = self._profiles(nodes)
        g0, g1 = self.bdata.g0, self.bdata.g1
        g0tt, g1tt = self._d2
        times = [g0tt, g1tt]
        parts = [-left, -right]
        if V_nodes is not None:
            times += [g0, g1]
            parts += [-V_nodes * left, -V_nodes * right]
        star = NodalSource(times, parts)
        if f is None:
            return star
        if isinstance(f, NodalSource):
            return NodalSource(f.time_parts + star.time_parts, f.spatial_parts + star.spatial_parts)
        return _CombinedSource(f, star)

    def boundary_norm(self, times):
        """||g||_{H^2(0,T)} over both endpoints by the trapezoid rule."""
        total = 0.0
        for order in range(3):
            g0, g1 = self.bdata.derivatives(order)
            vals = np.array([float(g0(t)) ** 2 + float(g1(t)) ** 2 for t in times])
            total += float(np.trapezoid(vals, times)) if len(times) > 1 else 0.0
        return math.sqrt(total)


class _CombinedSource:
    def __init__(self, f, star):
        self.f, self.star = f, star

    def __call__(self, t):
        return self.f(t) + self.star(t)


def build_lifting(bdata, interval):
    return LiftedProblem(bdata, interval.length)


@dataclass(frozen=True)
class NonhomogeneousSolution:
    trajectory: object
    system: object
    lifting: LiftedProblem
    consistency: ConsistencyReport
    m_norm: float
    estimate_bracket: float
    estimate_ratio: float

    def values(self, n, x):
        """u~ = u* + G at sample index ``n`` and points ``x``."""
        t = float(self.trajectory.times[n])
        return self.system.basis.evaluate(self.trajectory.d[n], x) + self.lifting.G(t, x)

    def endpoint_traces(self):
        L = self.lifting.length
        left = np.array([self.values(n, [0.0])[0] for n in range(self.trajectory.n_samples)])
        right = np.array([self.values(n, [L])[0] for n in range(self.trajectory.n_samples)])
        return left, right


def solve_nonhomogeneous(V, f, u0, u1, bdata, basis, T, dt, cache_load=False):
    """Solve the lifted homogeneous problem for u* and report the a-priori ratio.

    ``u0`` and ``u1`` must be callables of x (their endpoint values are the
    traces checked against g). ``f`` is a node provider or ``None``.
    """
    report = check_consistency(u0, u1, bdata, basis.length)
    if not report.passed:
        raise ConsistencyError(f"boundary data inconsistent with initial data: {report.residuals}")
    lifting = LiftedProblem(bdata, basis.length)
    V_nodes = None if V is None else check_nonnegative(sample(V, basis))
    if V_nodes is not None and not np.any(V_nodes):
        V_nodes = None
    f_star = f if bdata.is_zero else lifting.modified_source(f, V_nodes, basis.nodes)
    system = assemble_system(V_nodes, f_star, basis, cache_load=cache_load)
    d0 = project(sample(u0, basis), basis) - lifting.coefficients(0.0, basis.m, 0)
    d1 = project(sample(u1, basis), basis) - lifting.coefficients(0.0, basis.m, 1)
    traj = integrate(system, d0, d1, T, dt)

    mn = m_norm(traj, system)
    bracket = _estimate_bracket(traj, basis, system, f, lifting)
    ratio = mn / bracket if bracket > 0 else (0.0 if mn == 0 else math.inf)
    return NonhomogeneousSolution(traj, system, lifting, report, mn, bracket, ratio)


def _estimate_bracket(traj, basis, system, f, lifting):
    times = traj.times
    vinf = system.v_max
    f_sq = np.zeros_like(times)
    ft_sq = np.zeros_like(times)
    if f is not None:
        f_sq = np.array([np.sum(basis.weights * f(t) ** 2) for t in times])
        if isinstance(f, NodalSource):
            ft = f.derivative()
            ft_sq = np.array([np.sum(basis.weights * ft(t) ** 2) for t in times])
    f_h1 = math.sqrt(float(np.trapezoid(f_sq + ft_sq, times)))
    d0, d1 = traj.d[0], traj.dprime[0]
    return ((1 + math.sqrt(vinf)) * (f_h1 + norm("H10", d0, basis) + norm("H10", d1, basis))
            + (1 + vinf) * h20_norm(d0, basis) + lifting.boundary_norm(times))
