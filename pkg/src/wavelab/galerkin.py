"""Galerkin ODE system d'' + (E + G) d = f and its Stormer-Verlet integration."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, StepSizeError
from .spectral_core import _coeffs, check_nonnegative, project, sample

STABILITY_FACTOR = 0.5


class NodalSource:
    """Separable source f(t, x) = sum_i a_i(t) phi_i(x) sampled on fixed nodes.

    Calling it with a time returns the node values, so it is a valid
    time-indexed grid-function provider. ``derivative`` gives f_t.
    """

    def __init__(self, time_parts, spatial_parts):
        self.time_parts = list(time_parts)
        self.spatial_parts = [np.asarray(s, dtype=float) for s in spatial_parts]
        if len(self.time_parts) != len(self.spatial_parts):
            raise InvalidArgumentError("time and spatial parts of a source must pair up")

    def __call__(self, t):
        out = np.zeros_like(self.spatial_parts[0]) if self.spatial_parts else 0.0
        for a, phi in zip(self.time_parts, self.spatial_parts):
            out = out + float(a(t)) * phi
        return out

    def derivative(self):
        return NodalSource([a.derivative() for a in self.time_parts], self.spatial_parts)

    @property
    def is_zero(self):
        return all(getattr(a, "is_zero", False) or not np.any(phi)
                   for a, phi in zip(self.time_parts, self.spatial_parts))


@dataclass(frozen=True)
class GalerkinSystem:
    """Assembled coefficients of the ODE system in the eigenbasis.

    ``potential_matrix`` is ``None`` when V vanishes identically and
    ``source`` is ``None`` when f does.
    """

    basis: object
    stiffness: np.ndarray
    potential_matrix: np.ndarray | None
    V_nodes: np.ndarray | None = None
    source: object = None
    extra_load: object = None
    cache_load: bool = False
    _load_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def m(self):
        return self.basis.m

    @property
    def v_max(self):
        return 0.0 if self.V_nodes is None else float(np.max(np.abs(self.V_nodes)))

    def load(self, t):
        """f^k(t) = (f(t), w_k) by quadrature on the basis nodes."""
        if self.source is None:
            out = np.zeros(self.m)
        elif self.cache_load and isinstance(self.source, NodalSource):
            out = self._separable_load(t)
        else:
            out = project(self.source(t), self.basis)
        if self.extra_load is not None:
            out = out + self.extra_load(t)
        return out

    def _separable_load(self, t):
        parts = self._load_cache.get("parts")
        if parts is None:
            parts = [project(phi, self.basis) for phi in self.source.spatial_parts]
            self._load_cache["parts"] = parts
        out = np.zeros(self.m)
        for a, proj in zip(self.source.time_parts, parts):
            out = out + float(a(t)) * proj
        return out

    def source_sq_norm(self, t):
        """xi(t) = ||f(t)||^2_{L2} on the full quadrature (not the projection)."""
        if self.source is None:
            return 0.0
        values = self.source(t)
        return float(np.sum(self.basis.weights * values**2))

    def potential_form(self, d):
        """d^T G d = ||sqrt(V) u_m||^2, vectorised over leading axes."""
        if self.potential_matrix is None:
            return np.zeros(np.shape(d)[:-1])
        return np.einsum("...i,ij,...j->...", d, self.potential_matrix, d)

    def max_stable_dt(self):
        return STABILITY_FACTOR / math.sqrt(float(self.stiffness[-1]) + self.v_max)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    d: np.ndarray
    dprime: np.ndarray
    accel: np.ndarray

    @property
    def dt(self):
        return float(self.times[1] - self.times[0]) if self.times.size > 1 else 0.0

    @property
    def n_samples(self):
        return self.times.size

    def index_of(self, t, tol=1e-9):
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > tol * max(1.0, abs(t)):
            raise InvalidArgumentError(f"t = {t} is not a sample time of the trajectory")
        return idx


def assemble_system(V, f, basis, cache_load=False, extra_load=None):
    """Build the Galerkin system for potential ``V`` and source provider ``f``.

    ``V`` is a callable of x, an array of node values, or ``None``. ``f`` is
    a provider ``t -> node values`` or ``None``.
    """
    if V is None:
        V_nodes, G = None, None
    else:
        V_nodes = check_nonnegative(sample(V, basis))
        if not np.any(V_nodes):
            V_nodes, G = None, None
        else:
            W = basis.node_values
            G = (W * (basis.weights * V_nodes)) @ W.T
            G = 0.5 * (G + G.T)
    if isinstance(f, NodalSource) and f.is_zero:
        f = None
    return GalerkinSystem(basis, basis.lambdas.copy(), G, V_nodes, f, extra_load, cache_load)


def accel(system, d, t):
    """d''_k = f^k(t) - lambda_k d_k - sum_l g^{lk} d_l."""
    out = system.load(t) - system.stiffness * d
    if system.potential_matrix is not None:
        out -= system.potential_matrix @ d
    return out


def step_count(T, dt):
    if not (T > 0) or not (dt > 0):
        raise InvalidArgumentError(f"need T > 0 and dt > 0, got T={T}, dt={dt}")
    return max(1, int(math.ceil(T / dt - 1e-9)))


def integrate(system, d0, d1, T, dt):
    """Velocity-Verlet trajectory on a uniform grid of ``ceil(T/dt)`` steps.

    The step is shrunk to ``T / n`` so the grid ends exactly at ``T``.
    """
    d0 = _coeffs(d0, system.basis)
    d1 = _coeffs(d1, system.basis)
    limit = system.max_stable_dt()
    if dt > limit:
        raise StepSizeError(
            f"dt = {dt:.4g} exceeds the stability guard {limit:.4g} "
            f"(0.5/sqrt(lambda_max + |V|_inf)); use dt <= {limit:.4g}",
            suggested_dt=limit,
        )
    n = step_count(T, dt)
    h = T / n
    times = np.arange(n + 1) * h
    times[-1] = T
    m = system.m
    d = np.empty((n + 1, m))
    v = np.empty((n + 1, m))
    a = np.empty((n + 1, m))
    d[0], v[0] = d0, d1
    a[0] = accel(system, d0, 0.0)
    for i in range(n):
        v_half = v[i] + 0.5 * h * a[i]
        d[i + 1] = d[i] + h * v_half
        a[i + 1] = accel(system, d[i + 1], times[i + 1])
        v[i + 1] = v_half + 0.5 * h * a[i + 1]
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(v))):
        raise StepSizeError("trajectory became non-finite", suggested_dt=0.5 * limit)
    return Trajectory(times, d, v, a)


def solve_ivp(V, f, u0, u1, basis, T, dt, cache_load=False):
    """Project the initial data, assemble and integrate."""
    system = assemble_system(V, f, basis, cache_load=cache_load)
    d0 = project(sample(u0, basis), basis)
    d1 = project(sample(u1, basis), basis)
    return integrate(system, d0, d1, T, dt), system
