"""Second-order finite-difference leapfrog solver used as an independent oracle.

Nothing here touches the spectral quadrature, basis or integrator: data are
sampled pointwise on a uniform grid and advanced with the 3-point Laplacian.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, StepSizeError

CFL_FACTOR = 0.9
MIN_NX = 8


def _on_grid(func, x):
    if func is None:
        return np.zeros_like(x)
    return np.broadcast_to(np.asarray(func(x), dtype=float), x.shape).astype(float)


@dataclass(frozen=True)
class FdGrid:
    length: float
    nx: int
    dt: float
    x: np.ndarray
    V: np.ndarray
    u0: np.ndarray
    u1: np.ndarray

    @property
    def dx(self):
        return self.length / (self.nx + 1)

    @classmethod
    def create(cls, length, nx, dt, V=None, u0=None, u1=None, point_potentials=()):
        """Sample data on ``nx`` interior points plus the two endpoints.

        ``point_potentials`` holds ``(x0, weight)`` pairs; each must sit on a
        grid node and contributes the discrete delta weight/dx there.
        """
        if nx < MIN_NX:
            raise InvalidArgumentError(f"nx must be at least {MIN_NX}, got {nx}")
        x = np.linspace(0.0, length, nx + 2)
        dx = length / (nx + 1)
        Vx = _on_grid(V, x)
        for x0, weight in point_potentials:
            j = int(round(x0 / dx))
            if not (0 < j < nx + 1) or abs(x[j] - x0) > 1e-9 * length:
                raise InvalidArgumentError(f"point potential at {x0} is not on an interior node")
            Vx[j] += weight / dx
        vmax = float(np.max(np.abs(Vx)))
        limit = CFL_FACTOR * dx / math.sqrt(1.0 + dx**2 * vmax)
        if dt > limit:
            raise StepSizeError(f"dt = {dt:.4g} violates the CFL guard {limit:.4g}", suggested_dt=limit)
        return cls(float(length), int(nx), float(dt), x, Vx, _on_grid(u0, x), _on_grid(u1, x))


@dataclass(frozen=True)
class FdResult:
    x: np.ndarray
    times: np.ndarray
    u: np.ndarray

    def index_of(self, t, tol=1e-9):
        idx = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[idx] - t) > tol * max(1.0, abs(t)):
            raise InvalidArgumentError(f"t = {t} is not a saved time of the FD run")
        return idx


def fd_solve(grid, f=None, bdata=None, T=1.0, save_every=1):
    """Leapfrog u^{n+1} = 2u^n - u^{n-1} + dt^2 (D2 u^n - V u^n + f^n).

    ``f`` is a callable ``f(t, x)``; ``bdata`` supplies Dirichlet values
    ``g0(t)``, ``g1(t)`` (zero when omitted). The first step uses the
    Taylor start u^1 = u^0 + dt u_1 + dt^2/2 (D2 u^0 - V u^0 + f^0).
    """
    n = max(1, int(math.ceil(T / grid.dt - 1e-9)))
    h = T / n
    x, V, dx2 = grid.x, grid.V, grid.dx**2

    def boundary(u, t):
        if bdata is None:
            u[0] = u[-1] = 0.0
        else:
            u[0], u[-1] = float(bdata.g0(t)), float(bdata.g1(t))

    def rhs(u, t):
        out = np.zeros_like(u)
        out[1:-1] = (u[:-2] - 2.0 * u[1:-1] + u[2:]) / dx2 - V[1:-1] * u[1:-1]
        if f is not None:
            out[1:-1] += _on_grid(lambda y: f(t, y), x[1:-1])
        return out

    prev = grid.u0.copy()
    boundary(prev, 0.0)
    cur = prev + h * grid.u1 + 0.5 * h**2 * rhs(prev, 0.0)
    boundary(cur, h)

    saved_t, saved_u = [0.0], [prev.copy()]
    if save_every == 1 or n == 1:
        saved_t.append(h)
        saved_u.append(cur.copy())
    for i in range(1, n):
        t = i * h
        nxt = 2.0 * cur - prev + h**2 * rhs(cur, t)
        boundary(nxt, t + h)
        prev, cur = cur, nxt
        if (i + 1) % save_every == 0 or i + 1 == n:
            saved_t.append((i + 1) * h if i + 1 < n else T)
            saved_u.append(cur.copy())
    return FdResult(x, np.array(saved_t), np.array(saved_u))


def _trapz_l2(values, x):
    return math.sqrt(float(np.trapezoid(values**2, x)))


def compare(traj, basis, fd_result, t_checkpoints, lifting=None):
    """Max over checkpoints of the L2 distance between the two solutions.

    The spectral solution is evaluated on the FD grid by direct sine sums;
    with a ``lifting`` the boundary lift G is added back.
    """
    x = fd_result.x
    L = basis.length
    k = np.arange(1, basis.m + 1)
    modes = math.sqrt(2.0 / L) * np.sin(np.outer(k * np.pi / L, x))
    worst = 0.0
    for t in t_checkpoints:
        spectral = traj.d[traj.index_of(t)] @ modes
        if lifting is not None:
            spectral = spectral + lifting.G(t, x)
        diff = spectral - fd_result.u[fd_result.index_of(t)]
        worst = max(worst, _trapz_l2(diff, x))
    return worst
