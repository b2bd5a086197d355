"""Seeded random smooth problems for the corpus-level checks."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import catalog
from .galerkin import NodalSource, solve_ivp


@dataclass(frozen=True)
class SmoothProblem:
    """Smooth data built from catalog functions; f is a sum of a_i(t) phi_i(x)."""

    seed: int
    length: float
    V: object
    u0: object
    u1: object
    f_terms: tuple

    def source_on(self, basis):
        if not self.f_terms:
            return None
        return NodalSource([a for a, _ in self.f_terms], [phi(basis.nodes) for _, phi in self.f_terms])

    def source_tx(self, t, x):
        """f(t, x) as a plain callable, for the finite-difference oracle."""
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for a, phi in self.f_terms:
            out = out + float(a(t)) * phi(x)
        return out

    def solve(self, basis, T, dt):
        return solve_ivp(self.V, self.source_on(basis), self.u0, self.u1, basis, T, dt)


def random_problem(seed, length=math.pi, v_max=5.0):
    """V = A + B sin(omega x + phi) with values in [0, v_max], low-mode data, separable f."""
    rng = np.random.default_rng(seed)
    B = rng.uniform(0.0, 0.4 * v_max)
    A = rng.uniform(B, v_max - B)
    omega = rng.uniform(0.5, 3.0)
    phase = rng.uniform(0.0, 2.0 * math.pi)
    V = catalog.sin_x(A, B, omega, phase, length)

    k = np.arange(1, 4)
    a = rng.normal(0.0, 1.0, 3) / k**2
    b = rng.normal(0.0, 1.0, 3) / k
    c = rng.uniform(-1.0, 1.0)
    u0 = catalog.sum_x(*[catalog.mode_x(int(j), float(v), length) for j, v in zip(k, a)],
                       catalog.bubble_x(c, length), length=length)
    u1 = catalog.sum_x(*[catalog.mode_x(int(j), float(v), length) for j, v in zip(k, b)], length=length)

    f_terms = (
        (catalog.sin_t(float(rng.uniform(-1.0, 1.0)), float(rng.uniform(0.5, 3.0))),
         catalog.bubble_x(1.0, length)),
        (catalog.cos_t(float(rng.uniform(-1.0, 1.0)), float(rng.uniform(0.5, 3.0))),
         catalog.mode_x(int(rng.integers(1, 4)), 1.0, length)),
    )
    return SmoothProblem(int(seed), float(length), V, u0, u1, f_terms)


def corpus(n, base_seed=0, length=math.pi):
    return [random_problem(base_seed + i, length) for i in range(n)]
