"""Interval domain, composite Gauss-Legendre quadrature and the Dirichlet
sine eigenbasis, plus the spectral norms used throughout the estimates.

Coefficient vectors and sampled fields are plain 1-D numpy arrays: a
coefficient vector has one entry per mode, a grid function one entry per
quadrature node of the basis' interval.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidArgumentError, NonnegativityError

NEGATIVE_TOL = 1e-12

NORM_KINDS = ("L2", "H10", "Hminus1", "weightedL2")


@dataclass(frozen=True)
class Interval:
    """The domain (0, L) with a composite Gauss-Legendre rule.

    ``refinements`` is a tuple of ``(center, radius, n_sub)`` triples; each
    adds ``n_sub`` equal panels covering ``[center - radius, center + radius]``
    on top of the uniform panels.
    """

    length: float
    quad_panels: int = 64
    quad_order: int = 8
    refinements: tuple = field(default=())

    def __post_init__(self):
        if not np.isfinite(self.length) or self.length <= 0:
            raise InvalidArgumentError(f"interval length must be positive, got {self.length}")
        if self.quad_panels < 1 or self.quad_order < 1:
            raise InvalidArgumentError("quad_panels and quad_order must be positive integers")

    def refined(self, center, radius, n_sub=12):
        """Return a copy with extra panels over ``[center - radius, center + radius]``."""
        lo, hi = center - radius, center + radius
        if lo < 0 or hi > self.length:
            raise InvalidArgumentError(
                f"refinement window [{lo}, {hi}] leaves (0, {self.length})"
            )
        new = (float(center), float(radius), int(n_sub))
        if new in self.refinements:
            return self
        return Interval(self.length, self.quad_panels, self.quad_order,
                        tuple(sorted(self.refinements + (new,))))

    def with_min_panels(self, panels):
        if panels <= self.quad_panels:
            return self
        return Interval(self.length, int(panels), self.quad_order, self.refinements)

    @cached_property
    def panel_edges(self):
        edges = [np.linspace(0.0, self.length, self.quad_panels + 1)]
        for center, radius, n_sub in self.refinements:
            edges.append(np.linspace(center - radius, center + radius, n_sub + 1))
        edges = np.unique(np.concatenate(edges))
        # merge edges that differ by rounding only
        keep = np.concatenate(([True], np.diff(edges) > 1e-13 * self.length))
        edges = edges[keep]
        edges[0], edges[-1] = 0.0, self.length
        return edges

    @cached_property
    def _rule(self):
        s, w = np.polynomial.legendre.leggauss(self.quad_order)
        a, b = self.panel_edges[:-1], self.panel_edges[1:]
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        nodes = (mid[:, None] + half[:, None] * s[None, :]).ravel()
        weights = (half[:, None] * w[None, :]).ravel()
        return nodes, weights

    @property
    def nodes(self):
        return self._rule[0]

    @property
    def weights(self):
        return self._rule[1]

    @property
    def n_nodes(self):
        return self.nodes.size

    def integrate(self, values):
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != self.n_nodes:
            raise InvalidArgumentError(
                f"grid function has {values.shape[-1]} samples, quadrature has {self.n_nodes}"
            )
        return values @ self.weights


def eigenvalues(length, m):
    k = np.arange(1, m + 1)
    return (k * np.pi / length) ** 2


def eigenfunctions(length, m, x):
    """Values of w_1..w_m at points ``x``; shape ``(m, len(x))``."""
    k = np.arange(1, m + 1)
    x = np.asarray(x, dtype=float)
    return np.sqrt(2.0 / length) * np.sin(np.outer(k * np.pi / length, x))


def eigenfunction_derivatives(length, m, x):
    k = np.arange(1, m + 1)
    x = np.asarray(x, dtype=float)
    scale = np.sqrt(2.0 / length) * (k * np.pi / length)
    return scale[:, None] * np.cos(np.outer(k * np.pi / length, x))


@dataclass(frozen=True)
class EigenBasis:
    """First ``m`` Dirichlet eigenpairs of -d^2/dx^2 on the interval.

    Node tables are built on first use, so a large-``m`` basis that only
    needs its eigenvalues never allocates them.
    """

    interval: Interval
    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise InvalidArgumentError(f"mode count must be a positive integer, got {self.m}")

    @property
    def length(self):
        return self.interval.length

    @cached_property
    def lambdas(self):
        return eigenvalues(self.length, self.m)

    @cached_property
    def quadrature(self):
        # products w_j w_k need about 1.5 panels per mode for the 8-point rule
        return self.interval.with_min_panels(-(-3 * self.m // 2))

    @property
    def nodes(self):
        return self.quadrature.nodes

    @property
    def weights(self):
        return self.quadrature.weights

    @property
    def n_nodes(self):
        return self.quadrature.n_nodes

    @cached_property
    def node_values(self):
        return eigenfunctions(self.length, self.m, self.nodes)

    @cached_property
    def weighted_node_values(self):
        return self.node_values * self.weights[None, :]

    def gram(self):
        return self.weighted_node_values @ self.node_values.T

    def stiffness_gram(self):
        dw = eigenfunction_derivatives(self.length, self.m, self.nodes)
        return (dw * self.weights) @ dw.T

    def evaluate(self, d, x):
        """Evaluate the expansion sum_k d_k w_k at arbitrary points."""
        d = _coeffs(d, self)
        return d @ eigenfunctions(self.length, self.m, x)


def build_eigenbasis(interval, m):
    return EigenBasis(interval, m)


def _coeffs(d, basis):
    d = np.asarray(d, dtype=float)
    if d.ndim != 1 or d.size != basis.m:
        raise InvalidArgumentError(
            f"coefficient vector has shape {d.shape}, basis has {basis.m} modes"
        )
    return d


def _grid(u, basis):
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size != basis.n_nodes:
        raise InvalidArgumentError(
            f"grid function has shape {u.shape}, basis quadrature has {basis.n_nodes} nodes"
        )
    return u


def project(u, basis):
    """L2 projection coefficients (u, w_k) by quadrature."""
    u = _grid(u, basis)
    return basis.weighted_node_values @ u


def reconstruct(d, basis):
    return _coeffs(d, basis) @ basis.node_values


def sample(func, basis):
    """Evaluate a callable of x on the basis nodes, or pass an array through."""
    if func is None:
        return np.zeros(basis.n_nodes)
    if callable(func):
        values = np.asarray(func(basis.nodes), dtype=float)
        return np.broadcast_to(values, basis.nodes.shape).astype(float)
    return _grid(func, basis)


def norm(kind, d, basis, V=None):
    """Spectral or quadrature norm of a field.

    ``L2``, ``H10`` and ``Hminus1`` take a coefficient vector. ``weightedL2``
    computes (int V u^2)^(1/2) and accepts either coefficients or node values
    for ``d``; ``V`` is given at the nodes.
    """
    if kind == "L2":
        d = _coeffs(d, basis)
        return float(np.sqrt(np.sum(d**2)))
    if kind == "H10":
        d = _coeffs(d, basis)
        return float(np.sqrt(np.sum(basis.lambdas * d**2)))
    if kind == "Hminus1":
        d = _coeffs(d, basis)
        return float(np.sqrt(np.sum(d**2 / basis.lambdas)))
    if kind == "weightedL2":
        if V is None:
            raise InvalidArgumentError("weightedL2 norm needs the weight V")
        d = np.asarray(d, dtype=float)
        u = reconstruct(d, basis) if d.size == basis.m else _grid(d, basis)
        V = check_nonnegative(sample(V, basis))
        return float(np.sqrt(np.sum(basis.weights * V * u**2)))
    raise InvalidArgumentError(f"unknown norm kind {kind!r}; expected one of {NORM_KINDS}")


def h20_norm(d, basis):
    """||Delta u||_{L2} for an expansion, i.e. (sum lambda_k^2 d_k^2)^(1/2)."""
    d = _coeffs(d, basis)
    return float(np.sqrt(np.sum((basis.lambdas * d) ** 2)))


def check_nonnegative(V, what="V"):
    V = np.asarray(V, dtype=float)
    low = V.min() if V.size else 0.0
    if low < -NEGATIVE_TOL:
        raise NonnegativityError(f"{what} takes the negative value {low:.3e}; V >= 0 is required")
    return V
