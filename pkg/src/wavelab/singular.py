"""Mollifiers, regularisation of singular data and log-log net fits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import BoundaryClippingError, InvalidArgumentError, NonnegativityError
from .spectral_core import project

SHAPES = ("standard_bump", "triangle", "quadratic_spline")

# Reference-panel edges on [-1, 1]: multiples of 1/24 contain the kinks of
# every shape (0 for the triangle, +-1/3 for the quadratic spline). The bump's
# flat edges need 48 panels for a unit mass to 1e-12.
SUPPORT_PANELS = 48


def _bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def _triangle(s):
    return np.maximum(1.0 - np.abs(np.asarray(s, dtype=float)), 0.0)


def _quadratic_spline(s):
    # uniform quadratic B-spline with knots -1, -1/3, 1/3, 1
    u = 1.5 * (np.asarray(s, dtype=float) + 1.0)
    out = np.zeros_like(u)
    a = (u >= 0) & (u < 1)
    b = (u >= 1) & (u < 2)
    c = (u >= 2) & (u <= 3)
    out[a] = 0.5 * u[a] ** 2
    out[b] = 0.5 * (-2.0 * u[b] ** 2 + 6.0 * u[b] - 3.0)
    out[c] = 0.5 * (3.0 - u[c]) ** 2
    return out


_PROFILES = {"standard_bump": _bump, "triangle": _triangle, "quadratic_spline": _quadratic_spline}


@lru_cache(maxsize=None)
def _mass(shape):
    profile = _PROFILES[shape]
    points = [-1 / 3, 0.0, 1 / 3]
    value, _ = quad(lambda s: float(profile(np.array([s]))[0]), -1.0, 1.0,
                    points=points, epsabs=1e-15, epsrel=1e-13, limit=200)
    return value


@dataclass(frozen=True)
class Mollifier:
    """Even, nonnegative, unit-mass profile supported in [-1, 1]."""

    shape: str = "standard_bump"

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise InvalidArgumentError(f"unknown mollifier shape {self.shape!r}; expected one of {SHAPES}")

    @property
    def normalization(self):
        return 1.0 / _mass(self.shape)

    def __call__(self, s):
        return self.normalization * _PROFILES[self.shape](s)

    def reference_rule(self, panels=SUPPORT_PANELS, order=8):
        g, w = np.polynomial.legendre.leggauss(order)
        edges = np.linspace(-1.0, 1.0, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        s = (mid[:, None] + half[:, None] * g).ravel()
        ws = (half[:, None] * w).ravel()
        return s, ws * self(s)

    def cosine_transform(self, xi):
        """int psi(s) cos(xi s) ds for an array of frequencies."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        panels = SUPPORT_PANELS * max(1, int(math.ceil(np.max(np.abs(xi), initial=0.0) / 24.0)))
        s, ws = self.reference_rule(panels)
        out = np.empty(xi.size)
        for start in range(0, xi.size, 512):
            chunk = xi[start:start + 512]
            out[start:start + 512] = np.cos(np.outer(chunk, s)) @ ws
        return out


def mollifier_eval(psi, eps, x0, x):
    """psi_eps(x - x0) = psi((x - x0)/eps)/eps."""
    if not (eps > 0):
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    return psi((np.asarray(x, dtype=float) - x0) / eps) / eps


@dataclass(frozen=True)
class DistributionSpec:
    """A datum made of an optional smooth part and weighted Dirac masses.

    ``smooth`` is a callable of x defined on a neighbourhood of [0, L]
    (its closed form is used outside the interval when mollifying).
    """

    smooth: object = None
    diracs: tuple = ()

    def __add__(self, other):
        if self.smooth is None:
            smooth = other.smooth
        elif other.smooth is None:
            smooth = self.smooth
        else:
            a, b = self.smooth, other.smooth
            smooth = _SumFunction(a, b)
        return DistributionSpec(smooth, self.diracs + other.diracs)

    @property
    def is_smooth(self):
        return not self.diracs

    @property
    def is_zero(self):
        smooth_zero = self.smooth is None or getattr(self.smooth, "is_zero", False)
        return smooth_zero and all(w == 0 for _, w in self.diracs)

    def validate(self, length, as_potential=False):
        for x0, weight in self.diracs:
            if not (0 < x0 < length):
                raise InvalidArgumentError(f"dirac location {x0} is not inside (0, {length})")
            if as_potential and weight < 0:
                raise NonnegativityError(f"dirac weight {weight} < 0 in a potential")
        return self


@dataclass(frozen=True)
class _SumFunction:
    a: object
    b: object

    def __call__(self, x):
        return self.a(x) + self.b(x)


def smooth(func):
    return DistributionSpec(smooth=func)


def dirac(x0, weight=1.0):
    return DistributionSpec(diracs=((float(x0), float(weight)),))


def zero_spec():
    return DistributionSpec()


def _check_support(x0, eps, length):
    if x0 - eps <= 0 or x0 + eps >= length:
        raise BoundaryClippingError(
            f"mollified dirac at {x0} with eps = {eps} reaches the boundary of (0, {length})"
        )


def convolve(func, psi, eps, x, length=None, extension="natural"):
    """(func * psi_eps)(x) by a fixed rule on the mollifier support.

    ``extension='zero'`` extends ``func`` by zero outside (0, length)
    before convolving; ``'natural'`` uses its closed form there.
    """
    x = np.asarray(x, dtype=float)
    s, ws = psi.reference_rule()
    y = x[:, None] - eps * s[None, :]
    values = np.asarray(func(y.ravel()), dtype=float).reshape(y.shape)
    if extension == "zero":
        if length is None:
            raise InvalidArgumentError("zero extension needs the interval length")
        values = np.where((y > 0) & (y < length), values, 0.0)
    elif extension != "natural":
        raise InvalidArgumentError(f"unknown extension {extension!r}")
    return values @ ws


def regularize_at(spec, psi, eps, x, length, mollify_smooth=True, extension="natural"):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    if spec.smooth is not None:
        if mollify_smooth:
            out = out + convolve(spec.smooth, psi, eps, x, length, extension)
        else:
            out = out + np.broadcast_to(np.asarray(spec.smooth(x), dtype=float), x.shape)
    for x0, weight in spec.diracs:
        _check_support(x0, eps, length)
        if weight != 0:
            out = out + weight * mollifier_eval(psi, eps, x0, x)
    return out


def regularize(spec, psi, eps, domain, mollify_smooth=True, extension="natural"):
    """Mollified datum at the quadrature nodes of ``domain`` (Interval or EigenBasis)."""
    if not (eps > 0):
        raise InvalidArgumentError(f"eps must be positive, got {eps}")
    return regularize_at(spec, psi, eps, domain.nodes, domain.length, mollify_smooth, extension)


def sup_norm(spec, psi, eps, domain, mollify_smooth=True):
    """Sup of the regularised datum over the nodes and the Dirac centres."""
    points = np.concatenate([domain.nodes, [x0 for x0, _ in spec.diracs]])
    values = regularize_at(spec, psi, eps, points, domain.length, mollify_smooth)
    return float(np.max(np.abs(values), initial=0.0))


def refine_for(interval, spec, eps):
    """Add support panels around every Dirac centre of ``spec``."""
    for x0, _ in spec.diracs:
        _check_support(x0, eps, interval.length)
        interval = interval.refined(x0, eps, SUPPORT_PANELS)
    return interval


def project_distribution(spec, psi, eps, basis, mollify_smooth=True):
    """Eigen-coefficients of the regularised datum.

    Dirac parts use (psi_eps(. - x0), w_k) = sqrt(2/L) sin(k pi x0/L) psihat(k pi eps/L),
    exact up to the reference rule; only smooth parts touch the node tables.
    """
    L = basis.length
    d = np.zeros(basis.m)
    if spec.smooth is not None and not getattr(spec.smooth, "is_zero", False):
        values = regularize_at(DistributionSpec(spec.smooth), psi, eps, basis.nodes, L, mollify_smooth)
        d = d + project(values, basis)
    k = np.arange(1, basis.m + 1)
    for x0, weight in spec.diracs:
        _check_support(x0, eps, L)
        if weight == 0:
            continue
        d = d + weight * math.sqrt(2.0 / L) * np.sin(k * np.pi * x0 / L) * psi.cosine_transform(k * np.pi * eps / L)
    return d


@dataclass(frozen=True)
class FitReport:
    """Least-squares fit log(norm) = logC - N log(eps).

    Positive N means the net grows like eps^-N (moderate with that order);
    negative N means it decays like eps^|N|.
    """

    eps_grid: np.ndarray
    norm_values: np.ndarray
    fitted_N: float
    fitted_logC: float
    r_squared: float
    identically_zero: bool = False

    @property
    def decay_slope(self):
        return -self.fitted_N


def validate_eps_grid(eps_grid, min_points=3):
    eps = np.asarray(eps_grid, dtype=float)
    if eps.ndim != 1 or eps.size < min_points:
        raise InvalidArgumentError(f"eps grid needs at least {min_points} points")
    if np.any(eps <= 0) or np.any(eps > 1):
        raise InvalidArgumentError("eps values must lie in (0, 1]")
    if np.any(np.diff(eps) >= 0):
        raise InvalidArgumentError("eps grid must be strictly decreasing")
    return eps


def default_eps_grid(j_min=3, j_max=10):
    return 2.0 ** -np.arange(j_min, j_max + 1)


def loglog_fit(eps_grid, norm_values):
    eps = validate_eps_grid(eps_grid)
    norms = np.asarray(norm_values, dtype=float)
    if norms.shape != eps.shape:
        raise InvalidArgumentError("eps grid and norms differ in length")
    if np.all(norms == 0):
        return FitReport(eps, norms, -math.inf, -math.inf, 1.0, identically_zero=True)
    if np.any(norms <= 0) or not np.all(np.isfinite(norms)):
        raise InvalidArgumentError("norms must be positive and finite (or all zero)")
    X = np.column_stack([np.ones_like(eps), -np.log(eps)])
    y = np.log(norms)
    (logC, N), *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ np.array([logC, N])
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    # a flat net is fitted exactly by N = 0
    r2 = 1.0 if ss_tot <= 1e-30 * max(1.0, float(np.sum(y**2))) else 1.0 - ss_res / ss_tot
    return FitReport(eps, norms, float(N), float(logC), float(min(max(r2, 0.0), 1.0)))
