"""Closed-form function catalog used by configs, corpora and tests.

Time functions know their derivatives in closed form, which is what the
lifting (g, g', g'') and the differentiated problem (f_t) need.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError


@dataclass(frozen=True)
class TimeFunction:
    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in TIME_KINDS:
            raise InvalidArgumentError(f"unknown time function {self.kind!r}")

    def __call__(self, t):
        p = self.params
        if self.kind == "zero":
            return 0.0 * np.asarray(t, dtype=float)
        if self.kind == "const":
            return p[0] + 0.0 * np.asarray(t, dtype=float)
        if self.kind == "sin":
            amp, omega, phase = p
            return amp * np.sin(omega * np.asarray(t, dtype=float) + phase)
        if self.kind == "poly":
            return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), p)
        raise AssertionError(self.kind)

    def derivative(self):
        p = self.params
        if self.kind in ("zero", "const"):
            return ZERO_T
        if self.kind == "sin":
            amp, omega, phase = p
            return TimeFunction("sin", (amp * omega, omega, phase + np.pi / 2))
        coeffs = tuple(float(c) for c in np.polynomial.polynomial.polyder(p)) if len(p) > 1 else ()
        return TimeFunction("poly", coeffs) if coeffs else ZERO_T

    @property
    def is_zero(self):
        if self.kind == "zero":
            return True
        if self.kind in ("const", "poly"):
            return all(c == 0 for c in self.params)
        return self.params[0] == 0


TIME_KINDS = ("zero", "const", "sin", "poly")
ZERO_T = TimeFunction("zero")


def const_t(c):
    return TimeFunction("const", (float(c),))


def sin_t(amp=1.0, omega=1.0, phase=0.0):
    return TimeFunction("sin", (float(amp), float(omega), float(phase)))


def cos_t(amp=1.0, omega=1.0):
    return sin_t(amp, omega, np.pi / 2)


def poly_t(*coeffs):
    return TimeFunction("poly", tuple(float(c) for c in coeffs))


def time_function(entry):
    """Build a TimeFunction from a config entry like ``{"kind": "sin", "omega": 2}``."""
    entry = dict(entry)
    kind = entry.pop("kind", None)
    if kind == "zero":
        return ZERO_T
    if kind == "const":
        return const_t(entry.pop("c", entry.pop("value", 0.0)))
    if kind == "sin":
        return sin_t(entry.pop("amp", 1.0), entry.pop("omega", 1.0), entry.pop("phase", 0.0))
    if kind == "cos":
        return sin_t(entry.pop("amp", 1.0), entry.pop("omega", 1.0), np.pi / 2 + entry.pop("phase", 0.0))
    if kind == "poly":
        return poly_t(*entry.pop("coeffs"))
    raise InvalidArgumentError(f"unknown time function kind {kind!r}")


# Smooth spatial functions. Each is a picklable callable of x that keeps
# its natural closed-form extension outside (0, L); mollification uses it.

@dataclass(frozen=True)
class SpaceFunction:
    kind: str
    params: tuple = ()
    length: float = np.pi

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        p = self.params
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "const":
            return np.full_like(x, p[0])
        if self.kind == "poly":
            return np.polynomial.polynomial.polyval(x, p)
        if self.kind == "sin":
            offset, amp, omega, phase = p
            return offset + amp * np.sin(omega * x + phase)
        if self.kind == "mode":
            k, amp = p
            return amp * np.sqrt(2.0 / self.length) * np.sin(k * np.pi * x / self.length)
        if self.kind == "bubble":
            return p[0] * x * (self.length - x)
        if self.kind == "linear_lift":
            # a (1 - x/L) + b x/L
            a, b = p
            return a * (1.0 - x / self.length) + b * x / self.length
        if self.kind == "sum":
            return sum(term(x) for term in p)
        if self.kind == "scaled":
            c, inner = p
            return c * inner(x)
        raise InvalidArgumentError(f"unknown space function {self.kind!r}")

    @property
    def is_zero(self):
        if self.kind == "zero":
            return True
        if self.kind == "sum":
            return all(term.is_zero for term in self.params)
        return False


SPACE_KINDS = ("zero", "const", "poly", "sin", "mode", "bubble", "linear_lift", "sum")


def zero_x(length=np.pi):
    return SpaceFunction("zero", (), length)


def const_x(c, length=np.pi):
    return SpaceFunction("const", (float(c),), length)


def poly_x(*coeffs, length=np.pi):
    return SpaceFunction("poly", tuple(float(c) for c in coeffs), length)


def sin_x(offset=0.0, amp=1.0, omega=1.0, phase=0.0, length=np.pi):
    return SpaceFunction("sin", (float(offset), float(amp), float(omega), float(phase)), length)


def mode_x(k, amp=1.0, length=np.pi):
    return SpaceFunction("mode", (int(k), float(amp)), length)


def bubble_x(amp=1.0, length=np.pi):
    return SpaceFunction("bubble", (float(amp),), length)


def sum_x(*terms, length=np.pi):
    return SpaceFunction("sum", tuple(terms), length)


def space_function(entry, length):
    entry = dict(entry)
    kind = entry.pop("kind", None)
    if kind == "zero":
        return zero_x(length)
    if kind == "const":
        return const_x(entry.pop("c", entry.pop("value", 0.0)), length)
    if kind == "poly":
        return poly_x(*entry.pop("coeffs"), length=length)
    if kind == "sin":
        return sin_x(entry.pop("offset", 0.0), entry.pop("amp", 1.0),
                     entry.pop("omega", 1.0), entry.pop("phase", 0.0), length)
    if kind == "mode":
        return mode_x(entry.pop("k"), entry.pop("amp", 1.0), length)
    if kind == "bubble":
        return bubble_x(entry.pop("amp", 1.0), length)
    if kind == "linear_lift":
        return SpaceFunction("linear_lift", (float(entry.pop("a", 0.0)), float(entry.pop("b", 0.0))), length)
    raise InvalidArgumentError(f"unknown space function kind {kind!r}")
