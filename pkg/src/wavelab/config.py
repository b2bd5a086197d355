"""Experiment configuration: a JSON or YAML key-value tree with a fixed schema.

Every schema problem raises ``SchemaError`` carrying the dotted field path
and, when it can be located, the line in the source file.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import yaml

from . import catalog
from .corpus import random_problem
from .lifting import BoundaryData
from .singular import SHAPES, DistributionSpec, Mollifier, default_eps_grid, dirac, smooth
from .vws import DATA_NAMES, VwsProblem

SCHEMA_VERSION = 1
EXPERIMENTS = ("solve", "verify-energy", "lift-solve", "sweep-existence",
               "sweep-uniqueness", "sweep-consistency", "oracle-compare")

TOP_KEYS = {"schema_version", "name", "experiment", "problem", "eps", "mollifiers",
            "alt_mollifiers", "regularize", "modes_per_inverse_eps", "quadrature",
            "oracle", "tolerances"}
PROBLEM_KEYS = {"length", "T", "dt", "m", "V", "u0", "u1", "f", "boundary", "random_seed"}
SPACE_KINDS = ("zero", "const", "poly", "sin", "mode", "bubble", "linear_lift")
TIME_KINDS = ("zero", "const", "sin", "cos", "poly")


class SchemaError(Exception):
    def __init__(self, path, message, line=None):
        self.path, self.line = path, line
        where = f"line {line}, " if line is not None else ""
        super().__init__(f"{where}field '{path or '<root>'}': {message}")


@dataclass(frozen=True)
class OracleSettings:
    nx: int = 400
    dt: float = 2.5e-4
    checkpoints: tuple = (1.0,)


@dataclass(frozen=True)
class ExperimentConfig:
    """A parsed configuration; ``raw`` is the echo written into reports."""

    name: str
    experiment: str | None
    problem: VwsProblem
    raw: dict
    eps_value: float | None = None
    alt_mollifiers: dict = field(default_factory=dict)
    oracle: OracleSettings = field(default_factory=OracleSettings)
    tolerances: dict = field(default_factory=dict)
    random_seed: int | None = None


class _Locator:
    """Maps dotted field paths to 1-based source lines via the YAML node tree."""

    def __init__(self, text):
        try:
            self.root = yaml.compose(text)
        except yaml.YAMLError:
            self.root = None

    def line(self, path):
        node = self.root
        if node is None:
            return None
        line = node.start_mark.line + 1
        for part in _split(path):
            if isinstance(node, yaml.MappingNode):
                match = [v for k, v in node.value if k.value == part]
                if not match:
                    break
                key = [k for k, v in node.value if k.value == part][0]
                node, line = match[0], key.start_mark.line + 1
            elif isinstance(node, yaml.SequenceNode) and isinstance(part, int) and part < len(node.value):
                node = node.value[part]
                line = node.start_mark.line + 1
            else:
                break
        return line


def _split(path):
    parts = []
    for token in path.replace("]", "").replace("[", ".").split("."):
        if token:
            parts.append(int(token) if token.isdigit() else token)
    return parts


class _Reader:
    def __init__(self, locator):
        self.locator = locator

    def fail(self, path, message):
        raise SchemaError(path, message, self.locator.line(path))

    def mapping(self, value, path, allowed):
        if value is None:
            return {}
        if not isinstance(value, dict):
            self.fail(path, "expected a mapping")
        unknown = sorted(set(value) - set(allowed))
        if unknown:
            self.fail(f"{path}.{unknown[0]}" if path else unknown[0], f"unknown key (allowed: {sorted(allowed)})")
        return value

    def number(self, value, path, positive=False, default=None):
        if value is None:
            if default is None:
                self.fail(path, "required number is missing")
            return default
        if value == "pi":
            value = math.pi
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, f"expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            self.fail(path, "number must be finite")
        if positive and value <= 0:
            self.fail(path, "number must be positive")
        return value

    def integer(self, value, path, minimum=1, default=None):
        if value is None:
            if default is None:
                self.fail(path, "required integer is missing")
            return default
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(path, f"expected an integer, got {value!r}")
        if value < minimum:
            self.fail(path, f"integer must be at least {minimum}")
        return value

    def time_function(self, entry, path):
        if entry is None:
            return catalog.ZERO_T
        kinds = {"zero": set(), "const": {"c", "value"}, "sin": {"amp", "omega", "phase"},
                 "cos": {"amp", "omega", "phase"}, "poly": {"coeffs"}}
        entry = self._kind_entry(entry, path, kinds)
        for key, val in entry.items():
            if key == "coeffs":
                self._coeff_list(val, f"{path}.coeffs")
            elif key != "kind":
                self.number(val, f"{path}.{key}")
        return catalog.time_function(entry)

    def _coeff_list(self, val, path):
        if not isinstance(val, list) or not val:
            self.fail(path, "expected a non-empty list of numbers")
        for i, c in enumerate(val):
            self.number(c, f"{path}[{i}]")

    def _kind_entry(self, entry, path, kinds):
        if not isinstance(entry, dict):
            self.fail(path, "expected a mapping with a 'kind' tag")
        kind = entry.get("kind")
        if kind not in kinds:
            self.fail(f"{path}.kind", f"unknown kind {kind!r} (allowed: {sorted(kinds)})")
        self.mapping(entry, path, kinds[kind] | {"kind"})
        return dict(entry)

    def datum(self, entry, path, length, as_potential=False):
        if entry is None:
            return DistributionSpec()
        kinds = {"zero": set(), "const": {"c", "value"}, "poly": {"coeffs"},
                 "sin": {"offset", "amp", "omega", "phase"}, "mode": {"k", "amp"}, "bubble": {"amp"},
                 "linear_lift": {"a", "b"}, "dirac": {"x0", "x0_over_L", "weight"}, "sum": {"terms"}}
        entry = self._kind_entry(entry, path, kinds)
        kind = entry["kind"]
        if kind == "sum":
            terms = entry.get("terms")
            if not isinstance(terms, list) or not terms:
                self.fail(f"{path}.terms", "expected a non-empty list of data")
            parts = [self.datum(t, f"{path}.terms[{i}]", length, as_potential) for i, t in enumerate(terms)]
            smooth_parts = [p.smooth for p in parts if p.smooth is not None]
            diracs = sum((p.diracs for p in parts), ())
            fn = None
            if smooth_parts:
                fn = smooth_parts[0] if len(smooth_parts) == 1 else catalog.sum_x(*smooth_parts, length=length)
            return DistributionSpec(fn, diracs)
        if kind == "dirac":
            if ("x0" in entry) == ("x0_over_L" in entry):
                self.fail(path, "give exactly one of 'x0' and 'x0_over_L'")
            if "x0" in entry:
                x0 = self.number(entry["x0"], f"{path}.x0")
            else:
                x0 = length * self.number(entry["x0_over_L"], f"{path}.x0_over_L")
            if not 0 < x0 < length:
                self.fail(path, f"dirac location {x0} is not inside (0, {length})")
            weight = self.number(entry.get("weight"), f"{path}.weight", default=1.0)
            if as_potential and weight < 0:
                self.fail(f"{path}.weight", "potential weights must be nonnegative")
            return dirac(x0, weight)
        for key, val in entry.items():
            if key == "coeffs":
                self._coeff_list(val, f"{path}.coeffs")
            elif key == "k":
                self.integer(val, f"{path}.k")
            elif key != "kind":
                self.number(val, f"{path}.{key}")
        return smooth(catalog.space_function(entry, length))


def _eps_section(reader, raw):
    sec = reader.mapping(raw, "eps", {"grid", "j_min", "j_max", "value"})
    value = None
    if "value" in sec:
        value = reader.number(sec["value"], "eps.value", positive=True)
        if value > 1:
            reader.fail("eps.value", "eps must lie in (0, 1]")
    if "grid" in sec:
        if "j_min" in sec or "j_max" in sec:
            reader.fail("eps.grid", "give either 'grid' or 'j_min'/'j_max'")
        grid = sec["grid"]
        if not isinstance(grid, list) or len(grid) < 3:
            reader.fail("eps.grid", "expected a list of at least 3 values")
        grid = [reader.number(e, f"eps.grid[{i}]", positive=True) for i, e in enumerate(grid)]
        if any(e > 1 for e in grid) or any(b >= a for a, b in zip(grid, grid[1:])):
            reader.fail("eps.grid", "values must lie in (0, 1] and strictly decrease")
        return tuple(grid), value
    j_min = reader.integer(sec.get("j_min"), "eps.j_min", minimum=0, default=3)
    j_max = reader.integer(sec.get("j_max"), "eps.j_max", minimum=0, default=10)
    if j_max - j_min < 2:
        reader.fail("eps.j_max", "the grid needs at least 3 points (j_max >= j_min + 2)")
    return tuple(float(e) for e in default_eps_grid(j_min, j_max)), value


def _mollifier_section(reader, raw, path):
    sec = reader.mapping(raw, path, set(DATA_NAMES))
    out = {}
    for name, shape in sec.items():
        if shape not in SHAPES:
            reader.fail(f"{path}.{name}", f"unknown mollifier {shape!r} (allowed: {list(SHAPES)})")
        out[name] = Mollifier(shape)
    return out


def parse_config(data, text=""):
    """Validate a loaded tree and build the experiment configuration."""
    reader = _Reader(_Locator(text))
    top = reader.mapping(data, "", TOP_KEYS)
    if top.get("schema_version") != SCHEMA_VERSION:
        reader.fail("schema_version", f"expected schema_version {SCHEMA_VERSION}, got {top.get('schema_version')!r}")
    name = top.get("name")
    if not isinstance(name, str) or not name or any(c in name for c in "/\\") or name.startswith("."):
        reader.fail("name", "expected a plain non-empty file stem")
    experiment = top.get("experiment")
    if experiment is not None and experiment not in EXPERIMENTS:
        reader.fail("experiment", f"unknown experiment {experiment!r}")

    prob = reader.mapping(top.get("problem"), "problem", PROBLEM_KEYS)
    length = reader.number(prob.get("length"), "problem.length", positive=True, default=math.pi)
    T = reader.number(prob.get("T"), "problem.T", positive=True, default=1.0)
    dt = reader.number(prob.get("dt"), "problem.dt", positive=True, default=1e-3)
    m = reader.integer(prob.get("m"), "problem.m", default=64)

    seed = None
    if "random_seed" in prob:
        seed = reader.integer(prob["random_seed"], "problem.random_seed", minimum=0)
        clash = sorted({"V", "u0", "u1", "f"} & set(prob))
        if clash:
            reader.fail(f"problem.{clash[0]}", "data are generated when random_seed is set")
        rp = random_problem(seed, length)
        V, u0, u1 = smooth(rp.V), smooth(rp.u0), smooth(rp.u1)
        f_terms = tuple((a, smooth(phi)) for a, phi in rp.f_terms)
    else:
        V = reader.datum(prob.get("V"), "problem.V", length, as_potential=True)
        u0 = reader.datum(prob.get("u0"), "problem.u0", length)
        u1 = reader.datum(prob.get("u1"), "problem.u1", length)
        f_raw = prob.get("f") or []
        if not isinstance(f_raw, list):
            reader.fail("problem.f", "expected a list of {time, space} terms")
        f_terms = []
        for i, term in enumerate(f_raw):
            term = reader.mapping(term, f"problem.f[{i}]", {"time", "space"})
            f_terms.append((reader.time_function(term.get("time", {"kind": "const", "c": 1.0}), f"problem.f[{i}].time"),
                            reader.datum(term.get("space"), f"problem.f[{i}].space", length)))
        f_terms = tuple(f_terms)

    bsec = reader.mapping(prob.get("boundary"), "problem.boundary", {"g0", "g1"})
    bdata = BoundaryData(reader.time_function(bsec.get("g0"), "problem.boundary.g0"),
                         reader.time_function(bsec.get("g1"), "problem.boundary.g1"))

    eps_grid, eps_value = _eps_section(reader, top.get("eps"))
    mollifiers = _mollifier_section(reader, top.get("mollifiers"), "mollifiers")
    alt = _mollifier_section(reader, top.get("alt_mollifiers"), "alt_mollifiers")
    regularize = top.get("regularize") or []
    if not isinstance(regularize, list) or any(r not in DATA_NAMES for r in regularize):
        reader.fail("regularize", f"expected a list drawn from {list(DATA_NAMES)}")
    kappa = top.get("modes_per_inverse_eps")
    if kappa is not None:
        kappa = reader.number(kappa, "modes_per_inverse_eps", positive=True)
    quad = reader.mapping(top.get("quadrature"), "quadrature", {"panels", "order"})

    osec = reader.mapping(top.get("oracle"), "oracle", {"nx", "dt", "checkpoints"})
    checkpoints = osec.get("checkpoints", [T])
    if not isinstance(checkpoints, list) or not checkpoints:
        reader.fail("oracle.checkpoints", "expected a non-empty list of times")
    checkpoints = tuple(reader.number(c, f"oracle.checkpoints[{i}]") for i, c in enumerate(checkpoints))
    if any(not 0 <= c <= T for c in checkpoints):
        reader.fail("oracle.checkpoints", f"checkpoints must lie in [0, {T}]")
    oracle = OracleSettings(reader.integer(osec.get("nx"), "oracle.nx", minimum=8, default=400),
                            reader.number(osec.get("dt"), "oracle.dt", positive=True, default=2.5e-4),
                            checkpoints)

    tol_raw = top.get("tolerances") or {}
    if not isinstance(tol_raw, dict):
        reader.fail("tolerances", "expected a mapping of tolerance names to numbers")
    tolerances = {k: reader.number(v, f"tolerances.{k}") for k, v in tol_raw.items()}

    try:
        problem = VwsProblem(V=V, u0=u0, u1=u1, f=f_terms, bdata=bdata, length=length, T=T, dt=dt, m=m,
                             eps_grid=eps_grid, mollifiers=mollifiers, regularize_smooth=frozenset(regularize),
                             modes_per_inverse_eps=kappa,
                             quad_panels=reader.integer(quad.get("panels"), "quadrature.panels", default=64),
                             quad_order=reader.integer(quad.get("order"), "quadrature.order", default=8))
    except ValueError as exc:
        reader.fail("problem", str(exc))
    return ExperimentConfig(name, experiment, problem, data, eps_value, alt, oracle, tolerances, seed)


def load_config(path):
    """Read a .json, .yaml or .yml file; raise SchemaError with a line on parse failure."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if str(path).endswith(".json"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SchemaError("", f"invalid JSON: {exc.msg}", exc.lineno) from None
    else:
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            raise SchemaError("", f"invalid YAML: {getattr(exc, 'problem', exc)}",
                              mark.line + 1 if mark else None) from None
    return parse_config(data, text)
