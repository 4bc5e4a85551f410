"""Declarative problem files: a single JSON document describing moment
functions, the operator, the Cauchy data, and run parameters.

Orders and exact values are written as "p/q" strings so nothing is lost in
text form; plain integers are accepted too.  Float literals are only legal
in float mode.  Example:

    {
      "name": "heat",
      "moments": {
        "m0": {"kind": "gamma", "order": "1"},
        "m1": {"kind": "gamma", "order": "1"}
      },
      "operator": {
        "M": 1,
        "time_moment": "m0",
        "space_moments": ["m1"],
        "terms": [{"j": 0, "alpha": [2], "coeff": ["-1"]}]
      },
      "data": {
        "initial": [{"kind": "geometric", "ratio": "1"}],
        "forcing": {"kind": "zero"}
      },
      "run": {"n_max": 200, "report_degree": 0, "radius": "1/2",
              "fit_window": [50, 200], "mode": "exact", "precision_bits": 256}
    }
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional

from .moments import MomentFunction, combine, gamma_moment
from .operators import OperatorSpec, OperatorTerm, TimeSeries
from .precision import default_precision_bits
from .series import MultiSeries, generator_series, make_series, zero_series
from .solver import CauchyProblem


class SpecError(ValueError):
    """Malformed problem file; the message names the offending field."""


@dataclass(frozen=True)
class RunConfig:
    n_max: int
    report_degree: int
    precision_bits: int
    radius: Fraction
    fit_window: tuple
    mode: str


@dataclass(frozen=True)
class ProblemSpecFile:
    name: str
    operator: OperatorSpec
    initial_descriptors: tuple
    forcing_descriptor: dict
    run: RunConfig


def _fail(path: str, msg: str):
    raise SpecError(f"{path}: {msg}")


def _get(obj: dict, key: str, path: str, required: bool = True, default=None):
    if key not in obj:
        if required:
            _fail(path, f"missing field {key!r}")
        return default
    return obj[key]


def _parse_fraction(value, path: str) -> Fraction:
    if isinstance(value, bool):
        _fail(path, "expected a rational, got a boolean")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            _fail(path, f"cannot parse {value!r} as a rational ('p/q')")
    _fail(path, f"orders and exact values must be 'p/q' strings or integers, got {value!r}")


def _parse_value(value, mode: str, path: str):
    """A coefficient literal: rational text always; bare floats in float mode."""
    if isinstance(value, bool):
        _fail(path, "expected a number, got a boolean")
    if isinstance(value, (int, str)):
        return _parse_fraction(value, path)
    if isinstance(value, float):
        if mode != "float":
            _fail(path, "float literals are only allowed in float mode; use 'p/q'")
        return value
    _fail(path, f"cannot parse value {value!r}")


def _parse_moments(section: dict, path: str) -> dict:
    if not isinstance(section, dict):
        _fail(path, "must be an object of name -> declaration")
    resolved: dict = {}

    def resolve(name: str, trail: tuple) -> MomentFunction:
        if name in resolved:
            return resolved[name]
        if name in trail:
            _fail(path, f"cyclic moment declaration through {name!r}")
        if name not in section:
            _fail(path, f"reference to undeclared moment function {name!r}")
        decl = section[name]
        where = f"{path}.{name}"
        kind = _get(decl, "kind", where)
        if kind == "gamma":
            m = gamma_moment(_parse_fraction(_get(decl, "order", where), f"{where}.order"))
        elif kind in ("product", "quotient"):
            if "factors" in decl:
                names = decl["factors"]
            else:
                names = [_get(decl, "numerator", where), _get(decl, "denominator", where)]
            if len(names) != 2:
                _fail(where, "product/quotient needs exactly two operands")
            children = [resolve(n, trail + (name,)) for n in names]
            try:
                m = combine(children[0], children[1], kind)
            except ValueError as exc:
                _fail(where, str(exc))
        else:
            _fail(where, f"unknown moment kind {kind!r}")
        resolved[name] = m
        return m

    for name in section:
        resolve(name, ())
    return resolved


def _parse_operator(section: dict, moments: dict, mode: str, path: str) -> OperatorSpec:
    M = _get(section, "M", path)
    if not isinstance(M, int) or M < 1:
        _fail(f"{path}.M", f"M must be a positive integer, got {M!r}")
    tm_name = _get(section, "time_moment", path)
    if tm_name not in moments:
        _fail(f"{path}.time_moment", f"undeclared moment function {tm_name!r}")
    sm_names = _get(section, "space_moments", path)
    if not isinstance(sm_names, list) or not sm_names:
        _fail(f"{path}.space_moments", "must be a nonempty list of moment names")
    for nm in sm_names:
        if nm not in moments:
            _fail(f"{path}.space_moments", f"undeclared moment function {nm!r}")
    dim = len(sm_names)
    terms = []
    for i, t in enumerate(_get(section, "terms", path, required=False, default=[])):
        where = f"{path}.terms[{i}]"
        j = _get(t, "j", where)
        if not isinstance(j, int) or j < 0:
            _fail(f"{where}.j", f"j must be a nonnegative integer, got {j!r}")
        alpha = _get(t, "alpha", where)
        if not isinstance(alpha, list) or len(alpha) != dim:
            _fail(f"{where}.alpha", f"alpha must be a list of {dim} integers")
        coeff_raw = _get(t, "coeff", where)
        if not isinstance(coeff_raw, list) or not coeff_raw:
            _fail(f"{where}.coeff", "coeff must be a nonempty t-coefficient list")
        coeff = tuple(_parse_value(c, mode, f"{where}.coeff[{k}]")
                      for k, c in enumerate(coeff_raw))
        terms.append(OperatorTerm(
            j=j, alpha=tuple(alpha), coeff=coeff,
            truncated=bool(t.get("truncated", False)),
            ord_override=t.get("ord_override"),
        ))
    try:
        return OperatorSpec(M=M, m0=moments[tm_name],
                            m=tuple(moments[nm] for nm in sm_names), terms=tuple(terms))
    except ValueError as exc:
        _fail(path, str(exc))


def _parse_run(section: dict, path: str) -> RunConfig:
    n_max = _get(section, "n_max", path)
    if not isinstance(n_max, int) or n_max < 1:
        _fail(f"{path}.n_max", f"n_max must be a positive integer, got {n_max!r}")
    report_degree = section.get("report_degree", 0)
    if not isinstance(report_degree, int) or report_degree < 0:
        _fail(f"{path}.report_degree", "must be a nonnegative integer")
    mode = section.get("mode", "exact")
    if mode not in ("exact", "float"):
        _fail(f"{path}.mode", f"mode must be 'exact' or 'float', got {mode!r}")
    bits = section.get("precision_bits", default_precision_bits())
    if not isinstance(bits, int) or bits < 16:
        _fail(f"{path}.precision_bits", "must be an integer >= 16")
    radius = _parse_fraction(section.get("radius", "1/2"), f"{path}.radius")
    if radius <= 0:
        _fail(f"{path}.radius", "radius must be positive")
    window = section.get("fit_window")
    if window is None:
        window = [max(1, n_max // 4), n_max]
    if (not isinstance(window, list) or len(window) != 2
            or not all(isinstance(w, int) for w in window)):
        _fail(f"{path}.fit_window", "must be [lo, hi] with integer entries")
    return RunConfig(n_max=n_max, report_degree=report_degree, precision_bits=bits,
                     radius=radius, fit_window=(window[0], window[1]), mode=mode)


def parse_problem_file(path) -> ProblemSpecFile:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise SpecError(f"cannot read problem file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return parse_problem_document(doc)


def parse_problem_document(doc: dict) -> ProblemSpecFile:
    if not isinstance(doc, dict):
        raise SpecError("top level: problem file must be a JSON object")
    run = _parse_run(_get(doc, "run", "run"), "run")
    moments = _parse_moments(_get(doc, "moments", "moments"), "moments")
    operator = _parse_operator(_get(doc, "operator", "operator"), moments, run.mode, "operator")
    data = _get(doc, "data", "data")
    initial = _get(data, "initial", "data")
    if not isinstance(initial, list) or len(initial) != operator.M:
        _fail("data.initial", f"need exactly M = {operator.M} initial series")
    forcing = _get(data, "forcing", "data", required=False, default={"kind": "zero"})
    return ProblemSpecFile(
        name=str(doc.get("name", "problem")),
        operator=operator,
        initial_descriptors=tuple(initial),
        forcing_descriptor=forcing,
        run=run,
    )


def _materialize_generator(desc: dict, dim: int, degree: int, mode: str, path: str) -> MultiSeries:
    kind = _get(desc, "kind", path)
    if kind == "zero":
        return zero_series(dim, degree, mode)
    if kind == "geometric":
        ratio = _parse_value(_get(desc, "ratio", path), mode, f"{path}.ratio")
        return generator_series("geometric", dim, degree, mode, ratio=ratio)
    if kind == "polynomial":
        coeffs = [_parse_value(c, mode, f"{path}.coeffs[{k}]")
                  for k, c in enumerate(_get(desc, "coeffs", path))]
        if len(coeffs) - 1 > degree:
            _fail(f"{path}.coeffs", f"polynomial degree exceeds the budget {degree}")
        return generator_series("polynomial", dim, degree, mode, coeffs=coeffs)
    if kind == "gevrey_factorial":
        sigma = _parse_fraction(_get(desc, "sigma", path), f"{path}.sigma")
        return generator_series("gevrey_factorial", dim, degree, mode, sigma=sigma)
    if kind == "terms":
        table = {}
        for k, entry in enumerate(_get(desc, "terms", path)):
            where = f"{path}.terms[{k}]"
            alpha = tuple(_get(entry, "alpha", where))
            if len(alpha) != dim:
                _fail(f"{where}.alpha", f"alpha must have {dim} entries")
            if sum(alpha) > degree:
                _fail(f"{where}.alpha", f"index {alpha} exceeds the degree budget {degree}")
            table[alpha] = _parse_value(_get(entry, "value", where), mode, f"{where}.value")
        return make_series(dim, table, degree, mode)
    _fail(path, f"unknown series kind {kind!r}")


def _materialize_forcing(desc: dict, dim: int, n_top: int, degree: int, mode: str,
                         path: str) -> TimeSeries:
    kind = _get(desc, "kind", path)
    if kind == "zero":
        return TimeSeries(tuple(zero_series(dim, degree, mode) for _ in range(n_top + 1)))
    if kind == "time_geometric":
        ratio = _parse_value(_get(desc, "ratio", path), mode, f"{path}.ratio")
        space_desc = desc.get("space", {"kind": "terms",
                                        "terms": [{"alpha": [0] * dim, "value": "1"}]})
        space = _materialize_generator(space_desc, dim, degree, mode, f"{path}.space")
        from .series import series_scale

        out = []
        scale = _parse_value("1", mode, path)
        for _ in range(n_top + 1):
            out.append(series_scale(space, scale))
            scale = scale * ratio
        return TimeSeries(tuple(out))
    if kind == "terms":
        tables: dict = {}
        for k, entry in enumerate(_get(desc, "terms", path)):
            where = f"{path}.terms[{k}]"
            n = _get(entry, "n", where)
            if not isinstance(n, int) or n < 0:
                _fail(f"{where}.n", "n must be a nonnegative integer")
            if n > n_top:
                continue
            alpha = tuple(_get(entry, "alpha", where))
            tables.setdefault(n, {})[alpha] = _parse_value(
                _get(entry, "value", where), mode, f"{where}.value")
        out = []
        for n in range(n_top + 1):
            out.append(make_series(dim, tables.get(n, {}), degree, mode))
        return TimeSeries(tuple(out))
    _fail(path, f"unknown forcing kind {kind!r}")


def materialize_problem(spec_file: ProblemSpecFile,
                        run: Optional[RunConfig] = None) -> tuple:
    """Build the CauchyProblem with the degree budget the run demands.

    Initial data are materialized to report_degree + n_max * max|alpha|, the
    forcing to the degrees its later use requires; returns (problem, run).
    """
    run = run or spec_file.run
    op = spec_file.operator
    dim = op.dim
    a_max = op.max_alpha
    full_degree = run.report_degree + run.n_max * a_max
    initial = tuple(
        _materialize_generator(desc, dim, full_degree, run.mode, f"data.initial[{j}]")
        for j, desc in enumerate(spec_file.initial_descriptors)
    )
    n_top = max(0, run.n_max - op.M)
    forcing_degree = run.report_degree + n_top * a_max
    forcing = _materialize_forcing(spec_file.forcing_descriptor, dim, n_top,
                                   forcing_degree, run.mode, "data.forcing")
    problem = CauchyProblem(spec=op, initial=initial, forcing=forcing)
    return problem, run


def override_run(run: RunConfig, *, n_max=None, report_degree=None, precision_bits=None,
                 radius=None, mode=None, fit_window=None) -> RunConfig:
    updates = {}
    if n_max is not None:
        updates["n_max"] = n_max
    if report_degree is not None:
        updates["report_degree"] = report_degree
    if precision_bits is not None:
        updates["precision_bits"] = precision_bits
    if radius is not None:
        updates["radius"] = Fraction(radius)
    if mode is not None:
        updates["mode"] = mode
    if fit_window is not None:
        updates["fit_window"] = tuple(fit_window)
    cfg = replace(run, **updates)
    if cfg.fit_window[1] > cfg.n_max:
        cfg = replace(cfg, fit_window=(max(1, cfg.n_max // 4), cfg.n_max))
    return cfg
