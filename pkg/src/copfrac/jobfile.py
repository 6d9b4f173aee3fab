"""JSON job files: parsing, validation and sweep expansion.

Everything here runs before any integration, so a bad file fails fast with
the dotted path of the offending field.

Schema (version 1)::

    {
      "schema_version": 1,
      "jobs": [
        {
          "kind": "ccfi",
          "eta": 0.5,
          "true": {"copula": {"family": "gumbel", "theta": 2},
                   "margins": [{"family": "exponential", "rate": 1}, ...]},
          "reference": {"copula": {...}, "margins": [...]},
          "integration": {"method": "gauss_legendre", "nodes": 64,
                          "samples": 1000000, "seed": 42}
        }
      ],
      "sweep": {"axes": [{"path": "reference.margins[0].rate", "name": "mu1",
                          "values": [1, 2, 3]}]},
      "output": {"format": "csv", "path": null}
    }

A sweep axis takes either ``values`` or ``{"from", "to", "steps"}``.  A
single axis may be given directly as the ``sweep`` object.
"""

from __future__ import annotations

import copy
import itertools
import json
import math
import re
from dataclasses import dataclass
from typing import Any, Optional, Tuple

import numpy as np

from .copulas import CopulaSpec
from .errors import CopfracError, JobValidationError
from .integrate import IntegrationConfig, Method
from .margins import Exponential, Margin, PowerOfBase, Uniform, _check_overlap
from .measures import BIVARIATE_ONLY, ENTROPY_KINDS, UNIVARIATE_KINDS, MeasureJob, MeasureKind

__all__ = ["SweepAxis", "JobFile", "parse_job_file", "load_job_file", "build_job", "expand_sweep"]

SCHEMA_VERSION = 1
OUTPUT_FORMATS = ("csv", "json")

_METHOD_ALIASES = {
    "gauss_legendre": Method.GAUSS_LEGENDRE,
    "gauss_legendre_tensor": Method.GAUSS_LEGENDRE,
    "gl": Method.GAUSS_LEGENDRE,
    "monte_carlo": Method.MONTE_CARLO,
    "mc": Method.MONTE_CARLO,
    "adaptive": Method.ADAPTIVE,
    "adaptive_doubling": Method.ADAPTIVE,
}


@dataclass(frozen=True)
class SweepAxis:
    path: str
    name: str
    values: Tuple[Any, ...]


@dataclass(frozen=True)
class JobFile:
    jobs: Tuple[dict, ...]
    axes: Tuple[SweepAxis, ...]
    output_format: str = "csv"
    output_path: Optional[str] = None


def _fail(path, message):
    raise JobValidationError(path, message)


def _require(obj, key, path):
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    if key not in obj:
        _fail(f"{path}.{key}" if path else key, "required field is missing")
    return obj[key]


def _number(value, path, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(path, f"expected a number, got {value!r}")
    if integer and int(value) != value:
        _fail(path, f"expected an integer, got {value!r}")
    if not math.isfinite(value):
        _fail(path, "must be finite")
    return int(value) if integer else float(value)


def _wrap(path, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except JobValidationError:
        raise
    except (CopfracError, ValueError, TypeError) as exc:
        raise JobValidationError(path, str(exc)) from None


def _known(obj, allowed, path):
    extra = sorted(set(obj) - set(allowed))
    if extra:
        _fail(f"{path}.{extra[0]}", "unknown field")


def parse_copula(obj, path) -> CopulaSpec:
    _known(obj, ("family", "theta", "dim"), path)
    family = _require(obj, "family", path)
    theta = obj.get("theta")
    if theta is not None:
        theta = _number(theta, f"{path}.theta")
    dim = _number(obj.get("dim", 2), f"{path}.dim", integer=True)
    return _wrap(path, CopulaSpec, family, theta, dim)


def parse_margin(obj, path) -> Margin:
    if not isinstance(obj, dict):
        _fail(path, "expected a margin object")
    family = _require(obj, "family", path)
    if family == "exponential":
        _known(obj, ("family", "rate"), path)
        return _wrap(path, Exponential, _number(obj.get("rate", 1.0), f"{path}.rate"))
    if family == "uniform":
        _known(obj, ("family", "a", "b"), path)
        a = _number(obj.get("a", 0.0), f"{path}.a")
        b = _number(obj.get("b", 1.0), f"{path}.b")
        return _wrap(path, Uniform, a, b)
    if family == "power":
        _known(obj, ("family", "base", "gamma", "mode"), path)
        base = parse_margin(_require(obj, "base", path), f"{path}.base")
        g = _number(_require(obj, "gamma", path), f"{path}.gamma")
        return _wrap(path, PowerOfBase, base, g, obj.get("mode", "prhr"))
    _fail(f"{path}.family", f"unknown margin family {family!r}")


def _margins(obj, path):
    if not isinstance(obj, list) or not obj:
        _fail(path, "expected a non-empty list of margins")
    return tuple(parse_margin(m, f"{path}[{i}]") for i, m in enumerate(obj))


def parse_integration(obj, path) -> IntegrationConfig:
    if obj is None:
        return IntegrationConfig()
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    _known(obj, ("method", "nodes", "samples", "seed", "clamp_epsilon", "rel_tolerance", "graded"), path)
    kw = {}
    if "method" in obj:
        method = obj["method"]
        if method not in _METHOD_ALIASES:
            _fail(f"{path}.method", f"unknown integration method {method!r}")
        kw["method"] = _METHOD_ALIASES[method]
    if "nodes" in obj:
        kw["nodes_per_axis"] = _number(obj["nodes"], f"{path}.nodes", integer=True)
    if "samples" in obj:
        kw["mc_samples"] = _number(obj["samples"], f"{path}.samples", integer=True)
    if "seed" in obj:
        kw["seed"] = _number(obj["seed"], f"{path}.seed", integer=True)
    for key in ("clamp_epsilon", "rel_tolerance"):
        if key in obj:
            kw[key] = _number(obj[key], f"{path}.{key}")
    if "graded" in obj:
        if not isinstance(obj["graded"], bool):
            _fail(f"{path}.graded", "expected true or false")
        kw["graded"] = obj["graded"]
    return _wrap(path, IntegrationConfig, **kw)


def _side(obj, path, need_copula):
    if not isinstance(obj, dict):
        _fail(path, "expected an object with copula and margins")
    _known(obj, ("copula", "margins", "survival"), path)
    copula = parse_copula(_require(obj, "copula", path), f"{path}.copula") if need_copula else None
    if not need_copula and "copula" in obj:
        copula = parse_copula(obj["copula"], f"{path}.copula")
    survival = parse_copula(obj["survival"], f"{path}.survival") if "survival" in obj else None
    margins = _margins(_require(obj, "margins", path), f"{path}.margins")
    return copula, survival, margins


def build_job(raw, path="jobs[0]") -> MeasureJob:
    """Validate one job description and build its :class:`MeasureJob`."""
    if not isinstance(raw, dict):
        _fail(path, "expected a job object")
    _known(raw, ("kind", "eta", "true", "reference", "integration", "label"), path)
    kind_raw = _require(raw, "kind", path)
    try:
        kind = MeasureKind(kind_raw)
    except ValueError:
        _fail(f"{path}.kind", f"unknown measure kind {kind_raw!r}")
    eta = raw.get("eta")
    if eta is None and kind is not MeasureKind.CCI:
        _fail(f"{path}.eta", "required field is missing")
    if eta is not None:
        eta = _number(eta, f"{path}.eta")
        if not 0.0 < eta < 1.0:
            _fail(f"{path}.eta", f"fractional order must lie in (0, 1), got {eta!r}")
    univariate = kind in UNIVARIATE_KINDS
    survival_kind = kind in (MeasureKind.SCFI, MeasureKind.SCFE)
    t_cop, t_surv, t_marg = _side(_require(raw, "true", path), f"{path}.true", not univariate and not (survival_kind and "survival" in raw["true"]))
    r_cop = r_surv = r_marg = None
    if kind not in ENTROPY_KINDS:
        r_obj = _require(raw, "reference", path)
        need = not univariate and not (survival_kind and isinstance(r_obj, dict) and "survival" in r_obj)
        r_cop, r_surv, r_marg = _side(r_obj, f"{path}.reference", need)
    cfg = parse_integration(raw.get("integration"), f"{path}.integration")
    if univariate and (len(t_marg) != 1 or len(r_marg) != 1):
        _fail(f"{path}.true.margins", f"{kind.value} takes exactly one margin per side")
    if not univariate:
        dim = len(t_marg)
        if r_marg is not None and len(r_marg) != dim:
            _fail(f"{path}.reference.margins", f"expected {dim} margins to match true.margins, got {len(r_marg)}")
        for side, c in (("true.copula", t_cop), ("reference.copula", r_cop), ("true.survival", t_surv), ("reference.survival", r_surv)):
            if c is not None and c.dim != dim:
                _fail(f"{path}.{side}.dim", f"copula dim {c.dim} does not match {dim} margins")
        if kind in BIVARIATE_ONLY and dim != 2:
            _fail(f"{path}.true.margins", f"{kind.value} is defined for two margins only")
        if survival_kind and dim != 2:
            if t_surv is None:
                _fail(f"{path}.true.survival", f"{kind.value} with dim > 2 needs a directly supplied survival copula")
            if kind is MeasureKind.SCFI and r_surv is None:
                _fail(f"{path}.reference.survival", f"{kind.value} with dim > 2 needs a directly supplied survival copula")
    if r_marg is not None:
        for i, (g, f) in enumerate(zip(r_marg, t_marg)):
            _wrap(f"{path}.reference.margins[{i}]", _check_overlap, g, f)
    return _wrap(
        path,
        MeasureJob,
        kind=kind,
        true_copula=t_cop,
        reference_copula=r_cop,
        true_margins=t_marg,
        reference_margins=r_marg,
        eta=eta,
        integration=cfg,
        true_survival=t_surv,
        reference_survival=r_surv,
    )


_TOKEN = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)|\[(\d+)\]")


def _split_path(path, where):
    if not isinstance(path, str) or not path:
        _fail(where, "sweep path must be a non-empty string")
    keys = []
    pos = 0
    for part in path.split("."):
        m_all = list(_TOKEN.finditer(part))
        if not m_all or "".join(m.group(0) for m in m_all) != part or m_all[0].group(1) is None:
            _fail(where, f"malformed sweep path {path!r}")
        for m in m_all:
            keys.append(m.group(1) if m.group(1) is not None else int(m.group(2)))
        pos += 1
    return keys


def set_path(obj, keys, value, where):
    """Assign ``value`` at the parsed path inside a nested job description."""
    cur = obj
    for k in keys[:-1]:
        try:
            cur = cur[k]
        except (KeyError, IndexError, TypeError):
            _fail(where, f"sweep path does not exist in the job ({k!r})")
    last = keys[-1]
    if isinstance(cur, dict):
        cur[last] = value
    elif isinstance(cur, list) and isinstance(last, int) and last < len(cur):
        cur[last] = value
    else:
        _fail(where, f"sweep path does not exist in the job ({last!r})")


def _axis_values(obj, where):
    if "values" in obj:
        vals = obj["values"]
        if not isinstance(vals, list) or not vals:
            _fail(f"{where}.values", "expected a non-empty list")
        return tuple(vals)
    start = _number(_require(obj, "from", where), f"{where}.from")
    stop = _number(_require(obj, "to", where), f"{where}.to")
    steps = _number(_require(obj, "steps", where), f"{where}.steps", integer=True)
    if steps < 1:
        _fail(f"{where}.steps", "must be >= 1")
    if steps == 1:
        return (start,)
    return tuple(float(v) for v in np.linspace(start, stop, steps))


def parse_sweep(obj, where="sweep") -> Tuple[SweepAxis, ...]:
    if obj is None:
        return ()
    if not isinstance(obj, dict):
        _fail(where, "expected an object")
    raw_axes = obj["axes"] if "axes" in obj else [obj]
    if not isinstance(raw_axes, list) or not raw_axes:
        _fail(f"{where}.axes", "expected a non-empty list of axes")
    axes = []
    for i, a in enumerate(raw_axes):
        w = f"{where}.axes[{i}]" if "axes" in obj else where
        if not isinstance(a, dict):
            _fail(w, "expected an axis object")
        _known(a, ("path", "name", "values", "from", "to", "steps"), w)
        path = _require(a, "path", w)
        _split_path(path, f"{w}.path")
        name = a.get("name", path)
        axes.append(SweepAxis(path=path, name=str(name), values=_axis_values(a, w)))
    names = [a.name for a in axes]
    if len(set(names)) != len(names):
        _fail(where, "sweep axis names must be unique")
    return tuple(axes)


def parse_job_file(data) -> JobFile:
    if not isinstance(data, dict):
        _fail("$", "job file must be a JSON object")
    _known(data, ("schema_version", "jobs", "sweep", "output", "description"), "$")
    version = _require(data, "schema_version", "")
    if version != SCHEMA_VERSION:
        _fail("schema_version", f"unsupported schema version {version!r} (expected {SCHEMA_VERSION})")
    jobs = _require(data, "jobs", "")
    if not isinstance(jobs, list) or not jobs:
        _fail("jobs", "expected a non-empty list of jobs")
    axes = parse_sweep(data.get("sweep"))
    out = data.get("output") or {}
    if not isinstance(out, dict):
        _fail("output", "expected an object")
    _known(out, ("format", "path"), "output")
    fmt = out.get("format", "csv")
    if fmt not in OUTPUT_FORMATS:
        _fail("output.format", f"expected one of {OUTPUT_FORMATS}, got {fmt!r}")
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        _fail("output.path", "expected a string or null")
    return JobFile(jobs=tuple(jobs), axes=axes, output_format=fmt, output_path=path)


def load_job_file(path) -> JobFile:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise JobValidationError(str(path), f"cannot read job file: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise JobValidationError(str(path), f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_job_file(data)


def expand_sweep(job_file: JobFile):
    """Build every (job index, cell values, MeasureJob) in lexicographic order.

    The first axis varies slowest.  All jobs are constructed, and therefore
    validated, before the caller evaluates any of them.
    """
    cells = list(itertools.product(*(a.values for a in job_file.axes))) if job_file.axes else [()]
    keys = [_split_path(a.path, f"sweep.{a.name}") for a in job_file.axes]
    out = []
    for j, raw in enumerate(job_file.jobs):
        for cell in cells:
            job_raw = copy.deepcopy(raw)
            label = f"jobs[{j}]"
            for axis, k, value in zip(job_file.axes, keys, cell):
                set_path(job_raw, k, value, f"sweep.{axis.name}")
            if cell:
                label += "{" + ", ".join(f"{a.name}={v!r}" for a, v in zip(job_file.axes, cell)) + "}"
            out.append((j, cell, build_job(job_raw, label)))
    return out
