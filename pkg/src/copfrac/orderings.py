"""Orthant-order checks on grids and the executable ordering propositions.

Each proposition is a function that builds its joint models from a
scenario, checks the hypotheses with the orthant checkers, and returns the
inequalities to compare.  :func:`verify_proposition` turns those into flat
records suitable for JSON output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .copulas import CopulaSpec, DerivedCopula, ReflectedSurvival, Transform
from .errors import DomainError, ParameterError
from .integrate import IntegrationConfig
from .margins import Exponential, Margin, PowerMode, PowerOfBase, Uniform, margin_vector
from .measures import MeasureJob, MeasureKind, evaluate, frechet_sandwich
from .special import as_order

__all__ = [
    "JointModel",
    "OrderReport",
    "Scenario",
    "Comparison",
    "SCENARIOS",
    "PROPOSITION_IDS",
    "PROBE_IDS",
    "check_lower_orthant",
    "check_upper_orthant",
    "check_radial_symmetry",
    "verify_proposition",
    "verify_all",
]

DEFAULT_GRID = 101
GRID_EDGE = 1e-6


@dataclass(frozen=True)
class JointModel:
    """A copula together with its margins (a joint distribution via Sklar)."""

    copula: object
    margins: Tuple[Margin, ...]

    def __post_init__(self):
        margins = margin_vector(self.margins)
        object.__setattr__(self, "margins", margins)
        if self.copula.dim != len(margins):
            raise ParameterError(f"copula dim {self.copula.dim} does not match {len(margins)} margins")

    @property
    def dim(self) -> int:
        return len(self.margins)

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        u = np.stack([m.cdf(z[..., i]) for i, m in enumerate(self.margins)], axis=-1)
        return self.copula.evaluate(u)

    def sf(self, z):
        """Joint survival function ``P(Z_1 > z_1, ..., Z_n > z_n)``."""
        z = np.asarray(z, dtype=float)
        u = np.stack([m.sf(z[..., i]) for i, m in enumerate(self.margins)], axis=-1)
        return survival_copula(self.copula).evaluate(u)


def survival_copula(copula):
    if isinstance(copula, DerivedCopula) and copula.transform is Transform.SURVIVAL:
        return copula.base
    return DerivedCopula(copula, Transform.SURVIVAL)


@dataclass(frozen=True)
class OrderReport:
    holds: bool
    max_violation: float
    witness: Optional[Tuple[float, ...]] = None


def _axis_grid(a: JointModel, b: JointModel, i: int, n: int):
    lo = max(a.margins[i].support()[0], b.margins[i].support()[0])
    hi = min(a.margins[i].support()[1], b.margins[i].support()[1])
    if not lo < hi:
        raise DomainError(f"supports of coordinate {i} do not overlap")
    levels = np.linspace(GRID_EDGE, 1.0 - GRID_EDGE, n)
    pts = np.concatenate([a.margins[i].quantile(levels), b.margins[i].quantile(levels)])
    pts = np.unique(pts[(pts >= lo) & (pts <= hi)])
    if pts.size == 0:
        raise DomainError(f"no grid points inside the common support of coordinate {i}")
    return pts


def _grid(a: JointModel, b: JointModel, n: int):
    if a.dim != b.dim:
        raise ParameterError(f"models have different dimensions ({a.dim} vs {b.dim})")
    axes = [_axis_grid(a, b, i, n) for i in range(a.dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _report(diff, points, tol):
    """``diff`` should be >= 0 everywhere for the order to hold."""
    i = int(np.argmin(diff))
    worst = max(0.0, -float(diff[i]))
    holds = worst <= tol
    witness = None if holds else tuple(float(c) for c in points[i])
    return OrderReport(holds=holds, max_violation=worst, witness=witness)


def check_lower_orthant(a: JointModel, b: JointModel, grid_points_per_axis: int = DEFAULT_GRID, tol: float = 1e-12) -> OrderReport:
    """Check ``a <=_LO b``, i.e. ``F_a >= F_b`` on a grid over the common support."""
    z = _grid(a, b, grid_points_per_axis)
    return _report(np.asarray(a.cdf(z)) - np.asarray(b.cdf(z)), z, tol)


def check_upper_orthant(a: JointModel, b: JointModel, grid_points_per_axis: int = DEFAULT_GRID, tol: float = 1e-12) -> OrderReport:
    """Check ``a <=_UO b``, i.e. ``survival_a <= survival_b`` on a grid."""
    z = _grid(a, b, grid_points_per_axis)
    return _report(np.asarray(b.sf(z)) - np.asarray(a.sf(z)), z, tol)


def check_radial_symmetry(model: JointModel, grid_points_per_axis: int = DEFAULT_GRID, tol: float = 1e-12) -> OrderReport:
    """Check that the copula equals its reflected survival copula and every
    margin is symmetric about its median."""
    n = grid_points_per_axis
    t = np.linspace(0.0, 1.0, n)
    mesh = np.meshgrid(*([t] * model.dim), indexing="ij")
    u = np.stack([m.ravel() for m in mesh], axis=-1)
    diff = np.abs(np.asarray(model.copula.evaluate(u)) - np.asarray(ReflectedSurvival(model.copula).evaluate(u)))
    worst = float(np.max(diff))
    witness = tuple(float(c) for c in u[int(np.argmax(diff))])
    levels = np.linspace(GRID_EDGE, 1.0 - GRID_EDGE, n)
    for m in model.margins:
        center = m.median()
        x = m.quantile(levels)
        gap = np.abs(m.cdf(center + (x - center)) - m.sf(center - (x - center)))
        if float(np.max(gap)) > worst:
            worst = float(np.max(gap))
            witness = (float(x[int(np.argmax(gap))]),)
    holds = worst <= tol
    return OrderReport(holds=holds, max_violation=worst, witness=None if holds else witness)


# --------------------------------------------------------------------------
# proposition harness


@dataclass(frozen=True)
class Scenario:
    name: str
    params: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class Comparison:
    """``lhs op rhs`` with ``op`` one of ``<=``, ``>=``, ``==``."""

    label: str
    lhs: float
    op: str
    rhs: float
    asserted: bool = True


def _measure(kind, truth: JointModel, ref: JointModel, eta, cfg, **extra) -> float:
    job = MeasureJob(
        kind=kind,
        true_copula=truth.copula,
        reference_copula=ref.copula,
        true_margins=truth.margins,
        reference_margins=ref.margins,
        eta=eta,
        integration=cfg,
        **extra,
    )
    return evaluate(job).value


def _orient(a, b, check):
    """Return ``(smaller, larger, ok)`` for the order tested by ``check``."""
    if check(a, b).holds:
        return a, b, True
    if check(b, a).holds:
        return b, a, True
    return a, b, False


def _pair(p):
    return JointModel(p["first"], p["margins"]), JointModel(p["second"], p["margins"])


def _third(p):
    return JointModel(p["third"], p.get("third_margins", p["margins"]))


def _prhr_margins(base, exps, mode=PowerMode.PRHR):
    return tuple(PowerOfBase(m, g, mode) for m, g in zip(base, exps))


def _p3_3(p, eta, cfg):
    base = p["margins"]
    x = JointModel(p["true"], base)
    y = JointModel(p["reference"], _prhr_margins(base, p["gamma"]))
    z = JointModel(p["reference"], _prhr_margins(base, p["delta"]))
    ok = all(g < d for g, d in zip(p["gamma"], p["delta"]))
    k = MeasureKind.CCFI
    return ok, [Comparison("CCFI(X,Y) <= CCFI(X,Z)", _measure(k, x, y, eta, cfg), "<=", _measure(k, x, z, eta, cfg))]


def _p4_4(p, eta, cfg):
    base = p["margins"]
    x = JointModel(p["true"], base)
    y = JointModel(p["reference"], _prhr_margins(base, p["gamma"], PowerMode.PHR))
    z = JointModel(p["reference"], _prhr_margins(base, p["delta"], PowerMode.PHR))
    ok = all(g < d for g, d in zip(p["gamma"], p["delta"]))
    k = MeasureKind.SCFI
    return ok, [Comparison("SCFI(X,Y) <= SCFI(X,Z)", _measure(k, x, y, eta, cfg), "<=", _measure(k, x, z, eta, cfg))]


def _reference_order(kind, check, label_op, stated_op=None):
    """Propositions of the form ``X <= Y  =>  M(Z,X) op M(Z,Y)``."""
    name = kind.value.upper()

    def run(p, eta, cfg):
        a, b = _pair(p)
        x, y, ok = _orient(a, b, check)
        z = _third(p)
        lhs, rhs = _measure(kind, z, x, eta, cfg), _measure(kind, z, y, eta, cfg)
        out = [Comparison(f"{name}(Z,X) {label_op} {name}(Z,Y)", lhs, label_op, rhs)]
        if stated_op is not None:
            out.append(Comparison(f"{name}(Z,X) {stated_op} {name}(Z,Y) [as stated]", lhs, stated_op, rhs, asserted=False))
        return ok, out

    return run


def _weight_order(kind, check, label_op, stated_op=None):
    """Propositions of the form ``X <= Y, X_i = Y_i  =>  M(X,Z) op M(Y,Z)``."""
    name = kind.value.upper()

    def run(p, eta, cfg):
        a, b = _pair(p)
        x, y, ok = _orient(a, b, check)
        z = _third(p)
        ok = ok and x.margins == y.margins
        lhs, rhs = _measure(kind, x, z, eta, cfg), _measure(kind, y, z, eta, cfg)
        out = [Comparison(f"{name}(X,Z) {label_op} {name}(Y,Z)", lhs, label_op, rhs)]
        if stated_op is not None:
            out.append(Comparison(f"{name}(X,Z) {stated_op} {name}(Y,Z) [as stated]", lhs, stated_op, rhs, asserted=False))
        return ok, out

    return run


def _triple(p):
    m = p["margins"]
    x = JointModel(p["x"], m)
    y = JointModel(p["y"], p.get("y_margins", m))
    z = JointModel(p["z"], m)
    return x, y, z


def _lo(a, b):
    return check_lower_orthant(a, b).holds


def _chain(kind, part):
    """The three-model chains; hypotheses are LO orders with ``Z_i = X_i``."""
    name = kind.value.upper()

    def run(p, eta, cfg):
        x, y, z = _triple(p)

        def m(a, b):
            return _measure(kind, a, b, eta, cfg)

        xy, xz, zy = m(x, y), m(x, z), m(z, y)
        if part == 1:
            ok = _lo(z, y) and _lo(z, x)
            out = [
                Comparison(f"{name}(X,Z) <= {name}(X,Y)", xz, "<=", xy),
                Comparison(f"{name}(X,Y) <= {name}(Z,Y)", xy, "<=", zy),
            ]
        elif part == 2:
            ok = _lo(x, z) and _lo(z, y)
            out = [
                Comparison(f"{name}(X,Y) >= {name}(Z,Y)", xy, ">=", zy),
                Comparison(f"{name}(X,Y) >= {name}(X,Z)", xy, ">=", xz),
            ]
        else:
            ok = _lo(y, z) and _lo(x, z)
            out = [
                Comparison(f"{name}(Z,Y) <= {name}(X,Y)", zy, "<=", xy),
                Comparison(f"{name}(X,Y) <= {name}(X,Z)", xy, "<=", xz),
                Comparison(f"{name}(X,Y) >= {name}(X,Z) [as stated]", xy, ">=", xz, asserted=False),
            ]
        return ok and x.margins == z.margins, out

    return run


def _p4_7(p, eta, cfg):
    ok, out = _chain(MeasureKind.SCFI, p["part"])(p, eta, cfg)
    x, y, z = _triple(p)
    # the LO/UO translation used by the survival chain needs equal margins
    same = x.margins == y.margins == z.margins
    return ok and same, [Comparison(f"part {p['part']}: {c.label}", c.lhs, c.op, c.rhs, c.asserted) for c in out]


def _p4_2(p, eta, cfg):
    x = JointModel(p["first"], p["margins"])
    y = JointModel(p["second"], p["margins"])
    ok = check_radial_symmetry(x, 41).holds and check_radial_symmetry(y, 41).holds
    ccfi = _measure(MeasureKind.CCFI, x, y, eta, cfg)
    # survival side via the reflection identity, not the closed form
    scfi = _measure(
        MeasureKind.SCFI,
        x,
        y,
        eta,
        cfg,
        true_survival=ReflectedSurvival(x.copula),
        reference_survival=ReflectedSurvival(y.copula),
    )
    return ok, [Comparison("SCFI(X,Y) == CCFI(X,Y)", scfi, "==", ccfi)]


def _p3_1_sandwich(p, eta, cfg):
    base = p["margins"]
    x = JointModel(p["true"], base)
    ref_margins = _prhr_margins(base, (p["gamma"], p["delta"]))
    job = MeasureJob(
        kind=MeasureKind.CCFI,
        true_copula=x.copula,
        reference_copula=CopulaSpec("independence"),
        true_margins=base,
        reference_margins=ref_margins,
        eta=eta,
        integration=cfg,
    )
    lower, upper = frechet_sandwich(job)
    value = evaluate(job).value
    return True, [
        Comparison("W-integral <= CCFI", lower.value, "<=", value),
        Comparison("CCFI <= M-integral", value, "<=", upper.value),
    ]


def _power_probe(kind, mode):
    name = kind.value.upper()

    def run(p, eta, cfg):
        base = p["margins"]
        x = JointModel(p["true"], base)
        z = JointModel(p["true"], _prhr_margins(base, p["gamma"], mode))
        y = JointModel(p["reference"], p.get("reference_margins", base))
        zy = _measure(kind, z, y, eta, cfg)
        xy = _measure(kind, x, y, eta, cfg)
        scale = math.prod(p["gamma"])
        op = ">=" if min(p["gamma"]) > 1.0 else "<="
        flip = "<=" if op == ">=" else ">="
        return True, [
            Comparison(f"{name}(Z,Y) {op} {name}(X,Y) [as stated]", zy, op, xy, asserted=False),
            Comparison(f"{name}(Z,Y) {flip} prod(gamma)*{name}(X,Y) [scaled]", zy, flip, scale * xy, asserted=False),
        ]

    return run


def _lo_check(a, b):
    return check_lower_orthant(a, b)


def _uo_check(a, b):
    return check_upper_orthant(a, b)


_CC, _SC, _CO, _DC = MeasureKind.CCFI, MeasureKind.SCFI, MeasureKind.COCFI, MeasureKind.DCFI

_RUNNERS: Dict[str, Callable] = {
    "P3_1_sandwich": _p3_1_sandwich,
    "P3_2_probe": _power_probe(_CC, PowerMode.PRHR),
    "P3_3": _p3_3,
    "P3_4": _reference_order(_CC, _lo_check, "<="),
    "P3_5": _weight_order(_CC, _lo_check, ">="),
    "P3_6_1": _chain(_CC, 1),
    "P3_6_2": _chain(_CC, 2),
    "P3_6_3": _chain(_CC, 3),
    "P4_2": _p4_2,
    "P4_3_probe": _power_probe(_SC, PowerMode.PHR),
    "P4_4": _p4_4,
    "P4_5": _reference_order(_SC, _uo_check, ">="),
    "P4_6": _weight_order(_SC, _uo_check, "<="),
    "P4_7": _p4_7,
    # the co-copula and dual-copula inequalities hold in the direction derived
    # from the pointwise copula order; the printed direction is kept as a probe
    "P5_1": _reference_order(_CO, _lo_check, ">=", stated_op="<="),
    "P5_2": _weight_order(_CO, _lo_check, "<=", stated_op=">="),
    "P5_3": _reference_order(_DC, _uo_check, "<="),
    "P5_4": _weight_order(_DC, _uo_check, ">=", stated_op="<="),
}

PROPOSITION_IDS = tuple(_RUNNERS)
PROBE_IDS = ("P3_2_probe", "P4_3_probe")


def _c(family, theta=None):
    return CopulaSpec(family, theta)


E1 = (Exponential(1.0), Exponential(1.0))
E23 = (Exponential(2.0), Exponential(3.0))
U01 = (Uniform(0.0, 1.0), Uniform(0.0, 1.0))


def _pair_scenarios(third_a, third_b):
    return (
        Scenario("fgm(-0.5)/fgm(0.5)", dict(first=_c("fgm", -0.5), second=_c("fgm", 0.5), margins=E1, third=third_a)),
        Scenario(
            "frank(1)/frank(4), exp(2,3) margins",
            dict(first=_c("frank", 1.0), second=_c("frank", 4.0), margins=E23, third=third_b, third_margins=E1),
        ),
    )


def _chain_scenarios(part, all_equal=False):
    ordered = {
        1: (("fgm", 0.3), ("fgm", -0.5), ("fgm", 0.9)),
        2: (("fgm", 0.9), ("fgm", -0.5), ("fgm", 0.3)),
        3: (("fgm", 0.2), ("fgm", 0.6), ("fgm", -0.8)),
    }[part]
    frank = {
        1: (("frank", 2.0), ("frank", -2.0), ("frank", 5.0)),
        2: (("frank", 5.0), ("frank", -2.0), ("frank", 2.0)),
        3: (("frank", 2.0), ("frank", 5.0), ("frank", -2.0)),
    }[part]
    # a Y margin that keeps the LO hypotheses: stochastically larger when Y
    # must be LO-larger, smaller otherwise
    y_rate = 2.0 if part == 3 else 0.5
    out = []
    for label, trio, extra in (
        ("fgm", ordered, {}),
        ("frank", frank, {} if all_equal else {"y_margins": (Exponential(y_rate), Exponential(y_rate))}),
    ):
        x, y, z = (_c(*t) for t in trio)
        desc = f"{label}: X={x.name} Y={y.name} Z={z.name}" + ("" if not extra else f", Y~exp({y_rate:g})")
        p = dict(x=x, y=y, z=z, margins=E1, part=part, **extra)
        out.append(Scenario(desc, p))
    return tuple(out)


def _sandwich_scenarios():
    out = []
    for true in (_c("gumbel", 2.0), _c("fgm", 0.5)):
        for eta in (0.3, 0.5, 0.7, 0.9):
            for g in (2.0, 3.0):
                for d in (2.0, 3.0):
                    out.append(
                        Scenario(
                            f"{true.name} eta={eta:g} gamma={g:g} delta={d:g}",
                            dict(true=true, margins=E1, gamma=g, delta=d, eta=eta),
                        )
                    )
    return tuple(out)


SCENARIOS: Dict[str, Tuple[Scenario, ...]] = {
    "P3_1_sandwich": _sandwich_scenarios(),
    "P3_2_probe": (
        Scenario("gamma>1", dict(true=_c("gumbel", 2.0), reference=_c("fgm", 0.5), margins=E1, gamma=(1.5, 2.0), reference_margins=E23)),
        Scenario("gamma<1", dict(true=_c("gumbel", 2.0), reference=_c("fgm", 0.5), margins=E1, gamma=(0.5, 0.7), reference_margins=E23)),
    ),
    "P3_3": (
        Scenario("gumbel(2) vs independence", dict(true=_c("gumbel", 2.0), reference=_c("independence"), margins=E1, gamma=(1.2, 1.5), delta=(2.0, 3.0))),
        Scenario("fgm(0.5) vs independence", dict(true=_c("fgm", 0.5), reference=_c("independence"), margins=E1, gamma=(1.2, 1.5), delta=(2.0, 3.0))),
        Scenario("gumbel(2) vs fgm(0.5)", dict(true=_c("gumbel", 2.0), reference=_c("fgm", 0.5), margins=E1, gamma=(0.5, 0.8), delta=(1.5, 2.0))),
    ),
    "P3_4": _pair_scenarios(_c("gumbel", 2.0), _c("fgm", 0.3)),
    "P3_5": _pair_scenarios(_c("gumbel", 2.0), _c("fgm", 0.3)),
    "P3_6_1": _chain_scenarios(1),
    "P3_6_2": _chain_scenarios(2),
    "P3_6_3": _chain_scenarios(3),
    "P4_2": tuple(
        Scenario(f"frank({t:g})/frank({-t:g}) eta={e:g}", dict(first=_c("frank", t), second=_c("frank", -t), margins=U01, eta=e))
        for t in (1.0, 3.0)
        for e in (0.4, 0.7)
    )
    + (Scenario("frank(3)/frank(3) eta=0.5", dict(first=_c("frank", 3.0), second=_c("frank", 3.0), margins=U01, eta=0.5)),),
    "P4_3_probe": (
        Scenario("gamma>1", dict(true=_c("frank", 2.0), reference=_c("joe", 2.0), margins=E1, gamma=(1.5, 2.0), reference_margins=E23)),
        Scenario("gamma<1", dict(true=_c("frank", 2.0), reference=_c("joe", 2.0), margins=E1, gamma=(0.5, 0.7), reference_margins=E23)),
    ),
    "P4_4": (
        Scenario("gumbel(2) vs joe(2)", dict(true=_c("gumbel", 2.0), reference=_c("joe", 2.0), margins=E1, gamma=(1.2, 1.5), delta=(2.0, 3.0))),
        Scenario("frank(2) vs independence", dict(true=_c("frank", 2.0), reference=_c("independence"), margins=E1, gamma=(0.5, 0.8), delta=(1.5, 2.0))),
    ),
    "P4_5": _pair_scenarios(_c("gumbel", 2.0), _c("joe", 2.0)),
    "P4_6": _pair_scenarios(_c("gumbel", 2.0), _c("joe", 2.0)),
    "P4_7": tuple(s for part in (1, 2, 3) for s in _chain_scenarios(part, all_equal=True)),
    "P5_1": _pair_scenarios(_c("gumbel", 2.0), _c("joe", 2.0)),
    "P5_2": _pair_scenarios(_c("gumbel", 2.0), _c("joe", 2.0)),
    "P5_3": _pair_scenarios(_c("gumbel", 2.0), _c("joe", 2.0)),
    "P5_4": _pair_scenarios(_c("gumbel", 2.0), _c("joe", 2.0)),
}


def _judge(c: Comparison, tol: float):
    if c.op == "<=":
        gap = c.rhs - c.lhs
        ok = gap >= -tol
    elif c.op == ">=":
        gap = c.lhs - c.rhs
        ok = gap >= -tol
    else:
        gap = abs(c.lhs - c.rhs)
        ok = gap <= tol
    return gap, ok


def _resolve(prop_id: str, scenario):
    if prop_id not in _RUNNERS:
        raise ParameterError(f"unknown proposition id {prop_id!r}")
    if scenario is None:
        return SCENARIOS[prop_id]
    if isinstance(scenario, Scenario):
        return (scenario,)
    if isinstance(scenario, dict):
        return (Scenario("custom", scenario),)
    for s in SCENARIOS[prop_id]:
        if s.name == scenario:
            return (s,)
    raise ParameterError(f"{prop_id} has no scenario named {scenario!r}")


def verify_proposition(
    prop_id: str,
    scenario=None,
    tol: float = 1e-6,
    eta=0.5,
    cfg: IntegrationConfig = None,
) -> List[dict]:
    """Run one proposition on one scenario (or all of its built-in scenarios).

    Returns one record per compared inequality.  ``pass`` is ``None`` when
    the scenario fails the proposition's hypotheses.  Probe records carry
    ``asserted = False`` and never count as failures.
    """
    cfg = cfg or IntegrationConfig()
    probe = prop_id in PROBE_IDS
    records = []
    for s in _resolve(prop_id, scenario):
        order = as_order(s.params.get("eta", eta))
        ok, comparisons = _RUNNERS[prop_id](s.params, order, cfg)
        for c in comparisons:
            gap, good = _judge(c, tol)
            records.append(
                {
                    "id": prop_id,
                    "scenario": s.name,
                    "comparison": c.label,
                    "hypotheses_ok": bool(ok),
                    "lhs": c.lhs,
                    "rhs": c.rhs,
                    "gap": gap,
                    "pass": bool(good) if ok else None,
                    "asserted": bool(c.asserted and not probe),
                }
            )
    return records


def verify_all(filter_text: str = None, tol: float = 1e-6, cfg: IntegrationConfig = None) -> List[dict]:
    ids = [i for i in PROPOSITION_IDS if not filter_text or filter_text in i]
    out = []
    for i in ids:
        out.extend(verify_proposition(i, tol=tol, cfg=cfg))
    return out
