"""The instrumental-variable net and the DATE = IV-estimand check.

:func:`build_iv_net` plugs a population's stochastic potential outcomes into the
four-node net ``Assign -> Take -> Cure`` with ``Indiv`` a parent of both ``Take``
and ``Cure``. :func:`iv_estimand` evaluates the Wald ratio on that net by
enumeration, and :func:`closed_form_conditionals` computes the same four
conditionals from the population directly, as an independent oracle.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from . import cbn, population as P
from .cbn import CausalBayesNet, Variable, binary
from .errors import NoCompliers, ZeroDenominator

DENOMINATOR_TOL = 1e-12

ASSIGN, INDIV, TAKE, CURE = "Assign", "Indiv", "Take", "Cure"


@dataclass(frozen=True)
class IvNetConfig:
    p_assign: float = 0.5

    def __post_init__(self):
        p = self.p_assign
        if isinstance(p, bool) or not isinstance(p, (int, float)) or not (0.0 < p < 1.0):
            raise ValueError(f"p_assign must lie strictly between 0 and 1, got {p!r}")
        object.__setattr__(self, "p_assign", float(p))


def build_iv_net(pop: P.Population, cfg: IvNetConfig = IvNetConfig()) -> CausalBayesNet:
    """Causal Bayes net whose CPT rows are the population's potential-outcome probabilities."""
    ids = tuple(pop.ids)
    variables = [binary(ASSIGN), Variable(INDIV, ids), binary(TAKE), binary(CURE)]
    parents = {ASSIGN: (), INDIV: (), TAKE: (ASSIGN, INDIV), CURE: (TAKE, INDIV)}
    p = cfg.p_assign
    cpts = {
        ASSIGN: {(): (1.0 - p, p)},
        INDIV: {(): tuple(1.0 / pop.N for _ in ids)},
        TAKE: {},
        CURE: {},
    }
    for ind in pop:
        cpts[TAKE][("0", ind.id)] = (1.0 - ind.tau0, ind.tau0)
        cpts[TAKE][("1", ind.id)] = (1.0 - ind.tau1, ind.tau1)
        cpts[CURE][("0", ind.id)] = (1.0 - ind.kappa0, ind.kappa0)
        cpts[CURE][("1", ind.id)] = (1.0 - ind.kappa1, ind.kappa1)
    return CausalBayesNet.build(variables, parents, cpts)


@dataclass(frozen=True)
class Conditionals:
    cure_a1: float
    cure_a0: float
    take_a1: float
    take_a0: float

    def as_tuple(self):
        return (self.cure_a1, self.cure_a0, self.take_a1, self.take_a0)


def wald_ratio(c: Conditionals) -> float:
    """Cure contrast over uptake contrast between the two instrument arms."""
    den = c.take_a1 - c.take_a0
    if abs(den) <= DENOMINATOR_TOL:
        raise ZeroDenominator(
            f"uptake contrast {den!r} is zero: assignment has no net effect on taking"
        )
    return (c.cure_a1 - c.cure_a0) / den


def enumerated_conditionals(net: CausalBayesNet) -> Conditionals:
    cp = cbn.conditional_probability
    return Conditionals(
        cure_a1=cp(net, {CURE: "1"}, {ASSIGN: "1"}),
        cure_a0=cp(net, {CURE: "1"}, {ASSIGN: "0"}),
        take_a1=cp(net, {TAKE: "1"}, {ASSIGN: "1"}),
        take_a0=cp(net, {TAKE: "1"}, {ASSIGN: "0"}),
    )


def iv_estimand(net: CausalBayesNet) -> float:
    return wald_ratio(enumerated_conditionals(net))


def closed_form_conditionals(pop: P.Population) -> Conditionals:
    """The four arm-wise conditionals as population averages.

    P(Cure=1 | Assign=a) = mean(kappa1 * tau_a + kappa0 * (1 - tau_a))
    P(Take=1 | Assign=a) = mean(tau_a)
    """
    n = pop.N

    def cure(a):
        return math.fsum(
            i.kappa1 * (i.tau1 if a else i.tau0) + i.kappa0 * (1.0 - (i.tau1 if a else i.tau0))
            for i in pop
        ) / n

    return Conditionals(
        cure_a1=cure(1),
        cure_a0=cure(0),
        take_a1=math.fsum(i.tau1 for i in pop) / n,
        take_a0=math.fsum(i.tau0 for i in pop) / n,
    )


@dataclass
class Assumption:
    key: str
    label: str
    status: str  # "pass" | "fail" | "by-construction"
    detail: str = ""


@dataclass
class TheoremReport:
    date_value: float | None
    iv_estimand_value: float | None
    absolute_gap: float | None
    assumptions: list[Assumption]
    tol: float
    verdict: str
    p_assign: float
    errors: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def assumptions_hold(self) -> bool:
        return all(a.status != "fail" for a in self.assumptions)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_table(self) -> str:
        def num(x):
            return "undefined" if x is None else f"{x:.6f}"

        lines = [
            f"{'DATE':<22}{num(self.date_value)}",
            f"{'IV estimand':<22}{num(self.iv_estimand_value)}",
            f"{'absolute gap':<22}{'undefined' if self.absolute_gap is None else f'{self.absolute_gap:.6e}'}",
            f"{'tolerance':<22}{self.tol:.6e}",
            f"{'p_assign':<22}{self.p_assign:.6f}",
            "assumptions:",
        ]
        for a in self.assumptions:
            extra = f"  {a.detail}" if a.detail else ""
            lines.append(f"  {'(' + a.key + ')':<6}{a.label:<22}{a.status}{extra}")
        for e in self.errors:
            lines.append(f"error: {e}")
        lines.append(f"verdict: {self.verdict.upper()}")
        return "\n".join(lines)


def theorem1_check(pop: P.Population, cfg: IvNetConfig = IvNetConfig(), tol: float = 1e-9) -> TheoremReport:
    """Compare the DATE with the IV estimand and report on the four assumptions.

    Assumptions (iii) and (iv) hold because the net is built by
    :func:`build_iv_net`; they are reported as such, not tested.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    nd = P.check_no_defiers(pop)
    has_com = P.check_compliers_exist(pop)
    assumptions = [
        Assumption("i", "no defiers", "pass" if nd.holds else "fail",
                   "" if nd.holds else f"defiers: {', '.join(nd.violators)}"),
        Assumption("ii", "compliers exist", "pass" if has_com else "fail",
                   "" if has_com else "no individual with tau1 > tau0"),
        Assumption("iii", "factorization rule", "by-construction",
                   "net built from the fixed four-node DAG"),
        Assumption("iv", "bridge principle", "by-construction",
                   "CPT rows are the stochastic potential outcomes"),
    ]
    errors = []
    try:
        d = P.date(pop)
    except NoCompliers as exc:
        d = None
        errors.append(f"DATE undefined: {exc}")
    try:
        iv = iv_estimand(build_iv_net(pop, cfg))
    except ZeroDenominator as exc:
        iv = None
        errors.append(f"IV estimand undefined: {exc}")
    gap = None if d is None or iv is None else abs(d - iv)
    ok = nd.holds and has_com and gap is not None and gap <= tol
    return TheoremReport(
        date_value=d,
        iv_estimand_value=iv,
        absolute_gap=gap,
        assumptions=assumptions,
        tol=tol,
        verdict="pass" if ok else "fail",
        p_assign=cfg.p_assign,
        errors=errors,
    )
