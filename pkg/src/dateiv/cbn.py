"""Discrete causal Bayes nets with exact inference by full enumeration.

A net is a DAG over finite-domain variables plus one conditional probability
table (CPT) per variable. CPT rows are keyed by the tuple of parent values in
the variable's declared parent order and hold one probability per domain value.

Nets can be constructed in an invalid state so that :func:`validate` can report
on them; every query validates first and raises :class:`InvalidNet` otherwise.
The joint distribution is materialised once per net as a dense table (one cell
per full assignment), so every query is a sum over enumerated cells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    CyclicGraph,
    InvalidNet,
    OverlappingAssignments,
    UnknownValue,
    UnknownVariable,
    ZeroProbabilityCondition,
    ZeroProbabilityEvidence,
)

ROW_SUM_TOL = 1e-9
MAX_CELLS = 20_000_000

Assignment = Mapping[str, object]


@dataclass(frozen=True)
class Variable:
    name: str
    domain: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "domain", tuple(str(v) for v in self.domain))

    def index(self, value) -> int:
        try:
            return self.domain.index(str(value))
        except ValueError:
            raise UnknownValue(
                f"{value!r} is not in the domain of {self.name} {list(self.domain)}"
            ) from None


def binary(name: str) -> Variable:
    return Variable(name, ("0", "1"))


@dataclass(frozen=True)
class Dag:
    variables: tuple[Variable, ...]
    parents: Mapping[str, tuple[str, ...]]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        pa = {v.name: tuple(self.parents.get(v.name, ())) for v in self.variables}
        for name in self.parents:
            pa.setdefault(name, tuple(self.parents[name]))
        object.__setattr__(self, "parents", pa)

    @property
    def names(self) -> list[str]:
        return [v.name for v in self.variables]

    def variable(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise UnknownVariable(f"unknown variable {name!r}")

    def children(self, name: str) -> list[str]:
        return [c for c in self.names if name in self.parents.get(c, ())]

    def descendants(self, name: str) -> set[str]:
        self.variable(name)
        seen: set[str] = set()
        stack = self.children(name)
        while stack:
            c = stack.pop()
            if c not in seen:
                seen.add(c)
                stack.extend(self.children(c))
        return seen


def topological_order(dag: "Dag | CausalBayesNet") -> list[Variable]:
    """Kahn's algorithm; ties go to the earliest-declared variable."""
    dag = _as_dag(dag)
    remaining = list(dag.variables)
    placed: set[str] = set()
    order = []
    while remaining:
        for k, var in enumerate(remaining):
            if all(p in placed for p in dag.parents[var.name]):
                break
        else:
            stuck = ", ".join(v.name for v in remaining)
            raise CyclicGraph(f"no topological order exists; cycle among: {stuck}")
        order.append(remaining.pop(k))
        placed.add(var.name)
    return order


def non_descendants(dag: "Dag | CausalBayesNet", x: str) -> set[str]:
    """Variables not reachable from ``x`` by a directed path, excluding ``x``."""
    dag = _as_dag(dag)
    desc = dag.descendants(x)
    return {n for n in dag.names if n != x and n not in desc}


def _as_dag(obj) -> Dag:
    return obj.dag if isinstance(obj, CausalBayesNet) else obj


@dataclass(frozen=True)
class Violation:
    kind: str
    variable: str | None
    location: str
    message: str

    def __str__(self):
        where = f"{self.variable}" if self.variable else "net"
        if self.location:
            where += f"[{self.location}]"
        return f"{self.kind} at {where}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> list[str]:
        return [v.kind for v in self.violations]

    def add(self, kind, variable, location, message):
        self.violations.append(Violation(kind, variable, location, message))


@dataclass(frozen=True)
class CausalBayesNet:
    dag: Dag
    cpts: Mapping[str, Mapping[tuple, Sequence[float]]]

    def __post_init__(self):
        tables = {}
        for name, rows in self.cpts.items():
            tables[name] = {tuple(str(x) for x in key): tuple(row) for key, row in rows.items()}
        object.__setattr__(self, "cpts", tables)

    @classmethod
    def build(cls, variables, parents, cpts) -> "CausalBayesNet":
        return cls(Dag(tuple(variables), parents), cpts)

    @property
    def variables(self) -> tuple[Variable, ...]:
        return self.dag.variables

    @property
    def names(self) -> list[str]:
        return self.dag.names

    def variable(self, name: str) -> Variable:
        return self.dag.variable(name)

    def parents(self, name: str) -> tuple[str, ...]:
        self.variable(name)
        return self.dag.parents[name]

    @cached_property
    def report(self) -> ValidationReport:
        return _validate(self)

    @cached_property
    def compiled(self) -> "_Compiled":
        if not self.report.ok:
            raise InvalidNet(self.report.violations)
        return _Compiled(self)


class _Compiled:
    """Array form of a valid net: per-variable CPT arrays and the dense joint."""

    def __init__(self, net: CausalBayesNet):
        dag = net.dag
        self.names = dag.names
        self.index = {n: k for k, n in enumerate(self.names)}
        self.dims = tuple(len(v.domain) for v in dag.variables)
        cells = math.prod(self.dims)
        if cells > MAX_CELLS:
            raise ValueError(f"net has {cells} joint cells; enumeration limit is {MAX_CELLS}")
        self.order = [self.index[v.name] for v in topological_order(dag)]
        self.parent_idx = [tuple(self.index[p] for p in dag.parents[n]) for n in self.names]
        self.cpt = []
        for var in dag.variables:
            pa = [dag.variable(p) for p in dag.parents[var.name]]
            arr = np.empty(tuple(len(p.domain) for p in pa) + (len(var.domain),))
            for key in product(*(range(len(p.domain)) for p in pa)):
                labels = tuple(p.domain[k] for p, k in zip(pa, key))
                arr[key] = net.cpts[var.name][labels]
            self.cpt.append(arr)

        joint = np.ones(self.dims)
        n = len(self.names)
        for k in range(n):
            axes = list(self.parent_idx[k]) + [k]
            perm = np.argsort(axes)
            shape = [1] * n
            for a in axes:
                shape[a] = self.dims[a]
            joint = joint * self.cpt[k].transpose(perm).reshape(shape)
        joint.setflags(write=False)
        self.joint = joint

    def locate(self, assignment: dict[int, int]):
        return tuple(assignment.get(k, slice(None)) for k in range(len(self.names)))

    def mass(self, assignment: dict[int, int]) -> float:
        sub = self.joint[self.locate(assignment)]
        return math.fsum(np.ravel(sub).tolist())


def _validate(net: CausalBayesNet) -> ValidationReport:
    rep = ValidationReport()
    dag = net.dag
    names = [v.name for v in dag.variables]
    seen = set()
    for v in dag.variables:
        if v.name in seen:
            rep.add("DuplicateVariable", v.name, "", "variable declared more than once")
        seen.add(v.name)
        if len(v.domain) < 1:
            rep.add("EmptyDomain", v.name, "", "domain has no values")
        if len(set(v.domain)) != len(v.domain):
            rep.add("DuplicateValue", v.name, "", f"domain values repeat: {list(v.domain)}")
    known = set(names)
    for child, pa in dag.parents.items():
        if child not in known:
            rep.add("UnknownVariable", child, "", "parents given for an undeclared variable")
            continue
        for p in pa:
            if p not in known:
                rep.add("UnknownParent", child, p, f"parent {p!r} is not declared")
        if len(set(pa)) != len(pa):
            rep.add("DuplicateParent", child, "", f"parent list repeats: {list(pa)}")
    if not any(v.kind in ("UnknownParent", "DuplicateVariable") for v in rep.violations):
        try:
            topological_order(dag)
        except CyclicGraph as exc:
            rep.add("CyclicGraph", None, "", str(exc))

    for name in net.cpts:
        if name not in known:
            rep.add("ExtraCpt", name, "", "CPT given for an undeclared variable")
    for var in dag.variables:
        rows = net.cpts.get(var.name)
        if rows is None:
            rep.add("MissingCpt", var.name, "", "no conditional probability table")
            continue
        pa_names = dag.parents.get(var.name, ())
        if any(p not in known for p in pa_names):
            continue
        pa_domains = [dag.variable(p).domain for p in pa_names]
        expected = set(product(*pa_domains))
        for key in sorted(expected - set(rows)):
            rep.add("MissingRow", var.name, ",".join(key), "no row for this parent combination")
        for key in rows:
            if key not in expected:
                rep.add("UnknownRow", var.name, ",".join(key), "row key is not a parent combination")
        for key in sorted(set(rows) & expected):
            row = rows[key]
            loc = ",".join(key)
            if len(row) != len(var.domain):
                rep.add("RowLength", var.name, loc, f"{len(row)} entries for {len(var.domain)} values")
                continue
            try:
                vals = [float(p) for p in row]
            except (TypeError, ValueError):
                rep.add("EntryRange", var.name, loc, f"non-numeric entry in {list(row)}")
                continue
            bad = [p for p in vals if not (0.0 <= p <= 1.0)]
            if bad:
                rep.add("EntryRange", var.name, loc, f"entries outside [0, 1]: {bad}")
                continue
            total = math.fsum(vals)
            if abs(total - 1.0) > ROW_SUM_TOL:
                rep.add("RowSumViolation", var.name, loc, f"row sums to {total!r}")
    return rep


def validate(net: CausalBayesNet) -> ValidationReport:
    return net.report


def _indexed(net: CausalBayesNet, assignment: Assignment) -> dict[int, int]:
    comp = net.compiled
    out = {}
    for name, value in assignment.items():
        if name not in comp.index:
            raise UnknownVariable(f"unknown variable {name!r}")
        out[comp.index[name]] = net.variable(name).index(value)
    return out


def _require_full(net: CausalBayesNet, v: Assignment):
    missing = [n for n in net.names if n not in v]
    if missing:
        raise ValueError(f"full assignment is missing {missing}")


def joint_probability(net: CausalBayesNet, v: Assignment) -> float:
    """Product of one CPT entry per variable, in declaration order."""
    comp = net.compiled
    _require_full(net, v)
    idx = _indexed(net, v)
    p = 1.0
    for k in range(len(comp.names)):
        key = tuple(idx[j] for j in comp.parent_idx[k]) + (idx[k],)
        p = p * float(comp.cpt[k][key])
    return p


def event_probability(net: CausalBayesNet, e: Assignment) -> float:
    return net.compiled.mass(_indexed(net, e))


def conditional_probability(net: CausalBayesNet, target: Assignment, given: Assignment) -> float:
    overlap = set(target) & set(given)
    if overlap:
        raise OverlappingAssignments(f"target and given share {sorted(overlap)}")
    comp = net.compiled
    t, g = _indexed(net, target), _indexed(net, given)
    denom = comp.mass(g)
    if denom == 0.0:
        raise ZeroProbabilityCondition(f"conditioning event {dict(given)} has probability 0")
    return comp.mass({**t, **g}) / denom


def _conditional_indexed(comp: _Compiled, t: dict[int, int], g: dict[int, int]) -> float:
    """P(t | g) where t may mention variables fixed by g."""
    denom = comp.mass(g)
    if denom == 0.0:
        names = {comp.names[k]: v for k, v in g.items()}
        raise ZeroProbabilityCondition(f"conditioning event {names} has probability 0")
    free = {}
    for k, val in t.items():
        if k in g:
            if g[k] != val:
                return 0.0
        else:
            free[k] = val
    if not free:
        return 1.0
    return comp.mass({**free, **g}) / denom


def do_query_complete(net: CausalBayesNet, x: str, xval, v: Assignment, target: Assignment) -> float:
    """Counterfactual probability of ``target`` had ``x`` been ``xval``, given full evidence ``v``.

    Conditions on ``x = xval`` together with ``v`` restricted to the
    non-descendants of ``x``.
    """
    _require_full(net, v)
    nd = non_descendants(net, x)
    given = {x: xval, **{n: v[n] for n in nd}}
    return _conditional_indexed(net.compiled, _indexed(net, target), _indexed(net, given))


def _do_query_mask(net, x, xval, mask, target) -> float:
    comp = net.compiled
    weights = np.where(mask, comp.joint, 0.0)
    total = math.fsum(weights[weights > 0].tolist())
    if total == 0.0:
        raise ZeroProbabilityEvidence("evidence has probability 0")
    xi = comp.index[x]
    xv = net.variable(x).index(xval)
    t = _indexed(net, target)
    nd = sorted(comp.index[n] for n in non_descendants(net, x))
    inner: dict[tuple, float] = {}
    terms = []
    for cell in zip(*np.nonzero(weights)):
        key = tuple(int(cell[k]) for k in nd)
        if key not in inner:
            g = dict(zip(nd, key))
            g[xi] = xv
            inner[key] = _conditional_indexed(comp, t, g)
        terms.append(inner[key] * (float(weights[cell]) / total))
    return math.fsum(terms)


def do_query_evidence(net: CausalBayesNet, x: str, xval, evidence: Assignment, target: Assignment) -> float:
    """Counterfactual probability of ``target`` under ``do(x = xval)`` given partial evidence.

    Averages :func:`do_query_complete` over every full assignment with positive
    probability given the evidence, weighted by that probability. Assignments
    with zero weight are skipped before their inner query is evaluated.
    """
    comp = net.compiled
    net.variable(x)
    mask = np.zeros(comp.dims, dtype=bool)
    mask[comp.locate(_indexed(net, evidence))] = True
    return _do_query_mask(net, x, xval, mask, target)


def do_query_any(net: CausalBayesNet, x: str, xval, evidence: Iterable[Assignment], target: Assignment) -> float:
    """:func:`do_query_evidence` for disjunctive evidence (any of several partial assignments)."""
    comp = net.compiled
    net.variable(x)
    mask = np.zeros(comp.dims, dtype=bool)
    for e in evidence:
        mask[comp.locate(_indexed(net, e))] = True
    return _do_query_mask(net, x, xval, mask, target)


def full_assignments(net: CausalBayesNet):
    """Every full assignment, as dicts of labels, in row-major declaration order."""
    doms = [v.domain for v in net.variables]
    for combo in product(*doms):
        yield dict(zip(net.names, combo))


def total_probability(net: CausalBayesNet) -> float:
    """Sum of the joint over all full assignments (should be 1)."""
    return math.fsum(np.ravel(net.compiled.joint).tolist())


# -- JSON interchange ---------------------------------------------------------

def net_to_dict(net: CausalBayesNet) -> dict:
    out = []
    for var in net.variables:
        pa = list(net.dag.parents[var.name])
        rows = [
            {"given": list(key), "probs": [float(p) for p in net.cpts[var.name][key]]}
            for key in product(*(net.variable(p).domain for p in pa))
        ]
        out.append({"name": var.name, "domain": list(var.domain), "parents": pa, "cpt": rows})
    return {"variables": out}


def net_from_dict(data: Mapping) -> CausalBayesNet:
    variables, parents, cpts = [], {}, {}
    for entry in data["variables"]:
        name = entry["name"]
        variables.append(Variable(name, tuple(entry["domain"])))
        parents[name] = tuple(entry.get("parents", ()))
        cpts[name] = {tuple(row["given"]): tuple(row["probs"]) for row in entry["cpt"]}
    return CausalBayesNet.build(variables, parents, cpts)
