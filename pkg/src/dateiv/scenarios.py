"""Scenario files, random populations, and the builtin catalog.

Scenario JSON (schema_version 1)::

    {
      "schema_version": 1,
      "p_assign": 0.5,                      # optional, default 0.5
      "individuals": [
        {"id": "1", "tau0": 0.2, "tau1": 0.8, "kappa0": 0.1, "kappa1": 0.7},
        ...
      ]
    }

Unknown keys are rejected at every level. Ids may be strings or integers and
are stored as strings. Floats are written with ``repr`` (shortest string that
round-trips), so ``load(save(x)) == x`` exactly.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .cbn import CausalBayesNet, Dag, Variable, net_to_dict
from .errors import DuplicateId, ParseError, RangeError, UnknownScenario
from .iv import IvNetConfig, build_iv_net
from .population import PARAMETERS, Individual, Population, check_compliers_exist

SCHEMA_VERSION = 1
FORCE_COMPLIER_ATTEMPTS = 1000

_TOP_KEYS = {"schema_version", "p_assign", "individuals"}
_IND_KEYS = {"id", *PARAMETERS}


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def parse(text: str, source: str = "<string>") -> tuple[Population, IvNetConfig]:
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}: {exc.msg} (column {exc.colno})", line=exc.lineno) from None
    except ValueError as exc:
        raise ParseError(f"{source}: {exc}") from None
    return from_dict(data)


def from_dict(data: Any) -> tuple[Population, IvNetConfig]:
    if not isinstance(data, dict):
        raise ParseError("top level must be a JSON object")
    extra = sorted(set(data) - _TOP_KEYS)
    if extra:
        raise ParseError(f"unknown field(s) {extra}", field=extra[0])
    if "schema_version" not in data:
        raise ParseError("missing mandatory field", field="schema_version")
    if data["schema_version"] != SCHEMA_VERSION or isinstance(data["schema_version"], bool):
        raise ParseError(f"unsupported schema_version {data['schema_version']!r}", field="schema_version")

    p = data.get("p_assign", 0.5)
    if not _is_number(p):
        raise ParseError("must be a number", field="p_assign")
    if not 0.0 < p < 1.0:
        raise ParseError(f"must lie strictly between 0 and 1, got {p!r}", field="p_assign")

    rows = data.get("individuals")
    if not isinstance(rows, list) or not rows:
        raise ParseError("must be a non-empty list", field="individuals")
    inds, seen = [], set()
    for k, row in enumerate(rows):
        where = f"individuals[{k}]"
        if not isinstance(row, dict):
            raise ParseError("must be an object", field=where)
        extra = sorted(set(row) - _IND_KEYS)
        if extra:
            raise ParseError(f"unknown field(s) {extra}", field=f"{where}.{extra[0]}")
        missing = [key for key in ("id", *PARAMETERS) if key not in row]
        if missing:
            raise ParseError("missing field", field=f"{where}.{missing[0]}")
        ident = row["id"]
        if isinstance(ident, bool) or not isinstance(ident, (str, int)) or str(ident) == "":
            raise ParseError("id must be a non-empty string or an integer", field=f"{where}.id")
        ident = str(ident)
        if ident in seen:
            raise DuplicateId(f"{where}.id: duplicate id {ident!r}")
        seen.add(ident)
        vals = {}
        for name in PARAMETERS:
            v = row[name]
            if not _is_number(v):
                raise ParseError("must be a number", field=f"{where}.{name}")
            if not 0.0 <= v <= 1.0:
                raise RangeError(f"{where}.{name}", v)
            vals[name] = float(v)
        inds.append(Individual(ident, **vals))
    return Population(tuple(inds)), IvNetConfig(float(p))


def to_dict(pop: Population, cfg: IvNetConfig = IvNetConfig()) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "p_assign": cfg.p_assign,
        "individuals": [
            {"id": ind.id, **{name: getattr(ind, name) for name in PARAMETERS}} for ind in pop
        ],
    }


def dumps(pop: Population, cfg: IvNetConfig = IvNetConfig()) -> str:
    return json.dumps(to_dict(pop, cfg), indent=2) + "\n"


def load(path) -> tuple[Population, IvNetConfig]:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse(text, source=str(path))


def save(pop: Population, cfg: IvNetConfig, path) -> None:
    Path(path).write_text(dumps(pop, cfg), encoding="utf-8")


def export_net(pop: Population, cfg: IvNetConfig, path=None) -> str:
    """The IV net for ``pop`` in the cbn JSON interchange format."""
    text = json.dumps(net_to_dict(build_iv_net(pop, cfg)), indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def generate_random(n: int, seed: int, *, no_defiers: bool = False, force_complier: bool = False,
                    deterministic: bool = False) -> Population:
    """Population of ``n`` individuals with i.i.d. parameters.

    Parameters are uniform on [0, 1], or uniform on {0, 1} if ``deterministic``.
    ``no_defiers`` sorts each (tau0, tau1) pair ascending. ``force_complier``
    redraws the whole population until some tau1 > tau0, giving up after
    1000 attempts.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.default_rng(seed)
    for _ in range(FORCE_COMPLIER_ATTEMPTS):
        if deterministic:
            params = rng.integers(0, 2, size=(n, 4)).astype(float)
        else:
            params = rng.random((n, 4))
        if no_defiers:
            params[:, :2] = np.sort(params[:, :2], axis=1)
        pop = Population(tuple(
            Individual(str(k + 1), *map(float, row)) for k, row in enumerate(params)
        ))
        if not force_complier or check_compliers_exist(pop):
            return pop
    raise RuntimeError(f"no complier drawn in {FORCE_COMPLIER_ATTEMPTS} attempts")


def generate_random_net(rng: np.random.Generator, *, n_vars: int | None = None, max_domain: int = 3,
                        edge_prob: float = 0.5) -> CausalBayesNet:
    """Random discrete net: edges only from earlier to later variables, Dirichlet(1) CPT rows."""
    from itertools import product

    if n_vars is None:
        n_vars = int(rng.integers(2, 6))
    variables = []
    for k in range(n_vars):
        size = int(rng.integers(2, max_domain + 1))
        variables.append(Variable(f"V{k}", tuple(str(v) for v in range(size))))
    parents = {}
    for k, var in enumerate(variables):
        parents[var.name] = tuple(variables[j].name for j in range(k) if rng.random() < edge_prob)
    cpts = {}
    for var in variables:
        doms = [variables[int(p[1:])].domain for p in parents[var.name]]
        cpts[var.name] = {
            key: tuple(float(x) for x in rng.dirichlet(np.ones(len(var.domain))))
            for key in product(*doms)
        }
    return CausalBayesNet(Dag(tuple(variables), parents), cpts)


BUILTINS = {
    "paper-coarse": (
        "one individual: 50% uptake if assigned, 50% cure chance without treatment",
        [("1", 0.0, 0.5, 0.5, 1.0)],
    ),
    "two-mixed": (
        "a stochastic complier and an indifferent taker; DATE = IV estimand = 0.6",
        [("1", 0.2, 0.8, 0.1, 0.7), ("2", 0.5, 0.5, 0.3, 0.9)],
    ),
    "classic-late": (
        "deterministic complier, always-taker and never-taker; DATE = LATE = 1",
        [("complier", 0.0, 1.0, 0.0, 1.0), ("always-taker", 1.0, 1.0, 0.0, 1.0),
         ("never-taker", 0.0, 0.0, 1.0, 0.0)],
    ),
    "with-defier": (
        "a complier and a defier; DATE = 0 but IV estimand = 1",
        [("1", 0.0, 0.5, 0.0, 0.0), ("2", 1.0, 0.0, 0.0, 0.5)],
    ),
}


def builtin(name: str) -> Population:
    try:
        _, rows = BUILTINS[name]
    except KeyError:
        raise UnknownScenario(f"unknown builtin scenario {name!r}; choose from {sorted(BUILTINS)}") from None
    return Population.from_tuples(rows)


def catalog() -> dict[str, str]:
    return {name: desc for name, (desc, _) in BUILTINS.items()}
