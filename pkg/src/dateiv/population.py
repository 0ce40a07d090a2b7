"""Individuals with stochastic potential outcomes and the estimands built on them.

Each individual carries four Bernoulli parameters:

* ``tau0`` / ``tau1``: chance of taking the treatment if assigned to control /
  to treatment;
* ``kappa0`` / ``kappa1``: chance of being cured if the treatment is not taken /
  is taken.

All sums go through :func:`math.fsum`, which makes every estimand independent of
the order of individuals.
"""
from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DuplicateId, NoCompliers, NotDeterministic, RangeError

PARAMETERS = ("tau0", "tau1", "kappa0", "kappa1")


def _check_probability(name: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise RangeError(name, value)
    value = float(value)
    if not (0.0 <= value <= 1.0):  # also rejects nan
        raise RangeError(name, value)
    return value


@dataclass(frozen=True)
class Individual:
    id: str
    tau0: float
    tau1: float
    kappa0: float
    kappa1: float

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        for name in PARAMETERS:
            object.__setattr__(self, name, _check_probability(name, getattr(self, name)))

    @property
    def parameters(self) -> tuple[float, float, float, float]:
        return (self.tau0, self.tau1, self.kappa0, self.kappa1)


@dataclass(frozen=True)
class Population:
    """Non-empty ordered collection of individuals with distinct ids."""

    individuals: tuple[Individual, ...]
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        inds = tuple(self.individuals)
        if not inds:
            raise ValueError("a population needs at least one individual")
        dupes = [i for i, c in Counter(ind.id for ind in inds).items() if c > 1]
        if dupes:
            raise DuplicateId(f"duplicate individual id(s): {', '.join(dupes)}")
        object.__setattr__(self, "individuals", inds)
        object.__setattr__(self, "_by_id", {ind.id: ind for ind in inds})

    @classmethod
    def from_tuples(cls, rows: Iterable[Sequence]) -> "Population":
        """Build from ``(id, tau0, tau1, kappa0, kappa1)`` rows."""
        return cls(tuple(Individual(*row) for row in rows))

    @property
    def N(self) -> int:
        return len(self.individuals)

    @property
    def ids(self) -> list[str]:
        return [ind.id for ind in self.individuals]

    def __len__(self):
        return len(self.individuals)

    def __iter__(self):
        return iter(self.individuals)

    def __getitem__(self, key):
        if isinstance(key, str):
            return self._by_id[key]
        return self.individuals[key]


class ComplianceClass(enum.Enum):
    COMPLIER = "complier"
    INDIFFERENT_TAKER = "indifferent"
    DEFIER = "defier"


def degree_of_compliance(ind: Individual) -> float:
    return ind.tau1 - ind.tau0


def individual_treatment_effect(ind: Individual) -> float:
    return ind.kappa1 - ind.kappa0


def classify(ind: Individual) -> ComplianceClass:
    # exact comparison against zero, no tolerance band
    dc = degree_of_compliance(ind)
    if dc > 0:
        return ComplianceClass.COMPLIER
    if dc < 0:
        return ComplianceClass.DEFIER
    return ComplianceClass.INDIFFERENT_TAKER


def compliers(pop: Population) -> list[Individual]:
    return [ind for ind in pop if degree_of_compliance(ind) > 0]


def census(pop: Population) -> dict[str, int]:
    """Count of individuals per compliance class, keyed by class value."""
    counts = {c.value: 0 for c in ComplianceClass}
    for ind in pop:
        counts[classify(ind).value] += 1
    return counts


def date_weights(pop: Population) -> dict[str, float]:
    """Weight of each complier in the DATE, proportional to its degree of compliance."""
    com = compliers(pop)
    if not com:
        raise NoCompliers("population has no individual with tau1 > tau0")
    total = math.fsum(degree_of_compliance(ind) for ind in com)
    return {ind.id: degree_of_compliance(ind) / total for ind in com}


def date(pop: Population) -> float:
    """Degree-of-compliance-weighted average treatment effect over compliers.

    Evaluated as ``sum(DC * ITE) / sum(DC)``, the same weighted average with the
    normalisation pulled out of the sum. Defiers are ignored rather than
    rejected; only :func:`dateiv.iv.theorem1_check` enforces no-defiers.
    """
    com = compliers(pop)
    if not com:
        raise NoCompliers("population has no individual with tau1 > tau0")
    num = math.fsum(degree_of_compliance(i) * individual_treatment_effect(i) for i in com)
    den = math.fsum(degree_of_compliance(i) for i in com)
    return num / den


def is_deterministic(pop: Population) -> bool:
    return all(p in (0.0, 1.0) for ind in pop for p in ind.parameters)


def classic_compliers(pop: Population) -> list[Individual]:
    return [ind for ind in pop if ind.tau0 == 0.0 and ind.tau1 == 1.0]


def late(pop: Population) -> float:
    """Plain mean treatment effect over classic compliers (tau0=0, tau1=1)."""
    if not is_deterministic(pop):
        raise NotDeterministic("LATE needs every parameter to be exactly 0 or 1")
    com = classic_compliers(pop)
    if not com:
        raise NoCompliers("population has no classic complier")
    return math.fsum(individual_treatment_effect(i) for i in com) / len(com)


@dataclass(frozen=True)
class AssumptionReport:
    holds: bool
    violators: list[str]


def check_no_defiers(pop: Population) -> AssumptionReport:
    violators = [ind.id for ind in pop if ind.tau1 < ind.tau0]
    return AssumptionReport(holds=not violators, violators=violators)


def check_compliers_exist(pop: Population) -> bool:
    return any(degree_of_compliance(ind) > 0 for ind in pop)
