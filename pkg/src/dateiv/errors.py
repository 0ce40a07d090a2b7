"""Exception hierarchy shared across dateiv modules."""


class DateIvError(Exception):
    """Base class for every error raised by this package."""


# population
class NoCompliers(DateIvError):
    pass


class NotDeterministic(DateIvError):
    pass


# cbn
class CyclicGraph(DateIvError, ValueError):
    pass


class UnknownVariable(DateIvError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class UnknownValue(DateIvError, ValueError):
    pass


class InvalidNet(DateIvError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations[:5])
        more = "" if len(self.violations) <= 5 else f" (+{len(self.violations) - 5} more)"
        super().__init__(f"invalid causal Bayes net: {lines}{more}")


class OverlappingAssignments(DateIvError, ValueError):
    pass


class ZeroProbabilityCondition(DateIvError):
    pass


class ZeroProbabilityEvidence(DateIvError):
    pass


# iv / sim
class ZeroDenominator(DateIvError):
    pass


class EmptyArm(DateIvError):
    pass


class ZeroSampleDenominator(DateIvError):
    pass


# scenarios
class ScenarioError(DateIvError, ValueError):
    pass


class ParseError(ScenarioError):
    def __init__(self, message, *, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class RangeError(ScenarioError):
    def __init__(self, field, value):
        self.field = field
        self.value = value
        super().__init__(f"{field} = {value!r} is outside [0, 1]")


class DuplicateId(ScenarioError):
    pass


class UnknownScenario(DateIvError, KeyError):
    def __str__(self):
        return Exception.__str__(self)
