import json

import pytest
from hypothesis import given, strategies as st

from dateiv import cbn
from dateiv.errors import DuplicateId, ParseError, RangeError, UnknownScenario
from dateiv.iv import IvNetConfig, theorem1_check
from dateiv.population import Individual, Population, check_no_defiers, is_deterministic
from dateiv.scenarios import (
    builtin,
    catalog,
    export_net,
    generate_random,
    load,
    parse,
    save,
)


def doc(**over):
    d = {"schema_version": 1, "individuals": [
        {"id": "a", "tau0": 0.2, "tau1": 0.8, "kappa0": 0.1, "kappa1": 0.7}]}
    d.update(over)
    return json.dumps(d)


def test_round_trip(two_mixed, tmp_path):
    path = tmp_path / "s.json"
    save(two_mixed, IvNetConfig(0.3), path)
    assert load(path) == (two_mixed, IvNetConfig(0.3))


prob = st.floats(0.0, 1.0, allow_nan=False)


@given(st.lists(st.tuples(prob, prob, prob, prob), min_size=1, max_size=8), st.floats(1e-9, 1 - 1e-9))
def test_round_trip_lossless(rows, p):
    from dateiv.scenarios import dumps
    pop = Population.from_tuples((f"id{k}", *r) for k, r in enumerate(rows))
    assert parse(dumps(pop, IvNetConfig(p))) == (pop, IvNetConfig(p))


def test_defaults_and_int_ids():
    pop, cfg = parse(json.dumps({"schema_version": 1, "individuals": [
        {"id": 7, "tau0": 0, "tau1": 1, "kappa0": 0, "kappa1": 1}]}))
    assert cfg.p_assign == 0.5 and pop.ids == ["7"]


def test_range_error_names_field():
    text = doc(individuals=[{"id": "a", "tau0": 0.2, "tau1": 1.2, "kappa0": 0.1, "kappa1": 0.7}])
    with pytest.raises(RangeError, match=r"individuals\[0\]\.tau1"):
        parse(text)


def test_duplicate_id():
    row = {"id": "a", "tau0": 0.2, "tau1": 0.8, "kappa0": 0.1, "kappa1": 0.7}
    with pytest.raises(DuplicateId):
        parse(doc(individuals=[row, row]))


@pytest.mark.parametrize("text,field", [
    (doc(extra=1), "extra"),
    (doc(individuals=[{"id": "a", "tau0": 0, "tau1": 1, "kappa0": 0, "kappa1": 1, "x": 2}]), "individuals[0].x"),
    (doc(individuals=[{"id": "a", "tau0": 0, "tau1": 1, "kappa0": 0}]), "individuals[0].kappa1"),
    (doc(individuals=[{"id": "a", "tau0": "0", "tau1": 1, "kappa0": 0, "kappa1": 1}]), "individuals[0].tau0"),
    (doc(individuals=[]), "individuals"),
    (doc(schema_version=2), "schema_version"),
    (doc(p_assign=1.0), "p_assign"),
    (json.dumps({"individuals": []}), "schema_version"),
])
def test_parse_errors_carry_field(text, field):
    with pytest.raises(ParseError) as exc:
        parse(text)
    assert exc.value.field == field


def test_parse_error_carries_line():
    with pytest.raises(ParseError) as exc:
        parse('{\n  "schema_version": 1,\n  "individuals": [,]\n}')
    assert exc.value.line == 3
    with pytest.raises(ParseError):
        parse('{"schema_version": 1, "individuals": [{"id": "a", "tau0": NaN, "tau1": 1, "kappa0": 0, "kappa1": 1}]}')


def test_generate_constraints():
    assert check_no_defiers(generate_random(30, 1, no_defiers=True)).holds
    assert is_deterministic(generate_random(30, 1, deterministic=True))
    assert generate_random(10, 99) == generate_random(10, 99)
    assert generate_random(10, 99) != generate_random(10, 100)


@pytest.mark.parametrize("seed", range(25))
def test_generated_valid_populations_pass_theorem1(seed):
    pop = generate_random(1 + seed % 7, seed, no_defiers=True, force_complier=True)
    assert theorem1_check(pop, tol=1e-9).passed


def test_builtins(two_mixed):
    assert builtin("two-mixed") == two_mixed
    assert is_deterministic(builtin("classic-late"))
    assert builtin("paper-coarse")[0].kappa0 == 0.5
    assert set(catalog()) == {"paper-coarse", "two-mixed", "classic-late", "with-defier"}
    with pytest.raises(UnknownScenario):
        builtin("nope")


def test_export_net(two_mixed):
    net = cbn.net_from_dict(json.loads(export_net(two_mixed, IvNetConfig())))
    assert cbn.validate(net).ok
    assert net.cpts["Take"][("1", "1")][1] == 0.8
