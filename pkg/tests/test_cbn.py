import math
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dateiv import cbn
from dateiv.cbn import CausalBayesNet, Dag, Variable, binary
from dateiv.errors import (
    CyclicGraph,
    InvalidNet,
    OverlappingAssignments,
    UnknownValue,
    UnknownVariable,
    ZeroProbabilityCondition,
    ZeroProbabilityEvidence,
)
from dateiv.scenarios import generate_random_net


def chain(p_a=0.3, p_b=(0.2, 0.9)):
    """A -> B, both binary."""
    return CausalBayesNet.build(
        [binary("A"), binary("B")],
        {"B": ("A",)},
        {"A": {(): (1 - p_a, p_a)}, "B": {("0",): (1 - p_b[0], p_b[0]), ("1",): (1 - p_b[1], p_b[1])}},
    )


# -- graph ------------------------------------------------------------------

def test_topological_order_fig3(two_mixed_net):
    assert [v.name for v in cbn.topological_order(two_mixed_net)] == ["Assign", "Indiv", "Take", "Cure"]


def test_topological_order_stable_tie_break():
    dag = Dag((binary("C"), binary("B"), binary("A")), {"C": ("A",)})
    assert [v.name for v in cbn.topological_order(dag)] == ["B", "A", "C"]


def test_topological_order_single_and_cycle():
    assert [v.name for v in cbn.topological_order(Dag((binary("X"),), {}))] == ["X"]
    with pytest.raises(CyclicGraph):
        cbn.topological_order(Dag((binary("A"), binary("B")), {"A": ("B",), "B": ("A",)}))


@pytest.mark.parametrize("x,expected", [
    ("Take", {"Assign", "Indiv"}),
    ("Cure", {"Assign", "Indiv", "Take"}),
    ("Assign", {"Indiv"}),
    ("Indiv", {"Assign"}),
])
def test_non_descendants_fig3(two_mixed_net, x, expected):
    assert cbn.non_descendants(two_mixed_net, x) == expected


def test_non_descendants_unknown(two_mixed_net):
    with pytest.raises(UnknownVariable):
        cbn.non_descendants(two_mixed_net, "Nope")


# -- inference on the worked example ---------------------------------------

def test_joint_probability_examples(two_mixed_net):
    v = {"Assign": "1", "Indiv": "1", "Take": "1", "Cure": "1"}
    assert cbn.joint_probability(two_mixed_net, v) == pytest.approx(0.14, abs=1e-15)
    point = CausalBayesNet.build([binary("A")], {}, {"A": {(): (0.0, 1.0)}})
    assert cbn.joint_probability(point, {"A": "1"}) == 1.0
    assert cbn.joint_probability(point, {"A": "0"}) == 0.0


def test_joint_probability_needs_full_assignment(two_mixed_net):
    with pytest.raises(ValueError):
        cbn.joint_probability(two_mixed_net, {"Assign": "1"})


def test_event_probability_examples(two_mixed_net):
    assert cbn.event_probability(two_mixed_net, {}) == pytest.approx(1.0, abs=1e-15)
    assert cbn.event_probability(two_mixed_net, {"Take": "1", "Assign": "1"}) == pytest.approx(0.325, abs=1e-15)
    v = {"Assign": "0", "Indiv": "2", "Take": "1", "Cure": "0"}
    assert cbn.event_probability(two_mixed_net, v) == cbn.joint_probability(two_mixed_net, v)


def test_conditional_probability_examples(two_mixed_net):
    cp = cbn.conditional_probability
    assert cp(two_mixed_net, {"Take": "1"}, {"Assign": "1"}) == pytest.approx(0.65, abs=1e-15)
    assert cp(two_mixed_net, {"Cure": "1"}, {"Assign": "1"}) == pytest.approx(0.59, abs=1e-15)
    point = CausalBayesNet.build([binary("A"), binary("B")], {"B": ("A",)},
                                 {"A": {(): (0.0, 1.0)}, "B": {("0",): (1.0, 0.0), ("1",): (0.0, 1.0)}})
    assert cp(point, {"B": "1"}, {"A": "1"}) == 1.0


def test_conditional_probability_errors(two_mixed_net):
    point = CausalBayesNet.build([binary("A"), binary("B")], {},
                                 {"A": {(): (1.0, 0.0)}, "B": {(): (0.5, 0.5)}})
    with pytest.raises(ZeroProbabilityCondition):
        cbn.conditional_probability(point, {"B": "1"}, {"A": "1"})
    with pytest.raises(OverlappingAssignments):
        cbn.conditional_probability(two_mixed_net, {"Take": "1"}, {"Take": "1"})
    with pytest.raises(UnknownVariable):
        cbn.conditional_probability(two_mixed_net, {"Bogus": "1"}, {})
    with pytest.raises(UnknownValue):
        cbn.conditional_probability(two_mixed_net, {"Cure": "2"}, {})


def test_do_query_complete_examples(two_mixed_net):
    v = {"Assign": "0", "Indiv": "1", "Take": "0", "Cure": "0"}
    assert cbn.do_query_complete(two_mixed_net, "Take", "1", v, {"Cure": "1"}) == pytest.approx(0.7, abs=1e-15)
    v = {"Assign": "0", "Indiv": "2", "Take": "0", "Cure": "1"}
    assert cbn.do_query_complete(two_mixed_net, "Assign", "1", v, {"Take": "1"}) == pytest.approx(0.5, abs=1e-15)
    assert cbn.do_query_complete(two_mixed_net, "Take", "1", v, {"Take": "1"}) == 1.0
    assert cbn.do_query_complete(two_mixed_net, "Take", "1", v, {"Take": "0"}) == 0.0


def test_do_query_complete_zero_condition():
    net = chain(p_a=1.0)
    with pytest.raises(ZeroProbabilityCondition):
        cbn.do_query_complete(net, "A", "0", {"A": "1", "B": "1"}, {"B": "1"})


def test_do_query_evidence_examples(two_mixed_net):
    dq = cbn.do_query_evidence
    assert dq(two_mixed_net, "Take", "1", {"Indiv": "1"}, {"Cure": "1"}) == pytest.approx(0.7, abs=1e-12)
    assert dq(two_mixed_net, "Take", "1", {}, {"Cure": "1"}) == pytest.approx(0.8, abs=1e-12)
    v = {"Assign": "1", "Indiv": "2", "Take": "0", "Cure": "1"}
    assert dq(two_mixed_net, "Take", "1", v, {"Cure": "1"}) == cbn.do_query_complete(
        two_mixed_net, "Take", "1", v, {"Cure": "1"})


def test_do_query_evidence_abduction():
    # A -> B; evidence on the effect B shifts belief about the cause A.
    net = chain(p_a=0.5, p_b=(0.2, 0.9))
    post_a1 = 0.5 * 0.9 / (0.5 * 0.9 + 0.5 * 0.2)
    # do(B=1) leaves A's posterior given B=1 untouched; target A=1
    assert cbn.do_query_evidence(net, "B", "1", {"B": "1"}, {"A": "1"}) == pytest.approx(post_a1, abs=1e-15)


def test_do_query_evidence_zero_evidence():
    net = chain(p_a=1.0)
    with pytest.raises(ZeroProbabilityEvidence):
        cbn.do_query_evidence(net, "B", "1", {"A": "0"}, {"B": "1"})


def test_do_query_evidence_skips_zero_weight_assignments():
    # A=0 is impossible, so its undefined inner query never enters the sum
    net = chain(p_a=1.0, p_b=(0.5, 0.25))
    assert cbn.do_query_evidence(net, "A", "1", {}, {"B": "1"}) == 0.25


def test_do_query_any_matches_single_and_union(two_mixed_net):
    one = cbn.do_query_evidence(two_mixed_net, "Take", "1", {"Indiv": "1"}, {"Cure": "1"})
    assert cbn.do_query_any(two_mixed_net, "Take", "1", [{"Indiv": "1"}], {"Cure": "1"}) == one
    both = cbn.do_query_any(two_mixed_net, "Take", "1", [{"Indiv": "1"}, {"Indiv": "2"}], {"Cure": "1"})
    assert both == pytest.approx(cbn.do_query_evidence(two_mixed_net, "Take", "1", {}, {"Cure": "1"}), abs=1e-15)


# -- validation ---------------------------------------------------------------

def test_validate_clean(two_mixed_net):
    assert cbn.validate(two_mixed_net).ok


def test_validate_row_sum():
    net = chain(p_b=(0.2, 0.9))
    bad = CausalBayesNet(net.dag, {**net.cpts, "A": {(): (0.5, 0.4)}})
    rep = cbn.validate(bad)
    assert rep.kinds() == ["RowSumViolation"]
    assert rep.violations[0].variable == "A"
    with pytest.raises(InvalidNet):
        cbn.event_probability(bad, {})


def test_validate_missing_row():
    net = chain()
    bad = CausalBayesNet(net.dag, {**net.cpts, "B": {("0",): (0.5, 0.5)}})
    rep = cbn.validate(bad)
    assert rep.kinds() == ["MissingRow"]
    assert rep.violations[0].location == "1"


def test_validate_reports_every_problem():
    dag = Dag((binary("A"), binary("B")), {"A": ("B",), "B": ("A",)})
    rep = cbn.validate(CausalBayesNet(dag, {"A": {}, "Z": {}}))
    assert set(rep.kinds()) == {"CyclicGraph", "ExtraCpt", "MissingCpt", "MissingRow"}
    dag = Dag((binary("A"),), {"A": ("Ghost",)})
    rep = cbn.validate(CausalBayesNet(dag, {"A": {(): (0.5, 0.5)}}))
    assert "UnknownParent" in rep.kinds()
    rep = cbn.validate(CausalBayesNet(Dag((binary("A"),), {}), {"A": {(): (1.5, -0.5)}}))
    assert rep.kinds() == ["EntryRange"]
    rep = cbn.validate(CausalBayesNet(Dag((binary("A"),), {}), {"A": {(): (1.0,)}}))
    assert rep.kinds() == ["RowLength"]


def test_json_round_trip(two_mixed_net):
    again = cbn.net_from_dict(cbn.net_to_dict(two_mixed_net))
    assert again.cpts == two_mixed_net.cpts
    assert dict(again.dag.parents) == dict(two_mixed_net.dag.parents)
    assert np.array_equal(again.compiled.joint, two_mixed_net.compiled.joint)


# -- properties over random nets -------------------------------------------

seeds = st.integers(0, 2**32 - 1)


def random_net(seed):
    return generate_random_net(np.random.default_rng(seed))


@given(seeds)
def test_joint_normalises(seed):
    net = random_net(seed)
    assert abs(cbn.total_probability(net) - 1.0) <= 1e-9


@given(seeds)
def test_dense_joint_matches_scalar_factorisation(seed):
    net = random_net(seed)
    for v in cbn.full_assignments(net):
        assert cbn.event_probability(net, v) == cbn.joint_probability(net, v)


@settings(max_examples=60)
@given(seeds, st.randoms(use_true_random=False))
def test_causal_markov_condition(seed, rnd):
    net = random_net(seed)
    for var in net.variables:
        pa = net.parents(var.name)
        nd = sorted(cbn.non_descendants(net, var.name) - set(pa))
        extra = rnd.sample(nd, k=rnd.randint(0, len(nd)))
        for v in cbn.full_assignments(net):
            given_ = {n: v[n] for n in (*pa, *extra)}
            if cbn.event_probability(net, given_) == 0:
                continue
            key = tuple(v[p] for p in pa)
            entry = net.cpts[var.name][key][var.domain.index(v[var.name])]
            got = cbn.conditional_probability(net, {var.name: v[var.name]}, given_)
            assert got == pytest.approx(entry, abs=1e-9)


@given(seeds, st.randoms(use_true_random=False))
def test_event_probability_monotone(seed, rnd):
    net = random_net(seed)
    v = rnd.choice(list(cbn.full_assignments(net)))
    names = net.names[:]
    rnd.shuffle(names)
    e, prev = {}, cbn.event_probability(net, {})
    for n in names:
        e[n] = v[n]
        p = cbn.event_probability(net, e)
        assert p <= prev
        prev = p


@given(seeds, st.data())
def test_do_on_root_is_ordinary_conditioning(seed, data):
    net = random_net(seed)
    roots = [n for n in net.names if not net.parents(n)]
    x = data.draw(st.sampled_from(roots))
    v = data.draw(st.sampled_from(list(cbn.full_assignments(net))))
    xval = data.draw(st.sampled_from(net.variable(x).domain))
    target_var = data.draw(st.sampled_from(net.names))
    tval = data.draw(st.sampled_from(net.variable(target_var).domain))
    nd = cbn.non_descendants(net, x)
    given_ = {x: xval, **{r: v[r] for r in roots if r != x}, **{n: v[n] for n in nd}}
    got = cbn.do_query_complete(net, x, xval, v, {target_var: tval})
    if target_var in given_:
        assert got == (1.0 if given_[target_var] == tval else 0.0)
    else:
        assert got == cbn.conditional_probability(net, {target_var: tval}, given_)


@given(seeds, st.data())
def test_do_query_evidence_full_equals_complete(seed, data):
    net = random_net(seed)
    v = data.draw(st.sampled_from(list(cbn.full_assignments(net))))
    x = data.draw(st.sampled_from(net.names))
    xval = data.draw(st.sampled_from(net.variable(x).domain))
    t = data.draw(st.sampled_from(net.names))
    target = {t: data.draw(st.sampled_from(net.variable(t).domain))}
    assert cbn.do_query_evidence(net, x, xval, v, target) == cbn.do_query_complete(net, x, xval, v, target)
