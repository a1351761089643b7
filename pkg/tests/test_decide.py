import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import EXAMPLE_ACCEPTED, EXAMPLE_REJECTED, batch_oracle
from ncca.ca import NC_RULES, RuleVector
from ncca.decide import (
    LAST_KEEP,
    PENULTIMATE_KEEP,
    STEP5_CONDITIONS,
    Accepted,
    NonNCRule,
    NonzeroLeafWeight,
    Step5Violation,
    Step6Violation,
    SuperNode,
    Verdict,
    WeightConflict,
    WeightConflictError,
    advance,
    check_step5,
    check_step6,
    decide_ncca,
    find_next_weight,
    weights_outside_table,
)
from ncca.oracle import brute_force_is_ncca


def full_node(weight=0, **overrides):
    """Super node with every RMT present; ``w{k}_{r}=x`` overrides one weight."""
    maps = [{r: weight for r in range(8)} for _ in range(4)]
    for key, w in overrides.items():
        k, r = key[1:].split("_")
        maps[int(k)][int(r)] = w
    return SuperNode.from_maps(maps)


def antecedents(node):
    return [cid for cid, k, r, demands in STEP5_CONDITIONS if node.weights[k][r] in demands]


class TestFindNextWeight:
    def test_rule_192_on_pair_2_3(self):
        g, w = find_next_weight(192, {2, 3}, {2: 0, 3: 0})
        assert g == {4, 5, 6, 7}
        assert w == {4: 1, 5: 1, 6: 1, 7: 1}

    def test_rule_192_on_pair_0_1(self):
        g, w = find_next_weight(192, {0, 1}, {0: 0, 1: 0})
        assert g == {0, 1, 2, 3}
        assert set(w.values()) == {0}

    def test_identity_keeps_zero(self):
        g, w = find_next_weight(204, range(8), {r: 0 for r in range(8)})
        assert g == set(range(8)) and set(w.values()) == {0}

    def test_conflict(self):
        # 0 and 4 both feed {0, 1}; under 204 they keep their distinct weights
        with pytest.raises(WeightConflictError) as info:
            find_next_weight(204, {0, 4}, {0: 0, 4: 1})
        assert info.value.rmt == 0 and info.value.weights == (0, 1)

    def test_advance_matches_per_set(self):
        node = SuperNode.root()
        for rule in (192, 136, 184):
            nxt = advance(node, rule)
            for k, m in enumerate(node.maps()):
                g, w = find_next_weight(rule, m, m)
                assert nxt.maps()[k] == w
            node = nxt


class TestStepChecks:
    def test_condition_x_holds_for_136(self):
        node = full_node(w2_3=0)
        assert node.weights[2][3] == 0
        assert check_step5(node, 136) is None

    def test_condition_i_violated(self):
        rule = 0b10000100  # R[2] = 1, R[7] = 1
        assert check_step5(full_node(w0_2=-1), rule) == "i"

    def test_identity_all_zero(self):
        assert check_step5(full_node(), 204) is None
        assert check_step6(full_node(), 204) is None

    def test_step6_all_zero_240(self):
        # 240 sends RMT 4 to 1 although W[4] = W[0]. The all-zero full node is
        # what 204,204 leaves at level 2, and brute force finds no conserving
        # vector with that prefix followed by 240.
        assert check_step6(full_node(), 240) == ("i", 0)
        assert decide_ncca([204, 204, 204] + [0, 0], trace=True).trace[2] == full_node()
        from itertools import product

        assert not any(
            brute_force_is_ncca((204, 204, 240) + tail) for tail in product(NC_RULES, repeat=3)
        )
        assert check_step6(full_node(), 136) is None

    def test_step6_violation_ii(self):
        node = full_node(w0_4=1, w0_0=0)
        assert check_step6(node, 204) == ("ii", 0)

    def test_step6_vacuous_when_absent(self):
        node = SuperNode.from_maps([{0: 0}, {4: 5}, {}, {}])
        assert check_step6(node, 0) is None
        assert check_step5(node, 255) is None


class TestWorkedExample:
    def test_verdicts(self):
        assert decide_ncca(EXAMPLE_ACCEPTED).accepted
        assert not decide_ncca(EXAMPLE_REJECTED).accepted

    def test_rule_239_rejected_at_cell_2(self):
        v = decide_ncca((170, 240, 239, 192, 204))
        assert v.reason == NonNCRule(2, 239)

    def test_identity(self):
        assert decide_ncca([204] * 5).reason == Accepted()

    def test_walkthrough(self):
        trace = decide_ncca(EXAMPLE_ACCEPTED, trace=True).trace
        assert len(trace) == 7
        assert trace[0] == SuperNode.root()
        n1 = trace[1]
        assert n1.maps() == [
            {0: 0, 1: 0, 2: 0, 3: 0},
            {4: 1, 5: 1, 6: 1, 7: 1},
            {0: 0, 1: 0, 2: 0, 3: 0},
            {4: 0, 5: 0, 6: 0, 7: 0},
        ]
        # only condition (x) is applicable to rule 136 at level 1
        assert antecedents(n1) == ["x"]
        n4, n5, n6 = trace[4], trace[5], trace[6]
        assert n4.gamma == tuple(g & n4.gamma[k] for k, g in enumerate(PENULTIMATE_KEEP))
        for k in (0, 1):
            assert n4.weights[k][4] == n4.weights[k][0]
        for k in (2, 3):
            assert n4.weights[k][3] == n4.weights[k][7]
        assert all(g <= LAST_KEEP[k] for k, g in enumerate(n5.gamma))
        assert n5.weights[0][4] == n5.weights[0][0]
        assert n5.weights[3][3] == n5.weights[3][7]
        assert n6.is_zero()

    def test_trace_json_roundtrip(self):
        v = decide_ncca(EXAMPLE_ACCEPTED, trace=True)
        data = json.loads(json.dumps(v.to_json()))
        assert Verdict.from_json(data) == v
        assert [t["level"] for t in data["trace"]] == list(range(7))

    def test_reject_json_roundtrip(self):
        for rv in (EXAMPLE_REJECTED, (170, 240, 239, 192, 204), (204, 204, 204, 204, 192)):
            v = decide_ncca(rv)
            assert Verdict.from_json(json.loads(json.dumps(v.to_json()))) == v


def test_small_n_rejected():
    with pytest.raises(ValueError, match="oracle"):
        decide_ncca((136, 252, 238, 192))


def test_reason_kinds_cover_enum():
    rng = random.Random(0)
    kinds = set()
    for _ in range(4000):
        rv = [rng.choice(NC_RULES) for _ in range(rng.randint(5, 8))]
        if rng.random() < 0.1:
            rv[rng.randrange(len(rv))] = rng.randrange(256)
        kinds.add(type(decide_ncca(rv).reason))
    assert {Accepted, NonNCRule, Step5Violation, Step6Violation, NonzeroLeafWeight} <= kinds
    assert WeightConflict in kinds


def test_exhaustive_n5_matches_oracle(n5_suite):
    vectors, truth = n5_suite
    bad = [v for v, t in zip(vectors, truth) if decide_ncca(v).accepted != t]
    assert bad == []


@pytest.mark.parametrize("n", [5, 6, 7])
def test_random_all_rules_matches_oracle(n):
    rng = random.Random(n)
    vectors = tuple(tuple(rng.randrange(256) for _ in range(n)) for _ in range(1000))
    truth = batch_oracle(vectors)
    assert [decide_ncca(v).accepted for v in vectors] == list(truth)


@pytest.mark.parametrize("n", [5, 6, 7])
def test_tail_cells_outside_nc_set(n):
    # The last two cells skip the membership check; mix arbitrary R[0]=0,
    # R[7]=1 rules there and compare with brute force.
    rng = random.Random(100 + n)
    tail_rules = [r for r in range(256) if r & 1 == 0 and r >> 7 == 1]
    vectors = tuple(
        tuple(rng.choice(NC_RULES) for _ in range(n - 2))
        + (rng.choice(tail_rules), rng.choice(tail_rules))
        for _ in range(2000)
    )
    truth = batch_oracle(vectors)
    assert [decide_ncca(v).accepted for v in vectors] == list(truth)


def test_accepted_counts_match_census():
    from itertools import product

    accepted6 = sum(decide_ncca(v).accepted for v in product(NC_RULES, repeat=6))
    assert accepted6 == 326


def test_weights_within_table_on_accepted_runs(n5_suite):
    vectors, truth = n5_suite
    for v, t in zip(vectors, truth):
        if t:
            assert weights_outside_table(decide_ncca(v, trace=True).trace) == []


def test_long_vector():
    assert decide_ncca([204] * 100_000).accepted
    assert decide_ncca([184] * 100_000).accepted
    assert not decide_ncca([184] * 99_999 + [136]).accepted


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(NC_RULES), min_size=5, max_size=10), st.integers(0, 9))
def test_rotation_invariance(rules, k):
    rv = RuleVector(rules)
    assert decide_ncca(rv).accepted == decide_ncca(rv.rotate(k)).accepted


@settings(max_examples=150, deadline=None)
@given(st.lists(st.sampled_from(NC_RULES + (160, 250, 239, 0, 255)), min_size=5, max_size=9))
def test_property_matches_oracle(rules):
    assert decide_ncca(rules).accepted == brute_force_is_ncca(rules)
