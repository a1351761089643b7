import itertools
import json
import random

import pytest

from conftest import EXAMPLE_ACCEPTED, SAMPLE_NCCA_4
from ncca.ca import NC_RULES, ResourceLimitError, rmt_sequence
from ncca.decide import POSSIBLE_WEIGHTS, decide_ncca
from ncca.oracle import brute_force_is_ncca, build_stg
from ncca.rtree import all_weights, build_tree, tree_decide_ncca


@pytest.fixture(scope="module")
def sample_tree():
    return build_tree(SAMPLE_NCCA_4, prune=False)


class TestSampleTree:
    def test_first_edge_label(self, sample_tree):
        assert sample_tree.edge(0, 0).label == ({0, 1}, {2}, {4, 5}, {6})

    def test_first_child(self, sample_tree):
        assert sample_tree.node(1, 0).gamma == ({0, 1, 2, 3}, {4, 5}, {0, 1, 2, 3}, {4, 5})

    def test_level_n_minus_2_restriction(self, sample_tree):
        assert sample_tree.node(2, 0).gamma[2] == {1, 3}

    def test_missing_edge(self, sample_tree):
        assert not sample_tree.edge(1, 2).reachable
        assert sample_tree.node(2, 2) is None

    def test_path_4012(self, sample_tree):
        weights = sample_tree.path_weights((4, 0, 1, 2))
        assert weights[:4] == [0, 0, 0, -1]
        assert weights[4] == 0
        assert (SAMPLE_NCCA_4[3] >> 2) & 1 == 0

    def test_root_weights_zero(self, sample_tree):
        root = sample_tree.levels[0][0]
        assert root.gamma == ({0, 1}, {2, 3}, {4, 5}, {6, 7})
        assert all(w == 0 for ws in root.weights for w in ws.values())

    def test_leaves_zero(self, sample_tree):
        assert all(w == 0 for leaf in sample_tree.leaves for ws in leaf.weights for w in ws.values())
        assert tree_decide_ncca(SAMPLE_NCCA_4).accepted

    def test_reachable_states_match_stg(self, sample_tree):
        assert sample_tree.reachable_states() == set(build_stg(SAMPLE_NCCA_4).reachable())

    def test_dot(self, sample_tree):
        dot = sample_tree.to_dot()
        assert dot.startswith('digraph "rtree"')
        assert "G0: {0(0), 1(0)}" in dot
        assert "style=dashed" in dot
        assert dot == build_tree(SAMPLE_NCCA_4, prune=False).to_dot()

    def test_json(self, sample_tree):
        data = json.loads(sample_tree.dumps())
        assert data["rules"] == list(SAMPLE_NCCA_4)
        assert data["levels"][1][0]["gamma"] == [[0, 1, 2, 3], [4, 5], [0, 1, 2, 3], [4, 5]]
        assert data["violations"] == []


def test_edge_partition_invariant():
    rng = random.Random(5)
    for _ in range(30):
        rv = [rng.choice(NC_RULES) for _ in range(6)]
        tree = build_tree(rv, prune=False)
        for level in tree.levels[:-1]:
            for node in level:
                e0 = tree.edge(node.level, 2 * node.index)
                e1 = tree.edge(node.level, 2 * node.index + 1)
                for k in range(4):
                    assert e0.label[k] | e1.label[k] == node.gamma[k]
                    assert not e0.label[k] & e1.label[k]
                    assert all((rv[node.level] >> r) & 1 == 0 for r in e0.label[k])


def test_leaf_sets_are_sibling_pairs():
    rng = random.Random(6)
    for _ in range(30):
        rv = [rng.choice(NC_RULES) for _ in range(5)]
        tree = build_tree(rv, prune=False)
        root = tree.levels[0][0]
        for leaf in tree.leaves:
            for k, g in enumerate(leaf.gamma):
                assert g <= root.gamma[k]


def test_sibling_rmts_share_weights():
    for rv in itertools.islice(itertools.product(NC_RULES, repeat=5), 0, 3000, 7):
        for level in build_tree(rv, prune=False).levels:
            for node in level:
                for ws in node.weights:
                    for r in ws:
                        if r ^ 1 in ws:
                            assert ws[r] == ws[r ^ 1]


def test_accepted_weights_in_table_and_equivalent_rmts_close():
    checked = 0
    for rv in itertools.product(NC_RULES, repeat=5):
        if not decide_ncca(rv).accepted:
            continue
        tree = build_tree(rv, prune=False)
        assert not tree.violations
        for level, _, k, r, w in all_weights(tree):
            assert w in POSSIBLE_WEIGHTS[k][r]
        by_level = {}
        for level, _, k, r, w in all_weights(tree):
            by_level.setdefault((level, k, r), set()).add(w)
        for (level, k, r), ws in by_level.items():
            other = by_level.get((level, k, r ^ 4))
            if other:
                assert abs(next(iter(ws)) - next(iter(other))) <= 1
        checked += 1
    assert checked == 125


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_agrees_with_oracle(n):
    rng = random.Random(n)
    for trial in range(500):
        if trial % 2:
            rv = [rng.randrange(256) for _ in range(n)]
        else:
            rv = [rng.choice(NC_RULES) for _ in range(n)]
        truth = brute_force_is_ncca(rv)
        assert tree_decide_ncca(rv, prune=True).accepted == truth
        assert tree_decide_ncca(rv, prune=False).accepted == truth
        if n >= 5:
            assert decide_ncca(rv).accepted == truth


@pytest.mark.parametrize("n", [5, 6, 7, 8])
def test_reachable_states_match_stg_random(n):
    rng = random.Random(20 + n)
    for _ in range(15):
        rv = [rng.choice(NC_RULES + (30, 90, 110)) for _ in range(n)]
        assert build_tree(rv, prune=False).reachable_states() == set(build_stg(rv).reachable())


def test_next_state_reads_off_path():
    tree = build_tree(EXAMPLE_ACCEPTED, prune=False)
    for s in range(64):
        config = format(s, "06b")
        seq = rmt_sequence(config)
        assert len(tree.path_weights(seq)) == 7


def test_pruning_shrinks_tree():
    full = build_tree(EXAMPLE_ACCEPTED, prune=False)
    pruned = build_tree(EXAMPLE_ACCEPTED, prune=True)
    assert sum(map(len, pruned.levels)) < sum(map(len, full.levels))
    assert any(node.pruned for level in pruned.levels for node in level)
    with pytest.raises(ValueError):
        pruned.reachable_states()


def test_pruned_handles_long_vectors():
    assert tree_decide_ncca([184] * 40).accepted
    assert not tree_decide_ncca([184] * 39 + [136]).accepted


def test_limits():
    with pytest.raises(ResourceLimitError):
        build_tree([204] * 17, prune=False)
    with pytest.raises(ResourceLimitError):
        build_tree([204] * 65, prune=True)
    with pytest.raises(ValueError):
        tree_decide_ncca((204, 204, 204))


def test_conflict_reported_with_provenance():
    tree = build_tree((170, 240, 239, 192, 204), prune=False)
    assert tree.violations
    v = tree.violations[0]
    assert v.weights[0] != v.weights[1]
    assert tree.node(v.level, v.node) is not None
    assert not tree_decide_ncca((170, 240, 239, 192, 204)).accepted
