import numpy as np
import pytest
from gmpy2 import mpq

from mmsalloc import (Instance, envy_free_matching, extended_experiment_algorithm, normalize, order_instance,
                      to_rational,
                      two_thirds_existence_engine, two_thirds_poly, value)
from mmsalloc.adversarial import bag_filling_gap, tightness
from mmsalloc.lone_divider import (DividerState, _lone_divider, bag_fill, divider_partition_existence,
                                   divider_partition_poly)
from mmsalloc.oracle import mms, mms_satisfied_agents
from mmsalloc.reduce import strong_normalize

from helpers import mixed_instance, random_instance, tight_instance

HALF = mpq(1, 2)


def check_matching_contract(agents, nb, accept, match):
    assert len(set(match.values())) == len(match)
    for a, k in match.items():
        assert a in agents and accept(a, k)
    matched = set(match.values())
    for a in agents:
        if a not in match:
            assert not any(accept(a, k) for k in matched)


class TestEnvyFreeMatching:
    def test_lone_divider_alone(self):
        assert envy_free_matching([4], 3, lambda a, k: True) == {4: 0}

    def test_contested_single_bundle(self):
        # Hall's condition fails, so nothing can be matched envy-free
        assert envy_free_matching([0, 1], 2, lambda a, k: k == 0) == {}

    def test_complete_graph(self):
        m = envy_free_matching([0, 1, 2], 5, lambda a, k: True)
        assert len(m) == 3

    def test_random_contract(self):
        rng = np.random.default_rng(40)
        for _ in range(500):
            na, nb = int(rng.integers(1, 7)), int(rng.integers(1, 8))
            adj = rng.random((na, nb)) < rng.random()
            agents = list(range(na))
            accept = lambda a, k: bool(adj[a, k])
            m = envy_free_matching(agents, nb, accept)
            check_matching_contract(agents, nb, accept, m)
            if nb >= na:
                adj[0, :] = True  # a divider who accepts everything
                m = envy_free_matching(agents, nb, accept)
                assert m
                check_matching_contract(agents, nb, accept, m)


class TestBagFill:
    def test_units_and_stop(self):
        vals = [mpq(9, 10), mpq(8, 10), mpq(3, 10), mpq(1, 10), mpq(1, 20)]
        bags, used = bag_fill([0, 1], [(2,), 3, 4], vals)
        assert bags == [[0, 2]] and used == 1


def poly_state(norm, selected=None):
    n = norm.n
    agents = list(range((2 * n) // 3)) if selected is None else selected
    return DividerState(norm, (2 * n) // 3, list(range(norm.m)), agents)


class TestPolyPartition:
    def test_bag_gap_unrestricted(self):
        # v(M) = 9 already; g9 + g10 = 1 exactly, so normalize would reduce it
        norm, _ = order_instance(bag_filling_gap())
        info = {}
        bundles = divider_partition_poly(poly_state(norm), 0, pairing=False, info=info)
        assert len(bundles) == 5 < 6
        got = sorted(sorted(float(norm.values[0][g]) for g in b) for b in bundles)
        assert got == [[0.01, 0.99], [0.05, 0.99], [0.45, 0.99], [0.45, 0.99], [0.45, 0.99]]

    def test_all_low_goods(self):
        rng = np.random.default_rng(41)
        for _ in range(200):
            n = int(rng.integers(3, 12))
            m = int(rng.integers(3 * n, 5 * n))
            raw = rng.integers(1, 100, size=m)
            inst = Instance.identical([int(x) for x in raw], n)
            norm, trace = normalize(inst)
            if max(norm.values[0]) >= HALF or norm.n != n:
                continue
            bundles = divider_partition_poly(poly_state(norm), 0)
            assert len(bundles) >= (2 * n) // 3

    def test_pure_pairs(self):
        # n = 3: two heads and two spare high goods
        norm = Instance.identical([to_rational(x) for x in ["0.9", "0.6", "0.55", "0.55", "0.2", "0.2"]], 3)
        info = {}
        bundles = divider_partition_poly(poly_state(norm), 0, info=info)
        assert info["pairs"] == 2 and len(bundles) == 2
        assert sorted(map(sorted, bundles)) == [[0, 3], [1, 2]]
        assert all(value(norm, 0, b) >= 1 for b in bundles)

    def test_bundles_hold_one_head_and_bag_range(self):
        rng = np.random.default_rng(42)
        for _ in range(400):
            n = int(rng.integers(3, 9))
            norm, _ = normalize(mixed_instance(rng, n, 14))
            if norm.n < 3:
                continue
            st = poly_state(norm)
            info = {}
            bundles = divider_partition_poly(st, 0, info=info)
            for idx, b in enumerate(bundles):
                assert sum(1 for g in b if g < st.heads) == 1
                v = value(norm, 0, b)
                assert v >= 1
                if idx >= info["pairs"]:
                    assert v < mpq(3, 2)


def figure_instance():
    """Twelve identical agents whose MMS partition has ten high-good bundles.

    Heads g3 and g7 were handed out earlier, so six heads remain and the two
    non-head high goods g9, g10 force two pairs.
    """
    highs = ["0.95", "0.9", "0.9", "0.85", "0.8", "0.75", "0.7", "0.65", "0.6", "0.55"]
    lows = {  # label -> (value, MMS bundle)
        "r1": ("0.05", 0), "r2": ("0.1", 1), "r3": ("0.1", 2), "r4": ("0.15", 3), "r5": ("0.2", 4),
        "r6": ("0.25", 5), "r7": ("0.3", 6), "r8": ("0.35", 7), "r9a": ("0.2", 8), "r9b": ("0.2", 8),
        "r10a": ("0.25", 9), "r10b": ("0.2", 9), "a": ("0.45", 10), "b": ("0.45", 10), "c": ("0.1", 10),
        "d": ("0.4", 11), "e": ("0.3", 11), "f": ("0.3", 11),
    }
    labels = sorted(lows, key=lambda k: -to_rational(lows[k][0]))
    row = [to_rational(x) for x in highs] + [to_rational(lows[k][0]) for k in labels]
    idx = {k: 10 + p for p, k in enumerate(labels)}
    parts = [[j] for j in range(10)] + [[], []]
    for k, (_, b) in lows.items():
        parts[b].append(idx[k])
    return Instance.identical(row, 12), parts, idx


class TestExistencePartition:
    def test_figure_layout(self):
        inst, parts, idx = figure_instance()
        assert mms(inst, 0, 12).value == 1
        assert all(value(inst, 0, p) == 1 for p in parts)
        gone = {2, idx["c"], 6, idx["e"]}
        st = DividerState(inst, 8, [g for g in range(inst.m) if g not in gone], list(range(6)),
                          {10: [2, idx["c"]], 11: [6, idx["e"]]})
        info = {}
        bundles = divider_partition_existence(st, 0, parts, info=info)
        assert (info["n_prime"], info["s"]) == (6, 2)
        assert (info["pairs"], info["restricted"], info["bags"]) == (2, 2, 2)
        assert [sorted(b) for b in bundles[:2]] == [[7, 8], [5, 9]]
        assert len(bundles) == 6 and all(value(inst, 0, b) >= 1 for b in bundles)
        # restricted bags draw only from the orphaned remainders
        orphan = {g for j in (2, 5, 6, 7, 8, 9) for g in parts[j] if g >= 10}
        for b in bundles[2:4]:
            assert set(b[1:]) <= orphan

    def test_bag_gap_instance(self):
        inst = bag_filling_gap()
        norm, trace = strong_normalize(inst)
        st = poly_state(norm)
        info = {}
        bundles = divider_partition_existence(st, 0, trace.partitions[0], info=info)
        assert len(bundles) == 6
        assert all(value(norm, 0, b) >= 1 for b in bundles)

    def test_few_high_goods_is_plain_bag_filling(self):
        rng = np.random.default_rng(43)
        for _ in range(100):
            n = int(rng.integers(3, 7))
            inst = tight_instance(rng, n, 3 * n)
            norm, trace = strong_normalize(inst)
            st = poly_state(norm)
            info = {}
            bundles = divider_partition_existence(st, 0, trace.partitions[0], info=info)
            assert len(bundles) >= len(st.agents)
            if info["s"] == 0:
                assert info["restricted"] == 0 and info["pairs"] == 0


class TestTwoThirdsPoly:
    def test_tightness(self):
        inst = tightness()
        res = two_thirds_poly(inst)
        assert res.shortfall
        assert len(mms_satisfied_agents(inst, res.allocation)) == 5

    def test_n3_matches_two_of_three(self):
        rng = np.random.default_rng(44)
        for _ in range(100):
            inst = mixed_instance(rng, 3, 10)
            res = two_thirds_poly(inst)
            assert {0, 1} <= set(mms_satisfied_agents(inst, res.allocation))

    def test_selection(self):
        rng = np.random.default_rng(45)
        for _ in range(60):
            inst = mixed_instance(rng, 6, 12)
            res = two_thirds_poly(inst, selected=[1, 3, 5, 4])
            assert not res.shortfall
            assert {1, 3, 4, 5} <= set(mms_satisfied_agents(inst, res.allocation))
        with pytest.raises(ValueError):
            two_thirds_poly(inst, selected=[0, 1, 2, 3, 4])

    @pytest.mark.parametrize("n", range(3, 9))
    def test_random(self, n):
        rng = np.random.default_rng(300 + n)
        for _ in range(80):
            inst = mixed_instance(rng, n, 14)
            res = two_thirds_poly(inst)
            assert not res.shortfall
            assert set(range(2 * n // 3)) <= set(mms_satisfied_agents(inst, res.allocation))

    def test_each_served_bundle_has_one_head(self):
        rng = np.random.default_rng(46)
        for _ in range(200):
            n = int(rng.integers(3, 9))
            norm, _ = normalize(mixed_instance(rng, n, 14), agents=range(2 * n // 3))
            st = DividerState(norm, 2 * n // 3, list(range(norm.m)),
                              [a for a in range(norm.n) if a < 2 * norm.n // 3])
            st.heads = 2 * norm.n // 3
            served, _, _ = _lone_divider(st, lambda s, d, info: divider_partition_poly(s, d, info=info))
            for b in served.values():
                assert sum(1 for g in b if g < st.heads) == 1
                # unmatched-agent envy is covered by the matching contract tests


class TestExistenceEngine:
    def test_bag_gap_instance(self):
        inst = bag_filling_gap()
        res = two_thirds_existence_engine(inst)
        assert not res.shortfall
        assert len(mms_satisfied_agents(inst, res.allocation)) >= 6

    def test_identical_three(self):
        inst = Instance.identical([3, 2, 2, 1, 1], 3)
        res = two_thirds_existence_engine(inst)
        assert len(mms_satisfied_agents(inst, res.allocation)) >= 2

    def test_zero_mms_agent(self):
        inst = Instance.from_rows([[1, 0, 0], [1, 1, 1], [1, 1, 1]])
        res = two_thirds_existence_engine(inst)
        assert res.certificates[0] == "zero-mms"

    @pytest.mark.parametrize("n", range(3, 10))
    def test_random(self, n):
        rng = np.random.default_rng(400 + n)
        for _ in range(25):
            inst = mixed_instance(rng, n, 12)
            res = two_thirds_existence_engine(inst)
            assert not res.shortfall
            assert set(range(2 * n // 3)) <= set(mms_satisfied_agents(inst, res.allocation))


class TestExtended:
    def test_tightness(self):
        res = extended_experiment_algorithm(tightness())
        assert len(res.satisfied) == 5

    def test_reduction_heavy(self):
        inst = Instance.identical([10, 9, 8, 7, 1], 4)
        res = extended_experiment_algorithm(inst)
        assert res.satisfied == {0, 1, 2, 3}
        assert sum(1 for w in res.certificates.values() if w == "reduction") >= 3

    def test_certified_count_and_soundness(self):
        rng = np.random.default_rng(47)
        for _ in range(200):
            n = int(rng.integers(2, 7))
            inst = random_instance(rng, n, int(rng.integers(n, 13)))
            res = extended_experiment_algorithm(inst)
            assert len(res.satisfied) >= len(res.trace.reduced_agents())
            assert res.satisfied <= set(mms_satisfied_agents(inst, res.allocation))


@pytest.mark.parametrize("n", range(3, 9))
def test_case_table_never_reached(n):
    # Every round of the polynomial algorithm must form at least n' bundles;
    # the shortfall rows (n' - 2s < t < n' - s) should never be hit below 9 agents.
    rng = np.random.default_rng(9000 + n)
    rounds = 0
    for _ in range(10_000):
        res = two_thirds_poly(mixed_instance(rng, n, 14))
        assert not res.shortfall
        for r in res.rounds:
            rounds += 1
            assert r.pairs + r.restricted + r.bags >= r.n_prime
            assert r.bundles >= r.n_prime
    assert rounds > 0
