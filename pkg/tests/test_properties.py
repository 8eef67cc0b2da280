"""Property suites over generated instances (runnable on their own).

Every property records how many cases it executed in ``CASES`` so callers can
report the total.
"""

import functools
from collections import Counter

from gmpy2 import mpq
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from mmsalloc import (Allocation, Instance, envy_free_matching, envy_graph_efx, is_ordered, mms, normalize,
                      order_instance, scale, two_thirds_existence_engine, two_thirds_poly, unorder_allocation,
                      valid_reduction_step, value)
from mmsalloc import io as mio
from mmsalloc.adversarial import default_eps, perturbation_P, tensor_S, tensor_T
from mmsalloc.core import fairness_report
from mmsalloc.lone_divider import DividerState, divider_partition_poly, extended_experiment_algorithm
from mmsalloc.oracle import mms_satisfied_agents
from mmsalloc.reduce import replay

CASES: Counter = Counter()


def counted(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        CASES[fn.__name__] += 1
        return fn(*args, **kwargs)
    return wrapper


def cfg(n):
    return settings(max_examples=n, deadline=None, derandomize=True, database=None,
                    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])


@st.composite
def instances(draw, n_min=1, n_max=5, m_min=1, m_max=9, hi=40):
    n = draw(st.integers(n_min, n_max))
    m = draw(st.integers(max(m_min, 1), m_max))
    rows = []
    for _ in range(n):
        row = draw(st.lists(st.integers(0, hi), min_size=m, max_size=m))
        if sum(row) == 0:
            row[0] = 1
        rows.append(row)
    return Instance.from_rows(rows)


@st.composite
def inst_and_alloc(draw, **kw):
    inst = draw(instances(**kw))
    labels = draw(st.lists(st.integers(-1, inst.n - 1), min_size=inst.m, max_size=inst.m))
    alloc = Allocation.from_lists([[g for g, l in enumerate(labels) if l == i] for i in range(inst.n)], inst.m)
    return inst, alloc


# core

@cfg(1000)
@given(inst_and_alloc())
@counted
def test_order_and_unorder(case):
    inst, _ = case
    ordered, perm = order_instance(inst)
    assert is_ordered(ordered)
    for i in range(inst.n):
        assert sorted(ordered.values[i]) == sorted(inst.values[i])
    _, alloc = case
    back = unorder_allocation(inst, perm, alloc)
    for i in range(inst.n):
        assert value(inst, i, back.bundles[i]) >= value(ordered, i, alloc.bundles[i])


@cfg(500)
@given(instances(), st.integers(1, 50), st.integers(1, 50))
@counted
def test_scale_composition(inst, a, b):
    assert scale(scale(inst, a), mpq(b, 3)) == scale(inst, mpq(b, 3))


@cfg(1000)
@given(inst_and_alloc(m_max=8))
@counted
def test_efx_and_ef_imply_ef1(case):
    inst, alloc = case
    rep = fairness_report(inst, alloc, agents=range(inst.n))
    assert not rep.efx or rep.ef1
    assert not rep.ef or rep.ef1


# oracle

@cfg(500)
@given(instances(n_max=1, m_max=10, hi=60))
@counted
def test_mms_monotone_and_bounded(inst):
    prev = None
    for k in range(1, 6):
        v = mms(inst, 0, k).value
        assert v * k <= inst.total(0)
        assert prev is None or v <= prev
        prev = v


@cfg(300)
@given(instances(n_max=1, m_min=2, m_max=9), st.integers(2, 4), st.data())
@counted
def test_single_good_removal(inst, k, data):
    g = data.draw(st.integers(0, inst.m - 1))
    rest = inst.restrict([0], [h for h in range(inst.m) if h != g])
    assert mms(rest, 0, k - 1).value >= mms(inst, 0, k).value


# reduce

@cfg(500)
@given(instances(n_min=2, n_max=4, m_min=2, m_max=9))
@counted
def test_reduction_keeps_mms(inst):
    n = inst.n
    ordered, _ = order_instance(inst)
    assume(all(ordered.total(i) > 0 for i in range(n)))
    sc = scale(ordered, n)
    found = valid_reduction_step(sc)
    assume(found is not None)
    agent, goods, res = found
    assert value(sc, agent, goods) >= mms(sc, agent, n).value
    kept = [a for a in range(n) if a != agent]
    for new, old in enumerate(kept):
        assert mms(res, new, n - 1).value >= mms(sc, old, n).value


@cfg(1000)
@given(instances(n_min=2, n_max=7, m_max=16))
@counted
def test_normalize_postconditions(inst):
    out, trace = normalize(inst)
    assert replay(trace, inst) == out
    assert is_ordered(out)
    if out.n > 1:
        for i in range(out.n):
            row = out.values[i]
            assert sum(row, mpq(0)) == out.n
            assert out.m == 0 or row[0] < 1
            assert out.m <= out.n or row[out.n - 1] + row[out.n] < 1


# approx

@cfg(1000)
@given(instances(n_min=2, n_max=6, m_max=14))
@counted
def test_envy_graph_efx(inst):
    ordered, _ = order_instance(inst)
    alloc = envy_graph_efx(ordered, range(inst.n))
    assert alloc.is_complete()
    assert fairness_report(ordered, alloc).efx


# lone divider

@st.composite
def bipartite(draw):
    na = draw(st.integers(1, 7))
    nb = draw(st.integers(1, 8))
    adj = [[draw(st.booleans()) for _ in range(nb)] for _ in range(na)]
    divider = draw(st.booleans())
    if divider and nb >= na:
        adj[0] = [True] * nb
    return na, nb, adj, divider and nb >= na


@cfg(2000)
@given(bipartite())
@counted
def test_envy_free_matching_contract(case):
    na, nb, adj, has_divider = case
    accept = lambda a, k: adj[a][k]
    match = envy_free_matching(range(na), nb, accept)
    assert len(set(match.values())) == len(match)
    assert all(accept(a, k) for a, k in match.items())
    matched = set(match.values())
    for a in range(na):
        if a not in match:
            assert not any(accept(a, k) for k in matched)
    if has_divider:
        assert match


@cfg(1000)
@given(instances(n_min=3, n_max=8, m_min=3, m_max=16, hi=100))
@counted
def test_bag_ranges(inst):
    norm, _ = normalize(inst)
    assume(norm.n >= 3)
    heads = 2 * norm.n // 3
    stt = DividerState(norm, heads, list(range(norm.m)), list(range(heads)))
    info = {}
    bundles = divider_partition_poly(stt, 0, info=info)
    for idx, b in enumerate(bundles):
        assert sum(1 for g in b if g < heads) == 1
        v = value(norm, 0, b)
        assert v >= 1
        if idx >= info["pairs"]:
            assert v < mpq(3, 2)


@cfg(600)
@given(instances(n_min=3, n_max=8, m_min=3, m_max=12, hi=30))
@counted
def test_two_thirds_guarantee(inst):
    res = two_thirds_poly(inst)
    assert not res.shortfall
    want = set(range(2 * inst.n // 3))
    assert want <= res.satisfied
    assert want <= set(mms_satisfied_agents(inst, res.allocation))


@cfg(200)
@given(instances(n_min=3, n_max=7, m_min=3, m_max=10, hi=30))
@counted
def test_existence_engine(inst):
    res = two_thirds_existence_engine(inst)
    assert not res.shortfall
    assert set(range(2 * inst.n // 3)) <= set(mms_satisfied_agents(inst, res.allocation))


@cfg(300)
@given(instances(n_min=2, n_max=5, m_min=2, m_max=10))
@counted
def test_conservative_certificates_sound(inst):
    res = extended_experiment_algorithm(inst)
    assert res.satisfied <= set(mms_satisfied_agents(inst, res.allocation))


# adversarial

@cfg(200)
@given(st.integers(4, 7), st.integers(2, 3), st.data())
@counted
def test_tensor_slice_sums(n, d, data):
    assume(d <= n // 2)
    eps, et = default_eps(n, d)
    S, T = tensor_S(n, d), tensor_T(n, d, eps)
    axis = data.draw(st.integers(1, d))
    i = data.draw(st.integers(1, n))
    assert S.slice_sum(axis, i) == 1
    assert T.slice_sum(axis, i) == 0
    j = data.draw(st.integers(1, d))
    full = S + T + perturbation_P(n, d, j, et)
    assert all(v >= 0 for v in full.entries.values())


# io

@cfg(500)
@given(instances(hi=10 ** 6), st.integers(1, 10 ** 6))
@counted
def test_json_round_trip(inst, den):
    inst = Instance(tuple(tuple(v / den for v in row) for row in inst.values), inst.m)
    text = mio.dumps(mio.instance_to_json(inst))
    assert mio.instance_from_json(mio.loads(text)) == inst


PROPERTIES = [v for k, v in list(globals().items()) if k.startswith("test_") and callable(v)]
