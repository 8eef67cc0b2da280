"""Random instance generators shared by the test modules."""

from itertools import product

import numpy as np

from mmsalloc import Instance


def random_instance(rng, n, m):
    """Mix of wide-range, small-integer and near-identical valuations."""
    kind = rng.integers(3)
    if kind == 0:
        vals = rng.integers(1, 10 ** 6 + 1, size=(n, m))
    elif kind == 1:
        vals = rng.integers(0, 11, size=(n, m))
        vals[:, 0] += 1
    else:
        base = rng.integers(1, 100, size=m)
        vals = base[None, :] + rng.integers(0, 5, size=(n, m))
    return Instance.from_rows([[int(x) for x in r] for r in vals])


def tight_instance(rng, n, max_goods, noise=0):
    """Agents whose goods split into n bundles of (nearly) equal value.

    These sit right at the MMS threshold, which is where off-by-one bugs in
    the bag-filling and matching code show up.
    """
    while True:
        goods = []
        for _ in range(n):
            k = int(rng.integers(1, 4))
            cuts = sorted(rng.integers(1, 1000, size=k - 1))
            parts = np.diff([0] + list(cuts) + [1000])
            goods += [int(p) for p in parts if p > 0]
        if len(goods) <= max_goods:
            break
    rows = []
    for _ in range(n):
        e = rng.integers(-noise, noise + 1, size=len(goods))
        rows.append([max(1, g * 10 + int(x)) for g, x in zip(goods, e)])
    return Instance.from_rows(rows)


def mixed_instance(rng, n, max_goods):
    if rng.random() < 0.5:
        return random_instance(rng, n, int(rng.integers(n, max_goods + 1)))
    return tight_instance(rng, n, max_goods, noise=int(rng.choice([0, 0, 20])))


def all_partitions(m, k):
    """Every assignment of m goods to k labelled bundles (brute force)."""
    for labels in product(range(k), repeat=m):
        parts = [[] for _ in range(k)]
        for g, b in enumerate(labels):
            parts[b].append(g)
        yield parts


def brute_mms(row, k):
    best = None
    for parts in all_partitions(len(row), k):
        v = min(sum((row[g] for g in p), 0) for p in parts)
        if best is None or v > best:
            best = v
    return best
