import math

import numpy as np
import pytest

from gbp.core import CostParams, DomainError, Instance, make_packing, opt_lower_bound, validate
from gbp.offline import (APTAS_MAX_GROUPS, AptasConfig, SolverLimitError, aptas, exact_opt,
                         structure_violations)


def set_partitions(n):
    """All set partitions of range(n) as restricted growth strings."""
    if n == 0:
        yield []
        return

    def rec(i, labels, top):
        if i == n:
            yield list(labels)
            return
        for c in range(top + 2):
            labels.append(c)
            yield from rec(i + 1, labels, max(top, c))
            labels.pop()

    yield from rec(1, [0], 0)


def brute_force_opt(sizes, params):
    best = math.inf
    for labels in set_partitions(len(sizes)):
        lv = [0.0] * (max(labels) + 1)
        for x, c in zip(sizes, labels):
            lv[c] += x
        if max(lv) > 1 + 1e-9:
            continue
        cost = sum(1 + params.beta * max(0.0, v - params.green) for v in lv)
        best = min(best, cost)
    return best


def test_set_partition_counts_are_bell_numbers():
    assert [sum(1 for _ in set_partitions(n)) for n in range(1, 8)] == [1, 2, 5, 15, 52, 203, 877]


def test_exact_small_examples():
    r = exact_opt(Instance([0.6, 0.6]), CostParams(1, 0.5))
    assert r.cost == pytest.approx(2.2)
    assert r.proven_optimal
    # beta*G > 1: merging two 0.3 items into one bin beats two bins
    r = exact_opt(Instance([0.3, 0.3]), CostParams(4, 0.5))
    assert r.cost == pytest.approx(1.4)
    assert exact_opt(Instance([]), CostParams(1, 0.5)).cost == 0


def test_exact_matches_brute_force():
    rng = np.random.default_rng(7)
    for trial in range(60):
        n = int(rng.integers(1, 8))
        sizes = rng.uniform(0.02, 1, n)
        if trial % 3 == 0:
            sizes = rng.uniform(0.05, 0.45, n)
        params = CostParams(float(rng.choice([0.3, 1.0, 2.0, 6.0, 20.0])),
                            float(rng.uniform(0.1, 0.9)))
        res = exact_opt(Instance(sizes), params)
        assert validate(Instance(sizes), res.packing) == []
        assert res.cost == pytest.approx(brute_force_opt(sizes.tolist(), params), abs=1e-9)
        assert res.cost >= opt_lower_bound(float(sizes.sum()), params) - 1e-9


def test_exact_cap_and_node_limit():
    inst = Instance(np.full(15, 0.1))
    with pytest.raises(SolverLimitError):
        exact_opt(inst, CostParams(1, 0.5))
    res = exact_opt(Instance(np.linspace(0.05, 0.6, 12)), CostParams(3, 0.4), node_limit=5)
    assert not res.proven_optimal
    assert validate(Instance(np.linspace(0.05, 0.6, 12)), res.packing) == []


def test_exact_optima_have_large_regime_structure():
    rng = np.random.default_rng(9)
    for _ in range(25):
        g = float(rng.uniform(0.2, 0.7))
        params = CostParams(float(rng.uniform(1.2, 8)) / g, g)
        inst = Instance(rng.uniform(0.02, 0.9, int(rng.integers(2, 9))))
        res = exact_opt(inst, params)
        assert structure_violations(inst, res.packing) == []


def test_structure_check_flags_violations():
    params = CostParams(4, 0.5)
    inst = Instance([0.5, 0.5, 0.3])
    bad = make_packing(inst, [[0, 1], [2]], params)
    assert [k for k, _ in structure_violations(inst, bad)] == ["two large items"]
    bad = make_packing(inst, [[0, 2], [1]], params)
    assert [k for k, _ in structure_violations(inst, bad)] == ["small volume with large item"]
    with pytest.raises(DomainError):
        structure_violations(inst, make_packing(inst, [[0], [1], [2]], CostParams(1, 0.5)))


def test_aptas_config():
    cfg = AptasConfig.derive(0.5, CostParams(1, 0.5))
    assert cfg.delta == pytest.approx(0.125)
    cfg = AptasConfig.derive(0.5, CostParams(4, 0.5))
    assert cfg.delta == pytest.approx(0.5 / 64)
    assert cfg.groups_theory > APTAS_MAX_GROUPS
    with pytest.raises(DomainError):
        AptasConfig.derive(1.0, CostParams(1, 0.5))


@pytest.mark.parametrize("beta,green", [(0.5, 0.5), (1.0, 0.8), (4.0, 0.5), (10.0, 0.3)])
def test_aptas_within_guarantee_of_exact(beta, green):
    rng = np.random.default_rng(int(beta * 10 + green * 100))
    params = CostParams(beta, green)
    eps = 0.5
    for _ in range(8):
        inst = Instance(rng.uniform(0.1, 0.9, int(rng.integers(4, 11))))
        res = aptas(inst, params, eps)
        assert validate(inst, res.packing) == []
        opt = exact_opt(inst, params).cost
        assert res.cost <= (1 + eps) * opt + 2 + 1e-9
        assert res.cost >= opt - 1e-9


def test_aptas_with_small_items_and_group_override():
    rng = np.random.default_rng(2)
    inst = Instance(np.concatenate([rng.uniform(0.3, 0.7, 12), rng.uniform(0.02, 0.05, 10)]))
    for params in (CostParams(1, 0.5), CostParams(4, 0.5)):
        res = aptas(inst, params, 0.6, groups=6)
        assert res.groups == 6
        assert validate(inst, res.packing) == []
        assert res.cost <= 2 * opt_lower_bound(inst.total_size, params) + 2


def test_aptas_group_cap():
    inst = Instance(np.linspace(0.2, 0.8, 40))
    with pytest.raises(SolverLimitError):
        aptas(inst, CostParams(1, 0.5), 0.5)
    assert aptas(inst, CostParams(1, 0.5), 0.5, groups=5).groups == 5
