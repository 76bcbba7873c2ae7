import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbp.algorithms import (ALL_KINDS, BEST_FIT, FIRST_FIT, NEXT_FIT, WORST_FIT, AlgorithmKind,
                            OnlinePacker, ThresholdPolicy, harmonic, harmonic_class, pack,
                            write_decision_log)
from gbp.core import EPS_FIT, CostParams, DomainError, Instance, validate

P = CostParams(1.0, 0.5)


def bins_of(res):
    return [list(map(int, b.item_indices)) for b in res.packing.bins]


def test_nextfit_example():
    res = pack(NEXT_FIT, 0.5, Instance([0.6, 0.5, 0.4]), P)
    assert bins_of(res) == [[0], [1, 2]]


def test_worstfit_example():
    res = pack(WORST_FIT, 0.25, Instance([0.3, 0.5, 0.2]), P)
    assert bins_of(res) == [[0, 2], [1]]
    res = pack(WORST_FIT, 0.5, Instance([0.3, 0.3, 0.3]), P)
    assert bins_of(res) == [[0, 1, 2]]


def test_bestfit_example():
    res = pack(BEST_FIT, 0.25, Instance([0.3, 0.5, 0.2]), P)
    assert bins_of(res) == [[0], [1, 2]]


def test_firstfit_tie_goes_to_lowest_index():
    res = pack(FIRST_FIT, 0.5, Instance([0.5, 0.5, 0.5]), P)
    assert bins_of(res) == [[0, 1], [2]]


def test_bestfit_and_worstfit_ties_lowest_index():
    inst = Instance([0.6, 0.6, 0.3])
    assert bins_of(pack(BEST_FIT, 0.5, inst, P)) == [[0, 2], [1]]
    assert bins_of(pack(WORST_FIT, 0.5, inst, P)) == [[0, 2], [1]]


def test_oversized_item_is_sealed():
    # capacity 0.6: the 0.8 item goes alone and nothing joins it later
    res = pack(FIRST_FIT, 0.1, Instance([0.8, 0.1, 0.1]), P)
    assert bins_of(res) == [[0], [1, 2]]
    assert res.packing.bins[0].oversized
    res = pack(NEXT_FIT, 0.1, Instance([0.1, 0.8, 0.1]), P)
    assert bins_of(res) == [[0], [1], [2]]


def test_harmonic_class_examples():
    assert harmonic_class(0.3, 10) == 3
    assert harmonic_class(0.05, 10) == 10
    assert harmonic_class(0.35, 3, 0.7) == 2  # 0.35 = 0.7/2 belongs to class 2
    assert harmonic_class(0.5, 10) == 2
    assert harmonic_class(0.5 + 1e-7, 10) == 1
    assert harmonic_class(1 / 3, 10) == 3
    assert harmonic_class(1 / 3 + 1e-7, 10) == 2
    with pytest.raises(DomainError):
        harmonic_class(0.0, 10)


def test_harmonic_bins_are_class_pure():
    rng = np.random.default_rng(3)
    inst = Instance(rng.uniform(0.01, 1, 500))
    res = pack(harmonic(5), 0.5, inst, P)
    for b in res.packing.bins:
        classes = {harmonic_class(float(inst.items[i]), 5) for i in b.item_indices}
        assert classes == {b.harmonic_class}
        if b.harmonic_class < 5:
            assert len(b.item_indices) <= b.harmonic_class


def test_algorithm_kind_parse():
    assert AlgorithmKind.parse("harmonic10") == harmonic(10)
    assert AlgorithmKind.parse("Harmonic", k=4) == harmonic(4)
    assert AlgorithmKind.parse("first_fit") == FIRST_FIT
    with pytest.raises(DomainError):
        AlgorithmKind.parse("almostworstfit")
    with pytest.raises(DomainError):
        AlgorithmKind("firstfit", 3)


def test_threshold_policy_range():
    with pytest.raises(DomainError):
        pack(FIRST_FIT, 0.6, Instance([0.5]), P)
    assert ThresholdPolicy.full(P).tau == 0.5


def test_empty_instance():
    res = pack(FIRST_FIT, 0.5, Instance([]), P)
    assert res.packing.num_bins == 0
    assert res.packing.cost() == 0


sizes = st.lists(st.floats(min_value=1e-3, max_value=1.0), min_size=1, max_size=60)
taus = st.floats(min_value=0.0, max_value=1.0)
greens = st.floats(min_value=0.05, max_value=0.95)


@settings(max_examples=150, deadline=None)
@given(sizes, greens, taus)
def test_kernel_matches_streaming_packer(xs, g, frac):
    params = CostParams(3.0, g)
    tau = frac * (1 - g)
    inst = Instance(xs)
    for kind in ALL_KINDS + (harmonic(3),):
        res = pack(kind, tau, inst, params)
        sp = OnlinePacker(kind, params, tau)
        for x in xs:
            sp.add(x)
        assert bins_of(res) == [list(b.item_indices) for b in sp.packing().bins]
        assert sp.running_cost == pytest.approx(res.packing.cost())


@settings(max_examples=150, deadline=None)
@given(sizes, greens, taus)
def test_packings_are_valid_and_respect_capacity(xs, g, frac):
    params = CostParams(2.0, g)
    tau = frac * (1 - g)
    inst = Instance(xs)
    for kind in ALL_KINDS:
        res = pack(kind, tau, inst, params)
        assert validate(inst, res.packing) == []
        for b in res.packing.bins:
            if len(b.item_indices) > 1:
                assert b.level <= res.capacity + EPS_FIT


@settings(max_examples=150, deadline=None)
@given(st.lists(st.floats(min_value=1e-3, max_value=0.5), min_size=2, max_size=80), greens, taus)
def test_nextfit_consecutive_pairs_exceed_capacity(xs, g, frac):
    params = CostParams(2.0, g)
    tau = frac * (1 - g)
    cap = g + tau
    xs = [min(x, cap) for x in xs]
    res = pack(NEXT_FIT, tau, Instance(xs), params)
    lv = [b.level for b in res.packing.bins]
    for a, b in zip(lv, lv[1:]):
        assert a + b > cap - EPS_FIT


@settings(max_examples=150, deadline=None)
@given(sizes, greens, taus)
def test_anyfit_at_most_one_bin_half_empty(xs, g, frac):
    params = CostParams(2.0, g)
    tau = frac * (1 - g)
    cap = g + tau
    xs = [min(x, cap) for x in xs]
    for kind in (WORST_FIT, FIRST_FIT, BEST_FIT):
        res = pack(kind, tau, Instance(xs), params)
        low = [b for b in res.packing.bins if b.level < cap / 2 - 1e-9]
        assert len(low) <= 1


def test_sealed_bins_never_reused():
    rng = np.random.default_rng(5)
    xs = rng.uniform(0.05, 1, 400)
    for kind in ALL_KINDS:
        res = pack(kind, 0.1, Instance(xs), P)
        for b in res.packing.bins:
            if b.oversized:
                assert len(b.item_indices) == 1


def test_decision_log(tmp_path):
    res = pack(NEXT_FIT, 0.5, Instance([0.6, 0.5, 0.4]), P, log=True)
    assert res.log[2][:4] == (2, 0.4, 1, False)
    assert res.log[2][4] == pytest.approx(0.9)
    path = tmp_path / "log.csv"
    write_decision_log(res.log, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "step,item_size,chosen_bin,opened_new,level_after"
    assert len(lines) == 4


def test_prefix_independence():
    rng = np.random.default_rng(11)
    xs = rng.uniform(0.01, 1, 300)
    for kind in ALL_KINDS:
        full = pack(kind, 0.2, Instance(xs), P).assignment
        part = pack(kind, 0.2, Instance(xs[:120]), P).assignment
        assert full[:120].tolist() == part.tolist()


def test_sand_cost_nonincreasing_in_tau_up_to_one_bin():
    # the last bin is partly filled, so a finite sand volume can cost up to one bin more
    for beta, g in ((1.0, 0.8), (1.5, 0.6), (1.0, 0.5), (2.0, 0.4)):
        params = CostParams(beta, g)
        inst = Instance(np.full(20_000, 1e-3))
        for kind in ALL_KINDS:
            costs = [pack(kind, float(t), inst, params).packing.cost()
                     for t in np.linspace(0, 1 - g, 11)]
            for a, b in zip(costs, costs[1:]):
                assert b <= a + 1 + beta * (1 - g)
