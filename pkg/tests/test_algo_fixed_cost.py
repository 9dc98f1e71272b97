import math

import numpy as np
import pytest

from abstain_al.algo_fixed_cost import (CLASSIFIED, DISCARDED, UNCLASSIFIED, ActiveState,
                                        classify_check, fixed_cost_decision, h_max_fixed_cost,
                                        refine_or_label, run_algorithm1, select_candidate)
from abstain_al.classifier import ABSTAIN, LABEL0, LABEL1
from abstain_al.errors import InvalidConfig
from abstain_al.estimation import CellStats, SmoothnessParams
from abstain_al.oracles import init_pool, make_oracle
from abstain_al.partition_tree import default_params, refine, root_cell, tiles_cube
from abstain_al.problems import make_constant, make_holder_instance, make_linear_1d


def _state(n=50, model="membership", inst=None, L=1.0):
    inst = make_linear_1d() if inst is None else inst
    oracle = make_oracle(model, n, inst, np.random.default_rng(0))
    return ActiveState(n=n, p=SmoothnessParams(L, 1.0), tp=default_params(1), oracle=oracle,
                       h_max=h_max_fixed_cost(n))


@pytest.mark.parametrize("l, u, case", [(0.0, 0.15, "A"), (0.85, 0.95, "B"), (0.3, 0.7, "C"),
                                        (0.1, 0.3, None), (0.75, 0.9, None)])
def test_classify_check(l, u, case):
    assert classify_check(CellStats(u=u, l=l), 0.2) == case


def test_select_candidate_rules():
    st = _state()
    a, b = st.refine_cell((0, 1))
    st.stats[a.key] = CellStats(n_hi=3, sum_y=1, u=0.6, l=0.3)
    assert select_candidate(st) == b.key  # fresh cell has I = inf
    st.stats[b.key] = CellStats(n_hi=3, sum_y=1, u=0.6, l=0.3)
    assert select_candidate(st) == a.key  # tie -> smallest (h, i)
    st.status[a.key] = CLASSIFIED
    assert select_candidate(st) == b.key


def test_fresh_cell_is_labelled_not_refined():
    st = _state()
    assert refine_or_label(st, (0, 1)) == "label"
    assert st.oracle.used == 1


def test_tight_cell_is_refined_with_inherited_bounds():
    st = _state(n=1000, L=100.0)
    st.stats[(0, 1)] = CellStats(n_hi=10 ** 4, sum_y=5000, u=0.9, l=0.1)
    assert refine_or_label(st, (0, 1)) == "refine"
    assert sorted(st.cells) == [(1, 1), (1, 2)]
    for k in st.cells:
        assert (st.stats[k].u, st.stats[k].l) == (0.9, 0.1)
        assert st.stats[k].n_hi == 0


def test_pool_empty_cell_is_discarded_without_budget():
    inst = make_linear_1d()
    oracle = init_pool(3, inst, np.random.default_rng(0))
    oracle.pool[:] = 0.9
    st = ActiveState(n=3, p=SmoothnessParams(1.0, 1.0), tp=default_params(1), oracle=oracle, h_max=2)
    a, b = st.refine_cell((0, 1))
    assert refine_or_label(st, a.key) == "discard"
    assert st.status[a.key] == DISCARDED and oracle.used == 0


def test_final_rule_priority():
    lam = 0.2
    assert fixed_cost_decision(CellStats(u=0.9, l=0.1), UNCLASSIFIED, lam) == LABEL1
    assert fixed_cost_decision(CellStats(u=0.5, l=0.1), CLASSIFIED, lam) == LABEL0
    assert fixed_cost_decision(CellStats(u=0.7, l=0.3), CLASSIFIED, lam) == ABSTAIN
    assert fixed_cost_decision(CellStats(u=0.1, l=0.0), DISCARDED, lam) == LABEL1


def _mass_of(clf, decision):
    return sum(c.volume for c, d in zip(clf.leaves, clf.decisions()) if d == decision)


def test_constant_high_eta_labels_one():
    inst = make_constant(0.9)
    clf, _ = run_algorithm1(inst, make_oracle("membership", 200, inst, np.random.default_rng(0)), 200, 0.2)
    assert _mass_of(clf, LABEL1) >= 0.99


def test_constant_half_eta_abstains_at_n200():
    # the confidence radius at t = n = 200 is about 0.48, so u stays above 1 - lambda
    inst = make_constant(0.5)
    clf, _ = run_algorithm1(inst, make_oracle("membership", 200, inst, np.random.default_rng(0)), 200, 0.2)
    assert _mass_of(clf, ABSTAIN) >= 0.99


def test_constant_half_eta_abstains_once_radius_is_small():
    inst = make_constant(0.5)
    clf, _ = run_algorithm1(inst, make_oracle("membership", 1000, inst, np.random.default_rng(0)), 1000, 0.2)
    assert _mass_of(clf, ABSTAIN) >= 0.99


def test_single_label_budget():
    inst = make_linear_1d()
    oracle = make_oracle("membership", 1, inst, np.random.default_rng(0))
    clf, _ = run_algorithm1(inst, oracle, 1, 0.2)
    assert oracle.used == 1
    assert tiles_cube(clf.leaves)
    assert clf.predict(np.random.default_rng(1).random((100, 1))).shape == (100,)


def test_rejects_bad_lambda():
    inst = make_linear_1d()
    with pytest.raises(InvalidConfig):
        run_algorithm1(inst, make_oracle("membership", 5, inst, np.random.default_rng(0)), 5, 0.5)


@pytest.mark.parametrize("model", ["membership", "pool", "stream"])
def test_run_invariants_all_models(model):
    inst = make_holder_instance(L=2.0, beta=1.0, alpha0=1.0, lam=0.2, D=2, seed=1)
    n = 120
    rng = np.random.default_rng(4)
    oracle = make_oracle(model, n, inst, rng, pool_cap=20000)
    seen = []

    def obs(st):
        assert set(st.status) == set(st.cells) == set(st.stats)
        seen.append({k: (st.stats[k].u, st.stats[k].l) for k in st.cells})

    clf, trace = run_algorithm1(inst, oracle, n, 0.2, observer=obs)
    assert oracle.used <= n
    assert tiles_cube(clf.leaves)
    labels = sum(1 for row in oracle.ledger if row[1] == "label")
    assert labels == oracle.used
    for prev, cur in zip(seen, seen[1:]):
        for k, (u, l) in cur.items():
            if k in prev:
                assert u <= prev[k][0] and l >= prev[k][1]
