import math

import numpy as np
import pytest

from abstain_al.algo_fixed_cost import CLASSIFIED, UNCLASSIFIED, ActiveState
from abstain_al.algo_known_marginal import (ThresholdEstimate, bounded_rate_classifier,
                                            estimate_thresholds, in_threshold_bands,
                                            run_algorithm2, update_unclassified)
from abstain_al.errors import DegenerateConfig, InvalidConfig
from abstain_al.estimation import CellStats, SmoothnessParams
from abstain_al.evaluation import abstain_measure
from abstain_al.oracles import make_oracle
from abstain_al.partition_tree import default_params
from abstain_al.problems import make_holder_instance, make_linear_1d

MASSES = (0.5, 0.3, 0.2)
SCORES = (0.05, 0.1, 0.2)


def test_thresholds_hand_example():
    est = estimate_thresholds(SCORES, MASSES, 0.6)
    assert (est.k_t, est.gamma1_hat, est.gamma2_hat) == (2, 0.05, 0.1)


def test_thresholds_empty_prefix():
    est = estimate_thresholds(SCORES, MASSES, 0.4)
    assert (est.k_t, est.gamma1_hat, est.gamma2_hat) == (1, 0.0, 0.05)


def test_thresholds_full_prefix():
    assert estimate_thresholds(SCORES, MASSES, 0.999).k_t == 3


def test_thresholds_unsorted_input_and_degenerate():
    est = estimate_thresholds((0.2, 0.05, 0.1), (0.2, 0.5, 0.3), 0.6)
    assert (est.k_t, est.gamma1_hat, est.gamma2_hat) == (2, 0.05, 0.1)
    with pytest.raises(DegenerateConfig):
        estimate_thresholds((0.1,), (0.3,), 0.5)


@pytest.mark.parametrize("l, u, keep", [(0.52, 0.66, True), (0.9, 0.95, False), (0.40, 0.44, True)])
def test_band_intersection(l, u, keep):
    assert in_threshold_bands(l, u, 0.05, 0.1, 0.02) is keep


def _state(n=20):
    inst = make_linear_1d()
    return ActiveState(n=n, p=SmoothnessParams(1.0, 1.0), tp=default_params(1),
                       oracle=make_oracle("membership", n, inst, np.random.default_rng(0)), h_max=3)


def test_update_unclassified_moves_far_cells():
    st = _state()
    a, b = st.refine_cell((0, 1))
    st.stats[a.key] = CellStats(n_hi=5, sum_y=3, u=0.66, l=0.52)
    st.stats[b.key] = CellStats(n_hi=5, sum_y=5, u=0.95, l=0.9)
    moved = update_unclassified(st, ThresholdEstimate(0.05, 0.1, 1), 0.02)
    assert moved == [b.key]
    assert st.status[a.key] == UNCLASSIFIED and st.status[b.key] == CLASSIFIED


def test_finalize_randomised_boundary():
    st = _state()
    a, b = st.refine_cell((0, 1))
    st.stats[a.key] = CellStats(n_hi=5, sum_y=3, u=0.6, l=0.45)   # |f - 1/2| = 0
    st.stats[b.key] = CellStats(n_hi=5, sum_y=5, u=0.9, l=0.55)   # |f - 1/2| = 0.05
    masses = {a.key: 0.5, b.key: 0.3}
    clf, rb = bounded_rate_classifier(st, masses.get, 0.6)
    assert rb.k_prime == 1
    assert rb.c_prime == pytest.approx(1 / 3)
    clf, rb = bounded_rate_classifier(st, masses.get, 0.5)
    assert rb.k_prime == 1 and rb.c_prime == 0.0


@pytest.mark.parametrize("seed", range(5))
def test_feasible_on_linear_instance(seed):
    inst = make_linear_1d()
    clf, _ = run_algorithm2(inst, make_oracle("membership", 512, inst, np.random.default_rng(seed)), 512, 0.2)
    assert abstain_measure(inst, clf)[0] == pytest.approx(0.2, abs=1e-9)


def test_single_label_still_feasible():
    inst = make_linear_1d()
    clf, _ = run_algorithm2(inst, make_oracle("membership", 1, inst, np.random.default_rng(0)), 1, 0.2)
    assert abstain_measure(inst, clf)[0] == pytest.approx(0.2, abs=1e-9)


def test_abstain_region_near_bayes_set():
    # at n = 4096 the abstain set should be close to [0.4, 0.6]
    inst = make_linear_1d()
    clf, _ = run_algorithm2(inst, make_oracle("membership", 4096, inst, np.random.default_rng(0)), 4096, 0.2)
    X = np.linspace(0, 1, 20001)[:, None]
    pa = clf.proba(X)[:, 2]
    bayes = ((X[:, 0] >= 0.4) & (X[:, 0] <= 0.6)).astype(float)
    assert abstain_measure(inst, clf)[0] == pytest.approx(0.2, abs=1e-9)
    assert np.mean(np.abs(pa - bayes)) <= 0.05


def test_trace_J_non_increasing_and_score_variant():
    inst = make_holder_instance(L=2.0, D=2, seed=2)
    for variant in ("interval", "score"):
        clf, trace = run_algorithm2(inst, make_oracle("membership", 300, inst, np.random.default_rng(1)),
                                    300, 0.2, variant=variant)
        J = trace.column("J_t")
        assert all(b <= a for a, b in zip(J, J[1:]))
        assert abstain_measure(inst, clf)[0] == pytest.approx(0.2, abs=1e-9)


def test_rejects_bad_delta_and_variant():
    inst = make_linear_1d()
    with pytest.raises(InvalidConfig):
        run_algorithm2(inst, make_oracle("membership", 5, inst, np.random.default_rng(0)), 5, 1.2)
    st = _state()
    with pytest.raises(InvalidConfig):
        update_unclassified(st, ThresholdEstimate(0, 0, 1), 0.1, variant="bogus")
