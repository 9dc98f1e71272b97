import math

import numpy as np
import pytest

from abstain_al.algo_unlabelled import (UnlabelledBudget, estimate_thresholds_empirical,
                                        h_max_setting3, run_algorithm3, unlabelled_bound,
                                        unlabelled_request_rule)
from abstain_al.algo_known_marginal import estimate_thresholds
from abstain_al.errors import InvalidConfig
from abstain_al.evaluation import abstain_measure
from abstain_al.oracles import make_oracle
from abstain_al.partition_tree import default_params
from abstain_al.problems import make_linear_1d

MASSES = (0.5, 0.3, 0.2)
SCORES = (0.05, 0.1, 0.2)


def test_empirical_thresholds_hand_example():
    et = estimate_thresholds_empirical(SCORES, MASSES, 0.6, 0.05)
    assert (et.k1_t, et.gamma1_hat, et.k2_t, et.gamma2_hat) == (1, 0.05, 2, 0.1)


def test_zero_slack_matches_known_marginal_brackets():
    for delta in (0.3, 0.6, 0.9):
        et = estimate_thresholds_empirical(SCORES, MASSES, delta, 0.0)
        est = estimate_thresholds(SCORES, MASSES, delta)
        assert et.gamma1_hat == est.gamma1_hat
        assert et.gamma2_hat == est.gamma2_hat


def test_empty_prefix_gives_zero():
    et = estimate_thresholds_empirical(SCORES, MASSES, 0.4, 0.05)
    assert et.k1_t == 0 and et.gamma1_hat == 0.0


@pytest.mark.parametrize("J, s, C2, a2, fire", [(0.1, 0.04, 1.0, 2.0, True), (0.5, 0.04, 1.0, 2.0, False),
                                                (0.3, 0.3, 1.0, 1.0, True)])
def test_request_rule(J, s, C2, a2, fire):
    assert unlabelled_request_rule(J, s, UnlabelledBudget(C2, a2, 10)) is fire


def test_h_max_setting3():
    assert h_max_setting3(256, 1.0, 0.5) == 4
    assert h_max_setting3(256, 0.5, 0.5) == 8
    with pytest.raises(InvalidConfig):
        h_max_setting3(256, 1.0, 0.99)


def test_upfront_mode_is_feasible():
    inst = make_linear_1d()
    n = 128
    clf, trace, m = run_algorithm3(inst, make_oracle("membership", n, inst, np.random.default_rng(0)), n, 0.2)
    assert m == 4 * n * n
    assert abstain_measure(inst, clf)[0] <= 0.2


def test_de_mode_respects_bound():
    inst = make_linear_1d()
    n = 128
    clf, trace, m = run_algorithm3(inst, make_oracle("membership", n, inst, np.random.default_rng(0)), n, 0.2,
                                   de_params=(1.0, 1.0))
    tp = default_params(1)
    assert m <= unlabelled_bound(n, 1.0, 1.0, inst.desc.L, tp.v1, inst.desc.beta)
    assert trace.flags["m_n_bound"] == unlabelled_bound(n, 1.0, 1.0, inst.desc.L, tp.v1, inst.desc.beta)


def test_target_approaches_delta_as_m_grows():
    inst = make_linear_1d()
    targets = []
    for c in (1.0, 16.0, 256.0):
        clf, _, _ = run_algorithm3(inst, make_oracle("membership", 32, inst, np.random.default_rng(0)), 32,
                                   0.5, c_prime=c)
        targets.append(clf.info["target"])
    assert targets[0] < targets[1] < targets[2] < 0.5


def test_request_budget_validation():
    with pytest.raises(InvalidConfig):
        UnlabelledBudget(0.0, 1.0, 10)
