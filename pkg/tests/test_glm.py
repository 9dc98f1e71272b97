import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abstain_al.errors import InsufficientBudget, InvalidConfig
from abstain_al.glm import (AngleProblem, dimension_coupling, estimate_angle_2d, reassemble,
                            recover_direction, sample_complexity)
from abstain_al.oracles import OracleState
from abstain_al.problems import make_glm_instance


def _angle(inst, n, lam=0.4, seed=0, pair=(0, 1)):
    ap = AngleProblem(inst, pair, n)
    o = OracleState(model="membership", budget_n=n, instance=inst, rng=np.random.default_rng(seed))
    return estimate_angle_2d(ap, o, n, lam), o


def _gap(a, b):
    d = (a - b) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def test_noiseless_angle_at_quarter_pi():
    inst = make_glm_instance([math.cos(math.pi / 4), math.sin(math.pi / 4)])
    noiseless = dataclasses.replace(inst, eta_fn=lambda X: (inst.eta(X) > 0.5).astype(float))
    th, o = _angle(noiseless, 2000)
    assert _gap(th, math.pi / 4) <= 0.02
    assert o.used == 2000


def test_axis_aligned_direction():
    th, _ = _angle(make_glm_instance([1.0, 0.0]), 2000)
    assert _gap(th, 0.0) <= 0.3


def test_more_labels_help():
    inst = make_glm_instance([math.cos(1.0), math.sin(1.0)])
    errs = {n: np.median([_gap(_angle(inst, n, seed=s)[0], 1.0) for s in range(20)]) for n in (500, 4000)}
    assert errs[4000] < errs[500]


def test_unbracketed_level_raises():
    # eta stays within 1/2 +- 0.2 on the circle, so lambda = 0.1 is never crossed
    inst = make_glm_instance([1.0, 0.0])
    flat = dataclasses.replace(inst, eta_fn=lambda X: np.full(X.shape[0], 0.5))
    with pytest.raises(InsufficientBudget):
        _angle(flat, 200, lam=0.1)


def test_reassembly_example_exact():
    w = np.array([0.6, 0.8, 0.0])
    thetas = [math.atan2(w[j], w[0]) for j in (1, 2)]
    rd = dimension_coupling(3, lambda pair: thetas[pair[1] - 1])
    assert np.allclose(rd.w_hat, w, atol=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([2, 3, 5]), st.integers(0, 10 ** 6))
def test_reassembly_exact_for_random_directions(D, seed):
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(D)
    w /= np.linalg.norm(w)
    if abs(w[0]) < 1e-3:
        w[0] = 0.1
        w /= np.linalg.norm(w)
    thetas = [math.atan2(w[j], w[0]) for j in range(1, D)]
    w_hat, _ = reassemble(thetas, D)
    assert abs(np.linalg.norm(w_hat) - 1.0) <= 1e-9
    assert np.allclose(w_hat, w, atol=1e-6)


def test_two_dimensional_coupling_is_identity():
    rd = dimension_coupling(2, lambda pair: 0.7)
    assert np.allclose(rd.w_hat, [math.cos(0.7), math.sin(0.7)])
    with pytest.raises(InvalidConfig):
        dimension_coupling(1, lambda pair: 0.0)


def test_total_labels():
    inst = make_glm_instance([1.0, 1.0, 1.0])
    rd = recover_direction(inst, 300, 0.4, np.random.default_rng(0))
    assert rd.labels_used == 2 * 300
    assert len(rd.per_pair_error) == 2


def test_sample_complexity():
    assert sample_complexity(0.1, 3, 1.0) == pytest.approx(8000)
    assert sample_complexity(0.05, 3, 1.0) / sample_complexity(0.1, 3, 1.0) == pytest.approx(8)
    assert sample_complexity(0.1, 2, 0.5) == pytest.approx(1e4)
    assert sample_complexity(0.1, 3, 1.0, nu_inverse=lambda e: e / 2) == pytest.approx(8000 * 8)
    with pytest.raises(InvalidConfig):
        sample_complexity(0.0, 3, 1.0)
