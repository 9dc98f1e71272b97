import math

import numpy as np
import pytest

from abstain_al.errors import BudgetExhausted, InvalidConfig
from abstain_al.oracles import (OracleState, draw_unlabelled, export_ledger, init_pool,
                                make_oracle, pool_size, request_label, stream_cutoff)
from abstain_al.partition_tree import Cell, refine, root_cell
from abstain_al.problems import make_constant, make_linear_1d


def test_pool_sizes():
    # 1600 ln 10 = 3684.14, so the ceiling is 3685
    assert pool_size(10) == 3685
    assert pool_size(2) == 45


def test_init_pool_has_exactly_Mn_points():
    st = init_pool(10, make_linear_1d(), np.random.default_rng(0))
    assert st.pool.shape == (st.pool_size_Mn, 1)
    assert st.pool_size_Mn == pool_size(10)


def test_membership_deterministic_label():
    st = make_oracle("membership", 5, make_constant(1.0), np.random.default_rng(0))
    out = request_label(st, root_cell(1), t=1)
    assert out.y == 1 and st.used == 1


def test_pool_empty_intersection_discards():
    st = init_pool(2, make_linear_1d(), np.random.default_rng(0))
    st.pool[:] = 0.9
    out = request_label(st, Cell(1, 1, (0.0,), (0.5,)), t=1)
    assert out.discarded and st.used == 0
    assert st.ledger[-1][1] == "discard"


def test_pool_picks_first_alive_point():
    st = init_pool(2, make_linear_1d(), np.random.default_rng(0))
    first = int(np.flatnonzero(st.pool[:, 0] < 0.5)[0])
    out = request_label(st, Cell(1, 1, (0.0,), (0.5,)))
    assert out.at[0] == st.pool[first, 0]
    assert not st.pool_alive[first]


def test_stream_certain_hit_uses_first_draw():
    st = make_oracle("stream", 5, make_linear_1d(), np.random.default_rng(0))
    out = request_label(st, root_cell(1))
    assert not out.discarded and st.stream_draws == 1


def test_stream_cutoff_and_discard():
    assert stream_cutoff(10) == math.ceil(200 * math.log(10))
    assert stream_cutoff(1) == 1
    st = make_oracle("stream", 2, make_linear_1d(), np.random.default_rng(0))
    tiny = Cell(30, 1, (0.0,), (1e-12,))
    out = request_label(st, tiny)
    assert out.discarded and st.used == 0 and st.stream_draws == stream_cutoff(2)


def test_budget_is_enforced():
    st = make_oracle("membership", 1, make_linear_1d(), np.random.default_rng(0))
    request_label(st, root_cell(1))
    with pytest.raises(BudgetExhausted):
        request_label(st, root_cell(1))


def test_unknown_model_rejected():
    with pytest.raises(InvalidConfig):
        OracleState(model="telepathy", budget_n=3, instance=make_linear_1d(),
                    rng=np.random.default_rng(0))


def test_draw_unlabelled_accounting():
    st = make_oracle("membership", 5, make_linear_1d(), np.random.default_rng(0))
    draw_unlabelled(st, 0)
    assert st.m_n == 0
    draw_unlabelled(st, 5)
    assert st.m_n == 5
    st2 = make_oracle("membership", 5, make_linear_1d(), np.random.default_rng(0))
    draw_unlabelled(st2, 3)
    draw_unlabelled(st2, 4)
    assert st2.m_n == 7


def test_ledger_export(tmp_path):
    st = init_pool(3, make_linear_1d(), np.random.default_rng(0))
    a, b = refine(root_cell(1))
    request_label(st, a, t=1)
    request_label(st, b, t=2)
    path = tmp_path / "ledger.csv"
    export_ledger(st, path)
    lines = path.read_text().splitlines()
    assert lines[0].split(",") == ["t", "action", "h", "i", "outcome"]
    assert sum(1 for ln in lines[1:] if ",label," in ln) == st.used == 2
