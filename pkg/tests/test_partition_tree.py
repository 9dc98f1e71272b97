import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abstain_al.errors import InvalidConfig, OutOfDomain
from abstain_al.partition_tree import (Cell, Tiling, default_params, descendants, locate,
                                       outer_radius_ok, project, refine, root_cell, split_axis,
                                       tiles_cube)


@pytest.mark.parametrize("D, rho, v1", [(1, 0.5, 2.0), (2, 2 ** -0.5, 2 * math.sqrt(2)),
                                        (4, 2 ** -0.25, 4.0)])
def test_default_params(D, rho, v1):
    tp = default_params(D)
    assert tp.rho == pytest.approx(rho)
    assert tp.v1 == pytest.approx(v1)
    assert tp.v2 == 0.5


def test_default_params_rejects_zero_dim():
    with pytest.raises(InvalidConfig):
        default_params(0)


def test_refine_root_1d():
    a, b = refine(root_cell(1))
    assert (a.lo, a.hi) == ((0.0,), (0.5,))
    assert (b.lo, b.hi) == ((0.5,), (1.0,))
    assert a.key == (1, 1) and b.key == (1, 2)


def test_refine_splits_longest_axis():
    cell = Cell(1, 1, (0.0, 0.0), (0.5, 1.0))
    assert split_axis(cell) == 1
    a, b = refine(cell)
    assert (a.lo, a.hi) == ((0.0, 0.0), (0.5, 0.5))
    assert (b.lo, b.hi) == ((0.0, 0.5), (0.5, 1.0))


def test_split_ties_go_to_lowest_axis():
    assert split_axis(root_cell(3)) == 0


def _random_leaves(rng, D, steps):
    leaves = [root_cell(D)]
    for _ in range(steps):
        j = int(rng.integers(len(leaves)))
        leaves[j:j + 1] = list(refine(leaves[j]))
    return leaves


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 30), st.integers(0, 10 ** 6))
def test_random_refinements_tile_the_cube(D, steps, seed):
    rng = np.random.default_rng(seed)
    leaves = _random_leaves(rng, D, steps)
    assert tiles_cube(leaves, n_probe=500, rng=rng)
    keys = [c.key for c in leaves]
    assert len(set(keys)) == len(keys)
    X = rng.random((200, D))
    idx = Tiling(leaves).locate(X)
    for x, k in zip(X, idx):
        assert Tiling(leaves).leaves[k].contains(x)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(0, 20))
def test_children_partition_parent_and_fit_outer_ball(D, h):
    tp = default_params(D)
    cell = root_cell(D)
    for _ in range(h):
        cell = refine(cell)[-1]
    a, b = refine(cell)
    assert a.volume + b.volume == pytest.approx(cell.volume)
    lo = np.minimum(a.lo, b.lo)
    hi = np.maximum(a.hi, b.hi)
    assert np.allclose(lo, cell.lo) and np.allclose(hi, cell.hi)
    for c in (cell, a, b):
        assert outer_radius_ok(c, tp)
        # the inner ball holds only after shrinking by 2^((D-1)/D): with v2 = 1/2
        # a D=2 cell at an odd level is twice as long as it is wide
        assert 0.5 * min(c.widths) >= tp.v2 * tp.rho ** c.h * 2.0 ** (-(D - 1) / D) - 1e-12


def test_descendants_count_and_order():
    subs = descendants(root_cell(1), 3)
    assert len(subs) == 8
    assert [c.lo[0] for c in subs] == sorted(c.lo[0] for c in subs)


def test_project_nearest_center_and_ties():
    leaves = list(refine(root_cell(1)))
    assert project(leaves, [0.1]).key == (1, 1)
    assert project(leaves, [0.5]).key == (1, 1)
    assert project(leaves, [0.74]).key == (1, 2)


def test_project_rejects_points_outside():
    leaves = list(refine(root_cell(1)))
    with pytest.raises(OutOfDomain):
        project(leaves, [1.5])


def test_locate_upper_face_belongs_to_last_leaf():
    leaves = list(refine(root_cell(1)))
    assert locate(leaves, [1.0]).key == (1, 2)
    assert locate(leaves, [0.5]).key == (1, 2)


def test_tiles_cube_detects_gap():
    a, _ = refine(root_cell(1))
    assert not tiles_cube([a])
