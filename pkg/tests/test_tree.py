import numpy as np
import pytest
from hypothesis import given, strategies as st

from bmckde.tree import (
    MAX_DEPTH,
    TreeSample,
    children_of,
    depth_from_size,
    generation_of,
    generation_slice,
    parent_of,
    tree_size,
)


@pytest.mark.parametrize("n, size", [(0, 1), (1, 3), (10, 2047), (15, 65535)])
def test_tree_size_examples(n, size):
    assert tree_size(n) == size


def test_tree_size_rejects_bad_depths():
    with pytest.raises(ValueError):
        tree_size(-1)
    with pytest.raises(OverflowError):
        tree_size(MAX_DEPTH + 1)


@pytest.mark.parametrize("u, g", [(0, 0), (2, 1), (7, 3), (14, 3), (15, 4)])
def test_generation_of_examples(u, g):
    assert generation_of(u) == g


@pytest.mark.parametrize("u, kids", [(0, (1, 2)), (1, (3, 4)), (6, (13, 14))])
def test_children_of_examples(u, kids):
    assert children_of(u) == kids


def test_root_has_no_parent():
    with pytest.raises(ValueError):
        parent_of(0)


@given(st.integers(min_value=0, max_value=2**40))
def test_heap_arithmetic_roundtrip(u):
    a, b = children_of(u)
    assert parent_of(a) == parent_of(b) == u
    assert generation_of(a) == generation_of(u) + 1


def test_generation_of_vectorised_matches_scalar():
    idx = np.arange(5000)
    assert np.array_equal(generation_of(idx), [generation_of(int(i)) for i in idx])
    big = np.array([2**40 - 2, 2**40 - 1, 2**41 - 2])
    assert list(generation_of(big)) == [39, 40, 40]


@given(st.integers(min_value=0, max_value=30))
def test_slices_partition_the_tree(n):
    total = sum(generation_slice(m).stop - generation_slice(m).start for m in range(n + 1))
    assert total == tree_size(n)
    assert generation_slice(n).stop == tree_size(n)
    assert depth_from_size(tree_size(n)) == n


def test_depth_from_size_rejects_partial_trees():
    with pytest.raises(ValueError):
        depth_from_size(6)


def test_tree_sample_is_read_only_and_validated():
    t = TreeSample(1, [0.1, 0.2, 0.3])
    assert t.values.shape == (3, 1) and t.dim == 1 and len(t) == 3
    with pytest.raises(ValueError):
        t.values[0, 0] = 1.0
    with pytest.raises(ValueError):
        TreeSample(2, [0.1, 0.2, 0.3])
    assert list(t.generation(1)[:, 0]) == [0.2, 0.3]
    with pytest.raises(IndexError):
        t.generation(2)


def test_csv_roundtrip_is_exact():
    vals = np.random.default_rng(0).random((7, 2))
    t = TreeSample(2, vals)
    text = t.to_csv()
    assert text.splitlines()[0] == "node_index,generation,x1,x2"
    assert text.splitlines()[4].startswith("3,2,")
    back = TreeSample.from_csv(text)
    assert back.depth == 2 and np.array_equal(back.values, vals)


def test_csv_rejects_bad_input():
    with pytest.raises(ValueError):
        TreeSample.from_csv("")
    with pytest.raises(ValueError):
        TreeSample.from_csv("a,b,c\n0,0,1.0\n")
    with pytest.raises(ValueError):
        TreeSample.from_csv("node_index,generation,x1\n1,0,1.0\n")
