"""Fold/unfold round trips must be exact."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavecast.tensorize import Folded2D, fold, pad_to_multiple, unfold_trunc


def test_pad_appends_zero_rows():
    X = np.arange(10.0).reshape(5, 2)
    padded, orig = pad_to_multiple(X, 2)
    assert orig == 5 and padded.shape == (6, 2)
    np.testing.assert_array_equal(padded[5], [0.0, 0.0])
    np.testing.assert_array_equal(padded[:5], X)


def test_pad_noop_on_exact_multiple():
    X = np.arange(12.0).reshape(6, 2)
    padded, orig = pad_to_multiple(X, 3)
    assert padded.shape == (6, 2) and orig == 6
    np.testing.assert_array_equal(padded, X)


def test_pad_single_row():
    padded, orig = pad_to_multiple(np.array([[7.0]]), 4)
    assert padded.shape == (4, 1) and orig == 1
    np.testing.assert_array_equal(padded[1:], np.zeros((3, 1)))


def test_fold_rows_hold_one_period():
    X = np.arange(1.0, 7.0)[:, None]
    f = fold(X, period=3, folds=2)
    np.testing.assert_array_equal(f.tensor[:, :, 0], [[1, 2, 3], [4, 5, 6]])


def test_fold_degenerate_periods():
    X = np.arange(4.0)[:, None]
    assert fold(X, 1, 4).tensor.shape == (4, 1, 1)
    assert fold(X, 4, 1).tensor.shape == (1, 4, 1)
    np.testing.assert_array_equal(fold(X, 4, 1).tensor[0, :, 0], X[:, 0])


def test_fold_shape_mismatch():
    with pytest.raises(ValueError, match="shape mismatch"):
        fold(np.zeros((5, 1)), period=2, folds=2)


def test_unfold_truncates():
    f = Folded2D(tensor=np.array([[[1.0], [2.0]], [[3.0], [4.0]]]),
                 original_len=3, period=2, folds=2)
    np.testing.assert_array_equal(unfold_trunc(f)[:, 0], [1.0, 2.0, 3.0])


def test_unfold_exact_multiple_no_truncation():
    X = np.arange(8.0).reshape(4, 2)
    np.testing.assert_array_equal(unfold_trunc(fold(X, 2, 2)), X)


def test_folded2d_invariants_enforced():
    with pytest.raises(ValueError):
        Folded2D(tensor=np.zeros((2, 2, 1)), original_len=1, period=2, folds=2)


@settings(max_examples=200, deadline=None)
@given(
    T=st.integers(1, 48),
    p=st.integers(1, 96),
    d=st.integers(1, 4),
    seed=st.integers(0, 2**31),
)
def test_roundtrip_identity(T, p, d, seed):
    X = np.random.default_rng(seed).normal(size=(T, d))
    padded, orig = pad_to_multiple(X, p)
    folded = fold(padded, p, padded.shape[0] // p, original_len=orig)
    np.testing.assert_array_equal(unfold_trunc(folded), X)


def test_padding_never_alters_prefix():
    rng = np.random.default_rng(0)
    for _ in range(50):
        T, d = int(rng.integers(1, 40)), int(rng.integers(1, 4))
        p = int(rng.integers(1, 2 * T + 1))
        X = rng.normal(size=(T, d))
        padded, _ = pad_to_multiple(X, p)
        np.testing.assert_array_equal(padded[:T], X)
