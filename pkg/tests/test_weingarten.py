import itertools
import warnings
from fractions import Fraction

import numpy as np
import pytest

from oracles import weingarten_by_gram_inverse
from renyidesign.permgroup import Permutation, partitions
from renyidesign.weingarten import (
    WeingartenRegimeWarning,
    gram_matrix,
    verify_wg_inverse,
    weingarten,
    weingarten_table,
)


def test_known_values():
    assert weingarten(2, (1, 1)) == Fraction(1, 3)
    assert weingarten(2, (2,)) == Fraction(-1, 6)
    assert weingarten(4, Permutation.identity(2)) == Fraction(1, 15)
    assert weingarten(4, Permutation((1, 0))) == Fraction(-1, 60)


def test_alpha3_closed_forms():
    d = 5
    den = d * (d * d - 1) * (d * d - 4)
    assert weingarten(d, (1, 1, 1)) == Fraction(d * d - 2, den)
    assert weingarten(d, (2, 1)) == Fraction(-1, (d * d - 1) * (d * d - 4))
    assert weingarten(d, (3,)) == Fraction(2, den)


@pytest.mark.parametrize("d,alpha", [(2, 2), (3, 2), (3, 3), (4, 3), (4, 4), (5, 4)])
def test_matches_exact_gram_inverse(d, alpha):
    oracle = weingarten_by_gram_inverse(d, alpha)
    for images, value in oracle.items():
        assert weingarten(d, Permutation(images)) == value


def test_class_function():
    d, alpha = 6, 4
    table = weingarten_table(d, alpha)
    for images in itertools.permutations(range(alpha)):
        p = Permutation(images)
        assert table[p] == weingarten(d, p.cycle_type())


def test_cycle_type_must_match_alpha():
    with pytest.raises(ValueError):
        weingarten(3, (2, 1), alpha=4)


def test_gram_matrix_entries():
    G = gram_matrix(3, 2)
    assert G.tolist() == [[9, 3], [3, 9]]


@pytest.mark.parametrize("d", range(1, 7))
@pytest.mark.parametrize("alpha", range(1, 6))
def test_inverse_identity(d, alpha):
    if alpha > d:
        with pytest.raises(ValueError):
            verify_wg_inverse(d, alpha)
    else:
        assert verify_wg_inverse(d, alpha)


def test_small_d_warns_and_is_pseudo_inverse():
    weingarten_table.cache_clear()
    with pytest.warns(WeingartenRegimeWarning):
        table = weingarten_table(2, 3)
    perms = list(itertools.permutations(range(3)))
    G = np.array(gram_matrix(2, 3).tolist(), dtype=float)
    W = np.array(
        [[float(table[Permutation(s).inverse() * Permutation(g)]) for g in perms] for s in perms]
    )
    # Moore-Penrose conditions for the singular Gram matrix
    assert np.allclose(G @ W @ G, G)
    assert np.allclose(W @ G @ W, W)
    assert np.allclose(W, np.linalg.pinv(G))


def test_no_warning_in_regular_regime():
    weingarten_table.cache_clear()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        weingarten_table(4, 3)


@pytest.mark.parametrize("alpha", [2, 3, 4])
def test_sign_pattern_and_decay(alpha):
    # sign(Wg) = (-1)^(alpha - cycles) and |Wg| decreases in d for large d
    for mu in partitions(alpha):
        sign = (-1) ** (alpha - mu.rows)
        prev = None
        for d in range(2 * alpha, 65):
            v = weingarten(d, mu)
            assert v != 0 and (v > 0) == (sign > 0)
            if prev is not None:
                assert abs(v) < abs(prev)
            prev = v
