"""The correction block of the short curves.

``c_residual`` is the ground truth here: it computes the exact lower
right block of the 2p x 2p logarithm, so every claim about the
approximate corrections can be checked against it directly.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stiefelqg import bch_c1, bch_c_iterate, bch_factors, c_residual
from stiefelqg.cli import constructed_pair
from stiefelqg.stiefel import gaussian_matrix, rng_from_seed

from conftest import random_skew

DELTA_MAX = math.log(math.sqrt(2.0))


def scaled_pair(p, seed, delta):
    """Random (a, b) with max(||a||_2, ||b||_2) = delta."""
    rng = rng_from_seed(seed)
    a = random_skew(p, seed)
    b = gaussian_matrix(p, p, rng)
    scale = delta / max(np.linalg.norm(a, 2), np.linalg.norm(b, 2))
    return a * scale, b * scale


def residual_bound(delta):
    return (7.0 / 216.0 + 1.0 / (1.0 - delta)) * delta**5


class TestC1:
    def test_zero_rotation_block(self):
        b = gaussian_matrix(3, 3, rng_from_seed(1))
        assert np.array_equal(bch_c1(np.zeros((3, 3)), b), np.zeros((3, 3)))

    def test_identity_b(self):
        a = random_skew(4, 2)
        assert np.allclose(bch_c1(a, np.eye(4)), -a / 6.0, atol=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_output_is_skew(self, seed):
        a, b = scaled_pair(3, seed, 0.3)
        c = bch_c1(a, b)
        assert np.array_equal(c, -c.T)

    def test_single_iteration_equals_c1(self):
        a, b = scaled_pair(4, 3, 0.25)
        assert np.allclose(bch_c_iterate(a, b, 1), bch_c1(a, b), atol=1e-16)

    def test_zero_iterations(self):
        a, b = scaled_pair(3, 4, 0.2)
        assert np.array_equal(bch_c_iterate(a, b, 0), np.zeros((3, 3)))


class TestCResidual:
    def test_all_zero(self):
        z = np.zeros((3, 3))
        assert np.linalg.norm(c_residual(z, z, z)) <= 1e-14

    def test_uncorrected_leading_term(self):
        # with c = 0 the block equals (1/6) b a b^T up to higher order
        delta = 0.1
        for seed in (5, 6, 7):
            a, b = scaled_pair(3, seed, delta)
            C = c_residual(a, b, np.zeros((3, 3)))
            leading = (1.0 / 6.0) * b @ a @ b.T
            assert np.linalg.norm(C - leading, 2) <= delta**4

    def test_corrected_block_meets_printed_bound(self):
        delta = 0.3
        for seed in (8, 9, 10):
            a, b = scaled_pair(3, seed, delta)
            C = c_residual(a, b, bch_c1(a, b))
            assert np.linalg.norm(C, 2) <= residual_bound(delta)  # approx 3.55e-3

    def test_second_iteration_tightens_the_block(self):
        worse = better = 0.0
        for seed in (11, 12, 13, 14):
            a, b = scaled_pair(4, seed, 0.3)
            worse += np.linalg.norm(c_residual(a, b, bch_c_iterate(a, b, 1)), 2)
            better += np.linalg.norm(c_residual(a, b, bch_c_iterate(a, b, 2)), 2)
        assert better < worse

    @settings(max_examples=60, deadline=None)
    @given(
        seed=st.integers(0, 2**32 - 1),
        delta=st.floats(1e-3, DELTA_MAX),
        p=st.integers(2, 5),
    )
    def test_bound_holds_generically(self, seed, delta, p):
        a, b = scaled_pair(p, seed, delta)
        C = c_residual(a, b, bch_c1(a, b))
        assert np.linalg.norm(C, 2) <= residual_bound(delta)


class TestFactorsFromEndpoints:
    def test_factors_feed_residual(self):
        U, _, Ut = constructed_pair(20, 4, 1.0, 15)
        f = bch_factors(U, Ut)
        assert np.linalg.norm(f.b, 2) <= math.pi / 2 + 1e-12
        corrected = np.linalg.norm(c_residual(f.a, f.b, f.c), 2)
        uncorrected = np.linalg.norm(c_residual(f.a, f.b, np.zeros_like(f.c)), 2)
        assert corrected < uncorrected
