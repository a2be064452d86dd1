import math

import numpy as np
import pytest

from inexact_pgm.prox import InconsistentProxError, ProxFunction, ProxInputError, implied_subgradient, \
    project_l1_ball, prox_apply, soft_threshold
from tests.utilities import brute_force_l1_projection


@pytest.mark.parametrize("x, radius, expected", [
    ([3.0, 0.0], 1.0, [1.0, 0.0]),
    ([2.0, 1.0], 1.0, [1.0, 0.0]),
    ([1.0, 1.0], 1.0, [0.5, 0.5]),
    ([0.2, -0.3], 1.0, [0.2, -0.3]),
    ([-4.0, 2.0, 1.0], 3.0, [-2.5, 0.5, 0.0]),
])
def test_project_l1_ball_examples(x, radius, expected):
    assert np.allclose(project_l1_ball(np.array(x), radius), expected)


# Project random points of dimension at most 3 with random radii.
# Expect the sorting projection to match the enumeration of every face of the ball
def test_project_l1_ball_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(500):
        dim = int(rng.integers(1, 4))
        x = rng.normal(scale=3.0, size=dim)
        radius = float(rng.uniform(0.1, 5.0))
        projected = project_l1_ball(x, radius)
        assert np.allclose(projected, brute_force_l1_projection(x, radius), atol=1e-8)
        assert float(np.sum(np.abs(projected))) <= radius * (1.0 + 1e-12)


def test_projection_is_idempotent_and_nonexpansive():
    rng = np.random.default_rng(1)
    ball = ProxFunction.l1_ball(2.0)
    for _ in range(200):
        x, y = rng.normal(scale=4.0, size=(2, 6))
        px, py = prox_apply(ball, 1.0, x), prox_apply(ball, 1.0, y)
        assert np.allclose(prox_apply(ball, 1.0, px), px)
        assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) * (1.0 + 1e-12)


def test_soft_threshold_example():
    assert np.allclose(soft_threshold(np.array([2.0, -0.5]), 1.0), [1.0, 0.0])


def test_l1_norm_prox_scales_with_gamma():
    h = ProxFunction.l1_norm(0.5)
    assert np.allclose(prox_apply(h, 2.0, np.array([3.0, -0.5, 1.0])), [2.0, 0.0, 0.0])


def test_zero_prox_is_identity():
    x = np.array([1.0, -2.0])
    result = prox_apply(ProxFunction.zero(), 0.3, x)
    assert np.array_equal(result, x)
    assert result is not x


def test_zero_is_a_fixed_point():
    zero = np.zeros(4)
    for h in (ProxFunction.zero(), ProxFunction.l1_norm(1.0), ProxFunction.l1_ball(1.0)):
        assert np.array_equal(prox_apply(h, 0.7, zero), zero)


def test_values():
    x = np.array([1.0, -2.0])
    assert ProxFunction.zero().value(x) == 0.0
    assert ProxFunction.l1_norm(0.5).value(x) == pytest.approx(1.5)
    assert ProxFunction.l1_ball(3.0).value(x) == 0.0
    assert ProxFunction.l1_ball(2.0).value(x) == math.inf
    assert not ProxFunction.l1_ball(2.0).contains(x)


def test_implied_subgradient():
    h = ProxFunction.l1_norm(1.0)
    pre = np.array([2.0, 0.5])
    post = prox_apply(h, 1.0, pre)
    assert np.allclose(implied_subgradient(h, 1.0, pre, post), [1.0, 0.5])


# Read a subgradient off the projection of a point outside the ball.
# Expect a normal vector of the ball at the projection
def test_implied_subgradient_of_ball():
    h = ProxFunction.l1_ball(1.0)
    pre = np.array([3.0, 0.0])
    p = implied_subgradient(h, 1.0, pre, prox_apply(h, 1.0, pre))
    assert np.allclose(p, [2.0, 0.0])
    rng = np.random.default_rng(2)
    for _ in range(100):
        z = project_l1_ball(rng.normal(size=2), 1.0)
        assert float(p @ (z - np.array([1.0, 0.0]))) <= 1e-12


def test_implied_subgradient_rejects_inconsistent_pair():
    h = ProxFunction.l1_norm(1.0)
    with pytest.raises(InconsistentProxError):
        implied_subgradient(h, 1.0, np.array([2.0, 0.5]), np.zeros(2))
    assert np.allclose(implied_subgradient(h, 1.0, np.array([2.0, 0.5]), np.zeros(2), check=False), [2.0, 0.5])


def test_invalid_arguments():
    with pytest.raises(ProxInputError):
        prox_apply(ProxFunction.zero(), 0.0, np.zeros(2))
    with pytest.raises(ProxInputError):
        implied_subgradient(ProxFunction.zero(), -1.0, np.zeros(2), np.zeros(2))
    with pytest.raises(ProxInputError):
        ProxFunction.l1_ball(0.0)
    with pytest.raises(ProxInputError):
        ProxFunction.l1_norm(-1.0)
