"""Closed-form oracles for the evaluation metrics."""

import math

import numpy as np
import pytest

from scdp.errors import ArgumentError
from scdp.evalcli.metrics import (
    TransparencyParams,
    detachment,
    efficiency,
    success,
    transparency,
    w_amb,
)


class TestDetachment:
    def test_hand_summation_oracle(self):
        states = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
        got = detachment(states, np.array([0.0, 1.0]))
        expected = math.sqrt(2.0) / 1.0 + math.sqrt(5.0) / 2.0
        assert abs(got - expected) < 1e-9

    def test_monotone_in_distractor_distance(self):
        states = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])
        vals = [detachment(states, np.array([0.0, r])) for r in (1.0, 2.0, 5.0, 50.0)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_moving_s1_toward_distractor_reduces_score(self):
        g = np.array([0.0, 1.0])
        base = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])
        moved = base.copy()
        moved[1] = [0.4, 0.2]  # closer to the distractor
        assert detachment(moved, g) < detachment(base, g)

    def test_too_short_rejected(self):
        with pytest.raises(ArgumentError):
            detachment(np.array([[0.0, 0.0]]), np.array([1.0, 1.0]))


class TestEfficiency:
    def test_unit_straight_path(self):
        states = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])
        assert abs(efficiency(states) - 1.0 / (1.0 + 1e-6)) < 1e-12

    def test_zero_length_guarded_by_eps(self):
        states = np.array([[0.3, 0.3], [0.3, 0.3], [0.3, 0.3]])
        assert efficiency(states, eps=1e-6) == 1.0 / 1e-6

    def test_semicircle_against_polyline_oracle(self):
        theta = np.linspace(np.pi, 0.0, 65)  # 64 segments from (0,0) to (1,0)
        states = np.stack([0.5 + 0.5 * np.cos(theta), 0.5 * np.sin(theta)], axis=1)
        oracle_len = sum(
            math.dist(states[i], states[i + 1]) for i in range(len(states) - 1)
        )
        assert abs(efficiency(states) - 1.0 / (oracle_len + 1e-6)) < 1e-12
        assert abs(efficiency(states) - 2.0 / math.pi) < 2e-3  # 0.6366 at the limit


class TestWamb:
    P = TransparencyParams(u=2.5, x0=0.5)

    def test_midpoint_is_half(self):
        assert abs(w_amb(0.5, self.P) - 0.5) < 1e-12

    def test_worked_example(self):
        assert abs(w_amb(0.9, self.P) - 1.0 / (1.0 + math.exp(-1.0))) < 1e-12

    def test_strictly_increasing(self):
        vals = [w_amb(j, self.P) for j in np.linspace(-1, 2, 50)]
        assert all(b > a for a, b in zip(vals, vals[1:]))
        assert all(0.0 < v < 1.0 for v in vals)


class TestTransparency:
    def test_boundaries(self):
        assert transparency(0.7, 0.4, 0.0) == 0.7
        assert transparency(0.7, 0.4, 1.0) == 0.4

    def test_worked_example(self):
        w = 1.0 / (1.0 + math.exp(-1.0))
        got = transparency(0.70, 0.43, w)
        assert abs(got - ((1 - w) * 0.70 + w * 0.43)) < 1e-12
        assert abs(got - 0.5026) < 5e-4

    def test_convex_combination_bounds(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            d, e, w = rng.uniform(-1, 2), rng.uniform(-1, 2), rng.uniform(0, 1)
            t = transparency(d, e, w)
            assert min(d, e) - 1e-12 <= t <= max(d, e) + 1e-12

    def test_swapped_weighting_flag(self):
        params = TransparencyParams(swap_weights=True)
        assert transparency(0.7, 0.4, 0.0, params) == 0.4
        assert transparency(0.7, 0.4, 1.0, params) == 0.7


class TestSuccess:
    def test_exact_goal(self):
        states = np.array([[0.0, 0.0], [1.0, 1.0]])
        assert success(states, np.array([1.0, 1.0])) is True

    def test_strict_boundary(self):
        g = np.array([0.0, 0.0])
        near = np.array([[1.0, 0.0], [0.0499, 0.0]])
        far = np.array([[1.0, 0.0], [0.0501, 0.0]])
        assert success(near, g, radius=0.05) is True
        assert success(far, g, radius=0.05) is False


class TestRigidInvariance:
    def test_detachment_and_efficiency_invariant(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            states = rng.uniform(0, 1, size=(10, 2))
            g = rng.uniform(0, 1, 2)
            theta = rng.uniform(0, 2 * np.pi)
            rot = np.array(
                [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
            )
            shift = rng.uniform(-5, 5, 2)
            s2 = states @ rot.T + shift
            g2 = rot @ g + shift
            assert abs(detachment(states, g) - detachment(s2, g2)) < 1e-9
            assert abs(efficiency(states) - efficiency(s2)) < 1e-9
