"""Goal posterior, legibility, and both ambiguity definitions."""

import math

import numpy as np
import pytest

from scdp.errors import ArgumentError, DegenerateSceneError
from scdp.observer import (
    EllipseConfig,
    ObserverConfig,
    detect_ambiguity,
    ellipse_matrix,
    goal_posterior,
    legibility_score,
    probabilistic_ambiguity,
)
from scdp.world.scenes import Scene


def scene(start, goal, negs, task="navigation"):
    return Scene(task=task, start=start, goal_star=goal, goals_neg=negs)


class TestGoalPosterior:
    def test_trivial_prefix_is_uniform(self):
        sc = scene((0.1, 0.1), (0.9, 0.1), [(0.1, 0.9), (0.9, 0.9)])
        post = goal_posterior(np.array([[0.1, 0.1]]), sc, ObserverConfig())
        assert np.allclose(post, 1.0 / 3.0, atol=1e-12)

    def test_single_goal_posterior_is_one(self):
        sc = scene((0.0, 0.0), (1.0, 1.0), [])
        post = goal_posterior(np.array([[0.0, 0.0], [0.5, 0.5]]), sc, ObserverConfig())
        assert post.shape == (1,)
        assert post[0] == 1.0

    def test_worked_example_against_closed_form(self):
        # straight unit path toward g1; the competing goal sits off to the side
        sc = scene((0.0, 0.0), (2.0, 0.0), [(0.0, 2.0)])
        states = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])
        post = goal_posterior(states, sc, ObserverConfig(lam=1.0))
        expected = 1.0 / (1.0 + math.exp(1.0 - math.sqrt(5.0)))
        assert abs(post[0] - expected) < 1e-9

    def test_sums_to_one(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            pts = rng.uniform(0, 1, size=(5, 2))
            sc = scene(pts[0], pts[1], [pts[2], pts[3], pts[4]])
            states = np.cumsum(rng.uniform(-0.05, 0.05, size=(6, 2)), axis=0) + pts[0]
            post = goal_posterior(states, sc, ObserverConfig())
            assert abs(post.sum() - 1.0) < 1e-12

    def test_goal_relabeling_permutes_posterior(self):
        a, b = (0.8, 0.2), (0.2, 0.8)
        states = np.array([[0.1, 0.1], [0.3, 0.15], [0.5, 0.2]])
        p1 = goal_posterior(states, scene((0.1, 0.1), a, [b]), ObserverConfig())
        p2 = goal_posterior(states, scene((0.1, 0.1), b, [a]), ObserverConfig())
        assert np.allclose(p1, p2[::-1], atol=1e-12)

    def test_empty_prefix_rejected(self):
        sc = scene((0, 0), (1, 0), [(0, 1)])
        with pytest.raises(ArgumentError):
            goal_posterior(np.zeros((0, 2)), sc, ObserverConfig())


class TestLegibility:
    def test_single_goal_scene_scores_one(self):
        sc = scene((0.0, 0.0), (1.0, 0.0), [])
        states = np.array([[0.0, 0.0], [0.2, 0.3], [0.6, -0.1], [1.0, 0.0]])
        assert legibility_score(states, sc, ObserverConfig()) == 1.0

    def test_in_unit_interval(self):
        rng = np.random.default_rng(3)
        sc = scene((0.2, 0.2), (0.8, 0.2), [(0.8, 0.8)])
        for _ in range(10):
            states = np.vstack(
                [[0.2, 0.2], rng.uniform(0, 1, size=(8, 2))]
            )
            score = legibility_score(states, sc, ObserverConfig())
            assert 0.0 <= score <= 1.0

    def test_matches_bruteforce_sum_oracle(self):
        cfg = ObserverConfig(lam=5.0, weight_fn="t_rev")
        sc = scene((0.2, 0.5), (0.8, 0.5), [(0.5, 0.8)])
        states = np.array(
            [[0.2, 0.5], [0.35, 0.42], [0.5, 0.4], [0.65, 0.42], [0.8, 0.5]]
        )
        # independent oracle: prefix posteriors recomputed from their definition
        goals = [np.array(sc.goal_star), np.array(sc.goals_neg[0])]
        total, wsum = 0.0, 0.0
        n = states.shape[0]
        for t in range(n):
            prefix = states[: t + 1]
            cost = sum(
                np.linalg.norm(prefix[i + 1] - prefix[i]) for i in range(t)
            )
            weights = []
            for g in goals:
                ex = cfg.lam * (
                    -cost
                    - np.linalg.norm(prefix[-1] - g)
                    + np.linalg.norm(states[0] - g)
                )
                weights.append(math.exp(ex))
            p_star = weights[0] / sum(weights)
            f = (n - 1) - t
            total += p_star * f
            wsum += f
        assert abs(legibility_score(states, sc, cfg) - total / wsum) < 1e-12

    def test_arcing_away_scores_higher(self):
        from scdp.world.bezier import bezier_demo

        cfg = ObserverConfig()
        sc = scene((0.2, 0.5), (0.8, 0.5), [(0.5, 0.75)])
        away = bezier_demo(sc, np.array([0.0, -0.25]), steps=48)
        straight = bezier_demo(sc, np.array([0.0, 0.0]), steps=48)
        toward = bezier_demo(sc, np.array([0.0, 0.25]), steps=48)
        s_away = legibility_score(away.states, sc, cfg)
        s_straight = legibility_score(straight.states, sc, cfg)
        s_toward = legibility_score(toward.states, sc, cfg)
        assert s_away > s_straight > s_toward

    def test_constant_weight_is_plain_mean(self):
        cfg = ObserverConfig(weight_fn="const")
        sc = scene((0.1, 0.1), (0.9, 0.1), [(0.9, 0.9)])
        states = np.array([[0.1, 0.1], [0.4, 0.1], [0.7, 0.1], [0.9, 0.1]])
        score = legibility_score(states, sc, cfg)
        posts = [
            goal_posterior(states[: t + 1], sc, cfg)[0] for t in range(4)
        ]
        assert abs(score - np.mean(posts)) < 1e-12

    def test_weight_fn_variants_follow_definitions(self):
        sc = scene((0.1, 0.1), (0.9, 0.1), [(0.9, 0.9)])
        states = np.array([[0.1, 0.1], [0.4, 0.1], [0.7, 0.1], [0.9, 0.1]])
        posts = np.array(
            [goal_posterior(states[: t + 1], sc, ObserverConfig())[0]
             for t in range(4)]
        )
        t = np.arange(4, dtype=float)
        rev = legibility_score(states, sc, ObserverConfig(weight_fn="t_rev"))
        fwd = legibility_score(states, sc, ObserverConfig(weight_fn="t"))
        assert abs(rev - (posts * (3 - t)).sum() / (3 - t).sum()) < 1e-12
        assert abs(fwd - (posts * t).sum() / t.sum()) < 1e-12
        # the posterior rises along the path, so late weighting scores higher
        assert fwd > rev


class TestProbabilisticAmbiguity:
    def test_collinear_beyond_goal_is_ambiguous(self):
        sc = scene((0.1, 0.5), (0.5, 0.5), [(0.9, 0.5)])
        assert probabilistic_ambiguity(sc, ObserverConfig()) is True

    def test_far_behind_start_is_clear(self):
        sc = scene((0.5, 0.5), (0.9, 0.5), [(0.05, 0.5)])
        assert probabilistic_ambiguity(sc, ObserverConfig(tau=0.2)) is False

    def test_tau_near_one_everything_ambiguous(self):
        cfg = ObserverConfig(tau=0.9999)
        rng = np.random.default_rng(7)
        for _ in range(20):
            pts = rng.uniform(0, 1, size=(3, 2))
            if np.linalg.norm(pts[1] - pts[0]) < 0.15:
                continue
            sc = scene(pts[0], pts[1], [pts[2]])
            assert probabilistic_ambiguity(sc, cfg) is True

    def test_no_negatives_never_ambiguous(self):
        sc = scene((0.1, 0.1), (0.9, 0.9), [])
        assert probabilistic_ambiguity(sc, ObserverConfig()) is False


class TestEllipse:
    CFG = EllipseConfig(kappa=0.75, eccentricity=0.9)

    def test_worked_example_geometry(self):
        e, m = ellipse_matrix(np.array([0.0, 0.0]), np.array([1.0, 0.0]), self.CFG)
        assert np.allclose(e, [0.75, 0.0], atol=1e-12)
        evals = np.sort(np.linalg.eigvalsh(m))
        a = math.sqrt(1.0 / evals[0])
        b = math.sqrt(1.0 / evals[1])
        assert abs(a - 0.75 / 0.9) < 1e-9
        assert abs(b - (0.75 / 0.9) * math.sqrt(1 - 0.81)) < 1e-9
        # spec-quoted four-decimal values
        assert round(a, 4) == 0.8333
        assert round(b, 4) == 0.3632

    def test_state_is_a_focal_point(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            s = rng.uniform(0, 1, 2)
            g = rng.uniform(0, 1, 2)
            if np.linalg.norm(g - s) < 1e-3:
                continue
            e, m = ellipse_matrix(s, g, self.CFG)
            evals = np.sort(np.linalg.eigvalsh(m))
            a = math.sqrt(1.0 / evals[0])
            b = math.sqrt(1.0 / evals[1])
            focal = math.sqrt(a * a - b * b)
            assert abs(np.linalg.norm(s - e) - focal) < 1e-9

    def test_center_inside(self):
        e, m = ellipse_matrix(np.array([0.2, 0.3]), np.array([0.9, 0.7]), self.CFG)
        assert float((e - e) @ m @ (e - e)) == 0.0

    def test_matrix_symmetric_positive(self):
        e, m = ellipse_matrix(np.array([0.1, 0.9]), np.array([0.8, 0.2]), self.CFG)
        assert np.allclose(m, m.T, atol=1e-12)
        assert (np.linalg.eigvalsh(m) > 0).all()

    def test_degenerate_state_rejected(self):
        with pytest.raises(DegenerateSceneError):
            ellipse_matrix(np.array([0.5, 0.5]), np.array([0.5, 0.5]), self.CFG)

    def test_detect_quadratic_form_values(self):
        sc = scene((0.0, 0.0), (1.0, 0.0), [(0.75, 0.1)])
        assert detect_ambiguity(sc, cfg=self.CFG) is True
        e, m = ellipse_matrix(sc.start, sc.goal_star, self.CFG)
        diff = np.array([0.75, 0.1]) - e
        assert abs(float(diff @ m @ diff) - 0.0758) < 5e-4
        sc2 = scene((0.0, 0.0), (1.0, 0.0), [(0.75, 0.5)])
        assert detect_ambiguity(sc2, cfg=self.CFG) is False
        diff2 = np.array([0.75, 0.5]) - e
        assert abs(float(diff2 @ m @ diff2) - 1.90) < 1e-2

    def test_center_goal_is_ambiguous(self):
        e, _ = ellipse_matrix(np.array([0.0, 0.0]), np.array([1.0, 0.0]), self.CFG)
        sc = scene((0.0, 0.0), (1.0, 0.0), [tuple(e)])
        assert detect_ambiguity(sc, cfg=self.CFG) is True

    def test_monotone_escape_along_ray(self):
        s = np.array([0.0, 0.0])
        g = np.array([1.0, 0.0])
        e, m = ellipse_matrix(s, g, self.CFG)
        v = np.array([0.3, 0.8])
        v /= np.linalg.norm(v)
        flips = 0
        prev = True
        for t in np.linspace(0.0, 3.0, 400):
            sc = scene(tuple(s), tuple(g), [tuple(e + t * v)])
            cur = detect_ambiguity(sc, cfg=self.CFG)
            if cur != prev:
                flips += 1
                prev = cur
        assert flips == 1 and prev is False

    def test_rigid_transform_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            s = rng.uniform(0, 1, 2)
            g = rng.uniform(0, 1, 2)
            n = rng.uniform(0, 1, 2)
            if np.linalg.norm(g - s) < 0.05:
                continue
            theta = rng.uniform(0, 2 * np.pi)
            rot = np.array(
                [[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]]
            )
            shift = rng.uniform(-3, 3, 2)
            e, m = ellipse_matrix(s, g, self.CFG)
            q1 = float((n - e) @ m @ (n - e))
            s2, g2, n2 = (rot @ s + shift, rot @ g + shift, rot @ n + shift)
            e2, m2 = ellipse_matrix(s2, g2, self.CFG)
            q2 = float((n2 - e2) @ m2 @ (n2 - e2))
            assert abs(q1 - q2) < 1e-9
            sc1 = scene(tuple(s), tuple(g), [tuple(n)])
            sc2 = scene(tuple(s2), tuple(g2), [tuple(n2)])
            assert detect_ambiguity(sc1, cfg=self.CFG) == detect_ambiguity(
                sc2, cfg=self.CFG
            )


class TestCrossDefinitionAnchors:
    """The probabilistic and geometric definitions agree on anchor scenes."""

    OBS = ObserverConfig(lam=5.0, tau=0.2)
    ELL = EllipseConfig()

    def test_midpoint_distractor_ambiguous_under_both(self):
        sc = scene((0.1, 0.3), (0.9, 0.7), [(0.5, 0.5)])
        assert probabilistic_ambiguity(sc, self.OBS) is True
        assert detect_ambiguity(sc, cfg=self.ELL) is True

    def test_far_distractor_clear_under_both(self):
        # distractor farther than 2a from every point of the start->goal segment
        sc = scene((0.1, 0.1), (0.45, 0.1), [(0.2, 0.95)])
        d = np.linalg.norm(np.array(sc.goal_star) - np.array(sc.start))
        a = self.ELL.kappa * d / self.ELL.eccentricity
        seg = [
            np.array(sc.start) * (1 - u) + np.array(sc.goal_star) * u
            for u in np.linspace(0, 1, 200)
        ]
        assert min(np.linalg.norm(p - np.array([0.2, 0.95])) for p in seg) > 2 * a
        assert probabilistic_ambiguity(sc, self.OBS) is False
        assert detect_ambiguity(sc, cfg=self.ELL) is False
