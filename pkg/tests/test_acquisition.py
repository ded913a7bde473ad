"""Acquisition tests: closed-form EI against numerical quadrature, the
density-ratio score arithmetic, and selection determinism/exclusion rules.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import norm

from ristrack.acquisition import (
    CandidatesExhausted,
    expected_improvement,
    select_next,
    tpe_score,
)
from ristrack.surrogate import (
    ObservationHistory,
    gp_fit,
    grid_candidates,
    tpe_density,
    tpe_fit,
)


def history_from(pairs):
    h = ObservationHistory()
    for point, value in pairs:
        h.add(point, value)
    return h


def ei_quadrature(mean, sigma, y_star):
    val, _ = quad(lambda y: (y_star - y) * norm.pdf(y, mean, sigma),
                  mean - 12.0 * sigma, y_star)
    return val


class TestExpectedImprovement:
    def test_deterministic_no_improvement(self):
        assert expected_improvement(5.0, 0.0, 5.0) == 0.0

    def test_deterministic_unit_improvement(self):
        assert expected_improvement(4.0, 0.0, 5.0) == pytest.approx(1.0, rel=1e-15)

    def test_at_threshold_equals_phi_zero(self):
        """mean = y*, sigma = 1 -> EI = pdf(0) = 1/sqrt(2*pi)."""
        assert expected_improvement(0.0, 1.0, 0.0) == pytest.approx(
            1.0 / math.sqrt(2.0 * math.pi), rel=1e-12)
        assert expected_improvement(0.0, 1.0, 0.0) == pytest.approx(
            ei_quadrature(0.0, 1.0, 0.0), rel=1e-6)

    def test_matches_quadrature_on_random_triples(self):
        rng = np.random.default_rng(51)
        for _ in range(100):
            mean = rng.uniform(-3, 3)
            sigma = rng.uniform(0.05, 3.0)
            y_star = mean + rng.uniform(-6, 6) * sigma
            closed = expected_improvement(mean, sigma ** 2, y_star)
            ref = ei_quadrature(mean, sigma, y_star)
            assert closed == pytest.approx(ref, rel=1e-6, abs=1e-12)

    def test_nonnegative_everywhere(self):
        rng = np.random.default_rng(53)
        mean = rng.uniform(-10, 10, size=1000)
        var = rng.uniform(0, 9, size=1000)
        ei = expected_improvement(mean, var, y_star=0.0)
        assert np.all(ei >= 0.0)

    def test_monotone_in_sigma(self):
        sigmas = np.linspace(0.0, 5.0, 200)
        ei = expected_improvement(np.full_like(sigmas, 1.0), sigmas ** 2, y_star=0.0)
        assert np.all(np.diff(ei) >= -1e-12)

    def test_monotone_in_mean(self):
        means = np.linspace(-5.0, 5.0, 200)
        ei = expected_improvement(means, np.ones_like(means), y_star=0.0)
        assert np.all(np.diff(ei) <= 1e-12)

    def test_rejects_negative_variance(self):
        with pytest.raises(ValueError):
            expected_improvement(0.0, -1e-6, 0.0)
        # inside the clamp tolerance is fine
        assert expected_improvement(1.0, -1e-11, 0.0) == 0.0


class TestTpeScore:
    def test_zero_bad_density_is_maximal(self):
        assert tpe_score(0.3, 0.0, 0.25) == pytest.approx(4.0, rel=1e-15)

    def test_equal_densities_score_one(self):
        for gamma in (0.1, 0.25, 0.7):
            assert tpe_score(0.4, 0.4, gamma) == pytest.approx(1.0, rel=1e-15)

    def test_ratio_three_at_quarter_gamma(self):
        """gamma = 0.25, g/l = 3 -> 1/(0.25 + 2.25) = 0.4."""
        assert tpe_score(0.1, 0.3, 0.25) == pytest.approx(0.4, rel=1e-12)

    def test_zero_good_density_scores_zero(self):
        assert tpe_score(0.0, 0.5, 0.25) == 0.0

    def test_strictly_increasing_in_ratio(self):
        ratios = np.linspace(0.01, 100, 500)
        scores = tpe_score(ratios, np.ones_like(ratios), 0.25)
        assert np.all(np.diff(scores) > 0)

    def test_bad_gamma_rejected(self):
        with pytest.raises(ValueError):
            tpe_score(0.1, 0.1, 0.0)


class TestSelectNext:
    def test_single_remaining_candidate(self):
        candidates = grid_candidates(2, 2)
        history = history_from([
            ((0, 0), 1.0), ((0, 1), 2.0), ((1, 0), 3.0),
        ])
        model = tpe_fit(history, candidates=candidates)
        np.testing.assert_array_equal(select_next(candidates, model, history), [1, 1])

    def test_never_returns_a_measured_point(self):
        rng = np.random.default_rng(59)
        candidates = grid_candidates()
        for _ in range(20):
            n = int(rng.integers(1, 40))
            idx = rng.choice(100, size=n, replace=False)
            history = history_from(
                (candidates[i], float(rng.normal())) for i in idx
            )
            for model in (gp_fit(history), tpe_fit(history, candidates=candidates)):
                point = select_next(candidates, model, history)
                assert tuple(point) not in history

    def test_gp_single_observation_excluded(self):
        candidates = grid_candidates()
        history = history_from([((4, 4), 1.0)])
        point = select_next(candidates, gp_fit(history), history)
        assert tuple(point) != (4.0, 4.0)

    def test_tpe_selection_is_argmax_of_density_ratio(self):
        """Eq.-(5) score and the raw l/g ratio pick the same point."""
        rng = np.random.default_rng(61)
        candidates = grid_candidates()
        for _ in range(50):
            n = int(rng.integers(2, 50))
            idx = rng.choice(100, size=n, replace=False)
            history = history_from(
                (candidates[i], float(rng.normal())) for i in idx
            )
            model = tpe_fit(history, candidates=candidates)
            point = select_next(candidates, model, history)
            measured = {tuple(candidates[i]) for i in idx}
            remaining = np.array([c for c in candidates if tuple(c) not in measured])
            l, g = tpe_density(model, remaining)
            ratio_pick = remaining[int(np.argmax(l / g))]
            np.testing.assert_array_equal(point, ratio_pick)

    def test_exhaustion_raises(self):
        candidates = grid_candidates(2, 1)
        history = history_from([((0, 0), 1.0), ((1, 0), 2.0)])
        with pytest.raises(CandidatesExhausted):
            select_next(candidates, tpe_fit(history, candidates=candidates), history)

    def test_tie_breaks_to_lowest_candidate_index(self):
        """A history symmetric about the grid diagonal makes mirrored
        candidates tie exactly; the lower row-major index wins."""
        candidates = grid_candidates()
        history = history_from([((4, 4), 1.0), ((5, 5), 1.0)])
        model = gp_fit(history, theta=(1.0, 2.0), jitter=1e-8)
        from ristrack.acquisition import expected_improvement as ei
        from ristrack.surrogate import gp_posterior

        mean, var = gp_posterior(model, np.array([[0.0, 9.0], [9.0, 0.0]]))
        scores = ei(mean, var, y_star=float(model.y_train.min()))
        assert scores[0] == scores[1]  # exact float tie by symmetry
        point = select_next(candidates, model, history)
        best = ei(*gp_posterior(model, candidates), y_star=float(model.y_train.min()))
        ties = candidates[best == best.max()]
        np.testing.assert_array_equal(point, ties[0])
        assert tuple(point) == (0.0, 9.0)  # row-major index 9 beats 90

    def test_rejects_unknown_model(self):
        with pytest.raises(TypeError):
            select_next(grid_candidates(), object(), ObservationHistory())
