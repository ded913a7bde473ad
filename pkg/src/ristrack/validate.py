"""Independent-oracle self checks, runnable from the CLI.

Each check recomputes a quantity along a second, slower route (exhaustive
enumeration, dense linear solve, numerical quadrature) and compares it with
the production path.  Returns the list of failed check names.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.integrate import quad
from scipy.stats import norm

from .acquisition import expected_improvement
from .codebook import quantize_codeword
from .surrogate import ObservationHistory, gp_fit, gp_posterior, grid_candidates


def check_quantizer_exhaustive(num_geometries: int = 10, seed: int = 7,
                               bits: int = 2) -> bool:
    """quantize_codeword must match brute force over all 4^N codewords."""
    rng = np.random.default_rng(seed)
    levels = 2 ** bits
    step = 2.0 * np.pi / levels
    for _ in range(num_geometries):
        n = int(rng.integers(2, 7))
        phases = rng.uniform(0.0, 2.0 * np.pi, size=n)
        weights = rng.uniform(0.2, 1.0, size=n)
        cw = quantize_codeword(phases, bits=bits, sweep_resolution=16, weights=weights)
        achieved = abs(np.sum(weights * np.exp(1j * (cw.phases - phases))))
        best = max(
            abs(np.sum(weights * np.exp(1j * (np.array(combo) * step - phases))))
            for combo in itertools.product(range(levels), repeat=n)
        )
        if not np.isclose(achieved, best, rtol=1e-12, atol=0.0):
            return False
    return True


def check_gp_dense_solve(num_instances: int = 20, seed: int = 11,
                         tol: float = 1e-8) -> bool:
    """Cholesky posterior must match a dense np.linalg.solve oracle."""
    rng = np.random.default_rng(seed)
    candidates = grid_candidates()
    for _ in range(num_instances):
        n = int(rng.integers(2, 40))
        idx = rng.choice(candidates.shape[0], size=n, replace=False)
        history = ObservationHistory()
        for i in idx:
            history.add(candidates[i], float(rng.normal(50.0, 10.0)))
        model = gp_fit(history)
        mean, var = gp_posterior(model, candidates)

        x = history.points()
        sq = np.sum((x[:, None, :] - x[None, :, :]) ** 2, axis=-1)
        k = model.theta1 * np.exp(-sq / model.theta2 ** 2) + model.jitter * np.eye(n)
        sq_star = np.sum((x[:, None, :] - candidates[None, :, :]) ** 2, axis=-1)
        k_star = model.theta1 * np.exp(-sq_star / model.theta2 ** 2)
        mean_ref = k_star.T @ np.linalg.solve(k, history.values())
        var_ref = model.theta1 - np.sum(k_star * np.linalg.solve(k, k_star), axis=0)
        if np.max(np.abs(mean - mean_ref)) > tol:
            return False
        if np.max(np.abs(var - np.maximum(var_ref, 0.0))) > tol:
            return False
    return True


def check_ei_quadrature(num_triples: int = 100, seed: int = 13,
                        tol: float = 1e-6) -> bool:
    """Closed-form EI must match numerical quadrature of the defining integral."""
    rng = np.random.default_rng(seed)
    for _ in range(num_triples):
        mean = rng.uniform(-3.0, 3.0)
        sigma = rng.uniform(0.05, 3.0)
        u = rng.uniform(-6.0, 6.0)
        y_star = mean + u * sigma
        closed = expected_improvement(mean, sigma ** 2, y_star)
        ref, _ = quad(lambda y: (y_star - y) * norm.pdf(y, mean, sigma),
                      mean - 12.0 * sigma, y_star)
        if abs(closed - ref) > tol * max(abs(ref), 1e-12):
            return False
    return True


CHECKS = [
    ("quantizer-vs-exhaustive", check_quantizer_exhaustive),
    ("gp-vs-dense-solve", check_gp_dense_solve),
    ("ei-vs-quadrature", check_ei_quadrature),
]


def run_all(verbose: bool = False) -> list[str]:
    failures = []
    for name, check in CHECKS:
        ok = check()
        if verbose:
            print(f"{'PASS' if ok else 'FAIL'} {name}")
        if not ok:
            failures.append(name)
    return failures
