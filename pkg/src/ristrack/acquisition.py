"""Acquisition functions and next-point selection for the tracking loop.

Everything is minimization-oriented: the GP path scores candidates with
expected improvement below the incumbent best, the TPE path with the
density-ratio form of the same criterion.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import ndtr

from .surrogate import GpModel, ObservationHistory, TpeModel, gp_posterior, tpe_density

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class CandidatesExhausted(RuntimeError):
    """Every candidate has already been measured; the sweep is complete."""


def expected_improvement(mean, variance, y_star):
    """E[max(y_star - y, 0)] under y ~ N(mean, variance).

    With sigma = sqrt(variance): (y_star - mean)*Phi(u) + sigma*phi(u),
    u = (y_star - mean)/sigma; the sigma = 0 limit is max(y_star - mean, 0).
    Accepts scalars or arrays; never returns a negative value.
    """
    mean = np.asarray(mean, dtype=float)
    variance = np.asarray(variance, dtype=float)
    if np.any(variance < -1e-10):
        raise ValueError(f"negative variance: {variance.min()}")
    sigma = np.sqrt(np.maximum(variance, 0.0))
    improvement = y_star - mean
    if np.all(sigma > 0):
        u = improvement / sigma
        ei = improvement * ndtr(u) + sigma * _INV_SQRT_2PI * np.exp(-0.5 * u * u)
    else:
        u = np.where(sigma > 0, improvement / np.where(sigma > 0, sigma, 1.0), 0.0)
        phi = _INV_SQRT_2PI * np.exp(-0.5 * u * u)
        ei = np.where(
            sigma > 0,
            improvement * ndtr(u) + sigma * phi,
            np.maximum(improvement, 0.0),
        )
    ei = np.maximum(ei, 0.0)
    return float(ei) if ei.ndim == 0 else ei


def tpe_score(l_x, g_x, gamma: float):
    """(gamma + (g/l)*(1-gamma))^-1: monotone increasing in l/g; 0 when l = 0."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must be in (0, 1)")
    l_x = np.asarray(l_x, dtype=float)
    g_x = np.asarray(g_x, dtype=float)
    if np.any(l_x < 0) or np.any(g_x < 0):
        raise ValueError("densities must be nonnegative")
    with np.errstate(divide="ignore"):
        ratio = np.where(l_x > 0, g_x / np.where(l_x > 0, l_x, 1.0), np.inf)
        score = np.where(np.isinf(ratio), 0.0, 1.0 / (gamma + ratio * (1.0 - gamma)))
    return float(score) if score.ndim == 0 else score


def _density_ratio(l_x: np.ndarray, g_x: np.ndarray) -> np.ndarray:
    """l/g ranking used for selection: the exact order behind tpe_score.

    The score saturates in float64 once (g/l)*(1-gamma) drops below the
    epsilon of gamma, collapsing distinct candidates to ties; the raw ratio
    orders them exactly.  l = 0 scores 0; g = 0 with l > 0 scores +inf.
    """
    ratio = np.divide(l_x, g_x, out=np.full_like(l_x, np.inf), where=g_x > 0)
    return np.where(l_x > 0, ratio, 0.0)


def select_next(candidates: np.ndarray, model, history: ObservationHistory) -> np.ndarray:
    """Highest-acquisition unmeasured candidate (first one on ties).

    GP models use expected improvement against the best observed value; TPE
    models use the density-ratio score.  Raises CandidatesExhausted once the
    history covers every candidate.
    """
    cands = np.asarray(candidates, dtype=float).reshape(-1, 2)
    measured = history.points()
    if measured.shape[0]:
        keep = ~(cands[:, None, :] == measured[None, :, :]).all(axis=-1).any(axis=1)
        remaining = cands[keep]
    else:
        keep = None
        remaining = cands
    if remaining.shape[0] == 0:
        raise CandidatesExhausted("all candidates measured")
    if isinstance(model, GpModel):
        mean, var = gp_posterior(model, remaining)
        scores = expected_improvement(mean, var, y_star=float(model.y_train.min()))
    elif isinstance(model, TpeModel):
        if cands.shape == model.candidates.shape and np.array_equal(cands, model.candidates):
            l = model.cand_l if keep is None else model.cand_l[keep]
            g = model.cand_g if keep is None else model.cand_g[keep]
        else:
            l, g = tpe_density(model, remaining)
        scores = _density_ratio(np.asarray(l, float), np.asarray(g, float))
    else:
        raise TypeError(f"unsupported surrogate model: {type(model).__name__}")
    return remaining[int(np.argmax(scores))]
