"""Channel / subspace quality metrics and empirical CCDFs."""

from __future__ import annotations

import numpy as np


class MetricError(ValueError):
    """Metric undefined for the given inputs."""


def eta(h, h_hat) -> float:
    """Correlation coefficient ``|<h, h_hat>| / (||h|| ||h_hat||)``."""
    h = np.asarray(h).ravel()
    h_hat = np.asarray(h_hat).ravel()
    nh, nhh = np.linalg.norm(h), np.linalg.norm(h_hat)
    if nh == 0 or nhh == 0:
        raise MetricError("eta is undefined for a zero vector")
    return float(min(1.0, abs(np.vdot(h, h_hat)) / (nh * nhh)))


def mu(h, U, atol: float = 1e-8) -> float:
    """Fraction of the power of ``h`` outside ``span(U)``; ``U`` must be orthonormal."""
    h = np.asarray(h).ravel()
    U = np.asarray(U)
    if U.ndim == 1:
        U = U[:, None]
    nh2 = np.vdot(h, h).real
    if nh2 == 0:
        raise MetricError("mu is undefined for a zero vector")
    gram = U.conj().T @ U
    if not np.allclose(gram, np.eye(U.shape[1]), atol=atol):
        raise MetricError("U must have orthonormal columns")
    c = U.conj().T @ h
    res = nh2 - np.vdot(c, c).real
    return float(min(1.0, max(0.0, res / nh2)))


def eta_db(value: float) -> float:
    """``20 log10(1/eta)``."""
    return float(-20.0 * np.log10(value)) if value > 0 else float("inf")


def mu_db(value: float) -> float:
    """``10 log10(1/mu)``; infinite for perfect rejection."""
    return float(-10.0 * np.log10(value)) if value > 0 else float("inf")


def ccdf(samples) -> list[tuple[float, float]]:
    """Empirical ``P[X > t]`` evaluated at the sorted unique sample values."""
    s = np.sort(np.asarray(list(samples), dtype=float))
    if s.size == 0:
        raise MetricError("ccdf of an empty sample")
    t = np.unique(s)
    above = s.size - np.searchsorted(s, t, side="right")
    return [(float(ti), float(a) / s.size) for ti, a in zip(t, above)]


def ccdf_at(samples, t) -> float:
    s = np.asarray(list(samples), dtype=float)
    if s.size == 0:
        raise MetricError("ccdf of an empty sample")
    return float(np.count_nonzero(s > t)) / s.size
