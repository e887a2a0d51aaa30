"""Uniform linear array geometry and steering-vector dictionaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class UlaConfig:
    """ULA with ``M`` elements scanning ``[-theta_max, theta_max]`` (radians).

    The element spacing is implicitly ``lambda / (2 sin(theta_max))`` so the
    scan range maps onto one full period of the spatial frequency.
    """

    M: int
    theta_max: float = float(np.deg2rad(60.0))

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ValueError(f"M must be a positive integer, got {self.M!r}")
        if not 0.0 < self.theta_max < np.pi / 2:
            raise ValueError(f"theta_max must lie in (0, pi/2), got {self.theta_max!r}")


def spatial_frequency(cfg: UlaConfig, theta) -> np.ndarray:
    """Normalized phase increment ``sin(theta) / sin(theta_max)`` in [-1, 1]."""
    theta = np.asarray(theta, dtype=float)
    # small slack so that theta_max itself (after deg/rad round trips) is accepted
    if np.any(np.abs(theta) > cfg.theta_max * (1 + 1e-12)):
        raise ValueError(
            f"angle(s) {np.rad2deg(theta)} deg outside scan range "
            f"+/-{np.rad2deg(cfg.theta_max):.6g} deg"
        )
    return np.sin(theta) / np.sin(cfg.theta_max)


def steering_vector(cfg: UlaConfig, theta: float) -> np.ndarray:
    """Array response ``[a(theta)]_k = exp(j k pi sin(theta)/sin(theta_max))``."""
    u = float(spatial_frequency(cfg, theta))
    return np.exp(1j * np.pi * u * np.arange(cfg.M))


def steering_matrix(cfg: UlaConfig, thetas) -> np.ndarray:
    """Stack steering vectors for ``thetas`` as the columns of an ``M x len(thetas)`` matrix."""
    u = spatial_frequency(cfg, np.atleast_1d(thetas))
    return np.exp(1j * np.pi * np.outer(np.arange(cfg.M), u))


def grid_angles(cfg: UlaConfig, G: int) -> np.ndarray:
    if G < 1:
        raise ValueError(f"grid size must be >= 1, got {G}")
    if G == 1:
        return np.zeros(1)
    return -cfg.theta_max + 2 * cfg.theta_max * np.arange(G) / (G - 1)


def grid_atoms(cfg: UlaConfig, G: int) -> np.ndarray:
    """Dictionary of ``G`` steering vectors on a uniform angle grid with inclusive endpoints."""
    return steering_matrix(cfg, grid_angles(cfg, G))
