"""WSSUS multipath channel with first-order Markov (AR(1)) path gains."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array_geom import UlaConfig, steering_matrix


@dataclass(frozen=True)
class ScatteringGeometry:
    """Invariant large-scale state: path AoAs (radians) and path powers."""

    thetas: tuple[float, ...]
    powers: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))
        object.__setattr__(self, "powers", tuple(float(p) for p in self.powers))
        if len(self.thetas) < 1:
            raise ValueError("at least one path is required")
        if len(self.thetas) != len(self.powers):
            raise ValueError(f"{len(self.thetas)} angles but {len(self.powers)} powers")
        if any(p < 0 for p in self.powers) or not any(p > 0 for p in self.powers):
            raise ValueError(f"powers must be >= 0 with at least one > 0, got {self.powers}")

    @classmethod
    def equal_power(cls, thetas, total_power: float = 1.0) -> ScatteringGeometry:
        thetas = tuple(thetas)
        return cls(thetas, (total_power / len(thetas),) * len(thetas))

    @property
    def p(self) -> int:
        return len(self.thetas)

    @property
    def total_power(self) -> float:
        return float(sum(self.powers))

    def atoms(self, cfg: UlaConfig) -> np.ndarray:
        return steering_matrix(cfg, self.thetas)

    def check(self, cfg: UlaConfig) -> None:
        lim = cfg.theta_max * (1 + 1e-12)
        bad = [t for t in self.thetas if abs(t) > lim]
        if bad:
            raise ValueError(f"path angles {np.rad2deg(bad)} deg outside scan range")

    def covariance(self, cfg: UlaConfig) -> np.ndarray:
        """``sum_l sigma_l^2 a(theta_l) a(theta_l)^H``."""
        A = self.atoms(cfg)
        return (A * np.asarray(self.powers)) @ A.conj().T


@dataclass(frozen=True)
class TrainingSchedule:
    """Pilot period ``tau`` (fading steps per slot), window length ``nu`` and noise power."""

    tau: int = 1
    nu: int = 50
    sigma2_noise: float = 1.0

    def __post_init__(self):
        if self.tau < 1 or int(self.tau) != self.tau:
            raise ValueError(f"tau must be a positive integer, got {self.tau}")
        if self.nu < 1 or int(self.nu) != self.nu:
            raise ValueError(f"nu must be a positive integer, got {self.nu}")
        if self.sigma2_noise < 0:
            raise ValueError(f"sigma2_noise must be >= 0, got {self.sigma2_noise}")


@dataclass(frozen=True)
class FadingTrajectory:
    """Per-path gains ``w[l, t]`` of an AR(1) process with shared coefficient ``alpha``."""

    w: np.ndarray
    alpha: float

    def slots(self, tau: int) -> np.ndarray:
        """Gains sampled at the pilot instants ``t = i * tau``."""
        return self.w[:, ::tau]


def complex_normal(rng: np.random.Generator, size, var=1.0) -> np.ndarray:
    """CN(0, var): independent real and imaginary parts of variance var/2 each."""
    z = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return np.sqrt(np.asarray(var) / 2) * z


def _check_alpha(alpha: float) -> None:
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")


def initial_gains(geom: ScatteringGeometry, rng: np.random.Generator) -> np.ndarray:
    return complex_normal(rng, geom.p, np.asarray(geom.powers))


def step_fading(w_prev, geom: ScatteringGeometry, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """One step of ``w[t] = alpha w[t-1] + sigma sqrt(1 - alpha^2) i[t]``."""
    _check_alpha(alpha)
    w_prev = np.asarray(w_prev, dtype=complex)
    if w_prev.shape != (geom.p,):
        raise ValueError(f"expected {geom.p} path gains, got shape {w_prev.shape}")
    sig = np.sqrt(np.asarray(geom.powers))
    innovation = complex_normal(rng, geom.p)
    return alpha * w_prev + sig * np.sqrt(1 - alpha**2) * innovation


def fading_trajectory(geom: ScatteringGeometry, alpha: float, steps: int, rng: np.random.Generator) -> FadingTrajectory:
    """Stationary trajectory of ``steps`` samples, started from the marginal law."""
    _check_alpha(alpha)
    w = np.empty((geom.p, steps), dtype=complex)
    w[:, 0] = initial_gains(geom, rng)
    for t in range(1, steps):
        w[:, t] = step_fading(w[:, t - 1], geom, alpha, rng)
    return FadingTrajectory(w, alpha)


def slot_gains(geom: ScatteringGeometry, beta: float, n_slots: int, rng: np.random.Generator) -> np.ndarray:
    """Path gains at ``n_slots`` pilot instants with slot-to-slot correlation ``beta``.

    Equivalent in law to sampling an AR(1) trajectory with ``alpha**tau = beta``
    every ``tau`` steps, without simulating the intermediate steps.
    """
    return fading_trajectory(geom, beta, n_slots, rng).w


def channel_vector(geom: ScatteringGeometry, w_t, cfg: UlaConfig) -> np.ndarray:
    """``h = sum_l w_l a(theta_l)``; with a ``p x n`` gain matrix returns ``M x n``."""
    w_t = np.asarray(w_t, dtype=complex)
    if w_t.shape[0] != geom.p:
        raise ValueError(f"expected {geom.p} path gains, got shape {w_t.shape}")
    geom.check(cfg)
    return geom.atoms(cfg) @ w_t


def coherence_time(alpha: float) -> float:
    """``tau_c = 1 / log(1/alpha)``; 0 for ``alpha = 0``."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    if alpha == 0.0:
        return 0.0
    return 1.0 / np.log(1.0 / alpha)


def alpha_from_coherence_time(tau_c: float) -> float:
    if tau_c < 0:
        raise ValueError(f"tau_c must be >= 0, got {tau_c}")
    if tau_c == 0:
        return 0.0
    if np.isinf(tau_c):
        raise ValueError("tau_c must be finite (alpha = 1 is not a stable AR(1) filter)")
    return float(np.exp(-1.0 / tau_c))


def slot_correlation(alpha: float, tau: int) -> float:
    _check_alpha(alpha)
    if tau < 1:
        raise ValueError(f"tau must be >= 1, got {tau}")
    return float(alpha**tau)


def observe_training(h, sched: TrainingSchedule, rng: np.random.Generator) -> np.ndarray:
    """``y = h + n`` with unit training symbol and ``n ~ CN(0, sigma^2 I)``.

    Accepts a single channel vector or an ``M x n`` matrix of them.
    """
    h = np.asarray(h, dtype=complex)
    if sched.sigma2_noise == 0:
        return h.copy()
    return h + complex_normal(rng, h.shape, sched.sigma2_noise)


def snr(geom: ScatteringGeometry, sigma2_noise: float) -> float:
    """Training SNR ``sum_l sigma_l^2 / sigma^2`` (linear)."""
    return geom.total_power / sigma2_noise
