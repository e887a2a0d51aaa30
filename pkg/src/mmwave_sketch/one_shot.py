"""Single-observation atomic-norm denoising and coherent time averaging."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .sdp import DenoiseProblem, SdpSolution, SolverConfig, solve_sdp
from .sketching import SketchMatrix


@dataclass(frozen=True)
class DenoiseConfig:
    epsilon: float
    solver: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")

    @classmethod
    def from_noise(cls, m: int, sigma2: float, solver: SolverConfig | None = None) -> DenoiseConfig:
        """Data-fit radius ``epsilon = m * sigma^2``."""
        return cls(m * sigma2, solver or SolverConfig())


@dataclass
class Estimate:
    h: np.ndarray
    solution: SdpSolution

    @property
    def converged(self) -> bool:
        return self.solution.converged


def atomic_denoise(x, Bm: SketchMatrix, cfg: DenoiseConfig) -> Estimate:
    """Minimum atomic-norm channel consistent with the sketch ``x`` up to ``epsilon``."""
    sol = solve_sdp(DenoiseProblem(np.asarray(x, dtype=complex), Bm.B, cfg.epsilon), cfg.solver)
    return Estimate(sol.variables["h"], sol)


def time_average_estimate(X, Bm: SketchMatrix, cfg: DenoiseConfig) -> Estimate:
    """Denoise the mean of the window's sketches, with ``epsilon`` shrunk by ``nu``."""
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[:, None]
    nu = X.shape[1]
    return atomic_denoise(X.mean(axis=1), Bm, replace(cfg, epsilon=cfg.epsilon / nu))
