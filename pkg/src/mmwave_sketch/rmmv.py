"""Reduced-MMV covariance fitting, subspace extraction and subspace-aided LS."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .sdp import RmmvProblem, SdpSolution, SolverConfig, hermitian_part, solve_sdp
from .sketching import SketchMatrix


class NoSignalError(ValueError):
    """Rank rule selected an empty subspace."""


class DegenerateGeometryWarning(UserWarning):
    pass


@dataclass
class SubspaceEstimate:
    U: np.ndarray
    eigenvalues: np.ndarray

    @property
    def rank(self) -> int:
        return self.U.shape[1]


@dataclass(frozen=True)
class KnownRank:
    p: int


@dataclass(frozen=True)
class EigenGap:
    threshold: float = 0.05


def sample_covariance(X) -> np.ndarray:
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[:, None]
    return (X @ X.conj().T) / X.shape[1]


def reduce_window(X) -> np.ndarray:
    """``X V_m``: an ``m x m`` matrix with the same Gram matrix as ``X``."""
    X = np.asarray(X, dtype=complex)
    if X.ndim == 1:
        X = X[:, None]
    m, nu = X.shape
    try:
        _, _, Vh = np.linalg.svd(X, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"SVD of the sketch window failed: {exc}") from exc
    k = min(m, nu)
    Xr = np.zeros((m, m), dtype=complex)
    Xr[:, :k] = X @ Vh[:k].conj().T
    return Xr


def rmmv_fit(Xr, Bm: SketchMatrix, solver: SolverConfig | None = None) -> tuple[np.ndarray, SdpSolution]:
    """Fitted ``M x M`` Toeplitz PSD covariance ``C*_y`` and the solver diagnostics."""
    sol = solve_sdp(RmmvProblem(np.asarray(Xr, dtype=complex), Bm.B), solver)
    return sol.variables["T"], sol


def extract_subspace(C, rank_rule=None) -> SubspaceEstimate:
    """Dominant eigenvectors of ``C`` (descending eigenvalue order)."""
    w, V = np.linalg.eigh(hermitian_part(np.asarray(C, dtype=complex)))
    w, V = w[::-1], V[:, ::-1]
    if rank_rule is None:
        rank_rule = EigenGap()
    if isinstance(rank_rule, KnownRank):
        r = rank_rule.p
    elif isinstance(rank_rule, EigenGap):
        r = int(np.count_nonzero(w > rank_rule.threshold * w[0])) if w[0] > 0 else 0
    else:
        raise TypeError(f"unknown rank rule {rank_rule!r}")
    if r < 1:
        raise NoSignalError("no signal subspace detected")
    if r > len(w):
        raise ValueError(f"requested rank {r} exceeds dimension {len(w)}")
    return SubspaceEstimate(V[:, :r].copy(), w[:r].copy())


def estimate_subspace(X, Bm: SketchMatrix, rank_rule, solver: SolverConfig | None = None):
    """Window of sketches -> (SubspaceEstimate, fitted covariance, solver diagnostics)."""
    C, sol = rmmv_fit(reduce_window(X), Bm, solver)
    return extract_subspace(C, rank_rule), C, sol


def subspace_ls_estimate(x, Bm: SketchMatrix, U) -> np.ndarray:
    """``U w`` with ``w`` the minimum-norm LS fit of ``x ~ B U w``."""
    U = np.asarray(U)
    if U.ndim == 1:
        U = U[:, None]
    A = Bm.B @ U
    w, _, rank, _ = np.linalg.lstsq(A, np.asarray(x, dtype=complex), rcond=None)
    if rank < U.shape[1]:
        warnings.warn(
            f"B U has rank {rank} < {U.shape[1]}; using the minimum-norm solution",
            DegenerateGeometryWarning, stacklevel=2,
        )
    return U @ w
