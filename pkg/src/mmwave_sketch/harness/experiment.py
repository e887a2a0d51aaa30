"""Monte Carlo trials and (snr, tau_c) sweeps.

Each trial draws from its own stream ``SeedSequence(seed, spawn_key=(trial,))``,
so results do not depend on execution order or worker count.  The same trial
index reuses the same underlying draws in every sweep cell (common random
numbers), which makes cross-cell comparisons paired.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from ..channel_model import (
    alpha_from_coherence_time, channel_vector, complex_normal, fading_trajectory, initial_gains,
)
from ..metrics import MetricError, eta, mu
from ..one_shot import DenoiseConfig, atomic_denoise, time_average_estimate
from ..rmmv import EigenGap, KnownRank, NoSignalError, estimate_subspace, subspace_ls_estimate
from ..sdp import SolverError
from ..sketching import (
    SketchMatrix, coprime_antenna_selection, generic_orthonormal, random_antenna_selection,
)
from .config import Scenario

log = logging.getLogger(__name__)

_SKETCH_STREAM = 2**32  # spawn key reserved for a sketch shared by all trials


@dataclass(frozen=True)
class Cell:
    snr_db: float
    tau_c: float

    @property
    def alpha(self) -> float:
        return 1.0 if math.isinf(self.tau_c) else alpha_from_coherence_time(self.tau_c)


@dataclass
class EstimatorResult:
    eta: float = math.nan
    mu: float = math.nan
    converged: bool = True
    iterations: int = 0
    error: str = ""
    # solver certificate (not part of the CSV schema)
    primal_residual: float = 0.0
    dual_residual: float = 0.0
    psd_min_eig: float = 0.0
    complementarity: float = 0.0

    @classmethod
    def from_solution(cls, sol) -> EstimatorResult:
        return cls(converged=sol.converged, iterations=sol.iterations, primal_residual=sol.primal_residual,
                   dual_residual=sol.dual_residual, psd_min_eig=sol.psd_min_eig,
                   complementarity=sol.complementarity)

    @property
    def failed(self) -> bool:
        return bool(self.error) or not self.converged


@dataclass
class TrialRecord:
    trial: int
    cell: Cell
    results: dict[str, EstimatorResult] = field(default_factory=dict)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def draw_sketch(sc: Scenario, rng: np.random.Generator) -> SketchMatrix:
    if sc.sketch_kind == "random_selection":
        return random_antenna_selection(sc.m, sc.M, rng)
    if sc.sketch_kind == "coprime_selection":
        return coprime_antenna_selection(sc.M)
    return generic_orthonormal(sc.m, sc.M, rng)


def simulate_channels(sc: Scenario, cell: Cell, trial: int):
    """Sketch, channels ``h`` (M x (nu+1)) and noisy observations ``y`` for one trial.

    Slots ``0..nu-1`` form the past window, slot ``nu`` is the current one.
    """
    rng = trial_rng(sc.seed, trial)
    Bm = draw_sketch(sc, rng if sc.redraw_sketch else trial_rng(sc.seed, _SKETCH_STREAM))
    geom = sc.geometry
    n_slots = sc.nu + 1
    if cell.alpha == 1.0:
        h = channel_vector(geom, initial_gains(geom, rng), sc.ula)
        H = np.repeat(h[:, None], n_slots, axis=1)
    else:
        w = fading_trajectory(geom, cell.alpha, sc.nu * sc.tau + 1, rng).slots(sc.tau)
        H = channel_vector(geom, w, sc.ula)
    sigma2 = noise_power(sc, cell)
    Y = H + complex_normal(rng, H.shape, sigma2)
    return Bm, H, Y


def noise_power(sc: Scenario, cell: Cell) -> float:
    return sc.geometry.total_power / 10 ** (cell.snr_db / 10)


def _oracle_frame(sc: Scenario) -> np.ndarray:
    Q, _ = np.linalg.qr(sc.geometry.atoms(sc.ula))
    return Q


def run_trial(sc: Scenario, trial: int, cell: Cell | None = None) -> TrialRecord:
    """Simulate one window + current slot and evaluate every configured estimator."""
    cell = cell or Cell(sc.snr_db[0], sc.tau_c[0])
    Bm, H, Y = simulate_channels(sc, cell, trial)
    X = Bm.B @ Y
    h_now, x_now, X_past = H[:, sc.nu], X[:, sc.nu], X[:, : sc.nu]
    sigma2 = noise_power(sc, cell)
    dcfg = DenoiseConfig(sc.epsilon_scale * Bm.m * sigma2, sc.solver)
    rec = TrialRecord(trial, cell)

    def from_channel_estimate(est) -> EstimatorResult:
        sol = est.solution
        res = EstimatorResult.from_solution(sol)
        if not sol.converged:
            res.error = "solver did not converge"
            return res
        nh = np.linalg.norm(est.h)
        if nh == 0:
            # the all-zero estimate is optimal whenever ||x||^2 <= epsilon; it is
            # scored as the worst case rather than dropped
            res.eta, res.mu = 0.0, 1.0
            return res
        res.eta = eta(h_now, est.h)
        res.mu = mu(h_now, est.h / nh)
        return res

    subspace = None
    subspace_res = None
    for name in sc.estimators:
        try:
            if name == "oneshot":
                res = from_channel_estimate(atomic_denoise(x_now, Bm, dcfg))
            elif name == "time_average":
                res = from_channel_estimate(time_average_estimate(X_past, Bm, dcfg))
            else:
                if subspace is None and subspace_res is None:
                    subspace, subspace_res = _subspace(sc, Bm, X_past)
                res = replace(subspace_res)
                if subspace is not None:
                    res.mu = mu(h_now, subspace)
                    if name == "subspace_ls":
                        h_hat = subspace_ls_estimate(x_now, Bm, subspace)
                        res.eta = eta(h_now, h_hat)
        except (SolverError, NoSignalError, MetricError, np.linalg.LinAlgError) as exc:
            res = EstimatorResult(converged=False, error=f"{type(exc).__name__}: {exc}")
        rec.results[name] = res
    return rec


def _subspace(sc: Scenario, Bm: SketchMatrix, X_past):
    if sc.subspace_source == "oracle":
        return _oracle_frame(sc), EstimatorResult()
    rule = KnownRank(sc.p) if sc.rank_rule == "known" else EigenGap(sc.eigengap_threshold)
    try:
        est, _, sol = estimate_subspace(X_past, Bm, rule, sc.solver)
    except NoSignalError as exc:
        return None, EstimatorResult(converged=True, error=f"NoSignalError: {exc}")
    res = EstimatorResult.from_solution(sol)
    if not sol.converged:
        res.error = "solver did not converge"
        return None, res
    return est.U, res


def cells(sc: Scenario) -> list[Cell]:
    return [Cell(float(s), float(t)) for s, t in product(sc.snr_db, sc.tau_c)]


def _run_job(args):
    sc, trial, cell = args
    return run_trial(sc, trial, cell)


def run_sweep(sc: Scenario, workers: int | None = None, progress=None) -> list[TrialRecord]:
    """All ``(snr, tau_c)`` cells x ``trials``; records sorted by (cell, trial)."""
    workers = workers or sc.workers
    grid = cells(sc)
    jobs = [(sc, t, c) for c in grid for t in range(sc.trials)]
    log.info("running %d trials over %d cells with %d worker(s)", len(jobs), len(grid), workers)
    if workers == 1:
        records = []
        for job in jobs:
            records.append(_run_job(job))
            if progress:
                progress(len(records), len(jobs))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_job, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    order = {c: i for i, c in enumerate(grid)}
    records.sort(key=lambda r: (order[r.cell], r.trial))
    return records


def failure_counts(records: list[TrialRecord]) -> dict:
    out: dict = {}
    for rec in records:
        for name, res in rec.results.items():
            if res.failed:
                key = f"snr_db={rec.cell.snr_db:g},tau_c={rec.cell.tau_c:g},{name}"
                out[key] = out.get(key, 0) + 1
    return out
