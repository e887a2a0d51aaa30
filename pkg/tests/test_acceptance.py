"""Acceptance gate.

Each test checks one criterion at its stated tolerance and appends a PASS/FAIL
line that the terminal summary prints at the end of the run.  Solver
certificates from the estimation criteria are pooled and checked by the
certification test, so run the module as a whole.
"""

import cmath
import math
import time

import numpy as np
import pytest
from scipy.stats import binomtest

from conftest import ACCEPTANCE_LINES
from mmwave_sketch.array_geom import UlaConfig, grid_angles, grid_atoms, steering_vector
from mmwave_sketch.channel_model import ScatteringGeometry, channel_vector, fading_trajectory
from mmwave_sketch.harness import Cell, run_sweep, scenario_from_dict
from mmwave_sketch.harness.cli import main
from mmwave_sketch.harness.experiment import noise_power, simulate_channels
from mmwave_sketch.metrics import eta, mu
from mmwave_sketch.one_shot import DenoiseConfig, atomic_denoise
from mmwave_sketch.rmmv import KnownRank, estimate_subspace
from mmwave_sketch.sdp import project_hermitian_toeplitz, project_psd, toeplitz_from_column
from mmwave_sketch.sketching import SketchMatrix, random_antenna_selection

# (label, primal residual, dual residual, psd min eig, converged, complementarity)
CERTIFICATES: list[tuple] = []


def report(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")


def certify(label, sol) -> None:
    CERTIFICATES.append((label, sol.primal_residual, sol.dual_residual, sol.psd_min_eig, sol.converged,
                         sol.complementarity))


def certify_records(label, records, names) -> None:
    for rec in records:
        for name in names:
            r = rec.results[name]
            if r.iterations > 0:
                CERTIFICATES.append((f"{label}/{name}", r.primal_residual, r.dual_residual, r.psd_min_eig,
                                     r.converged, r.complementarity))


def identity_sketch(M: int) -> SketchMatrix:
    return SketchMatrix(np.eye(M, dtype=complex), "identity")


def separated_pair(grid, M, rng):
    s = np.sin(grid)
    while True:
        i, j = rng.choice(len(grid), 2, replace=False)
        if abs(s[i] - s[j]) >= 4 / M:
            return i, j


def test_steering_vector_law():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst_mod = worst_phase = 0.0
    for _ in range(100):
        M = int(rng.integers(1, 65))
        theta_max = float(rng.uniform(0.05, np.pi / 2))
        theta = float(rng.uniform(-theta_max, theta_max))
        a = steering_vector(UlaConfig(M, theta_max), theta)
        u = math.sin(theta) / math.sin(theta_max)
        for k, ak in enumerate(a):
            worst_mod = max(worst_mod, abs(abs(ak) - 1))
            # phase error, wrapped to (-pi, pi]
            worst_phase = max(worst_phase, abs(cmath.phase(complex(ak) * cmath.exp(-1j * k * math.pi * u))))
    elapsed = time.perf_counter() - t0
    ok = worst_mod <= 1e-12 and worst_phase <= 1e-12 and elapsed < 1
    report(1, ok, f"max |1-|a_k||={worst_mod:.1e}, max phase err={worst_phase:.1e}, {elapsed:.2f}s")
    assert worst_mod <= 1e-12 and worst_phase <= 1e-12
    assert elapsed < 1


def test_fading_statistics():
    alpha, steps, batch = 0.9, 10**5, 2000
    geom = ScatteringGeometry((0.0,), (1.0,))
    t0 = time.perf_counter()
    w = fading_trajectory(geom, alpha, steps, np.random.default_rng(2)).w[0]
    elapsed = time.perf_counter() - t0
    worst = 0.0
    for lag in range(6):
        prod = w[lag:] * w[: steps - lag].conj()
        n_b = len(prod) // batch
        means = prod[: n_b * batch].reshape(n_b, batch).mean(axis=1)
        est = prod.mean()
        for part, comp, target in ((est.real, means.real, alpha**lag), (est.imag, means.imag, 0.0)):
            se = comp.std(ddof=1) / math.sqrt(n_b)
            worst = max(worst, abs(part - target) / se)
    var = float(np.mean(np.abs(w) ** 2))
    ok = worst <= 3 and abs(var - 1) <= 0.02 and elapsed < 5
    report(2, ok, f"max |r-alpha^d|/SE={worst:.2f}, marginal var={var:.4f}, {elapsed:.2f}s")
    assert worst <= 3
    assert abs(var - 1) <= 0.02
    assert elapsed < 5


def test_projection_primitives():
    rng = np.random.default_rng(3)
    n = 16
    t0 = time.perf_counter()
    worst_idem = worst_orth = 0.0
    for _ in range(1000):
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        H = (A + A.conj().T) / 2
        P = project_psd(H)
        worst_idem = max(worst_idem, np.abs(project_psd(P) - P).max())
        worst_orth = max(worst_orth, abs(np.vdot(H - P, P)))
        Q = project_hermitian_toeplitz(A)
        worst_idem = max(worst_idem, np.abs(project_hermitian_toeplitz(Q) - Q).max())
        c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        c[0] = c[0].real
        # Hermitian Toeplitz matrices form a real subspace: real inner product
        worst_orth = max(worst_orth, abs(np.vdot(A - Q, toeplitz_from_column(c)).real),
                         abs(np.vdot(A - Q, Q).real))
    elapsed = time.perf_counter() - t0
    ok = worst_idem <= 1e-10 and worst_orth <= 1e-10 and elapsed < 10
    report(3, ok, f"idempotence err={worst_idem:.1e}, inner-product residual={worst_orth:.1e}, {elapsed:.2f}s")
    assert worst_idem <= 1e-10 and worst_orth <= 1e-10
    assert elapsed < 10


def test_one_shot_exact_recovery():
    M = 16
    cfg = UlaConfig(M)
    grid = grid_angles(cfg, 512)
    worst_eta, worst_obj, worst_time = 1.0, 0.0, 0.0
    for idx in (0, 100, 256, 411, 511):
        h = steering_vector(cfg, grid[idx])
        t0 = time.perf_counter()
        est = atomic_denoise(h, identity_sketch(M), DenoiseConfig(0.0))
        worst_time = max(worst_time, time.perf_counter() - t0)
        certify(f"c4/{idx}", est.solution)
        worst_eta = min(worst_eta, eta(h, est.h))
        worst_obj = max(worst_obj, abs(est.solution.objective - 2 * math.sqrt(M)) / (2 * math.sqrt(M)))
    ok = worst_eta >= 1 - 1e-4 and worst_obj <= 1e-3 and worst_time < 30
    report(4, ok, f"min eta={worst_eta:.6f}, max objective rel err={worst_obj:.1e}, "
                  f"slowest instance {worst_time:.2f}s")
    assert worst_eta >= 1 - 1e-4
    assert worst_obj <= 1e-3
    assert worst_time < 30


def basis_pursuit(D, x):
    import cvxpy as cp

    c = cp.Variable(D.shape[1], complex=True)
    prob = cp.Problem(cp.Minimize(cp.norm1(c)), [D @ c == x])
    prob.solve(solver=cp.CLARABEL)
    return D @ c.value, prob.value


def test_oracle_equivalence_desk_scale():
    pytest.importorskip("cvxpy")
    M = 8
    cfg = UlaConfig(M)
    grid = grid_angles(cfg, 512)
    D = grid_atoms(cfg, 512)
    rng = np.random.default_rng(5)
    t0 = time.perf_counter()
    margins, norm_gap = [], []
    for k in range(20):
        i, j = separated_pair(grid, M, rng)
        coef = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        h = D[:, [i, j]] @ coef
        est = atomic_denoise(h, identity_sketch(M), DenoiseConfig(0.0))
        certify(f"c5/{k}", est.solution)
        h_bp, l1 = basis_pursuit(D, h)
        margins.append(eta(h, est.h) - eta(h, h_bp))
        # the atomic norm never exceeds any grid l1 representation
        norm_gap.append(est.solution.objective / (2 * math.sqrt(M)) - l1 * (1 + 1e-3))
    elapsed = time.perf_counter() - t0
    ok = min(margins) >= -1e-3 and max(norm_gap) <= 0 and elapsed < 300
    report(5, ok, f"min eta(atomic)-eta(grid BP)={min(margins):.1e} over 20, "
                  f"atomic norm <= grid l1 in all, {elapsed:.1f}s")
    assert min(margins) >= -1e-3
    assert max(norm_gap) <= 0
    assert elapsed < 300


def test_rmmv_subspace_noiseless():
    M, m, nu, trials = 16, 8, 50, 100
    cfg = UlaConfig(M)
    grid = grid_angles(cfg, 512)
    rng = np.random.default_rng(6)
    t0 = time.perf_counter()
    mus = []
    for k in range(trials):
        i, j = separated_pair(grid, M, rng)
        geom = ScatteringGeometry.equal_power((grid[i], grid[j]))
        # alpha = 0: independent gains from slot to slot
        W = fading_trajectory(geom, 0.0, nu + 1, rng).w
        H = channel_vector(geom, W, cfg)
        Bm = random_antenna_selection(m, M, rng)
        est, _, sol = estimate_subspace(Bm.B @ H[:, :nu], Bm, KnownRank(2))
        certify(f"c6/{k}", sol)
        mus.append(mu(H[:, nu], est.U))
    elapsed = time.perf_counter() - t0
    frac = float(np.mean(np.asarray(mus) <= 1e-2))
    ok = frac >= 0.95 and elapsed < 600
    report(6, ok, f"mu <= 1e-2 in {frac:.0%} of {trials} trials (median mu={np.median(mus):.1e}), {elapsed:.1f}s")
    assert frac >= 0.95
    assert elapsed < 600


def paired_sign_test(a, b):
    d = np.asarray(a) - np.asarray(b)
    d = d[d != 0]
    return binomtest(int(np.sum(d > 0)), len(d), 0.5, alternative="greater").pvalue


def test_subspace_gain_over_one_shot():
    sc = scenario_from_dict({
        "sweep": {"snr_db": [0], "tau_c": [100]},
        "estimators": ["oneshot", "subspace_ls"],
        "trials": 100,
        "seed": 7,
    })
    assert (sc.M, sc.m, sc.path_angles_deg) == (64, 16, (0.0, 20.0, -20.0))
    t0 = time.perf_counter()
    records = run_sweep(sc)
    elapsed = time.perf_counter() - t0
    certify_records("c7", records, ["oneshot", "subspace_ls"])
    ok_rows = [r for r in records if not (r.results["oneshot"].failed or r.results["subspace_ls"].failed)]
    e_ls = [r.results["subspace_ls"].eta for r in ok_rows]
    e_os = [r.results["oneshot"].eta for r in ok_rows]
    p = paired_sign_test(e_ls, e_os)
    ok = len(ok_rows) == 100 and np.mean(e_ls) > np.mean(e_os) and p < 0.05 and elapsed < 3600
    report(7, ok, f"mean eta subspace_ls={np.mean(e_ls):.3f} vs oneshot={np.mean(e_os):.3f} "
                  f"over {len(ok_rows)} paired trials, sign test p={p:.1e}, {elapsed:.0f}s")
    assert len(ok_rows) == 100
    assert np.mean(e_ls) > np.mean(e_os)
    assert p < 0.05
    assert elapsed < 3600


def test_high_correlation_averaging():
    sc = scenario_from_dict({
        "sweep": {"snr_db": [-10], "tau_c": [".inf"]},
        "estimators": ["oneshot", "time_average"],
        "trials": 50,
        "seed": 8,
    })
    cell = Cell(-10.0, math.inf)
    t0 = time.perf_counter()
    records = run_sweep(sc)
    certify_records("c8", records, ["oneshot", "time_average"])
    ok_rows = [r for r in records if not (r.results["oneshot"].failed or r.results["time_average"].failed)]
    e_ta = np.mean([r.results["time_average"].eta for r in ok_rows])
    e_os = np.mean([r.results["oneshot"].eta for r in ok_rows])

    # averaged sketch noise: 625 windows x m = 10^4 entries
    sigma2 = noise_power(sc, cell)
    samples = []
    for trial in range(625):
        Bm, H, Y = simulate_channels(sc, cell, trial)
        samples.append((Bm.B @ (Y - H)[:, : sc.nu]).mean(axis=1))
    ratio = float(np.mean(np.abs(np.concatenate(samples)) ** 2) / (sigma2 / sc.nu))
    elapsed = time.perf_counter() - t0
    ok = len(ok_rows) == 50 and e_ta > e_os and abs(ratio - 1) <= 0.1 and elapsed < 1200
    report(8, ok, f"mean eta time_average={e_ta:.3f} vs oneshot={e_os:.3f} over {len(ok_rows)} paired trials, "
                  f"averaged noise var / (sigma^2/nu)={ratio:.3f}, {elapsed:.0f}s")
    assert len(ok_rows) == 50
    assert e_ta > e_os
    assert abs(ratio - 1) <= 0.1
    assert elapsed < 1200


def test_solver_certification():
    if not CERTIFICATES:
        pytest.skip("no solver instances collected; run the whole acceptance module")
    converged = [c for c in CERTIFICATES if c[4]]
    bad = [c for c in converged if not (c[1] <= 1e-6 and c[2] <= 1e-6 and c[3] >= -1e-8)]
    worst_r = max(max(c[1], c[2]) for c in converged)
    worst_e = min(c[3] for c in converged)
    # solver contract: complementary slackness within 10x the tolerance
    worst_c = max(c[5] for c in converged)
    ok = not bad and worst_c <= 1e-5
    report(9, ok, f"{len(converged)}/{len(CERTIFICATES)} SDPs converged, max residual={worst_r:.1e}, "
                  f"min PSD eig={worst_e:.1e}, max complementarity={worst_c:.1e}, {len(bad)} violations")
    assert not bad, bad[:5]
    assert worst_c <= 1e-5


DESK_YAML = """\
array: {M: 16}
paths: [{theta_deg: 0}, {theta_deg: 30}]
sketch: {m: 8}
schedule: {nu: 20}
sweep: {snr_db: [0, 20], tau_c: [10, .inf]}
trials: 3
"""


def test_reproducibility(tmp_path):
    cfg = tmp_path / "desk.yaml"
    cfg.write_text(DESK_YAML)
    outputs = []
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        assert main(["simulate", "--config", str(cfg), "--seed", "11", "--out", str(d / "trace.csv")]) == 0
        assert main(["ccdf", "--config", str(cfg), "--seed", "11", "--out", str(d / "ccdf.csv"),
                     "--records", str(d / "records.csv")]) == 0
        outputs.append({f: (d / f).read_bytes() for f in ("trace.csv", "ccdf.csv", "records.csv")})
    same = [f for f in outputs[0] if outputs[0][f] == outputs[1][f]]
    ok = len(same) == 3
    report(10, ok, f"{len(same)}/3 CSV outputs byte-identical across two seeded runs")
    assert ok
