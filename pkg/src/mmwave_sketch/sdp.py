"""ADMM splitting for the two structured SDPs used by the estimators.

Both programs share one shape: a linear objective over a few structured
"primal" blocks (Hermitian Toeplitz, Hermitian, vector) and one or more
conic constraints ``Z_i = K_i(primal) in PSD``.  The solver alternates

1. a closed-form update of the structured blocks (Toeplitz projection or a
   small least-squares solve, data-fit ball projection),
2. a PSD projection of every constraint block,
3. a dual ascent step,

with residual-balancing penalty adaptation.

The reduced-MMV program often has a degenerate optimal face, where ADMM
slows to a sublinear crawl.  Eliminating ``W`` leaves a smooth convex problem
in the ``2M-1`` Toeplitz parameters, which a short barrier-Newton run solves
to high accuracy; its primal-dual point then warm-starts ADMM.  Residuals are
always measured on plain ADMM steps, so the stopping test means the same
thing with or without the polish.

Problems are rescaled internally to unit data norm (both are positively
homogeneous), so the default penalty of 1.0 is sensible at every SNR.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)


class SolverError(RuntimeError):
    """Numerical breakdown inside the ADMM iteration."""


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-6
    max_iterations: int = 10_000
    penalty: float = 1.0
    adaptive_penalty: bool = True
    # over-relaxation factor in (0, 2); 1.0 is plain ADMM
    relaxation: float = 1.6
    # penalty adaptation is frozen after this many iterations so the tail is
    # a fixed-step ADMM with well-behaved residual decay
    adapt_until: int = 2000
    # reduced-MMV only: every this many unconverged iterations, try a
    # barrier-Newton polish of the Toeplitz parameters (0 disables)
    polish_every: int = 500

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.penalty > 0:
            raise ValueError(f"penalty must be > 0, got {self.penalty}")
        if not 0 < self.relaxation < 2:
            raise ValueError(f"relaxation must lie in (0, 2), got {self.relaxation}")
        if self.polish_every < 0:
            raise ValueError(f"polish_every must be >= 0, got {self.polish_every}")


@dataclass
class SdpSolution:
    """Solver output.

    ``variables`` holds the problem-specific blocks in original (unscaled)
    units.  Residuals are relative.  ``psd_min_eig`` is the smallest
    eigenvalue over all reported constraint blocks after feasibility
    restoration.
    """

    variables: dict
    objective: float
    primal_residual: float
    dual_residual: float
    iterations: int
    converged: bool
    complementarity: float = 0.0
    psd_min_eig: float = 0.0
    history: dict = field(default_factory=dict, repr=False)


# ---------------------------------------------------------------------------
# projections


def hermitian_part(H: np.ndarray) -> np.ndarray:
    return 0.5 * (H + H.conj().T)


def project_psd(H: np.ndarray) -> np.ndarray:
    """Frobenius-nearest PSD matrix: symmetrize, then clip negative eigenvalues."""
    H = hermitian_part(np.asarray(H))
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"eigendecomposition failed: {exc}") from exc
    pos = w > 0
    if pos.all():
        return H
    Vp = V[:, pos]
    return (Vp * w[pos]) @ Vp.conj().T


def toeplitz_from_column(v: np.ndarray) -> np.ndarray:
    """Hermitian Toeplitz matrix with first column ``v`` (``v[0]`` taken real)."""
    v = np.asarray(v, dtype=complex)
    M = v.shape[0]
    idx = np.arange(M)[:, None] - np.arange(M)[None, :]
    T = np.where(idx >= 0, v[np.abs(idx)], np.conj(v[np.abs(idx)]))
    T[np.diag_indices(M)] = v[0].real
    return T


def toeplitz_column_of_projection(H: np.ndarray) -> np.ndarray:
    """First column of the nearest Hermitian Toeplitz matrix to ``H``."""
    H = np.asarray(H, dtype=complex)
    M = H.shape[0]
    if H.shape != (M, M):
        raise ValueError(f"square matrix required, got shape {H.shape}")
    v = np.empty(M, dtype=complex)
    v[0] = np.trace(H).real / M
    for k in range(1, M):
        lower = np.diagonal(H, -k)
        upper = np.diagonal(H, k)
        v[k] = (lower.sum() + np.conj(upper).sum()) / (2 * (M - k))
    return v


def project_hermitian_toeplitz(H: np.ndarray) -> np.ndarray:
    """Frobenius-nearest Hermitian Toeplitz matrix.

    Each diagonal ``k`` is averaged together with the conjugate of diagonal
    ``-k``; this is the orthogonal projection onto the (real) subspace of
    Hermitian Toeplitz matrices.
    """
    return toeplitz_from_column(toeplitz_column_of_projection(H))


# ---------------------------------------------------------------------------
# registered problems


@dataclass(frozen=True)
class DenoiseProblem:
    """Atomic-norm denoising SDP.

    minimize  tr T(v) + gamma
    s.t.      [[T(v), h], [h^H, gamma]] >= 0,   ||x - B h||^2 <= epsilon

    ``B`` must have orthonormal rows.
    """

    x: np.ndarray
    B: np.ndarray
    epsilon: float

    def __post_init__(self):
        x = np.asarray(self.x)
        if x.ndim != 1 or self.B.shape[0] != x.shape[0]:
            raise ValueError(f"sketch length {x.shape} does not match B {self.B.shape}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")


@dataclass(frozen=True)
class RmmvProblem:
    """Reduced-MMV covariance fitting SDP.

    minimize  tr(B T B^H) + tr(W)
    s.t.      [[B T B^H, Xr], [Xr^H, W]] >= 0,   T Hermitian Toeplitz, T >= 0
    """

    Xr: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        if self.Xr.shape[0] != self.B.shape[0]:
            raise ValueError(f"reduced data {self.Xr.shape} does not match B {self.B.shape}")


def solve_sdp(problem, cfg: SolverConfig | None = None, record_history: bool = False) -> SdpSolution:
    """Solve one of the registered structured SDPs by ADMM."""
    cfg = cfg or SolverConfig()
    if isinstance(problem, DenoiseProblem):
        return _solve_denoise(problem, cfg, record_history)
    if isinstance(problem, RmmvProblem):
        return _solve_rmmv(problem, cfg, record_history)
    raise TypeError(f"unregistered problem type {type(problem).__name__}")


def _min_eig(H: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(hermitian_part(H))[0])


class _Monitor:
    """Residual bookkeeping, stopping test and penalty balancing."""

    def __init__(self, cfg: SolverConfig, record: bool):
        self.cfg = cfg
        self.rho = cfg.penalty
        self.record = record
        self.hist = {"primal": [], "dual": [], "rho": []} if record else {}

    def step(self, it, r, s, scale_primal, scale_dual):
        tol = self.cfg.tolerance
        rp = r / scale_primal if scale_primal > 0 else r
        rd = s / scale_dual if scale_dual > 0 else s
        if self.record:
            self.hist["primal"].append(rp)
            self.hist["dual"].append(rd)
            self.hist["rho"].append(self.rho)
        done = rp <= tol and rd <= tol
        factor = 1.0
        if not done and self.cfg.adaptive_penalty and it < self.cfg.adapt_until and it % 10 == 0:
            if rp > 10 * rd:
                factor = 2.0
            elif rd > 10 * rp:
                factor = 0.5
        self.rho = min(max(self.rho * factor, 1e-6), 1e6)
        return rp, rd, done


def _pack(*blocks) -> np.ndarray:
    return np.concatenate([np.ascontiguousarray(b, dtype=complex).ravel().view(float) for b in blocks])


def _unpack(u: np.ndarray, shapes):
    out, i = [], 0
    for shape in shapes:
        n = 2 * int(np.prod(shape))
        out.append(u[i:i + n].view(complex).reshape(shape))
        i += n
    return out


def _solve_denoise(prob: DenoiseProblem, cfg: SolverConfig, record: bool) -> SdpSolution:
    B = np.asarray(prob.B, dtype=complex)
    x = np.asarray(prob.x, dtype=complex)
    m, M = B.shape
    scale = np.linalg.norm(x)
    if scale == 0 and prob.epsilon == 0:
        # h = 0 is forced by the data-fit constraint and is optimal
        z = np.zeros(M, dtype=complex)
        return SdpSolution(
            variables={"h": z, "v": z.copy(), "gamma": 0.0, "T": np.zeros((M, M), dtype=complex)},
            objective=0.0, primal_residual=0.0, dual_residual=0.0, iterations=0, converged=True,
        )
    if scale == 0:
        scale = np.sqrt(prob.epsilon)
    xs = x / scale
    radius = np.sqrt(prob.epsilon) / scale

    def project_ball(h):
        c = B @ h
        d = c - xs
        nd = np.linalg.norm(d)
        if nd > radius:
            c_new = xs + d * (radius / nd)
            h = h + B.conj().T @ (c_new - c)
        return h

    N = M + 1
    v = np.zeros(M, dtype=complex)
    h = project_ball(np.zeros(M, dtype=complex))
    gamma = 0.0
    Lam = np.zeros((N, N), dtype=complex)
    eye = np.eye(M)
    mon = _Monitor(cfg, record)
    alpha = cfg.relaxation

    def assemble(T, h, gamma):
        K = np.empty((N, N), dtype=complex)
        K[:M, :M] = T
        K[:M, M] = h
        K[M, :M] = h.conj()
        K[M, M] = gamma
        return K

    K = assemble(toeplitz_from_column(v), h, gamma)
    converged = False
    rp = rd = np.inf
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        rho = mon.rho
        Z = project_psd(K - Lam / rho)
        Zr = alpha * Z + (1 - alpha) * K
        # structured update: argmin <I,T> + gamma + rho/2 ||Zr + Lam/rho - K||^2
        D = Zr + Lam / rho
        v = toeplitz_column_of_projection(D[:M, :M] - eye / rho)
        T = toeplitz_from_column(v)
        h = project_ball(0.5 * (D[:M, M] + D[M, :M].conj()))
        gamma = D[M, M].real - 1.0 / rho
        K_prev = K
        K = assemble(T, h, gamma)
        Lam = Lam + rho * (Zr - K)
        r = np.linalg.norm(Z - K)
        s = rho * np.linalg.norm(K - K_prev)
        rp, rd, converged = mon.step(
            it, r, s, max(np.linalg.norm(Z), np.linalg.norm(K), 1e-300), max(np.linalg.norm(Lam), 1e-300)
        )
        if not np.isfinite(r) or not np.isfinite(s):
            raise SolverError("non-finite residual in denoising ADMM")
        if converged:
            break

    complementarity = abs(np.vdot(Lam, K)) / max(np.linalg.norm(Lam) * np.linalg.norm(K), 1e-300)
    # feasibility restoration: a diagonal shift of T and gamma keeps the
    # Toeplitz structure and makes the returned block exactly PSD
    shift = max(0.0, -_min_eig(K))
    if shift > 0:
        v = v.copy()
        v[0] += shift
        gamma += shift
        K = assemble(toeplitz_from_column(v), h, gamma)
    psd_min = _min_eig(K)
    T = toeplitz_from_column(v) * scale
    objective = float(np.trace(T).real + gamma * scale)
    return SdpSolution(
        variables={"h": h * scale, "v": v * scale, "gamma": gamma * scale, "T": T},
        objective=objective, primal_residual=float(rp), dual_residual=float(rd), iterations=it,
        converged=bool(converged), complementarity=float(complementarity),
        psd_min_eig=psd_min * scale, history=mon.hist,
    )


class _ToeplitzLS:
    """Least-squares update of the Toeplitz block in the reduced-MMV problem.

    minimize over Hermitian Toeplitz T (real parameters r):
        c.r + rho/2 ||B T B^H - G1||^2 + rho/2 ||T - G2||^2
    The normal matrix does not depend on rho, so it is factored once.
    """

    def __init__(self, B: np.ndarray):
        m, M = B.shape
        self.M = M
        basis = []
        for k in range(M):
            E = np.zeros((M, M), dtype=complex)
            E[np.arange(k, M), np.arange(0, M - k)] = 1.0
            if k == 0:
                basis.append(E)
                continue
            basis.append(E + E.T)
            basis.append(1j * E - 1j * E.T)
        self.E = np.stack([b.ravel() for b in basis], axis=1)  # (M^2, 2M-1)
        self.F = np.stack([(B @ b @ B.conj().T).ravel() for b in basis], axis=1)  # (m^2, 2M-1)
        self.c = np.array([np.trace(B @ b @ B.conj().T).real for b in basis])
        A = (self.E.conj().T @ self.E).real + (self.F.conj().T @ self.F).real
        self.chol = np.linalg.cholesky(A)
        # basis element i = sum_a lag[i, a] J^a with (J^a)_{jl} = [j - l = a],
        # lags -(M-1)..M-1 stored at column a + M - 1
        lag = np.zeros((2 * M - 1, 2 * M - 1), dtype=complex)
        lag[0, M - 1] = 1
        for k in range(1, M):
            lag[2 * k - 1, [M - 1 + k, M - 1 - k]] = 1, 1
            lag[2 * k, [M - 1 + k, M - 1 - k]] = 1j, -1j
        self.lag = lag

    def solve(self, G1, G2, rho):
        rhs = (self.F.conj().T @ G1.ravel()).real + (self.E.conj().T @ G2.ravel()).real - self.c / rho
        y = np.linalg.solve(self.chol, rhs)
        return np.linalg.solve(self.chol.T, y)

    def matrix(self, r):
        return (self.E @ r).reshape(self.M, self.M)

    def quad_hessian(self, P):
        """``H[i, j] = Re tr(P E_i P E_j)`` via one 2-D cross-correlation."""
        M = self.M
        N = 2 * M
        Pp = np.zeros((N, N), dtype=complex)
        Pp[:M, :M] = P
        Rp = np.zeros((N, N), dtype=complex)
        Rp[:M, :M] = P.T
        # corr[u, v] = sum_{x,y} P[x, y] P^T[x+u, y+v];  tr(P J^a P J^b) = corr[b, -a]
        corr = np.fft.ifft2(np.fft.fft2(Rp) * np.fft.ifft2(Pp)) * (N * N)
        lags = np.arange(-(M - 1), M)
        C = corr[np.ix_(lags % N, (-lags) % N)].T
        return (self.lag @ C @ self.lag.T).real

    def column(self, r):
        v = np.empty(self.M, dtype=complex)
        v[0] = r[0]
        v[1:] = r[1::2] + 1j * r[2::2]
        return v


def _polish_rmmv(ls: _ToeplitzLS, B, X, r0, gap: float = 1e-11, max_newton: int = 200):
    """Barrier-Newton solve of ``min c.r + tr(X^H S^-1 X)``, ``S = B T(r) B^H``, ``T(r) > 0``.

    Returns an ADMM state ``(r, W, Lambda_1, Lambda_2)`` on the central path
    with duality gap ``M/t <= gap``, or None if ``S`` is singular at the
    start or Newton stalls (rank-deficient data, for instance).
    """
    M, n = ls.M, ls.E.shape[1]
    m = B.shape[0]
    Fm = ls.F.T.reshape(n, m, m)
    G = X @ X.conj().T

    def evaluate(r):
        """(f, log det T, T, S) or None outside the domain."""
        T = hermitian_part(ls.matrix(r))
        S = hermitian_part(B @ T @ B.conj().T)
        try:
            LT = np.linalg.cholesky(T)
            Y = np.linalg.solve(np.linalg.cholesky(S), X)
        except np.linalg.LinAlgError:
            return None
        f = ls.c @ r + np.vdot(Y, Y).real
        return f, 2 * np.log(np.abs(np.diag(LT))).sum(), T, S

    def barrier(r, t):
        e = evaluate(r)
        return np.inf if e is None else t * e[0] - e[1]

    # start strictly inside the cone, just above the ADMM point
    w_min = np.linalg.eigvalsh(hermitian_part(ls.matrix(r0)))[0]
    r = r0.copy()
    r[0] += max(0.0, -w_min) + 1e-3 * max(r0[0], 1e-12)
    e = evaluate(r)
    if e is None:
        return None
    # the ADMM point is already near-optimal: start at gap ~ 1e-3 |f|
    t = 1e3 * M / max(abs(e[0]), 1e-12)
    for _ in range(max_newton):
        f, _, T, S = e
        Ti = np.linalg.inv(T)
        Si = np.linalg.inv(S)
        Q = Si @ G @ Si
        grad = t * (ls.c - (Q.T.ravel() @ ls.F).real) - (Ti.T.ravel() @ ls.E).real
        Yf = Si @ Fm @ Q
        H = 2 * t * (Fm.reshape(n, -1) @ Yf.transpose(0, 2, 1).reshape(n, -1).T).real + ls.quad_hessian(Ti)
        try:
            d = -np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            return None
        dec = -grad @ d
        if not np.isfinite(dec) or dec < 0:
            return None
        if dec <= 1e-10:
            # centred: stop at the target gap, else tighten
            if M / t <= gap * max(1.0, abs(f)):
                break
            t *= 10
            continue
        step = 1.0
        if dec > 0.25:
            # damped phase; near the centre the barrier value is dominated by
            # rounding, so full steps are taken there (quadratic convergence)
            phi0 = barrier(r, t)
            while barrier(r + step * d, t) > phi0 - 0.25 * step * dec:
                step *= 0.5
                if step < 1e-12:
                    return None
        e_new = evaluate(r + step * d)
        while e_new is None:
            step *= 0.5
            if step < 1e-12:
                return None
            e_new = evaluate(r + step * d)
        r = r + step * d
        e = e_new
    else:
        return None
    SX = np.linalg.solve(S, X)
    V = np.vstack([SX, -np.eye(X.shape[1])])
    W = X.conj().T @ SX
    return r, hermitian_part(W), hermitian_part(V @ V.conj().T), hermitian_part(Ti) / t


def _solve_rmmv(prob: RmmvProblem, cfg: SolverConfig, record: bool) -> SdpSolution:
    B = np.asarray(prob.B, dtype=complex)
    Xr = np.asarray(prob.Xr, dtype=complex)
    m, M = B.shape
    k = Xr.shape[1]
    scale = np.linalg.norm(Xr)
    if scale == 0:
        return SdpSolution(
            variables={"T": np.zeros((M, M), dtype=complex), "W": np.zeros((k, k), dtype=complex)},
            objective=0.0, primal_residual=0.0, dual_residual=0.0, iterations=0, converged=True,
        )
    Xs = Xr / scale
    ls = _ToeplitzLS(B)
    Bh = B.conj().T
    N1 = m + k
    eye_k = np.eye(k)

    def assemble(T, W):
        K1 = np.empty((N1, N1), dtype=complex)
        K1[:m, :m] = B @ T @ Bh
        K1[:m, m:] = Xs
        K1[m:, :m] = Xs.conj().T
        K1[m:, m:] = W
        return K1

    shapes = ((2 * M - 1,), (k, k), (N1, N1), (M, M))

    def step(u, rho):
        r_c, W, L1, L2 = _unpack(u, shapes)
        r_par = r_c.real
        T = ls.matrix(r_par)
        K1, K2 = assemble(T, W), T
        Z1 = project_psd(K1 - L1 / rho)
        Z2 = project_psd(K2 - L2 / rho)
        Z1r = alpha * Z1 + (1 - alpha) * K1
        Z2r = alpha * Z2 + (1 - alpha) * K2
        D1 = Z1r + L1 / rho
        D2 = Z2r + L2 / rho
        r_new = ls.solve(D1[:m, :m], D2, rho)
        T_new = ls.matrix(r_new)
        W_new = hermitian_part(D1[m:, m:]) - eye_k / rho
        K1n, K2n = assemble(T_new, W_new), T_new
        L1n = L1 + rho * (Z1r - K1n)
        L2n = L2 + rho * (Z2r - K2n)
        r = np.hypot(np.linalg.norm(Z1 - K1n), np.linalg.norm(Z2 - K2n))
        s = rho * np.hypot(np.linalg.norm(K1n - K1), np.linalg.norm(K2n - K2))
        sp = max(np.hypot(np.linalg.norm(Z1), np.linalg.norm(Z2)),
                 np.hypot(np.linalg.norm(K1n), np.linalg.norm(K2n)), 1e-300)
        sd = max(np.hypot(np.linalg.norm(L1n), np.linalg.norm(L2n)), 1e-300)
        return _pack(r_new, W_new, L1n, L2n), r, s, sp, sd

    u = _pack(np.zeros(2 * M - 1), np.zeros((k, k)), np.zeros((N1, N1)), np.zeros((M, M)))
    mon = _Monitor(cfg, record)
    alpha = cfg.relaxation
    converged = False
    rp = rd = np.inf
    it = 0
    for it in range(1, cfg.max_iterations + 1):
        rho = mon.rho
        fu, r, s, sp, sd = step(u, rho)
        if not np.isfinite(r) or not np.isfinite(s):
            raise SolverError("non-finite residual in reduced-MMV ADMM")
        rp, rd, converged = mon.step(it, r, s, sp, sd)
        u = fu
        if converged:
            break
        if cfg.polish_every and it % cfg.polish_every == 0:
            warm = _polish_rmmv(ls, B, Xs, _unpack(u, shapes)[0].real)
            if warm is not None:
                u_w = _pack(*warm)
                fu_w, r, s, sp, sd = step(u_w, mon.rho)
                accept = np.all(np.isfinite(fu_w)) and max(r / sp, s / sd) < max(rp, rd)
                log.debug("polish at iteration %d: residuals %.1e/%.1e -> %.1e/%.1e, %s", it, rp, rd,
                          r / sp, s / sd, "accepted" if accept else "rejected")
                if accept:
                    u = u_w

    # report the last plain ADMM step, never an extrapolated point
    r_c, W, L1, L2 = _unpack(fu, shapes)
    r_par = r_c.real.copy()
    T = ls.matrix(r_par)
    K1, K2 = assemble(T, W), T
    complementarity = (abs(np.vdot(L1, K1)) + abs(np.vdot(L2, K2))) / max(
        np.hypot(np.linalg.norm(L1), np.linalg.norm(L2)) * np.hypot(np.linalg.norm(K1), np.linalg.norm(K2)),
        1e-300,
    )
    v = ls.column(r_par)
    # feasibility restoration: shift T's diagonal (keeps Toeplitz, raises
    # B T B^H by the same amount since B B^H = I) and W until both blocks are PSD
    shift = max(0.0, -_min_eig(T), -_min_eig(assemble(T, W)))
    if shift > 0:
        v = v.copy()
        v[0] += shift
        T = _toeplitz(v)
        W = W + shift * eye_k
        shift2 = max(0.0, -_min_eig(T), -_min_eig(assemble(T, W)))
        if shift2 > 0:
            v[0] += shift2
            T = _toeplitz(v)
            W = W + shift2 * eye_k
    psd_min = min(_min_eig(T), _min_eig(assemble(T, W)))
    T_out = T * scale
    W_out = W * scale
    objective = float(np.trace(B @ T_out @ Bh).real + np.trace(W_out).real)
    return SdpSolution(
        variables={"T": T_out, "W": W_out, "v": v * scale},
        objective=objective, primal_residual=float(rp), dual_residual=float(rd), iterations=it,
        converged=bool(converged), complementarity=float(complementarity),
        psd_min_eig=psd_min * scale, history=mon.hist,
    )


_toeplitz = toeplitz_from_column
