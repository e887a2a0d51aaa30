"""Analog front-end abstraction: m x M sketch matrices with orthonormal rows."""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

import numpy as np


@dataclass(frozen=True)
class SketchMatrix:
    B: np.ndarray
    kind: str = "generic_orthonormal"

    @property
    def m(self) -> int:
        return self.B.shape[0]

    @property
    def M(self) -> int:
        return self.B.shape[1]

    @property
    def ratio(self) -> float:
        return self.m / self.M

    def selected(self) -> np.ndarray | None:
        """Selected element indices for selection-type sketches."""
        if self.kind == "generic_orthonormal":
            return None
        return np.argmax(self.B, axis=1)


def _selection(indices, M: int, kind: str) -> SketchMatrix:
    B = np.zeros((len(indices), M))
    B[np.arange(len(indices)), indices] = 1.0
    return SketchMatrix(B, kind)


def random_antenna_selection(m: int, M: int, rng: np.random.Generator) -> SketchMatrix:
    """Select ``m`` distinct array elements uniformly at random."""
    if not 1 <= m <= M:
        raise ValueError(f"need 1 <= m <= M, got m={m}, M={M}")
    return _selection(rng.choice(M, size=m, replace=False), M, "random_selection")


def coprime_pair(M: int) -> tuple[int, int]:
    """Smallest coprime ``q < r`` with ``q * r >= M`` (minimizing ``q + r``, then ``q`` largest)."""
    best = None
    for total in range(3, 2 * M + 3):
        for q in range(total // 2, 1, -1):
            r = total - q
            if q < r and gcd(q, r) == 1 and q * r >= M:
                best = (q, r)
                break
        if best:
            return best
    raise ValueError(f"no coprime pair found for M={M}")


def coprime_indices(M: int) -> np.ndarray:
    q, r = coprime_pair(M)
    idx = set(range(0, M, q)) | set(range(0, M, r))
    return np.array(sorted(idx))


def coprime_antenna_selection(M: int) -> SketchMatrix:
    if M < 4:
        raise ValueError(f"coprime selection needs M >= 4, got {M}")
    return _selection(coprime_indices(M), M, "coprime_selection")


def generic_orthonormal(m: int, M: int, rng: np.random.Generator) -> SketchMatrix:
    """Haar-like random complex sketch with orthonormal rows."""
    if not 1 <= m <= M:
        raise ValueError(f"need 1 <= m <= M, got m={m}, M={M}")
    G = rng.standard_normal((M, m)) + 1j * rng.standard_normal((M, m))
    Q, R = np.linalg.qr(G)
    Q = Q * (np.diag(R) / np.abs(np.diag(R)))
    return SketchMatrix(Q.conj().T, "generic_orthonormal")


def sketch(Bm: SketchMatrix, y) -> np.ndarray:
    """``x = B y``; ``y`` may be a vector or a matrix of column observations."""
    y = np.asarray(y)
    if y.shape[0] != Bm.M:
        raise ValueError(f"observation length {y.shape[0]} does not match sketch width {Bm.M}")
    return Bm.B @ y
