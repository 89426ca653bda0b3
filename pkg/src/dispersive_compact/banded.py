"""Direct solvers for periodic (cyclic) tri- and pentadiagonal systems.

The implicit left-hand side of every catalogued compact scheme is a symmetric
circulant band (beta, alpha, 1, alpha, beta).  Cyclic systems are solved as a
truncated band plus a low-rank corner correction (Woodbury), so each solve
costs O(n).  A dense LU path is provided as a test oracle.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_banded


class SingularOperatorError(ValueError):
    """The circulant symbol vanishes somewhere on [0, 2*pi)."""


def lhs_symbol(alpha: float, beta: float, omega: np.ndarray) -> np.ndarray:
    """Circulant symbol 1 + 2*alpha*cos(w) + 2*beta*cos(2w) of the band."""
    return 1.0 + 2.0 * alpha * np.cos(omega) + 2.0 * beta * np.cos(2.0 * omega)


def check_invertible(alpha: float, beta: float, tol: float = 1e-10) -> None:
    omega = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    if np.min(np.abs(lhs_symbol(alpha, beta, omega))) < tol:
        raise SingularOperatorError(
            f"LHS symbol vanishes for alpha={alpha}, beta={beta}"
        )


class CyclicBandedSolver:
    """Factorization-style object for a cyclic (beta, alpha, 1, alpha, beta) band.

    Precomputes the corner-correction data once; ``solve`` is then a single
    banded solve plus a rank-2 (tridiagonal) or rank-4 (pentadiagonal)
    correction.  Immutable after construction and safe to share.
    """

    def __init__(self, n: int, alpha: float, beta: float = 0.0):
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.n = int(n)
        self.bandwidth = 2 if beta != 0.0 else (1 if alpha != 0.0 else 0)
        if self.bandwidth and n < 2 * self.bandwidth + 1:
            raise ValueError(f"n={n} too small for bandwidth {self.bandwidth}")
        check_invertible(self.alpha, self.beta)
        if self.bandwidth == 0:
            return

        p, n = self.bandwidth, self.n
        diags = {0: 1.0, 1: alpha, -1: alpha}
        if p == 2:
            diags.update({2: beta, -2: beta})
        ab = np.zeros((2 * p + 1, n))
        for off, val in diags.items():
            if off >= 0:
                ab[p - off, off:] = val
            else:
                ab[p - off, :off] = val
        self._ab = ab

        # wrap entries missing from the truncated band, as rank-2p correction
        corners = []
        for i in range(p):
            for off in range(i + 1, p + 1):
                val = diags[off]
                corners.append((i, (i - off) % n, val))        # top-left wrap
                corners.append((n - 1 - i, (n - 1 - i + off) % n, val))
        rows = sorted({i for i, _, _ in corners})
        u = np.zeros((n, len(rows)))
        vt = np.zeros((len(rows), n))
        for k, r in enumerate(rows):
            u[r, k] = 1.0
            for i, j, val in corners:
                if i == r:
                    vt[k, j] += val
        g = solve_banded((p, p), ab, u)
        cap = np.eye(len(rows)) + vt @ g
        self._g = g
        self._vt = vt
        self._cap_inv = np.linalg.inv(cap)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve A x = rhs; rhs may be (n,) or (n, k)."""
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape[0] != self.n:
            raise ValueError(f"rhs length {rhs.shape[0]} != n={self.n}")
        if self.bandwidth == 0:
            return rhs.copy()
        p = self.bandwidth
        y = solve_banded((p, p), self._ab, rhs)
        return y - self._g @ (self._cap_inv @ (self._vt @ y))

    def dense(self) -> np.ndarray:
        """Full matrix, for oracles and small-n construction."""
        n = self.n
        a = np.eye(n)
        for off, val in ((1, self.alpha), (2, self.beta)):
            if val != 0.0:
                idx = np.arange(n)
                a[idx, (idx + off) % n] = val
                a[idx, (idx - off) % n] = val
        return a


def dense_oracle_solve(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Dense LU with partial pivoting; test oracle only (n <= 512)."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape[0] > 512:
        raise ValueError("dense oracle limited to n <= 512")
    return np.linalg.solve(matrix, rhs)
