"""Dense linear-algebra plumbing: matrix exponential, operator norm, spectral radius.

The spectral-radius estimator deliberately runs two independent routes
(power iteration and the norm-of-powers limit) because the quasinilpotent
discretizations used elsewhere are severely non-normal, where either method
alone can mislead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InconsistentEstimatesError

# Pade coefficients for the degree-13 diagonal approximant of exp.
_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0, 670442572800.0,
    33522128640.0, 1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


def expm(A: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling-and-squaring with a degree-13 Pade core."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("expm expects a square matrix")
    nrm = np.linalg.norm(A, 1)
    s = max(0, int(math.ceil(math.log2(nrm / _THETA13))) if nrm > _THETA13 else 0)
    As = A / (2.0**s)

    I = np.eye(n, dtype=complex)
    A2 = As @ As
    A4 = A2 @ A2
    A6 = A2 @ A4
    b = _PADE13
    U = As @ (
        A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
        + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I
    )
    V = (
        A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
        + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I
    )
    R = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        R = R @ R
    return R


@dataclass(frozen=True)
class PowerNormResult:
    value: float
    iterations: int
    converged: bool


def power_opnorm(
    M: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    seed: int = 0,
) -> PowerNormResult:
    """Largest singular value by power iteration on M*M with a random start."""
    M = np.asarray(M, dtype=complex)
    rng = np.random.default_rng(seed)
    n = M.shape[1]
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    v /= np.linalg.norm(v)
    sigma = 0.0
    for it in range(1, max_iter + 1):
        w = M.conj().T @ (M @ v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return PowerNormResult(0.0, it, True)
        new_sigma = math.sqrt(nw)
        v = w / nw
        if abs(new_sigma - sigma) <= tol * max(new_sigma, 1e-300):
            return PowerNormResult(new_sigma, it, True)
        sigma = new_sigma
    return PowerNormResult(sigma, max_iter, False)


def op_norm(M: np.ndarray, tol: float = 1e-10, seed: int = 0) -> float:
    """Operator 2-norm; power iteration with an SVD fallback on non-convergence."""
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0.0
    res = power_opnorm(M, tol=tol, max_iter=2000, seed=seed)
    if res.converged:
        return res.value
    return float(np.linalg.norm(M, 2))


def _is_diagonal(M: np.ndarray) -> bool:
    return not np.any(M - np.diag(np.diagonal(M)))


def _strictly_triangular(M: np.ndarray) -> bool:
    lower = not np.any(np.triu(M))
    upper = not np.any(np.tril(M))
    return lower or upper


def _triangular(M: np.ndarray) -> bool:
    return not np.any(np.triu(M, 1)) or not np.any(np.tril(M, -1))


def gelfand_estimate(M: np.ndarray, max_squarings: int = 8):
    """Norm-of-powers estimates ||M^(2^k)||^(1/2^k), k = 0..max_squarings.

    Powers are renormalized at every squaring so the estimate is computed in
    log space without overflow.  Returns the list of estimates; an exact zero
    power short-circuits with estimate 0.
    """
    M = np.asarray(M, dtype=complex)
    ests = []
    B = M.copy()
    log_acc = 0.0
    for k in range(max_squarings + 1):
        nrm = np.linalg.norm(B, 2)
        if nrm == 0.0:
            ests.append(0.0)
            return ests
        est = math.exp((log_acc + math.log(nrm)) / 2**k)
        ests.append(est)
        B = B / nrm
        log_acc = 2.0 * (log_acc + math.log(nrm))
        B = B @ B
    return ests


def power_eig_estimate(M: np.ndarray, restarts: int = 4, iters: int = 400, seed: int = 0):
    """Dominant-eigenvalue modulus via power iteration with random restarts."""
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(restarts):
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(iters):
            w = M @ v
            nw = np.linalg.norm(w)
            if nw == 0.0:
                lam = 0.0
                break
            v = w / nw
            lam = abs(np.vdot(v, M @ v))
        best = max(best, float(lam))
    return best


@dataclass(frozen=True)
class SpectralRadiusResult:
    value: float
    power_estimate: float
    gelfand_estimate: float
    consistent: bool
    exact_path: str | None = None


def spectral_radius_detail(
    M: np.ndarray,
    disagreement_tol: float = 1e-6,
    max_squarings: int | None = None,
    seed: int = 0,
) -> SpectralRadiusResult:
    """Dual-route spectral radius.

    Exact short-circuits for diagonal and triangular matrices (eigenvalues
    are on the diagonal); otherwise power iteration is cross-checked against
    the norm-of-powers limit.  Small matrices get extra squarings because the
    k <= 8 truncation of the limit converges too slowly to cross-check at
    disagreement_tol.
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[0]
    if _is_diagonal(M):
        v = float(np.max(np.abs(np.diagonal(M)))) if n else 0.0
        return SpectralRadiusResult(v, v, v, True, exact_path="diagonal")
    if _strictly_triangular(M):
        return SpectralRadiusResult(0.0, 0.0, 0.0, True, exact_path="nilpotent")
    if _triangular(M):
        v = float(np.max(np.abs(np.diagonal(M))))
        return SpectralRadiusResult(v, v, v, True, exact_path="triangular")

    if max_squarings is None:
        max_squarings = 48 if n <= 128 else max(8, int(math.ceil(math.log2(max(n, 2)))))
    p = power_eig_estimate(M, seed=seed)
    g_list = gelfand_estimate(M, max_squarings=max_squarings)
    g = g_list[-1]
    scale_ref = max(1.0, p, g)
    consistent = abs(p - g) <= disagreement_tol * scale_ref
    value = g if g_list[-1] == 0.0 or not consistent else 0.5 * (p + g)
    return SpectralRadiusResult(value, p, g, consistent)


def spectral_radius(M: np.ndarray, strict: bool = False, **kw) -> float:
    """Spectral radius as a float; strict=True raises when the two routes disagree."""
    res = spectral_radius_detail(M, **kw)
    if strict and not res.consistent:
        raise InconsistentEstimatesError(
            "power-iteration and norm-of-powers spectral radius estimates disagree",
            estimates=(res.power_estimate, res.gelfand_estimate),
        )
    return res.value
