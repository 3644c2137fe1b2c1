"""Minimum-power symbol-level precoder under constructive-interference constraints.

For a fixed placement the problem is a strictly convex QP: minimize the norm of
the precoded vector x = W s subject to, per user, the two linear inequalities
that keep the received point inside its PSK decision sector. The solver is
Hildreth-style dual coordinate ascent on the 2K nonnegative multipliers, with
an exhaustive active-set enumeration as fallback for small K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSnapshot


class InfeasibleProblemError(RuntimeError):
    """Raised when no precoded vector can satisfy the CI constraints."""


def psk_constellation(order: int) -> np.ndarray:
    """Unit-modulus M-PSK points e^{j(2m+1)pi/M}; QPSK is (+-1 +-j)/sqrt(2)."""
    m = np.arange(order)
    return np.exp(1j * (2 * m + 1) * np.pi / order)


def psk_symbols(indices: np.ndarray, order: int) -> "SymbolVector":
    points = psk_constellation(order)
    return SymbolVector(s=points[np.asarray(indices) % order], order=order)


@dataclass(frozen=True)
class SymbolVector:
    """Per-user transmit symbols drawn from a normalized M-PSK constellation."""

    s: np.ndarray
    order: int

    def __post_init__(self):
        if not np.allclose(np.abs(self.s), 1.0, atol=1e-12):
            raise ValueError("symbols must have unit modulus")

    @property
    def num_users(self) -> int:
        return self.s.size


@dataclass
class QPInstance:
    """Real-valued minimum-norm problem: min ||z||^2 s.t. A z >= b.

    z stacks Re/Im of the precoded vector (length 2N); A has two rows per user
    (the +Im and -Im halves of the |Im| split). row_users/row_signs map each
    row back to (user index, Im branch sign).
    """

    A: np.ndarray
    b: np.ndarray
    row_users: np.ndarray
    row_signs: np.ndarray
    num_streams: int

    @property
    def num_users(self) -> int:
        return self.A.shape[0] // 2


@dataclass
class QPSolution:
    """Solver output with a KKT certificate.

    power is the recovered beamforming power ||x_opt||^2 / K; duals are the
    nonnegative multipliers of the 2K inequality rows; kkt_residual is the
    max of primal violation and complementary slackness on the row-normalized
    system (stationarity holds by construction).
    """

    x_opt: np.ndarray
    power: float
    duals: np.ndarray
    kkt_residual: float
    feasible: bool
    sweeps: int = 0
    used_fallback: bool = False


def build_ci_qp(
    snapshot: ChannelSnapshot,
    symbols: SymbolVector,
    gamma: np.ndarray,
    noise_power: float,
    theta_th: float,
) -> QPInstance:
    """Encode the per-user CI sector constraints as 2K linear rows in the
    2N real unknowns.

    With a_k = h_k_eff / s_k and z = [Re x; Im x], the received point is
    lam_k = (re_k . z) + j (im_k . z) and each user contributes
    tan(theta_th) * re_k . z +/- im_k . z >= tan(theta_th) * sqrt(gamma_k s2).
    """
    gamma = np.asarray(gamma, dtype=float)
    K, N = snapshot.effective.shape
    if gamma.shape != (K,):
        raise ValueError(f"gamma must have one entry per user, got {gamma.shape}")
    if np.any(gamma <= 0):
        raise ValueError("SINR targets must be positive")
    t = math.tan(theta_th)
    A = np.zeros((2 * K, 2 * N))
    b = np.zeros(2 * K)
    row_users = np.repeat(np.arange(K), 2)
    row_signs = np.tile([1, -1], K)
    for k in range(K):
        a = snapshot.effective[k] / symbols.s[k]
        re_row = np.concatenate([a.real, -a.imag])
        im_row = np.concatenate([a.imag, a.real])
        thresh = t * math.sqrt(gamma[k] * noise_power)
        A[2 * k] = t * re_row + im_row
        A[2 * k + 1] = t * re_row - im_row
        b[2 * k] = thresh
        b[2 * k + 1] = thresh
    return QPInstance(A=A, b=b, row_users=row_users, row_signs=row_signs, num_streams=N)


def _split_complex(z: np.ndarray, n: int) -> np.ndarray:
    return z[:n] + 1j * z[n:]


def _kkt_residual(An: np.ndarray, bn: np.ndarray, mu: np.ndarray) -> tuple[float, np.ndarray]:
    z = An.T @ mu
    margins = An @ z - bn
    primal = max(0.0, float(-margins.min(initial=0.0)))
    comp = float(np.max(np.abs(mu * margins), initial=0.0))
    return max(primal, comp), z


def solve_min_power(
    qp: QPInstance,
    tol: float = 1e-9,
    max_sweeps: int = 20000,
) -> QPSolution:
    """Minimum-norm feasible point of the CI polyhedron via dual coordinate
    ascent (Hildreth), certified by the KKT residual.

    Rows are normalized to unit norm before ascent so the residual tolerance
    is scale-free. Falls back to the exhaustive active-set oracle if the
    ascent has not certified within max_sweeps and the instance is small
    enough to enumerate; raises InfeasibleProblemError when the constraints
    admit no solution (zero row with positive offset, or diverging duals).
    """
    A, b = qp.A, qp.b
    m = A.shape[0]
    norms = np.linalg.norm(A, axis=1)
    dead = norms < 1e-300
    if np.any(dead & (b > 0)):
        raise InfeasibleProblemError("constraint row with zero normal and positive offset")
    norms = np.where(dead, 1.0, norms)
    An = A / norms[:, None]
    bn = b / norms

    G = An @ An.T
    diag = np.diag(G).copy()
    active = diag > 1e-300  # dead rows never update

    mu = np.zeros(m)
    resid = math.inf
    sweeps = 0
    check_every = 8
    grow_limit = 1e14 * (1.0 + float(np.abs(bn).max(initial=0.0)))
    for sweeps in range(1, max_sweeps + 1):
        for i in range(m):
            if not active[i]:
                continue
            step = (bn[i] - G[i] @ mu) / diag[i]
            mu[i] = max(0.0, mu[i] + step)
        if sweeps % check_every == 0 or sweeps == max_sweeps:
            resid, z = _kkt_residual(An, bn, mu)
            if resid <= tol:
                break
            if np.linalg.norm(mu) > grow_limit:
                raise InfeasibleProblemError("dual ascent diverged (infeasible CI region)")

    if resid > tol and 2 * qp.num_users <= 12:
        from .oracles import active_set_qp_oracle

        sol = active_set_qp_oracle(qp)
        if not sol.feasible:
            raise InfeasibleProblemError("active-set enumeration found no feasible point")
        sol.used_fallback = True
        sol.sweeps = sweeps
        return sol
    if resid > tol:
        raise InfeasibleProblemError(
            f"dual ascent did not certify within {max_sweeps} sweeps (residual {resid:.2e})"
        )

    resid, z = _kkt_residual(An, bn, mu)
    n = qp.num_streams
    x_opt = _split_complex(z, n)
    return QPSolution(
        x_opt=x_opt,
        power=float(z @ z) / qp.num_users,
        duals=mu / norms,
        kkt_residual=resid,
        feasible=True,
        sweeps=sweeps,
    )


def recover_beam_matrix(x_opt: np.ndarray, symbols: SymbolVector) -> np.ndarray:
    """Minimum-Frobenius-norm beam matrix with W s = x_opt: the rank-one
    outer product x_opt s^H / K."""
    K = symbols.num_users
    return np.outer(x_opt, symbols.s.conj()) / K


def transmit_power(W: np.ndarray) -> float:
    """Total transmit power, the squared Frobenius norm sum_k ||w_k||^2."""
    return float(np.sum(np.abs(W) ** 2))


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0) * 1e-3


def watts_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w * 1e3)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)
