"""Per-antenna position optimization by smoothed margin descent.

For fixed beams the placement objective separates into one single-variable
subproblem per antenna: a double sum over user pairs of |g_im| - g_re*tan(th),
where g_im/g_re are the imaginary/real parts of that antenna's contribution to
the received point. The |.| kink is smoothed by log-sum-exp of its two branches
and each subproblem is solved by projected gradient descent with Armijo
backtracking over the antenna's movable region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .channel import WaveformParams
from .geometry import (
    MovableRegion,
    SystemGeometry,
    initial_regions,
    updated_region,
    validate_placement,
)


@dataclass(frozen=True)
class SubproblemTerms:
    """Constant data of one antenna's position subproblem.

    amp[m] is the beam amplitude |w_{m,n}| on this waveguide; phase_off[m, k]
    the phase offset angle(w_{m,n}) + angle(s_m) - angle(s_k); user_x/user_y
    the user plane coordinates. Together with the waveguide y, height, and the
    two wavenumbers these determine every g-term as a function of the antenna
    coordinate x.
    """

    amp: np.ndarray
    phase_off: np.ndarray
    user_x: np.ndarray
    user_y: np.ndarray
    waveguide_y: float
    height: float
    beta0: float
    beta1: float
    tan_th: float

    @property
    def num_users(self) -> int:
        return self.user_x.size


def build_subproblem_terms(
    geom: SystemGeometry,
    n: int,
    W: np.ndarray,
    s: np.ndarray,
    params: WaveformParams,
    theta_th: float,
) -> SubproblemTerms:
    """Terms of the subproblems on waveguide n for beams W and symbols s."""
    w_row = W[n, :]  # w_{m,n} over users m
    amp = np.abs(w_row)
    phase_off = np.angle(w_row)[:, None] + np.angle(s)[:, None] - np.angle(s)[None, :]
    return SubproblemTerms(
        amp=amp,
        phase_off=phase_off,
        user_x=np.array([u.x for u in geom.users]),
        user_y=np.array([u.y for u in geom.users]),
        waveguide_y=geom.waveguide_y[n],
        height=geom.height,
        beta0=params.beta0,
        beta1=params.beta1,
        tan_th=math.tan(theta_th),
    )


@dataclass(frozen=True)
class SmoothingParams:
    """Log-sum-exp temperature policy.

    When adaptive, the temperature per subproblem is kappa times the largest
    branch magnitude at the warm start, floored; otherwise eps is used as-is.
    """

    eps: float = 1e-9
    kappa: float = 1e-3
    floor: float = 1e-15
    adaptive: bool = True

    def __post_init__(self):
        if not (self.eps > 0 and self.floor > 0 and self.eps >= self.floor):
            raise ValueError("need eps >= floor > 0")


@dataclass(frozen=True)
class PGDConfig:
    """Projected-gradient settings: iteration/step limits and the
    Armijo-Goldstein backtracking schedule."""

    max_iters: int = 200
    step_tol: float = 1e-6
    init_step: float = 0.1
    armijo_c1: float = 1e-4
    shrink: float = 0.5
    max_backtracks: int = 40
    restarts: int = 0  # extra evenly spaced starts per region (0 = warm start only)

    def __post_init__(self):
        if min(self.max_iters, self.step_tol, self.init_step, self.armijo_c1,
               self.shrink, self.max_backtracks) <= 0:
            raise ValueError("all PGD settings must be positive")
        if self.shrink >= 1:
            raise ValueError("shrink factor must be < 1")


def _q_f(terms: SubproblemTerms, x):
    """Distance to each user and the position-dependent phase, per user."""
    x = np.asarray(x, dtype=float)
    dx = terms.user_x - x[..., None]
    q = np.sqrt(dx**2 + (terms.user_y - terms.waveguide_y) ** 2 + terms.height**2)
    f = -terms.beta0 * q - terms.beta1 * x[..., None]
    return q, f


def g_terms(terms: SubproblemTerms, x: float, m: int, k: int) -> tuple[float, float]:
    """Imaginary and real g-components of the (m, k) term at position x."""
    q, f = _q_f(terms, float(x))
    ang = f[k] + terms.phase_off[m, k]
    scale = terms.amp[m] / q[k]
    return float(scale * np.sin(ang)), float(scale * np.cos(ang))


def phi_branches(terms: SubproblemTerms, x: float, m: int, k: int) -> tuple[float, float]:
    """The two branches of |g_im| - g_re*tan(th): (g_im - g_re*t, -g_im - g_re*t)."""
    g_im, g_re = g_terms(terms, x, m, k)
    base = -g_re * terms.tan_th
    return g_im + base, -g_im + base


def smooth_term(terms: SubproblemTerms, x: float, m: int, k: int, eps: float) -> float:
    """Log-sum-exp smoothing of the two branches at temperature eps."""
    bar, hat = phi_branches(terms, x, m, k)
    return float(eps * np.logaddexp(bar / eps, hat / eps))


def _all_branches(terms: SubproblemTerms, x):
    """phi-bar and phi-hat for every (m, k) pair; x may be an array."""
    q, f = _q_f(terms, x)
    ang = f[..., None, :] + terms.phase_off  # (..., m, k)
    scale = terms.amp[..., :, None] / q[..., None, :]
    g_im = scale * np.sin(ang)
    g_re = scale * np.cos(ang)
    base = -g_re * terms.tan_th
    return g_im + base, -g_im + base, g_im, g_re, q


def subproblem_objective(terms: SubproblemTerms, x, eps: float):
    """Smoothed subproblem objective, summed over all (m, k) pairs.

    Vectorized over x: a scalar input yields a float, an array input an array
    of the same shape.
    """
    bar, hat, *_ = _all_branches(terms, x)
    vals = eps * np.logaddexp(bar / eps, hat / eps)
    out = vals.sum(axis=(-2, -1))
    return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out


def subproblem_gradient(terms: SubproblemTerms, x: float, eps: float) -> float:
    """Analytic derivative of the smoothed objective at x.

    Each pair contributes the softmax-weighted combination of the two branch
    derivatives; the branch derivatives follow from differentiating the
    g-components through q(x) and the phase -beta0*q - beta1*x.
    """
    bar, hat, g_im, g_re, q = _all_branches(terms, float(x))
    qk = q  # (k,)
    dq = (float(x) - terms.user_x) / qk  # dq/dx per user
    t = terms.tan_th
    b0, b1 = terms.beta0, terms.beta1
    # shared per-(m,k) pieces; broadcast dq over the m axis
    dbar = g_re * (dq * (-b0 + t / qk) - b1) - g_im * (dq * (b0 * t + 1.0 / qk) + b1 * t)
    dhat = g_re * (dq * (b0 + t / qk) + b1) - g_im * (dq * (b0 * t - 1.0 / qk) + b1 * t)
    # stable softmax weight of the bar branch: sigma((bar - hat)/eps)
    wbar = _sigmoid((bar - hat) / eps)
    return float(np.sum(wbar * dbar + (1.0 - wbar) * dhat))


def _sigmoid(u: np.ndarray) -> np.ndarray:
    out = np.empty_like(u)
    pos = u >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-u[pos]))
    eu = np.exp(u[~pos])
    out[~pos] = eu / (1.0 + eu)
    return out


def pick_eps(terms: SubproblemTerms, x0: float, smoothing: SmoothingParams) -> float:
    """Subproblem temperature under the adaptive policy."""
    if not smoothing.adaptive:
        return smoothing.eps
    bar, hat, *_ = _all_branches(terms, float(x0))
    scale = max(np.max(np.abs(bar), initial=0.0), np.max(np.abs(hat), initial=0.0))
    return max(smoothing.kappa * scale, smoothing.floor)


def armijo_step(
    objective: Callable[[float], float],
    gradient_value: float,
    x: float,
    cfg: PGDConfig,
) -> float:
    """Largest backtracked step satisfying the Armijo-Goldstein decrease test.

    Tries init_step * shrink^i and returns the first step with
    f(x - mu*g) <= f(x) - c1*mu*g^2, or 0 if none succeeds.
    """
    f0 = objective(x)
    g2 = gradient_value * gradient_value
    mu = cfg.init_step
    for _ in range(cfg.max_backtracks + 1):
        if objective(x - mu * gradient_value) <= f0 - cfg.armijo_c1 * mu * g2:
            return mu
        mu *= cfg.shrink
    return 0.0


def _projected_armijo(
    terms: SubproblemTerms,
    region: MovableRegion,
    eps: float,
    f0: float,
    gradient_value: float,
    x: float,
    cfg: PGDConfig,
) -> tuple[float, float]:
    """Backtracking on the projected candidate: largest step whose clamped
    point satisfies the Armijo decrease. All candidates are evaluated in one
    vectorized call; returns (candidate, its objective), or (x, f0) when no
    step succeeds."""
    steps = cfg.init_step * cfg.shrink ** np.arange(cfg.max_backtracks + 1)
    cands = np.clip(x - steps * gradient_value, region.lower, region.upper)
    vals = subproblem_objective(terms, cands, eps)
    ok = vals <= f0 - cfg.armijo_c1 * steps * gradient_value**2
    idx = np.argmax(ok)
    if not ok[idx]:
        return x, f0
    return float(cands[idx]), float(vals[idx])


def project(x: float, region: MovableRegion) -> float:
    """Euclidean projection onto the movable interval (clamp)."""
    return min(max(x, region.lower), region.upper)


def pgd_solve(
    terms: SubproblemTerms,
    region: MovableRegion,
    eps: float,
    cfg: PGDConfig,
    x_init: float,
    callback: Callable[[float, float], None] | None = None,
) -> float:
    """Projected gradient descent over one movable region.

    Iterates x <- Proj(x - mu * grad), with mu backtracked on the projected
    candidate per the Armijo-Goldstein decrease test, until the position
    change drops below step_tol or max_iters is hit. The objective sequence
    is non-increasing and the returned point is feasible.
    """
    x = project(float(x_init), region)
    f_x = subproblem_objective(terms, x, eps)
    if callback is not None:
        callback(x, f_x)
    for _ in range(cfg.max_iters):
        g = subproblem_gradient(terms, x, eps)
        cand, f_cand = _projected_armijo(terms, region, eps, f_x, g, x, cfg)
        moved = abs(cand - x)
        x, f_x = cand, f_cand
        if callback is not None:
            callback(x, f_x)
        if moved <= cfg.step_tol:
            break
    return x


def _solve_region(
    terms: SubproblemTerms,
    region: MovableRegion,
    eps: float,
    cfg: PGDConfig,
    x_warm: float,
) -> float:
    """One subproblem solve: warm start plus optional evenly spaced restarts."""
    starts = [project(x_warm, region)]
    if cfg.restarts > 0:
        starts.extend(np.linspace(region.lower, region.upper, cfg.restarts))
    best_x, best_f = None, math.inf
    for x0 in starts:
        x = pgd_solve(terms, region, eps, cfg, x0)
        f = subproblem_objective(terms, x, eps)
        if f < best_f:
            best_x, best_f = x, f
    return best_x


def optimize_all_positions(
    geom: SystemGeometry,
    x_current: np.ndarray,
    W: np.ndarray,
    s: np.ndarray,
    params: WaveformParams,
    theta_th: float,
    smoothing: SmoothingParams,
    cfg: PGDConfig,
) -> np.ndarray:
    """Sweep every antenna once: left to right on each waveguide, each over
    its movable region updated from the previous antenna's new position.

    Warm starts from the current placement projected into each region; the
    output always satisfies the range and spacing constraints.
    """
    regions = initial_regions(geom)
    x_new = np.array(x_current, dtype=float, copy=True)
    for n in range(geom.num_waveguides):
        terms = build_subproblem_terms(geom, n, W, s, params, theta_th)
        prev: float | None = None
        for l in range(geom.num_pas_per_waveguide):
            region = updated_region(l, prev, regions[l], geom.min_spacing)
            x_warm = project(x_new[n, l], region)
            eps = pick_eps(terms, x_warm, smoothing)
            x_new[n, l] = _solve_region(terms, region, eps, cfg, x_warm)
            prev = x_new[n, l]
    report = validate_placement(geom, x_new)
    if not report.ok:  # regions enforce this by construction
        raise AssertionError(f"position sweep produced violations: {report.violations}")
    return x_new


def placement_objective_exact(
    geom: SystemGeometry,
    x_coords: np.ndarray,
    params: WaveformParams,
    W: np.ndarray,
    s: np.ndarray,
    gamma: np.ndarray,
    noise_power: float,
    theta_th: float,
) -> float:
    """Exact (unsmoothed, un-decomposed) placement objective.

    Per user: (eta/sqrt(L)) * (|G_im| - G_re*tan(th)) + sqrt(gamma*s2)*tan(th),
    with G_im/G_re the triple sums of the per-antenna g-components. Equals the
    negated sum of CI margins.
    """
    x = np.asarray(x_coords, dtype=float)
    N, L = geom.num_waveguides, geom.num_pas_per_waveguide
    K = geom.num_users
    ux = np.array([u.x for u in geom.users])
    uy = np.array([u.y for u in geom.users])
    wy = np.asarray(geom.waveguide_y)
    t = math.tan(theta_th)

    # q[k, n, l], f[k, n, l]
    q = np.sqrt(
        (ux[:, None, None] - x[None, :, :]) ** 2
        + (uy[:, None, None] - wy[None, :, None]) ** 2
        + geom.height**2
    )
    f = -params.beta0 * q - params.beta1 * x[None, :, :]
    amp = np.abs(W.T)  # (m, n)
    ang_off = np.angle(W.T)[:, :, None] + np.angle(s)[:, None, None]  # (m, n, 1)
    # angle[m, n, l, k] = f[k, n, l] + ang_off[m, n] - angle(s_k)
    ang = (
        f.transpose(1, 2, 0)[None, :, :, :]
        + ang_off[:, :, :, None]
        - np.angle(s)[None, None, None, :]
    )
    scale = amp[:, :, None, None] / q.transpose(1, 2, 0)[None, :, :, :]
    g_im = (scale * np.sin(ang)).sum(axis=(0, 1, 2))  # per user k
    g_re = (scale * np.cos(ang)).sum(axis=(0, 1, 2))
    lead = params.eta / math.sqrt(L)
    thresh = np.sqrt(np.asarray(gamma, dtype=float) * noise_power)
    return float(np.sum(lead * (np.abs(g_im) - g_re * t) + thresh * t))
