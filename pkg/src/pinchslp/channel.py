"""In-waveguide phase response, free-space LoS channels, and CI-related scalars.

Sign convention, fixed globally: a channel entry for an antenna at distance q
carries exp(-j*beta0*q) and the in-guide factor carries exp(-j*beta1*x), so the
total per-antenna phase is -(beta0*q + beta1*x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import SystemGeometry, Vec3

SPEED_OF_LIGHT = 2.99792458e8  # m/s, pinned for reproducible wavelengths


@dataclass(frozen=True)
class WaveformParams:
    """Carrier-derived constants: wavelengths, wavenumbers, reference path gain.

    eta is the free-space amplitude at 1 m reference distance, c/(4*pi*f_c);
    beta0 and beta1 are the free-space and in-guide wavenumbers (rad/m).
    """

    carrier_freq: float
    n_eff: float
    wavelength: float
    guide_wavelength: float
    eta: float
    beta0: float
    beta1: float

    @classmethod
    def from_carrier(cls, carrier_freq: float, n_eff: float = 1.4) -> "WaveformParams":
        if carrier_freq <= 0 or n_eff <= 0:
            raise ValueError("carrier frequency and refractive index must be positive")
        wavelength = SPEED_OF_LIGHT / carrier_freq
        guide_wavelength = wavelength / n_eff
        return cls(
            carrier_freq=carrier_freq,
            n_eff=n_eff,
            wavelength=wavelength,
            guide_wavelength=guide_wavelength,
            eta=wavelength / (4.0 * math.pi),
            beta0=2.0 * math.pi / wavelength,
            beta1=2.0 * math.pi / guide_wavelength,
        )


@dataclass(frozen=True)
class ChannelSnapshot:
    """Per-user channels at one placement.

    effective: K x N complex rows mapping per-waveguide inputs to each user.
    raw: K x N x L complex free-space entries (modulus eta/distance).
    distances: K x N x L user-to-antenna distances.
    """

    effective: np.ndarray
    raw: np.ndarray
    distances: np.ndarray

    @property
    def num_users(self) -> int:
        return self.effective.shape[0]


def waveguide_phase_vector(x_n: np.ndarray, params: WaveformParams) -> np.ndarray:
    """Phase response of the L antennas on one waveguide, entry (1/sqrt(L))*e^{-j*beta1*x}.

    The vector always has unit Euclidean norm.
    """
    x = np.asarray(x_n, dtype=float)
    return np.exp(-1j * params.beta1 * x) / math.sqrt(x.size)


def freespace_channel(
    user: Vec3, pa_positions: list[Vec3], params: WaveformParams
) -> np.ndarray:
    """LoS channel row from L antenna points to one user.

    Entry l has modulus eta/q_l and phase -beta0*q_l (row convention of the
    effective-channel product).
    """
    q = np.array([user_distance(user, p) for p in pa_positions])
    return params.eta * np.exp(-1j * params.beta0 * q) / q


def user_distance(user: Vec3, point: Vec3) -> float:
    return math.sqrt(
        (user.x - point.x) ** 2 + (user.y - point.y) ** 2 + (user.z - point.z) ** 2
    )


def effective_channels(
    geom: SystemGeometry, x_coords: np.ndarray, params: WaveformParams
) -> ChannelSnapshot:
    """Effective per-user channel rows for a placement: free-space row times
    the block-diagonal in-guide response.

    effective[k, n] = (1/sqrt(L)) * sum_l raw[k, n, l] * exp(-j*beta1*x[n, l]).
    """
    x = np.asarray(x_coords, dtype=float)
    N, L = geom.num_waveguides, geom.num_pas_per_waveguide
    if x.shape != (N, L):
        raise ValueError(f"placement shape {x.shape} != ({N}, {L})")
    ux = np.array([u.x for u in geom.users])
    uy = np.array([u.y for u in geom.users])
    wy = np.asarray(geom.waveguide_y)

    # distances[k, n, l]
    dx = ux[:, None, None] - x[None, :, :]
    dy = uy[:, None] - wy[None, :]
    dist = np.sqrt(dx**2 + dy[:, :, None] ** 2 + geom.height**2)
    raw = params.eta * np.exp(-1j * params.beta0 * dist) / dist
    guide = np.exp(-1j * params.beta1 * x) / math.sqrt(L)
    effective = np.einsum("knl,nl->kn", raw, guide)
    return ChannelSnapshot(effective=effective, raw=raw, distances=dist)


def received_lambda(
    snapshot: ChannelSnapshot, W: np.ndarray, s: np.ndarray, k: int
) -> complex:
    """Noise-free received point of user k rotated into its own symbol frame:
    (h_k_eff @ W @ s) / s_k."""
    return complex(snapshot.effective[k] @ (W @ s) / s[k])


def sinr(snapshot: ChannelSnapshot, W: np.ndarray, k: int, noise_power: float) -> float:
    """SINR for decoding user k's stream under beamforming matrix W."""
    if noise_power <= 0:
        raise ValueError("noise power must be positive")
    gains = np.abs(snapshot.effective[k] @ W) ** 2
    signal = gains[k]
    interference = gains.sum() - signal
    return float(signal / (interference + noise_power))


def ci_margin(
    lam: complex, gamma: float, noise_power: float, theta_th: float
) -> float:
    """Constructive-interference margin of a received point.

    Nonnegative iff the point lies inside the angular decision sector at the
    required SINR level: (Re(lam) - sqrt(gamma*sigma^2))*tan(theta_th) - |Im(lam)|.
    """
    threshold = math.sqrt(gamma * noise_power)
    return (lam.real - threshold) * math.tan(theta_th) - abs(lam.imag)
