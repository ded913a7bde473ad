"""Physical layer: scene geometry, BS->RIS and RIS->UE channels, and the
received-power objective that every beam-search method queries.

All channel coefficients are narrowband complex gains.  Free-space entries
carry an amplitude of lambda/(4*pi*d) and a propagation phase of
exp(-j*2*pi*d/lambda); the empirical-log variant replaces the amplitude with
the linear form of an 11 + 2*log10(d) dB power loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .codebook import RisGeometry

LIGHT_SPEED = 3.0e8  # m/s


class DegenerateGeometryError(ValueError):
    """Raised when two scene points coincide and a distance law blows up."""


class ChannelModel(str, Enum):
    FREE_SPACE = "free_space"
    EMPIRICAL_LOG = "empirical_log"


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def lin_to_db(x):
    """10*log10(x) with a floor to keep zero powers finite."""
    return 10.0 * np.log10(np.maximum(x, 1e-300))


@dataclass(frozen=True)
class Vec3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite coordinate: {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class SceneConfig:
    """Static scene description: BS, RIS placement and radio parameters.

    The wavelength is always derived as c/f_c, so the stored value can never
    drift from the carrier frequency.
    """

    bs_position: Vec3 = Vec3(0.0, 0.0, 0.5)
    ris_origin: Vec3 = Vec3(0.0, 0.0, 0.0)
    carrier_frequency: float = 5.8e9
    num_bs_antennas: int = 2
    noise_power_dbm: float = -120.0
    channel_model: ChannelModel = ChannelModel.FREE_SPACE

    def __post_init__(self):
        if self.carrier_frequency <= 0:
            raise ValueError("carrier_frequency must be positive")
        if self.num_bs_antennas < 1:
            raise ValueError("need at least one BS antenna")

    @property
    def wavelength(self) -> float:
        return LIGHT_SPEED / self.carrier_frequency

    @property
    def noise_power_watts(self) -> float:
        return dbm_to_watts(self.noise_power_dbm)

    def bs_antenna_positions(self) -> np.ndarray:
        """(M, 3) antenna coordinates: half-wavelength ULA along x."""
        base = self.bs_position.as_array()
        offsets = np.arange(self.num_bs_antennas) * (self.wavelength / 2.0)
        pos = np.tile(base, (self.num_bs_antennas, 1))
        pos[:, 0] += offsets
        return pos


def uniform_transmit_signal(num_antennas: int) -> np.ndarray:
    """Unit-power transmit vector (1/sqrt(M), ..., 1/sqrt(M))."""
    if num_antennas < 1:
        raise ValueError("need at least one antenna")
    return np.full(num_antennas, 1.0 / math.sqrt(num_antennas), dtype=complex)


def _complex_gain(dist: np.ndarray, wavelength: float, model: ChannelModel) -> np.ndarray:
    if np.any(dist <= 0.0):
        raise DegenerateGeometryError("coincident points give a zero propagation distance")
    if model == ChannelModel.FREE_SPACE:
        amplitude = wavelength / (4.0 * np.pi * dist)
    else:
        # 11 + 2*log10(d) dB power loss -> amplitude 10^(-PL/20)
        path_loss_db = 11.0 + 2.0 * np.log10(dist)
        amplitude = 10.0 ** (-path_loss_db / 20.0)
    return amplitude * np.exp(-2j * np.pi * dist / wavelength)


def bs_ris_channel(scene: SceneConfig, ris: "RisGeometry") -> np.ndarray:
    """BS->RIS channel matrix, shape (N, M).

    Entry [i, k] is the gain from BS antenna k to RIS element i over the
    distance between the two points.
    """
    elems = ris.element_positions()                      # (N, 3)
    ants = scene.bs_antenna_positions()                  # (M, 3)
    dist = np.linalg.norm(elems[:, None, :] - ants[None, :, :], axis=-1)
    return _complex_gain(dist, scene.wavelength, scene.channel_model)


def ris_ue_channel(scene: SceneConfig, ris: "RisGeometry", ue_position: Vec3) -> np.ndarray:
    """RIS->UE channel row vector h^H, shape (N,)."""
    elems = ris.element_positions()
    dist = np.linalg.norm(elems - ue_position.as_array()[None, :], axis=-1)
    return _complex_gain(dist, scene.wavelength, scene.channel_model)


def _codeword_phases(codeword) -> np.ndarray:
    phases = getattr(codeword, "phases", codeword)
    return np.asarray(phases, dtype=float)


def received_signal(h: np.ndarray, codeword, H: np.ndarray, z: np.ndarray) -> complex:
    """Noiseless received sample h^H W H z with W = diag(exp(j*beta))."""
    h = np.asarray(h, dtype=complex)
    H = np.asarray(H, dtype=complex)
    z = np.asarray(z, dtype=complex)
    beta = _codeword_phases(codeword)
    if H.ndim != 2:
        raise ValueError("channel matrix must be 2-D")
    n, m = H.shape
    if h.shape != (n,) or beta.shape != (n,) or z.shape != (m,):
        raise ValueError(
            f"dimension mismatch: h{h.shape}, beta{beta.shape}, H{H.shape}, z{z.shape}"
        )
    return complex(np.sum(h * np.exp(1j * beta) * (H @ z)))


def rsrp(h: np.ndarray, codeword, H: np.ndarray, z: np.ndarray) -> float:
    """Noiseless received power |h^H W H z|^2 for one phase configuration.

    `codeword` may be a Codeword or a raw array of per-element phases in
    radians.  Noise never enters here; it only exists in simulate_received.
    """
    return abs(received_signal(h, codeword, H, z)) ** 2


def coherent_bound(h: np.ndarray, H: np.ndarray, z: np.ndarray) -> float:
    """Upper bound (sum_i |h_i|*|(Hz)_i|)^2 attained by perfect phase alignment."""
    h = np.asarray(h, dtype=complex)
    forward = np.asarray(H, dtype=complex) @ np.asarray(z, dtype=complex)
    return float(np.sum(np.abs(h) * np.abs(forward))) ** 2


def simulate_received(
    h: np.ndarray,
    codeword,
    H: np.ndarray,
    z: np.ndarray,
    noise_power: float,
    rng: np.random.Generator,
) -> complex:
    """One noisy received sample y = h^H W H z + n.

    `noise_power` is the linear-watt variance of the circularly-symmetric
    complex Gaussian noise (convert dBm with dbm_to_watts first).
    """
    if noise_power < 0:
        raise ValueError("noise_power must be >= 0")
    signal = received_signal(h, codeword, H, z)
    sigma = math.sqrt(noise_power / 2.0)
    noise = complex(rng.normal(0.0, sigma) + 1j * rng.normal(0.0, sigma)) if sigma > 0 else 0.0
    return signal + noise
