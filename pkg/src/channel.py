"""
Sparse beamspace mmWave channel model.

Users are dropped uniformly over an annulus around the BS, receive a
log-distance pathloss with log-normal shadowing, and reach the uniform
linear array over L on-grid paths. With on-grid angles the steering matrix
is the unitary DFT matrix, so each user's channel is an L-sparse column of
the beamspace matrix H̃_b = G̃·D^{1/2}. The analog combiner keeps the N_RF
strongest beamspace rows, giving the effective N_RF×N_u channel H_b.

All randomness comes from an explicit ``numpy.random.Generator`` owned by
the caller, so two runs with the same seed produce identical channels.

Example:
    >>> import numpy as np
    >>> from src.config import SystemConfig
    >>> from src.channel import realize_channel
    >>> cfg = SystemConfig(n_r=64, n_rf=32, n_u=4, n_paths=8)
    >>> channel = realize_channel(cfg, np.random.default_rng(0))
    >>> channel.h_b.shape
    (32, 4)
"""

import dataclasses
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import SystemConfig
from .errors import InvalidParameterError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UserGeometry:
    """
    Distances and large-scale gains of one user drop.

    Attributes:
        distances_m: Per-user BS distance d_k in meters.
        gamma: Per-user large-scale gain γ_k (linear, noise-normalized).
    """

    distances_m: np.ndarray
    gamma: np.ndarray


@dataclass(frozen=True)
class BeamspaceChannel:
    """
    Beamspace channel of one coherence block.

    Attributes:
        sparse_gains: N_r×N_u matrix G̃ with exactly L nonzero entries per column.
        gamma: Per-user large-scale gains γ_k.
        selected_rows: Indices of the beamspace rows kept by the analog combiner
            (ascending), or None before path selection.
        h_b: Effective N_RF×N_u channel (selected rows of G̃·D^{1/2}), or None
            before path selection.
    """

    sparse_gains: np.ndarray
    gamma: np.ndarray
    selected_rows: Optional[np.ndarray] = None
    h_b: Optional[np.ndarray] = None

    @property
    def beamspace(self) -> np.ndarray:
        """Full beamspace matrix H̃_b = G̃·D^{1/2} (N_r×N_u)."""
        return self.sparse_gains * np.sqrt(self.gamma)[np.newaxis, :]

    @property
    def selected_gains(self) -> np.ndarray:
        """Small-scale part G of H_b = G·D^{1/2} (N_RF×N_u)."""
        if self.selected_rows is None:
            raise InvalidParameterError("paths have not been selected yet; call select_rf_paths first")
        return self.sparse_gains[self.selected_rows, :]


def steering_matrix(n_r: int) -> np.ndarray:
    """
    Unitary DFT matrix of on-grid ULA steering vectors.

    Entry (n, i) is exp(-j·2π·n·i/N_r)/√N_r for zero-based n, i.

    Args:
        n_r: Number of antennas (>= 1).

    Returns:
        Complex N_r×N_r matrix A with A^H·A = I.

    Raises:
        InvalidParameterError: If n_r < 1.
    """
    if n_r < 1:
        raise InvalidParameterError(f"n_r must be at least 1, got {n_r}")

    n = np.arange(n_r)
    return np.exp(-2j * np.pi * np.outer(n, n) / n_r) / np.sqrt(n_r)


def pathloss_db(d_m: float, shadowing_db: float, cfg: SystemConfig) -> float:
    """Pathloss α_pl + β_pl·10·log10(d) + shadowing in dB."""
    return cfg.alpha_pl + cfg.beta_pl * 10.0 * np.log10(d_m) + shadowing_db


def large_scale_gain(d_m: float, shadowing_db: float, cfg: SystemConfig) -> float:
    """
    Noise-normalized large-scale gain γ_k.

    γ_dB = -(PL_dB + P_noise_dBm) with PL_dB = α_pl + β_pl·10·log10(d) + shadowing
    and P_noise_dBm = -174 + 10·log10(W) + n_f.

    Args:
        d_m: BS-user distance in meters (> 0).
        shadowing_db: Shadowing realization in dB.
        cfg: System configuration (pathloss and noise parameters).

    Returns:
        γ_k in linear scale.

    Raises:
        InvalidParameterError: If d_m <= 0.

    Example:
        >>> cfg = SystemConfig()
        >>> 10 * np.log10(large_scale_gain(100.0, 0.0, cfg))
        -51.4
    """
    if d_m <= 0:
        raise InvalidParameterError(f"distance must be positive, got {d_m}")

    gamma_db = -(pathloss_db(d_m, shadowing_db, cfg) + cfg.noise_power_dbm)
    return float(10.0 ** (gamma_db / 10.0))


def drop_users(cfg: SystemConfig, rng: np.random.Generator) -> UserGeometry:
    """
    Drop N_u users uniformly (in area) over the annulus [min_distance_m, cell_radius_m].

    The squared distance is uniform on [r_min², r_max²]; each user gets an
    independent Gaussian shadowing draw with standard deviation sigma_sh_db.

    Args:
        cfg: System configuration.
        rng: Caller-owned random generator.

    Returns:
        Distances and large-scale gains of the drop.
    """
    r_min2 = cfg.min_distance_m**2
    r_max2 = cfg.cell_radius_m**2
    distances = np.sqrt(r_min2 + rng.uniform(size=cfg.n_u) * (r_max2 - r_min2))
    distances = np.clip(distances, cfg.min_distance_m, cfg.cell_radius_m)
    shadowing = rng.normal(0.0, cfg.sigma_sh_db, size=cfg.n_u)

    gamma = np.array([large_scale_gain(d, s, cfg) for d, s in zip(distances, shadowing)])
    return UserGeometry(distances_m=distances, gamma=gamma)


def generate_beamspace_channel(
    cfg: SystemConfig,
    geometry: UserGeometry,
    rng: np.random.Generator,
) -> BeamspaceChannel:
    """
    Draw the sparse beamspace channel of one coherence block.

    For each user, L distinct beamspace rows are drawn without replacement and
    filled with i.i.d. CN(0, 1) path gains. Supports of different users are
    independent and may share rows.

    Args:
        cfg: System configuration (N_r, N_u, L).
        geometry: User drop supplying γ_k.
        rng: Caller-owned random generator.

    Returns:
        Channel with sparse_gains and gamma filled; no paths selected yet.

    Raises:
        InvalidParameterError: If L > N_r or the geometry has the wrong size.
    """
    if cfg.n_paths > cfg.n_r:
        raise InvalidParameterError(f"n_paths ({cfg.n_paths}) cannot exceed n_r ({cfg.n_r})")
    if geometry.gamma.shape != (cfg.n_u,):
        raise InvalidParameterError(f"geometry holds {geometry.gamma.shape} gains for {cfg.n_u} users")

    gains = np.zeros((cfg.n_r, cfg.n_u), dtype=complex)
    for k in range(cfg.n_u):
        rows = rng.choice(cfg.n_r, size=cfg.n_paths, replace=False)
        path_gains = (rng.standard_normal(cfg.n_paths) + 1j * rng.standard_normal(cfg.n_paths)) / np.sqrt(2.0)
        gains[rows, k] = path_gains

    return BeamspaceChannel(sparse_gains=gains, gamma=np.asarray(geometry.gamma, dtype=float))


def select_rf_paths(channel: BeamspaceChannel, n_rf: int) -> BeamspaceChannel:
    """
    Keep the N_RF strongest beamspace rows as the analog combiner A_RF.

    Rows are ranked by squared norm of H̃_b, ties going to the lower index.
    Zero rows are only picked when fewer than N_RF nonzero rows exist. The
    selected indices are stored in ascending order, i.e. A_RF keeps the
    column order of A.

    Args:
        channel: Channel from generate_beamspace_channel.
        n_rf: Number of RF chains.

    Returns:
        A copy of the channel with selected_rows and h_b filled.

    Raises:
        InvalidParameterError: If n_rf is not in [1, N_r].
    """
    n_r = channel.sparse_gains.shape[0]
    if not 1 <= n_rf <= n_r:
        raise InvalidParameterError(f"n_rf must be in [1, {n_r}], got {n_rf}")

    beamspace = channel.beamspace
    row_energy = np.sum(np.abs(beamspace) ** 2, axis=1)
    # stable sort of -energy: equal energies keep ascending index order
    ranked = np.argsort(-row_energy, kind="stable")
    selected = np.sort(ranked[:n_rf])

    captured = float(np.sum(row_energy[selected]))
    total = float(np.sum(row_energy))
    logger.debug(f"Selected {n_rf} of {n_r} beamspace rows, captured energy {captured:.4g} of {total:.4g}")

    return dataclasses.replace(channel, selected_rows=selected, h_b=beamspace[selected, :])


def realize_channel(cfg: SystemConfig, rng: np.random.Generator) -> BeamspaceChannel:
    """Drop users, draw the beamspace channel and select the RF paths (one coherence block)."""
    geometry = drop_users(cfg, rng)
    channel = generate_beamspace_channel(cfg, geometry, rng)
    return select_rf_paths(channel, cfg.n_rf)


def antenna_channel(channel: BeamspaceChannel) -> np.ndarray:
    """Antenna-domain channel H = A·H̃_b (N_r×N_u)."""
    n_r = channel.sparse_gains.shape[0]
    return steering_matrix(n_r) @ channel.beamspace


def received_signal(
    channel: BeamspaceChannel,
    p_u: float,
    rng: np.random.Generator,
    n_samples: int = 1,
) -> np.ndarray:
    """
    Draw analog-combined received samples y = √p_u·H_b·s + n.

    Symbols s and noise n are i.i.d. CN(0, 1).

    Args:
        channel: Channel with selected paths.
        p_u: Linear transmit power.
        rng: Caller-owned random generator.
        n_samples: Number of independent symbol vectors.

    Returns:
        Complex array of shape (N_RF, n_samples).
    """
    h_b = channel.h_b
    if h_b is None:
        raise InvalidParameterError("paths have not been selected yet; call select_rf_paths first")

    n_rf, n_u = h_b.shape
    symbols = (rng.standard_normal((n_u, n_samples)) + 1j * rng.standard_normal((n_u, n_samples))) / np.sqrt(2.0)
    noise = (rng.standard_normal((n_rf, n_samples)) + 1j * rng.standard_normal((n_rf, n_samples))) / np.sqrt(2.0)
    return np.sqrt(p_u) * (h_b @ symbols) + noise
