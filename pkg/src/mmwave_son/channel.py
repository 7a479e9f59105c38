"""Link budget pieces: path loss, channel gains, SINR, capacity.

Two path-loss laws cover the two link classes. The desired link from a
station to its own user is free-space,

    L_los(d) = 20 log10(4 pi d f / c)   [dB]

and every interfering link uses a log-distance NLOS fit with frozen
lognormal shadowing,

    L_nlos(d) = beta1 + 10 beta2 log10(d) + zeta * X   [dB],  X ~ N(0, 1).

Distances below one meter clamp to one meter in both laws. Channel gain is
H = 10^(-L/10) (antenna gain is unity throughout), SINR is formed in linear
milliwatt units, and capacity is log2(1 + SINR) per unit bandwidth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
MIN_DISTANCE_M = 1.0


@dataclass(frozen=True)
class ChannelParams:
    carrier_freq_hz: float = 28e9
    beta1_db: float = 72.0
    beta2: float = 2.92
    zeta_db: float = 8.7
    noise_dbm: float = -120.0
    p_min_dbm: float = -10.0
    p_max_dbm: float = 35.0

    def validate(self):
        if self.carrier_freq_hz <= 0:
            raise ValueError("carrier_freq_hz must be positive")
        if self.zeta_db < 0:
            raise ValueError("zeta_db must be >= 0")
        if self.p_min_dbm > self.p_max_dbm:
            raise ValueError("p_min_dbm must not exceed p_max_dbm")
        return self


def dbm_to_mw(p_dbm):
    return 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0)


def mw_to_dbm(p_mw):
    return 10.0 * np.log10(np.asarray(p_mw, dtype=float))


def pathloss_friis_db(d_m, freq_hz):
    """Free-space loss in dB; distances clamp at 1 m."""
    d = np.maximum(np.asarray(d_m, dtype=float), MIN_DISTANCE_M)
    return 20.0 * np.log10(4.0 * np.pi * d * freq_hz / SPEED_OF_LIGHT)


def pathloss_nlos_db(d_m, params, shadow_std_normal=0.0):
    """Log-distance NLOS loss in dB with shadowing scaled from unit draws."""
    d = np.maximum(np.asarray(d_m, dtype=float), MIN_DISTANCE_M)
    shadow = np.asarray(shadow_std_normal, dtype=float)
    return params.beta1_db + 10.0 * params.beta2 * np.log10(d) + params.zeta_db * shadow


@dataclass(frozen=True)
class GainMatrix:
    """Linear channel gains, entry [i, k] from station i to user k."""

    h: np.ndarray

    def __post_init__(self):
        h = self.h
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("gain matrix must be square")
        if h.size and not (h > 0).all():
            raise ValueError("gains must all be positive")
        h.flags.writeable = False

    @property
    def n(self):
        return self.h.shape[0]

    def submatrix(self, ids):
        """Gains restricted to the given station ids (order preserved)."""
        idx = np.asarray(ids, dtype=int)
        return self.h[np.ix_(idx, idx)]


def build_gain_matrix(layout, params):
    """Gains for every (station, user) pair of a layout.

    Diagonal entries take the free-space law at the serving distance;
    off-diagonal entries take the NLOS law with the layout's frozen
    shadowing draw for that link.
    """
    params.validate()
    n = layout.n_stations
    if n == 0:
        return GainMatrix(np.zeros((0, 0)))
    bs = layout.bs_positions()
    ue = layout.ue_positions()
    # d[i, k]: station i to user k
    d = np.hypot(bs[:, 0, None] - ue[None, :, 0], bs[:, 1, None] - ue[None, :, 1])
    loss = pathloss_nlos_db(d, params, layout.shadowing)
    serving = pathloss_friis_db(np.diagonal(d), params.carrier_freq_hz)
    np.fill_diagonal(loss, serving)
    return GainMatrix(10.0 ** (-loss / 10.0))


@dataclass(frozen=True)
class PowerVector:
    """Per-station transmit powers in dBm, checked against channel bounds."""

    p_dbm: np.ndarray

    @classmethod
    def checked(cls, p_dbm, params):
        p = np.asarray(p_dbm, dtype=float)
        if p.size and (p.min() < params.p_min_dbm or p.max() > params.p_max_dbm):
            raise ValueError(
                "power outside [%g, %g] dBm" % (params.p_min_dbm, params.p_max_dbm)
            )
        return cls(p)

    def mw(self):
        return dbm_to_mw(self.p_dbm)


def sinr(k, powers_dbm, gains, interferers, noise_dbm):
    """Linear SINR at user k.

    powers_dbm: per-station transmit powers (indexable by station id).
    interferers: iterable of station ids whose signal lands at user k as
        interference; k itself must not appear.
    """
    ids = list(interferers)
    if k in ids:
        raise ValueError("station %d cannot interfere with its own user" % k)
    p_mw = dbm_to_mw(np.asarray(powers_dbm, dtype=float))
    h = gains.h if isinstance(gains, GainMatrix) else gains
    desired = p_mw[k] * h[k, k]
    interference = float(np.sum([p_mw[i] * h[i, k] for i in ids])) if ids else 0.0
    return float(desired / (interference + dbm_to_mw(noise_dbm)))


def sinr_all(powers_dbm, h, noise_mw):
    """Linear SINR for every user at once; all stations interfere mutually.

    h may be a submatrix covering just one cluster; powers align with its
    rows. Used in training loops where the interferer set is fixed.
    """
    p_mw = dbm_to_mw(powers_dbm)
    received = p_mw @ h  # per-user total received power
    desired = p_mw * np.diagonal(h)
    return desired / (received - desired + noise_mw)


def capacity(sinr_linear):
    """Shannon capacity per unit bandwidth, log2(1 + SINR)."""
    return np.log2(1.0 + np.asarray(sinr_linear, dtype=float))
