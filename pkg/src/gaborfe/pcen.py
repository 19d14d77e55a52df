"""Per-channel energy normalization (PCEN) with an exact analytic backward pass.

The forward map for one channel is

    out[n] = (E[n] / (M[n] + eps)**alpha + delta)**gamma - delta**gamma

where ``M`` is a first-order IIR smoothing of the energy ``E`` with
coefficient ``s`` and ``M[0] = E[0]``.  The backward pass differentiates the
loss with respect to all four per-channel parameters and the input energies,
accumulating the smoother's contribution in reverse time.

``delta = 0`` is accepted by the forward map (it is the exact-identity limit
used by test harnesses together with ``alpha = 0, gamma = 1``); training keeps
``delta`` strictly positive via range projection, and the backward pass
requires it.
"""

from dataclasses import dataclass

import numpy as np

from .filterbank import FeatureMap

__all__ = [
    "PcenParams",
    "SmootherState",
    "PcenGradients",
    "iir_smooth",
    "pcen_forward",
    "pcen_backward",
    "gain_curve",
]


def _per_channel(values, n_channels, name) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a scalar or 1-D vector")
    if arr.size == 1 and n_channels > 1:
        arr = np.full(n_channels, arr[0])
    if arr.size != n_channels:
        raise ValueError(f"{name} must have one entry per channel")
    return arr


@dataclass
class PcenParams:
    """Per-channel smoother coefficient, gain exponent, offset and root.

    Scalars broadcast to every channel.  ``delta == 0`` is permitted only as
    the identity-configuration limit; anything that differentiates through
    PCEN needs ``delta > 0``.
    """

    s: np.ndarray
    alpha: np.ndarray
    delta: np.ndarray
    gamma: np.ndarray
    epsilon: float = 1e-6

    def __post_init__(self):
        self.s = np.atleast_1d(np.asarray(self.s, dtype=float))
        n = self.s.size
        self.s = _per_channel(self.s, n, "s")
        self.alpha = _per_channel(self.alpha, n, "alpha")
        self.delta = _per_channel(self.delta, n, "delta")
        self.gamma = _per_channel(self.gamma, n, "gamma")
        if np.any(self.s <= 0.0) or np.any(self.s > 1.0):
            raise ValueError("s entries must lie in (0, 1]")
        if np.any(self.alpha < 0.0):
            raise ValueError("alpha entries must be nonnegative")
        if np.any(self.delta < 0.0):
            raise ValueError("delta entries must be nonnegative")
        if np.any(self.gamma <= 0.0):
            raise ValueError("gamma entries must be positive")
        if not self.epsilon > 0.0:
            raise ValueError("epsilon must be positive")
        self.epsilon = float(self.epsilon)

    @property
    def n_channels(self) -> int:
        return self.s.size

    def copy(self) -> "PcenParams":
        return PcenParams(
            self.s.copy(),
            self.alpha.copy(),
            self.delta.copy(),
            self.gamma.copy(),
            self.epsilon,
        )


@dataclass
class SmootherState:
    """Running per-channel smoothed energy for a sequential scan."""

    m: np.ndarray

    def step(self, frame: np.ndarray, s: np.ndarray) -> np.ndarray:
        """Advance by one frame: convex combination of frame and state."""
        self.m = s * frame + (1.0 - s) * self.m
        return self.m


@dataclass
class PcenGradients:
    """Loss gradients for the PCEN parameters and the input energies."""

    s: np.ndarray
    alpha: np.ndarray
    delta: np.ndarray
    gamma: np.ndarray
    energy: np.ndarray


def _check_energy(energy: FeatureMap, n_channels: int) -> np.ndarray:
    data = energy.data
    if data.shape[0] != n_channels:
        raise ValueError(
            f"channel mismatch: map has {data.shape[0]} channels, params have {n_channels}"
        )
    if data.shape[1] < 1:
        raise ValueError("energy map must contain at least one frame")
    if np.any(data < 0.0):
        raise ValueError("energy entries must be nonnegative")
    return data


def _smooth(data: np.ndarray, s: np.ndarray) -> np.ndarray:
    """First-order IIR smoother along frames, initialized at the first frame."""
    out = np.empty_like(data)
    state = SmootherState(data[:, 0].copy())
    out[:, 0] = state.m
    for n in range(1, data.shape[1]):
        out[:, n] = state.step(data[:, n], s)
    return out


def iir_smooth(energy: FeatureMap, s) -> FeatureMap:
    """Low-pass energies with per-channel coefficient ``s``; M[0] = E[0].

    Every output frame is a convex combination of current and past energies,
    so it stays within [min(E), max(E)] per channel; a constant input is a
    fixed point.
    """
    data = _check_energy(energy, energy.n_channels)
    s_arr = _per_channel(s, data.shape[0], "s")
    if np.any(s_arr <= 0.0) or np.any(s_arr > 1.0):
        raise ValueError("s entries must lie in (0, 1]")
    return FeatureMap(_smooth(data, s_arr), energy.sample_rate_hz, energy.hop)


def pcen_forward(energy: FeatureMap, params: PcenParams) -> FeatureMap:
    """Adaptively gain-normalize and root-compress an energy map.

    Output is zero wherever the input energy is zero and is monotonically
    increasing in the instantaneous energy.
    """
    data = _check_energy(energy, params.n_channels)
    m = _smooth(data, params.s)
    alpha = params.alpha[:, None]
    delta = params.delta[:, None]
    gamma = params.gamma[:, None]
    ratio = data / np.power(m + params.epsilon, alpha)
    out = np.power(ratio + delta, gamma) - np.power(delta, gamma)
    return FeatureMap(out, energy.sample_rate_hz, energy.hop)


def pcen_backward(energy: FeatureMap, params: PcenParams, upstream) -> PcenGradients:
    """Exact gradients of a scalar loss through :func:`pcen_forward`.

    ``upstream`` holds d(loss)/d(output) with the same shape as the map.  The
    smoother is differentiated by a reverse-time accumulation, including the
    initialization ``M[0] = E[0]``; parameter gradients are summed over
    frames per channel.  Requires ``delta > 0``.
    """
    data = _check_energy(energy, params.n_channels)
    g_out = upstream.data if isinstance(upstream, FeatureMap) else np.asarray(upstream, dtype=float)
    if g_out.shape != data.shape:
        raise ValueError(
            f"upstream gradient shape {g_out.shape} does not match energy shape {data.shape}"
        )
    if np.any(params.delta <= 0.0):
        raise ValueError("pcen_backward requires delta > 0 on every channel")

    s = params.s[:, None]
    alpha = params.alpha[:, None]
    delta = params.delta[:, None]
    gamma = params.gamma[:, None]
    eps = params.epsilon

    m = _smooth(data, params.s)
    m_eps = m + eps
    denom = np.power(m_eps, alpha)
    ratio = data / denom
    base = ratio + delta

    d_out_d_ratio = gamma * np.power(base, gamma - 1.0)
    g_ratio = g_out * d_out_d_ratio

    # parameter gradients that do not touch the smoother
    g_alpha = -(g_ratio * ratio * np.log(m_eps)).sum(axis=1)
    g_delta = (g_out * d_out_d_ratio).sum(axis=1) - g_out.sum(axis=1) * (
        params.gamma * np.power(params.delta, params.gamma - 1.0)
    )
    g_gamma = (
        g_out * (np.power(base, gamma) * np.log(base) - np.power(delta, gamma) * np.log(delta))
    ).sum(axis=1)

    # gradient reaching each M[n] directly through the ratio
    g_m_local = g_ratio * (-alpha * ratio / m_eps)

    # reverse-time accumulation: M[n] also feeds M[n+1] with weight (1 - s)
    n_frames = data.shape[1]
    g_m = np.empty_like(data)
    g_m[:, -1] = g_m_local[:, -1]
    one_minus_s = 1.0 - params.s
    for n in range(n_frames - 2, -1, -1):
        g_m[:, n] = g_m_local[:, n] + one_minus_s * g_m[:, n + 1]

    # energy gradients: direct path plus the smoother path
    g_energy = g_ratio / denom
    if n_frames > 1:
        g_energy[:, 1:] += s * g_m[:, 1:]
    g_energy[:, 0] += g_m[:, 0]  # M[0] = E[0]

    # smoother coefficient: dM[n]/ds at fixed M[n-1] is E[n] - M[n-1]
    if n_frames > 1:
        g_s = (g_m[:, 1:] * (data[:, 1:] - m[:, :-1])).sum(axis=1)
    else:
        g_s = np.zeros(params.n_channels)

    return PcenGradients(g_s, g_alpha, g_delta, g_gamma, g_energy)


def gain_curve(params: PcenParams, channel: int, input_grid):
    """Steady-state output/input gain of one channel over an energy grid.

    At steady state a constant energy ``E`` gives ``M = E``, so the gain is
    ``((E / (E + eps)**alpha + delta)**gamma - delta**gamma) / E``.  Returns
    ``(energy, gain, gain_db)`` arrays; the grid must be strictly positive.
    Because the gain scales energy (power) values, ``gain_db`` uses the
    power convention ``10 * log10(gain)``.
    """
    if not 0 <= channel < params.n_channels:
        raise ValueError(f"channel {channel} out of range for {params.n_channels} channels")
    grid = np.atleast_1d(np.asarray(input_grid, dtype=float))
    if grid.size == 0 or np.any(grid <= 0.0):
        raise ValueError("input_grid entries must be strictly positive")
    alpha = params.alpha[channel]
    delta = params.delta[channel]
    gamma = params.gamma[channel]
    ratio = grid / np.power(grid + params.epsilon, alpha)
    out = np.power(ratio + delta, gamma) - np.power(delta, gamma)
    gain = out / grid
    return grid, gain, 10.0 * np.log10(gain)
