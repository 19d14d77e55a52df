"""Parametric Gabor filterbank with sample-wise energy and Gaussian low-pass pooling.

This module holds the convolutional half of the front-end: complex Gabor
kernels parameterized by centre frequency and bandwidth, the squared-magnitude
energy of their output, and a learnable per-channel Gaussian pooling stage
that smooths and decimates the energy down to frame rate.

All frequencies are normalized to cycles per sample unless a name says ``hz``.
Feature maps are ``(channels, frames)`` arrays of nonnegative float64 values.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GaborBankParams",
    "GaussianPoolParams",
    "FeatureMap",
    "hz_to_mel",
    "mel_to_hz",
    "mel_init_bank",
    "gabor_kernel",
    "bank_kernels",
    "bank_kernel_grads",
    "filterbank_apply",
    "filterbank_energy",
    "gaussian_pool",
    "pool_kernels",
    "pool_kernel_sigma_grads",
]

# Half-magnitude width of a Gaussian: |H(f)| drops to 1/2 at fwhm/2 when the
# time-domain envelope has standard deviation sqrt(2 ln 2) / (pi * fwhm).
_FWHM_TO_SIGMA = np.sqrt(2.0 * np.log(2.0)) / np.pi


def hz_to_mel(f_hz):
    """Map frequency in Hz to the mel scale."""
    return 2595.0 * np.log10(1.0 + np.asarray(f_hz, dtype=float) / 700.0)


def mel_to_hz(mel):
    """Inverse of :func:`hz_to_mel`."""
    return 700.0 * (10.0 ** (np.asarray(mel, dtype=float) / 2595.0) - 1.0)


# ---------------------------------------------------------------------------
# parameter containers
# ---------------------------------------------------------------------------


@dataclass
class GaborBankParams:
    """Centre frequency and bandwidth of each analysis filter.

    Both ``centre_freq`` and ``fwhm`` are per-channel vectors in cycles per
    sample, constrained to (0, 0.5).  ``fwhm`` is the full width at half
    maximum of the filter's Gaussian magnitude response; the corresponding
    time-domain envelope width is ``sqrt(2 ln 2) / (pi * fwhm)`` samples.
    """

    centre_freq: np.ndarray
    fwhm: np.ndarray
    kernel_len: int = 401

    def __post_init__(self):
        self.centre_freq = np.atleast_1d(np.asarray(self.centre_freq, dtype=float))
        self.fwhm = np.atleast_1d(np.asarray(self.fwhm, dtype=float))
        if self.centre_freq.ndim != 1 or self.fwhm.ndim != 1:
            raise ValueError("centre_freq and fwhm must be 1-D vectors")
        if self.centre_freq.shape != self.fwhm.shape:
            raise ValueError("centre_freq and fwhm must have the same length")
        if self.centre_freq.size < 1:
            raise ValueError("filterbank needs at least one channel")
        if int(self.kernel_len) != self.kernel_len or self.kernel_len < 1:
            raise ValueError("kernel_len must be a positive integer")
        self.kernel_len = int(self.kernel_len)
        if self.kernel_len % 2 == 0:
            raise ValueError("kernel_len must be odd so kernels centre on t=0")
        if np.any(self.centre_freq <= 0.0) or np.any(self.centre_freq >= 0.5):
            raise ValueError("centre_freq entries must lie in (0, 0.5) cycles/sample")
        if np.any(self.fwhm <= 0.0) or np.any(self.fwhm >= 0.5):
            raise ValueError("fwhm entries must lie in (0, 0.5) cycles/sample")

    @property
    def n_channels(self) -> int:
        return self.centre_freq.size

    def copy(self) -> "GaborBankParams":
        return GaborBankParams(
            self.centre_freq.copy(), self.fwhm.copy(), self.kernel_len
        )


@dataclass
class GaussianPoolParams:
    """Per-channel Gaussian low-pass pooling with a fixed decimation stride.

    ``sigma`` is dimensionless: the kernel over tap index ``u`` is
    ``exp(-0.5 * ((u - c) / (sigma * c))**2)`` with ``c = (kernel_len - 1)/2``,
    normalized to unit sum so constants pass through unchanged.
    """

    sigma: np.ndarray
    kernel_len: int = 401
    stride: int = 160

    def __post_init__(self):
        self.sigma = np.atleast_1d(np.asarray(self.sigma, dtype=float))
        if self.sigma.ndim != 1 or self.sigma.size < 1:
            raise ValueError("sigma must be a 1-D vector with at least one entry")
        if np.any(self.sigma <= 0.0) or np.any(self.sigma > 1.0):
            raise ValueError("sigma entries must lie in (0, 1]")
        if int(self.kernel_len) != self.kernel_len or self.kernel_len < 3:
            raise ValueError("kernel_len must be an integer >= 3")
        self.kernel_len = int(self.kernel_len)
        if self.kernel_len % 2 == 0:
            raise ValueError("kernel_len must be odd so kernels centre on u=c")
        if int(self.stride) != self.stride or self.stride < 1:
            raise ValueError("stride must be a positive integer")
        self.stride = int(self.stride)

    @property
    def n_channels(self) -> int:
        return self.sigma.size

    def copy(self) -> "GaussianPoolParams":
        return GaussianPoolParams(self.sigma.copy(), self.kernel_len, self.stride)


@dataclass
class FeatureMap:
    """A ``(channels, frames)`` array of energies plus its time base.

    ``hop`` is the number of input samples between successive frames, so a
    map at the filterbank output has ``hop=1`` and a pooled map inherits the
    pooling stride.
    """

    data: np.ndarray
    sample_rate_hz: float = 16000.0
    hop: int = 1

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim != 2:
            raise ValueError("feature map data must be 2-D (channels, frames)")
        if self.sample_rate_hz <= 0.0:
            raise ValueError("sample_rate_hz must be positive")
        if int(self.hop) != self.hop or self.hop < 1:
            raise ValueError("hop must be a positive integer")
        self.hop = int(self.hop)

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_frames(self) -> int:
        return self.data.shape[1]

    @property
    def frame_rate_hz(self) -> float:
        return self.sample_rate_hz / self.hop

    def copy(self) -> "FeatureMap":
        return FeatureMap(self.data.copy(), self.sample_rate_hz, self.hop)


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------


def mel_init_bank(n_channels, sample_rate, kernel_len=401) -> GaborBankParams:
    """Build a bank whose centres are equally spaced on the mel scale.

    The centres are the ``n_channels`` interior points of ``n_channels + 2``
    equally spaced mel points covering [0, sample_rate / 2].  Each channel's
    bandwidth is half the spacing between its two neighbouring points (the
    boundary points included), i.e. ``fwhm[i] = (f[i+1] - f[i-1]) / 2``.
    """
    if int(n_channels) != n_channels or n_channels < 1:
        raise ValueError("n_channels must be a positive integer")
    n_channels = int(n_channels)
    if sample_rate <= 0.0:
        raise ValueError("sample_rate must be positive")
    grid_mel = np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_channels + 2)
    grid = mel_to_hz(grid_mel) / sample_rate  # normalized, grid[0] = 0
    centre = grid[1:-1]
    fwhm = (grid[2:] - grid[:-2]) / 2.0
    return GaborBankParams(centre, fwhm, kernel_len)


# ---------------------------------------------------------------------------
# Gabor kernels
# ---------------------------------------------------------------------------


def _time_grid(kernel_len: int) -> np.ndarray:
    """Tap times centred on zero: -(L-1)/2 ... (L-1)/2."""
    return np.arange(kernel_len, dtype=float) - (kernel_len - 1) // 2


def _sigma_t(fwhm):
    """Time-domain envelope width (samples) for a frequency-domain FWHM."""
    return _FWHM_TO_SIGMA / fwhm


def bank_kernels(bank: GaborBankParams):
    """Real and imaginary tap matrices of every channel, shape (channels, L).

    Each kernel is a unit-area Gaussian envelope modulating a complex
    exponential at the channel's centre frequency; its magnitude spectrum is
    (up to truncation) a Gaussian of height ~1 centred on ``centre_freq``
    whose full width at half maximum is ``fwhm``.
    """
    t = _time_grid(bank.kernel_len)
    sig = _sigma_t(bank.fwhm)[:, None]
    env = np.exp(-0.5 * (t / sig) ** 2) / (np.sqrt(2.0 * np.pi) * sig)
    phase = 2.0 * np.pi * bank.centre_freq[:, None] * t
    return env * np.cos(phase), env * np.sin(phase)


def gabor_kernel(centre_freq, fwhm, kernel_len=401) -> np.ndarray:
    """Complex taps of a single Gabor filter, length ``kernel_len``.

    The centre tap (t=0) has zero phase and magnitude
    ``1 / (sqrt(2 pi) * sigma_t)`` with ``sigma_t = sqrt(2 ln 2)/(pi * fwhm)``.
    """
    bank = GaborBankParams(
        np.array([float(centre_freq)]), np.array([float(fwhm)]), kernel_len
    )
    cos_taps, sin_taps = bank_kernels(bank)
    return cos_taps[0] + 1j * sin_taps[0]


def bank_kernel_grads(bank: GaborBankParams):
    """Derivatives of the tap matrices w.r.t. each channel's parameters.

    Returns ``(dcos_dfreq, dsin_dfreq, dcos_dfwhm, dsin_dfwhm)``, each of
    shape (channels, kernel_len).  Used by the analytic backward pass.
    """
    t = _time_grid(bank.kernel_len)
    sig = _sigma_t(bank.fwhm)[:, None]
    env = np.exp(-0.5 * (t / sig) ** 2) / (np.sqrt(2.0 * np.pi) * sig)
    phase = 2.0 * np.pi * bank.centre_freq[:, None] * t
    cos_p, sin_p = np.cos(phase), np.sin(phase)
    # d(envelope)/d(sigma_t), then chain through d(sigma_t)/d(fwhm) = -sigma_t/fwhm
    denv_dsig = env * (t**2 / sig**3 - 1.0 / sig)
    dsig_dfwhm = -sig / bank.fwhm[:, None]
    denv_dfwhm = denv_dsig * dsig_dfwhm
    two_pi_t = 2.0 * np.pi * t
    dcos_dfreq = -env * two_pi_t * sin_p
    dsin_dfreq = env * two_pi_t * cos_p
    return dcos_dfreq, dsin_dfreq, denv_dfwhm * cos_p, denv_dfwhm * sin_p


# ---------------------------------------------------------------------------
# forward operators
# ---------------------------------------------------------------------------


def _same_frames(signal: np.ndarray, kernel_len: int) -> np.ndarray:
    """(T, L) sliding windows of the zero-padded signal for "same" output.

    Materialized contiguously: matrix products against overlapping strided
    views fall off the fast BLAS path by more than an order of magnitude.
    """
    half = (kernel_len - 1) // 2
    padded = np.zeros(signal.size + 2 * half, dtype=float)
    padded[half : half + signal.size] = signal
    return np.ascontiguousarray(
        np.lib.stride_tricks.sliding_window_view(padded, kernel_len)
    )


def _check_signal(signal) -> np.ndarray:
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise ValueError("signal must be a 1-D array of samples")
    if x.size == 0:
        raise ValueError("signal must contain at least one sample")
    if not np.all(np.isfinite(x)):
        raise ValueError("signal contains non-finite samples")
    return x


def filterbank_apply(signal, bank: GaborBankParams):
    """Real and imaginary filter outputs, each (channels, len(signal)).

    Implements "same" zero-padded direct convolution with each channel's
    complex kernel, evaluated as one matrix product over sliding windows.
    """
    x = _check_signal(signal)
    frames = _same_frames(x, bank.kernel_len)
    cos_taps, sin_taps = bank_kernels(bank)
    # convolution = correlation with the reversed kernel
    stacked = np.concatenate([cos_taps[:, ::-1], sin_taps[:, ::-1]], axis=0)
    out = frames @ stacked.T  # (T, 2C)
    n = bank.n_channels
    return np.ascontiguousarray(out[:, :n].T), np.ascontiguousarray(out[:, n:].T)


def filterbank_energy(signal, bank: GaborBankParams, sample_rate_hz=16000.0) -> FeatureMap:
    """Sample-wise squared magnitude of each channel's filter output.

    The result has one frame per input sample (``hop=1``); energies are the
    sum of squared real and imaginary responses, so they are nonnegative and
    scale quadratically with signal amplitude.
    """
    out_cos, out_sin = filterbank_apply(signal, bank)
    return FeatureMap(out_cos**2 + out_sin**2, sample_rate_hz, hop=1)


def pool_kernels(pool: GaussianPoolParams) -> np.ndarray:
    """Unit-sum Gaussian pooling kernels, shape (channels, kernel_len)."""
    u = np.arange(pool.kernel_len, dtype=float)
    centre = (pool.kernel_len - 1) / 2.0
    widths = pool.sigma[:, None] * centre
    g = np.exp(-0.5 * ((u - centre) / widths) ** 2)
    return g / g.sum(axis=1, keepdims=True)


def pool_kernel_sigma_grads(pool: GaussianPoolParams) -> np.ndarray:
    """d(normalized kernel)/d(sigma) per channel, shape (channels, kernel_len)."""
    u = np.arange(pool.kernel_len, dtype=float)
    centre = (pool.kernel_len - 1) / 2.0
    sig = pool.sigma[:, None]
    g = np.exp(-0.5 * ((u - centre) / (sig * centre)) ** 2)
    total = g.sum(axis=1, keepdims=True)
    w = g / total
    dg = g * ((u - centre) ** 2 / (sig**3 * centre**2))
    return (dg - w * dg.sum(axis=1, keepdims=True)) / total


def _pooling_windows(energy_data: np.ndarray, pool: GaussianPoolParams):
    """Strided (channels, frames, kernel_len) windows over padded energy."""
    half = (pool.kernel_len - 1) // 2
    padded = np.pad(energy_data, ((0, 0), (half, half)))
    windows = np.lib.stride_tricks.sliding_window_view(padded, pool.kernel_len, axis=1)
    return windows[:, :: pool.stride, :]


def gaussian_pool(energy: FeatureMap, pool: GaussianPoolParams) -> FeatureMap:
    """Smooth sample-rate energies and decimate to frame rate.

    Applies each channel's unit-sum Gaussian kernel by "same" zero-padded
    convolution and keeps every ``stride``-th sample, yielding
    ``ceil(n_frames / stride)`` output frames.  A constant input maps to the
    same constant away from the boundaries.
    """
    if energy.hop != 1:
        raise ValueError("gaussian_pool expects a sample-rate map (hop == 1)")
    if energy.n_channels != pool.n_channels:
        raise ValueError(
            f"channel mismatch: energy has {energy.n_channels}, pool has {pool.n_channels}"
        )
    windows = _pooling_windows(energy.data, pool)
    pooled = np.einsum("cfl,cl->cf", windows, pool_kernels(pool))
    return FeatureMap(pooled, energy.sample_rate_hz, hop=pool.stride)
