"""The complete front-end pipeline: filterbank -> energy -> pooling -> PCEN.

Composes the convolutional stages with per-channel energy normalization and
provides the analytic backward pass that turns an upstream feature gradient
into gradients for every learnable front-end parameter, honouring the
pipeline's train mask.  Also holds the loudness convention used to place
waveforms on a physically meaningful energy scale before feature extraction.
"""

from dataclasses import dataclass, field

import numpy as np

from .filterbank import (
    FeatureMap,
    GaborBankParams,
    GaussianPoolParams,
    _check_signal,
    _pooling_windows,
    _same_frames,
    bank_kernel_grads,
    bank_kernels,
    gaussian_pool,
    mel_init_bank,
    pool_kernel_sigma_grads,
    pool_kernels,
)
from .pcen import PcenParams, pcen_backward, pcen_forward

__all__ = [
    "TrainMask",
    "FrontendParams",
    "LoudnessSpec",
    "GradientBundle",
    "FrontendCache",
    "default_frontend",
    "rescale_loudness",
    "extract_features",
    "forward_with_cache",
    "backward_from_cache",
    "frontend_backward",
]


@dataclass(frozen=True)
class TrainMask:
    """Which stages receive gradient updates."""

    filters: bool = True
    pooling: bool = True
    pcen: bool = True


@dataclass
class FrontendParams:
    """Every learnable parameter of the front-end plus its train mask."""

    bank: GaborBankParams
    pool: GaussianPoolParams
    pcen: PcenParams
    train_mask: TrainMask = field(default_factory=TrainMask)
    sample_rate_hz: float = 16000.0

    def __post_init__(self):
        n = self.bank.n_channels
        if self.pool.n_channels != n or self.pcen.n_channels != n:
            raise ValueError(
                "bank, pool and pcen must agree on the number of channels "
                f"(got {n}, {self.pool.n_channels}, {self.pcen.n_channels})"
            )
        if self.sample_rate_hz <= 0.0:
            raise ValueError("sample_rate_hz must be positive")

    @property
    def n_channels(self) -> int:
        return self.bank.n_channels

    def copy(self) -> "FrontendParams":
        return FrontendParams(
            self.bank.copy(),
            self.pool.copy(),
            self.pcen.copy(),
            self.train_mask,
            self.sample_rate_hz,
        )


@dataclass
class LoudnessSpec:
    """Uniform dB loudness target relative to a reference amplitude.

    The defaults place utterances between 15 and 30 dB over a 2e-5 reference,
    the convention this front-end's PCEN initialization is tuned for.
    """

    low_db: float = 15.0
    high_db: float = 30.0
    reference: float = 2e-5

    def __post_init__(self):
        if self.low_db > self.high_db:
            raise ValueError("low_db must not exceed high_db")
        if not self.reference > 0.0:
            raise ValueError("reference amplitude must be positive")


@dataclass
class GradientBundle:
    """Per-parameter loss gradients for one forward/backward pass."""

    centre_freq: np.ndarray
    fwhm: np.ndarray
    pool_sigma: np.ndarray
    pcen_s: np.ndarray
    pcen_alpha: np.ndarray
    pcen_delta: np.ndarray
    pcen_gamma: np.ndarray

    def to_dict(self) -> dict:
        return {
            "centre_freq": self.centre_freq,
            "fwhm": self.fwhm,
            "pool_sigma": self.pool_sigma,
            "pcen_s": self.pcen_s,
            "pcen_alpha": self.pcen_alpha,
            "pcen_delta": self.pcen_delta,
            "pcen_gamma": self.pcen_gamma,
        }


@dataclass
class FrontendCache:
    """Intermediates of one forward pass, reused by the backward pass."""

    signal: np.ndarray
    frames: np.ndarray  # (len(signal), kernel_len) sliding windows
    out_cos: np.ndarray
    out_sin: np.ndarray
    energy: FeatureMap
    pooled: FeatureMap
    features: FeatureMap


def default_frontend(n_channels=40, sample_rate=16000.0) -> FrontendParams:
    """Standard initialization: mel-spaced Gabor bank, 0.4-sigma pooling at
    stride 160, and PCEN at (s=0.04, alpha=0.96, delta=2, gamma=2)."""
    bank = mel_init_bank(n_channels, sample_rate, kernel_len=401)
    pool = GaussianPoolParams(
        np.full(bank.n_channels, 0.4), kernel_len=401, stride=160
    )
    pcen = PcenParams(
        s=np.full(bank.n_channels, 0.04),
        alpha=np.full(bank.n_channels, 0.96),
        delta=np.full(bank.n_channels, 2.0),
        gamma=np.full(bank.n_channels, 2.0),
        epsilon=1e-6,
    )
    return FrontendParams(bank, pool, pcen, TrainMask(), float(sample_rate))


def rescale_loudness(signal, spec: LoudnessSpec, rng: np.random.Generator) -> np.ndarray:
    """Scale a waveform to a uniformly drawn dB loudness target.

    Draws one target in [low_db, high_db] and scales the signal so its RMS is
    ``reference * 10**(target / 20)``.  Raises on an all-zero signal.
    """
    x = np.asarray(signal, dtype=float)
    rms = np.sqrt(np.mean(x**2))
    if rms == 0.0:
        raise ValueError("cannot rescale an all-zero signal")
    target_db = rng.uniform(spec.low_db, spec.high_db)
    return x * (spec.reference * 10.0 ** (target_db / 20.0) / rms)


def extract_features(signal, params: FrontendParams) -> FeatureMap:
    """Run the full pipeline; output has ceil(len(signal)/stride) frames."""
    return forward_with_cache(signal, params).features


def forward_with_cache(signal, params: FrontendParams) -> FrontendCache:
    """Forward pass that keeps the intermediates the backward pass needs."""
    x = _check_signal(signal)
    frames = _same_frames(x, params.bank.kernel_len)
    cos_taps, sin_taps = bank_kernels(params.bank)
    stacked = np.concatenate([cos_taps[:, ::-1], sin_taps[:, ::-1]], axis=0)
    out = frames @ stacked.T
    n = params.n_channels
    out_cos = np.ascontiguousarray(out[:, :n].T)
    out_sin = np.ascontiguousarray(out[:, n:].T)
    energy = FeatureMap(out_cos**2 + out_sin**2, params.sample_rate_hz, hop=1)
    pooled = gaussian_pool(energy, params.pool)
    features = pcen_forward(pooled, params.pcen)
    return FrontendCache(x, frames, out_cos, out_sin, energy, pooled, features)


def backward_from_cache(cache: FrontendCache, params: FrontendParams, upstream) -> GradientBundle:
    """Gradients for all front-end parameters given d(loss)/d(features).

    Walks the chain in reverse: PCEN -> pooling (kernel-shape and scatter
    paths) -> energy -> convolution tap gradients -> kernel parameter
    gradients.  Parameters of stages masked out by ``params.train_mask``
    come back as zeros.
    """
    g_out = upstream.data if isinstance(upstream, FeatureMap) else np.asarray(upstream, dtype=float)
    if g_out.shape != cache.features.data.shape:
        raise ValueError(
            f"upstream gradient shape {g_out.shape} does not match "
            f"feature shape {cache.features.data.shape}"
        )
    mask = params.train_mask
    n = params.n_channels
    zeros = lambda: np.zeros(n)  # noqa: E731 - tiny local factory

    # --- PCEN ---------------------------------------------------------
    pg = pcen_backward(cache.pooled, params.pcen, g_out)
    g_pooled = pg.energy

    if not (mask.filters or mask.pooling):
        return GradientBundle(
            zeros(), zeros(), zeros(),
            pg.s if mask.pcen else zeros(),
            pg.alpha if mask.pcen else zeros(),
            pg.delta if mask.pcen else zeros(),
            pg.gamma if mask.pcen else zeros(),
        )

    # --- Gaussian pooling ----------------------------------------------
    pool = params.pool
    kernels = pool_kernels(pool)
    if mask.pooling:
        # accumulate d(loss)/d(kernel tap) then chain through d(kernel)/d(sigma)
        windows = _pooling_windows(cache.energy.data, pool)
        g_taps = np.einsum("cfl,cf->cl", windows, g_pooled)
        g_sigma = (g_taps * pool_kernel_sigma_grads(pool)).sum(axis=1)
    else:
        g_sigma = zeros()

    if mask.filters:
        # scatter pooled-frame gradients back to sample-rate energies
        half = (pool.kernel_len - 1) // 2
        t_len = cache.energy.n_frames
        g_padded = np.zeros((n, t_len + 2 * half))
        for frame in range(g_pooled.shape[1]):
            start = frame * pool.stride
            g_padded[:, start : start + pool.kernel_len] += (
                kernels * g_pooled[:, frame][:, None]
            )
        g_energy = g_padded[:, half : half + t_len]

        # --- energy and convolution ------------------------------------
        g_cos = 2.0 * cache.out_cos * g_energy
        g_sin = 2.0 * cache.out_sin * g_energy
        # forward used reversed kernels, so un-reverse the tap gradients
        g_taps_cos = (cache.frames.T @ g_cos.T)[::-1].T  # (channels, kernel_len)
        g_taps_sin = (cache.frames.T @ g_sin.T)[::-1].T
        dcos_df, dsin_df, dcos_dw, dsin_dw = bank_kernel_grads(params.bank)
        g_freq = (g_taps_cos * dcos_df + g_taps_sin * dsin_df).sum(axis=1)
        g_fwhm = (g_taps_cos * dcos_dw + g_taps_sin * dsin_dw).sum(axis=1)
    else:
        g_freq = zeros()
        g_fwhm = zeros()

    return GradientBundle(
        g_freq,
        g_fwhm,
        g_sigma,
        pg.s if mask.pcen else zeros(),
        pg.alpha if mask.pcen else zeros(),
        pg.delta if mask.pcen else zeros(),
        pg.gamma if mask.pcen else zeros(),
    )


def frontend_backward(signal, params: FrontendParams, upstream) -> GradientBundle:
    """Convenience wrapper: forward with cache, then backward."""
    cache = forward_with_cache(signal, params)
    return backward_from_cache(cache, params, upstream)
