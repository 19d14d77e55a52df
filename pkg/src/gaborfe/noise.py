"""Noise mixing utilities: exact-SNR additive mixing and babble synthesis."""

import numpy as np

__all__ = ["mix_at_snr", "make_babble"]


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x**2)))


def mix_at_snr(clean, noise, snr_db) -> np.ndarray:
    """Add noise to a clean signal at an exact signal-to-noise ratio.

    The noise is tiled or trimmed to the clean signal's length, then scaled
    so that ``20*log10(rms(clean)/rms(scaled_noise)) == snr_db`` up to float
    rounding.  ``snr_db = inf`` returns the clean signal unchanged (zero
    noise gain).
    """
    clean = np.asarray(clean, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if clean.ndim != 1 or clean.size == 0:
        raise ValueError("clean signal must be a nonempty 1-D array")
    if noise.ndim != 1 or noise.size == 0:
        raise ValueError("noise must be a nonempty 1-D array")
    if _rms(clean) == 0.0:
        raise ValueError("clean signal has zero RMS; SNR is undefined")
    if np.isinf(snr_db) and snr_db > 0:
        return clean.copy()
    if noise.size < clean.size:
        reps = -(-clean.size // noise.size)  # ceil division
        noise = np.tile(noise, reps)
    noise = noise[: clean.size]
    noise_rms = _rms(noise)
    if noise_rms == 0.0:
        raise ValueError("noise has zero RMS over the mixing window")
    gain = (_rms(clean) / noise_rms) * 10.0 ** (-float(snr_db) / 20.0)
    return clean + gain * noise


def make_babble(source_pool, n_mix=3, seed=0, length=None) -> np.ndarray:
    """Sum several RMS-equalized recordings into a babble noise track.

    Draws ``n_mix`` distinct recordings from ``source_pool`` with a seeded
    generator, tiles each to a common length (the longest drawn recording,
    or ``length`` if given), equalizes each to unit RMS, and sums.
    """
    pool = [np.asarray(x, dtype=float) for x in source_pool]
    if int(n_mix) != n_mix or n_mix < 1:
        raise ValueError("n_mix must be a positive integer")
    n_mix = int(n_mix)
    if len(pool) < n_mix:
        raise ValueError(
            f"source pool has {len(pool)} recordings; need at least {n_mix}"
        )
    for x in pool:
        if x.ndim != 1 or x.size == 0:
            raise ValueError("every pool recording must be a nonempty 1-D array")
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(pool), size=n_mix, replace=False)
    target = int(length) if length is not None else max(pool[i].size for i in chosen)
    if target < 1:
        raise ValueError("babble length must be positive")
    out = np.zeros(target)
    for i in chosen:
        x = pool[i]
        rms = _rms(x)
        if rms == 0.0:
            raise ValueError("pool recordings must have nonzero RMS")
        reps = -(-target // x.size)
        out += np.tile(x, reps)[:target] / rms
    return out
