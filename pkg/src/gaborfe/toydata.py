"""Seeded toy speech-like dataset: steady vowels with pulsed frication.

Each utterance is the sum of two streams.  A steady *vowel* stream is a
harmonic complex whose spectral envelope carries two class-specific
resonance peaks over a broadband floor of randomly drawn level.  A
*frication* stream is a broadband stack of lines gated on and off by a
smooth pulse train whose rate is also class-specific.  Class identity is
therefore carried jointly by the spectral envelope (which resonance pair)
and by the pulse rate (how fast the frication flutters); samples within a
class jitter every continuous parameter, so classes are separable but far
from identical.  Generation is fully determined by the seed.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["ToyDatasetSpec", "LabelledDataset", "class_profiles", "gen_toy_dataset"]


@dataclass
class ToyDatasetSpec:
    """Size, duration and seed of a generated toy dataset."""

    n_classes: int = 4
    samples_per_class: int = 24
    duration_s: float = 0.5
    sample_rate: float = 16000.0
    seed: int = 0

    def __post_init__(self):
        if int(self.n_classes) != self.n_classes or self.n_classes < 2:
            raise ValueError("n_classes must be an integer >= 2")
        self.n_classes = int(self.n_classes)
        if int(self.samples_per_class) != self.samples_per_class or self.samples_per_class < 1:
            raise ValueError("samples_per_class must be a positive integer")
        self.samples_per_class = int(self.samples_per_class)
        if not self.duration_s > 0.0:
            raise ValueError("duration_s must be positive")
        if not self.sample_rate > 0.0:
            raise ValueError("sample_rate must be positive")


@dataclass
class LabelledDataset:
    """Waveforms with integer class labels and a common sample rate."""

    waveforms: list
    labels: np.ndarray
    sample_rate: float

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=int)
        if len(self.waveforms) != self.labels.size:
            raise ValueError("waveforms and labels must have equal length")

    def __len__(self) -> int:
        return len(self.waveforms)

    def subset(self, indices) -> "LabelledDataset":
        indices = np.asarray(indices, dtype=int)
        return LabelledDataset(
            [self.waveforms[i] for i in indices],
            self.labels[indices],
            self.sample_rate,
        )


def class_profiles(spec: ToyDatasetSpec) -> list:
    """Nominal (fundamental_hz, resonance1_hz, resonance2_hz, pulse_rate_hz).

    Classes tile a grid of two spectral families times two frication pulse
    rates: even/odd classes alternate the spectral family (the first
    resonance doubles, the second drops by 1.8 kHz, the fundamental rises
    30%), while successive class pairs alternate the pulse rate between
    24 Hz and 34 Hz.  Beyond four classes the whole grid shifts upward
    slightly per repetition.  Spectral identity lives in the resonances on
    a log-frequency axis; temporal identity lives in the pulse rate, fast
    enough that only a short energy smoother preserves it, yet far below
    the frame rate.  Fundamentals are high enough that within-channel
    harmonic beating is far faster than any envelope dynamics, keeping the
    signal's two timescales cleanly separated.
    """
    profiles = []
    for c in range(spec.n_classes):
        spectral = c % 2
        pulsing = (c // 2) % 2
        shift = c // 4
        f0 = 160.0 * 1.3**spectral * 1.045**shift
        r1 = 700.0 * 2.0**spectral * 1.2**shift
        r2 = 5900.0 - 1800.0 * spectral - 300.0 * shift
        rate = 24.0 + 10.0 * pulsing
        profiles.append((f0, r1, r2, rate))
    return profiles


_FRICATION_LO_HZ = 900.0
_FRICATION_HI_HZ = 7400.0
_FRICATION_LINES = 28


def _frication_orders(f0) -> np.ndarray:
    """Harmonic orders whose half-integer offsets carry the frication.

    Frication lines sit at ``(m + 1/2) * f0`` — exactly between adjacent
    vowel harmonics, as far from every harmonic as possible — with the
    integer orders ``m`` spread logarithmically across the frication band.
    """
    lo = int(np.ceil(_FRICATION_LO_HZ / f0 - 0.5))
    hi = int(np.floor(_FRICATION_HI_HZ / f0 - 0.5))
    return np.unique(np.round(np.geomspace(lo, hi, _FRICATION_LINES)).astype(int))


def _harmonic_sample(f0, r1, r2, rate, n_samples, sample_rate, rng) -> np.ndarray:
    """One jittered vowel-plus-frication utterance.

    The vowel stream is a harmonic complex shaped by two broad resonance
    peaks whose widths scale with their centre frequencies; a broadband
    spectral floor keeps the whole band energised.  The floor's level is
    drawn over a 16 dB power range per sample: it is steady within an
    utterance but unpredictable across utterances, a class-independent
    nuisance that rewards per-channel normalisation of the feature scale.
    The frication stream is a stack of lines lying exactly between the
    harmonics, multiplied by a full-depth raised-sine pulse train at the
    class rate (random phase), with its overall level drawn over a 6 dB
    range.  Because the pulse rate is the only temporal cue, the energy
    smoother must stay short enough to pass it, and the classifier must
    read a modulation whose amplitude rides on top of the unpredictable
    steady floor.
    """
    f0 = f0 * (1.0 + rng.uniform(-0.04, 0.04))
    r1 = r1 * (1.0 + rng.uniform(-0.04, 0.04))
    r2 = r2 * (1.0 + rng.uniform(-0.04, 0.04))
    rate = rate * (1.0 + rng.uniform(-0.04, 0.04))
    floor = 0.4 * 10.0 ** rng.uniform(-0.75, 0.05)
    fric_level = 10.0 ** (rng.uniform(-13.0, -7.0) / 20.0)
    gate_phase = rng.uniform(0.0, 2.0 * np.pi)
    t = np.arange(n_samples) / sample_rate

    top = 0.48 * sample_rate
    n_harm = max(1, int(top / f0))
    k = np.arange(1, n_harm + 1)
    freqs = k * f0
    envelope = (
        floor
        + np.exp(-0.5 * ((freqs - r1) / (0.3 * r1)) ** 2)
        + 0.8 * np.exp(-0.5 * ((freqs - r2) / (0.08 * r2)) ** 2)
    )
    amps = envelope * k**-0.4 * (1.0 + 0.1 * rng.standard_normal(n_harm))
    phases = rng.uniform(0.0, 2.0 * np.pi, n_harm)
    vowel = (amps[:, None] * np.sin(2.0 * np.pi * freqs[:, None] * t + phases[:, None])).sum(axis=0)

    lines = (_frication_orders(f0) + 0.5) * f0
    n_lines = lines.size
    line_amps = lines**-0.3 * (1.0 + 0.1 * rng.standard_normal(n_lines))
    line_phases = rng.uniform(0.0, 2.0 * np.pi, n_lines)
    carrier = (
        line_amps[:, None] * np.sin(2.0 * np.pi * lines[:, None] * t + line_phases[:, None])
    ).sum(axis=0)
    gate = 0.5 + 0.5 * np.sin(2.0 * np.pi * rate * t + gate_phase)
    fric = carrier * gate
    vowel_rms = np.sqrt(np.mean(vowel**2))
    fric_rms = np.sqrt(np.mean(fric**2))
    wave = vowel + fric * (fric_level * vowel_rms / fric_rms)

    rms = np.sqrt(np.mean(wave**2))
    return wave / rms


def gen_toy_dataset(spec: ToyDatasetSpec) -> LabelledDataset:
    """Generate the dataset described by ``spec``; bit-reproducible per seed.

    Samples are ordered class-major: all of class 0, then class 1, and so on,
    ``samples_per_class`` each.  Waveforms are unit-RMS.
    """
    rng = np.random.default_rng(spec.seed)
    n_samples = int(round(spec.duration_s * spec.sample_rate))
    waveforms = []
    labels = []
    for label, (f0, r1, r2, rate) in enumerate(class_profiles(spec)):
        for _ in range(spec.samples_per_class):
            waveforms.append(
                _harmonic_sample(f0, r1, r2, rate, n_samples, spec.sample_rate, rng)
            )
            labels.append(label)
    return LabelledDataset(waveforms, np.array(labels), spec.sample_rate)
