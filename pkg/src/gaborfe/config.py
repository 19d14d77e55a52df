"""Key=value run configuration shared by all CLI commands.

A config file is plain text, one ``key = value`` per line, ``#`` comments
allowed.  Every key has a default mirroring the library defaults; unknown
keys are rejected so typos fail loudly.  List-valued keys (``snr_grid``,
``protocol_seeds``, ``noise_kinds``) take comma-separated values.
"""

import math
from dataclasses import dataclass, fields

import numpy as np

from .audio_io import ParseError
from .filterbank import GaussianPoolParams, mel_init_bank
from .frontend import FrontendParams, LoudnessSpec, TrainMask
from .pcen import PcenParams
from .toydata import ToyDatasetSpec

__all__ = ["RunConfig", "load_config", "parse_config"]


@dataclass
class RunConfig:
    """Every tunable of the pipeline, trainer and protocol in one place."""

    # front-end
    n_channels: int = 40
    sample_rate: float = 16000.0
    kernel_len: int = 401
    pool_kernel_len: int = 401
    stride: int = 160
    pool_sigma: float = 0.4
    pcen_s: float = 0.04
    pcen_alpha: float = 0.96
    pcen_delta: float = 2.0
    pcen_gamma: float = 2.0
    pcen_epsilon: float = 1e-6
    # loudness convention
    loudness_low_db: float = 15.0
    loudness_high_db: float = 30.0
    loudness_reference: float = 2e-5
    # training
    learning_rate: float = 2e-3
    batch_size: int = 32
    epochs: int = 25
    hidden_units: int = 64
    label_smoothing: float = 0.1
    seed: int = 0
    # adaptation
    adapt_epochs: int = 60
    adapt_learning_rate: float = 2e-3
    adapt_batch_size: int = 16
    # evaluation
    segment_s: float = 1.0
    # noise protocol
    snr_grid: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)
    noise_kinds: tuple = ("gaussian", "babble")
    protocol_seeds: tuple = (0, 1, 2)
    protocol_epochs: int = 25
    protocol_batch_size: int = 16
    babble_sources: int = 3
    test_per_class: int = 6
    adapt_per_class: int = 4
    # toy dataset
    toy_classes: int = 4
    toy_samples_per_class: int = 24
    toy_duration_s: float = 0.5
    toy_seed: int = 0
    # paths
    data_root: str = "."

    def validate(self):
        """Build the derived objects once so every invariant is exercised."""
        self.frontend()
        self.loudness()
        self.toy_spec()
        if self.batch_size < 1 or self.epochs < 0:
            raise ValueError("batch_size must be >= 1 and epochs >= 0")
        if self.learning_rate <= 0 or self.adapt_learning_rate <= 0:
            raise ValueError("learning rates must be positive")
        if not 0.0 <= self.label_smoothing < 1.0:
            raise ValueError("label_smoothing must lie in [0, 1)")
        if self.segment_s <= 0:
            raise ValueError("segment_s must be positive")
        for snr in self.snr_grid:
            if math.isnan(snr):
                raise ValueError("snr_grid must not contain NaN")
        for kind in self.noise_kinds:
            if kind not in ("gaussian", "babble"):
                raise ValueError(f"unknown noise kind {kind!r}")
        return self

    # ------------------------------------------------------------------
    # derived objects
    # ------------------------------------------------------------------

    def frontend(self) -> FrontendParams:
        bank = mel_init_bank(self.n_channels, self.sample_rate, self.kernel_len)
        pool = GaussianPoolParams(
            np.full(self.n_channels, self.pool_sigma), self.pool_kernel_len, self.stride
        )
        pcen = PcenParams(
            s=np.full(self.n_channels, self.pcen_s),
            alpha=np.full(self.n_channels, self.pcen_alpha),
            delta=np.full(self.n_channels, self.pcen_delta),
            gamma=np.full(self.n_channels, self.pcen_gamma),
            epsilon=self.pcen_epsilon,
        )
        return FrontendParams(bank, pool, pcen, TrainMask(), self.sample_rate)

    def loudness(self) -> LoudnessSpec:
        return LoudnessSpec(self.loudness_low_db, self.loudness_high_db, self.loudness_reference)

    def toy_spec(self) -> ToyDatasetSpec:
        return ToyDatasetSpec(
            n_classes=self.toy_classes,
            samples_per_class=self.toy_samples_per_class,
            duration_s=self.toy_duration_s,
            sample_rate=self.sample_rate,
            seed=self.toy_seed,
        )


def _convert(name, text, default):
    """Convert raw text to the type of the default value."""
    if isinstance(default, bool):  # not used today; bool is an int subclass
        if text.lower() in ("true", "1", "yes"):
            return True
        if text.lower() in ("false", "0", "no"):
            return False
        raise ParseError(f"config key {name!r}: expected a boolean, got {text!r}")
    if isinstance(default, int):
        try:
            return int(text)
        except ValueError:
            raise ParseError(f"config key {name!r}: expected an integer, got {text!r}") from None
    if isinstance(default, float):
        try:
            return float(text)
        except ValueError:
            raise ParseError(f"config key {name!r}: expected a number, got {text!r}") from None
    if isinstance(default, tuple):
        items = [t.strip() for t in text.split(",") if t.strip()]
        if not items:
            raise ParseError(f"config key {name!r}: expected a comma-separated list")
        element = default[0] if default else ""
        if isinstance(element, str):
            return tuple(items)
        if isinstance(element, int) and not isinstance(element, bool):
            try:
                return tuple(int(t) for t in items)
            except ValueError:
                raise ParseError(f"config key {name!r}: expected integers") from None
        try:
            return tuple(float(t) for t in items)
        except ValueError:
            raise ParseError(f"config key {name!r}: expected numbers") from None
    return text


def parse_config(text, source="<config>") -> RunConfig:
    """Parse config text into a validated :class:`RunConfig`."""
    cfg = RunConfig()
    known = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{source}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in known:
            raise ParseError(f"{source}:{lineno}: unknown config key {key!r}")
        setattr(cfg, key, _convert(key, value, known[key]))
    try:
        cfg.validate()
    except ValueError as exc:
        raise ParseError(f"{source}: invalid configuration: {exc}") from None
    return cfg


def load_config(path) -> RunConfig:
    """Read and validate a config file; defaults apply for absent keys."""
    with open(path) as fh:
        return parse_config(fh.read(), source=str(path))
