"""Desk-scale training lab for the front-end.

A deliberately small classifier backend (one hidden ReLU layer over the
time-averaged feature vector, softmax output) sits on top of the front-end so
that the interesting questions — which front-end stages actually learn, and
whether adapting only the energy normalizer recovers accuracy under noise —
can be answered in minutes on a CPU.  The four training regimes map to the
front-end train mask:

    untrained     -> (filters=F, pooling=F, pcen=F)   backend only
    pcen_only     -> (F, F, T)
    filters_only  -> (T, T, F)
    full          -> (T, T, T)

``run_noise_protocol`` trains four models per seed — "clean" (all clean
training data), "noisy" (same data mixed with noise), "base" (clean-trained
without the adaptation utterances) and "adapted" (the base model with only
PCEN tuned on a small noisy adaptation set) — and tabulates their accuracies
over noise kinds and SNRs.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .filterbank import filterbank_energy, gaussian_pool
from .frontend import (
    FrontendParams,
    LoudnessSpec,
    TrainMask,
    backward_from_cache,
    default_frontend,
    extract_features,
    forward_with_cache,
    rescale_loudness,
)
from .noise import make_babble, mix_at_snr
from .optim import AdamState, TrainingDivergenceError, adam_step
from .pcen import pcen_backward, pcen_forward
from .toydata import LabelledDataset, ToyDatasetSpec, gen_toy_dataset

__all__ = [
    "BackendParams",
    "RegimeConfig",
    "AdaptConfig",
    "TrainedModel",
    "TrainHistory",
    "AdaptHistory",
    "ProtocolConfig",
    "ProtocolRow",
    "ProtocolRun",
    "ProtocolOutcome",
    "REGIME_MASKS",
    "train",
    "evaluate",
    "adapt_pcen",
    "run_noise_protocol",
    "write_results_csv",
]

REGIME_MASKS = {
    "untrained": TrainMask(False, False, False),
    "pcen_only": TrainMask(False, False, True),
    "filters_only": TrainMask(True, True, False),
    "full": TrainMask(True, True, True),
}


# ---------------------------------------------------------------------------
# backend classifier
# ---------------------------------------------------------------------------


@dataclass
class BackendParams:
    """One hidden ReLU layer over time-averaged features, softmax output."""

    w1: np.ndarray  # (hidden, n_channels)
    b1: np.ndarray  # (hidden,)
    w2: np.ndarray  # (n_classes, hidden)
    b2: np.ndarray  # (n_classes,)

    def __post_init__(self):
        self.w1 = np.asarray(self.w1, dtype=float)
        self.b1 = np.asarray(self.b1, dtype=float)
        self.w2 = np.asarray(self.w2, dtype=float)
        self.b2 = np.asarray(self.b2, dtype=float)
        if self.w1.ndim != 2 or self.w2.ndim != 2:
            raise ValueError("weight matrices must be 2-D")
        if self.b1.shape != (self.w1.shape[0],) or self.b2.shape != (self.w2.shape[0],):
            raise ValueError("bias shapes must match their weight matrices")
        if self.w2.shape[1] != self.w1.shape[0]:
            raise ValueError("hidden dimensions of w1 and w2 disagree")

    @property
    def n_channels(self) -> int:
        return self.w1.shape[1]

    @property
    def n_classes(self) -> int:
        return self.w2.shape[0]

    @property
    def hidden(self) -> int:
        return self.w1.shape[0]

    @classmethod
    def init(cls, n_channels, n_classes, hidden=64, rng=None) -> "BackendParams":
        rng = np.random.default_rng() if rng is None else rng
        return cls(
            w1=rng.normal(0.0, 1.0 / np.sqrt(n_channels), (hidden, n_channels)),
            b1=np.zeros(hidden),
            w2=rng.normal(0.0, 1.0 / np.sqrt(hidden), (n_classes, hidden)),
            b2=np.zeros(n_classes),
        )

    def copy(self) -> "BackendParams":
        return BackendParams(self.w1.copy(), self.b1.copy(), self.w2.copy(), self.b2.copy())


def _feature_vector(feature_data: np.ndarray) -> np.ndarray:
    return feature_data.mean(axis=1)


def _backend_logits(backend: BackendParams, vec: np.ndarray):
    pre = backend.w1 @ vec + backend.b1
    hidden = np.maximum(pre, 0.0)
    return backend.w2 @ hidden + backend.b2, pre, hidden


def _softmax_ce(logits: np.ndarray, label: int, smoothing: float = 0.0):
    """Stable cross-entropy against a label-smoothed target distribution.

    Smoothing caps the rewarded confidence: once the true-class probability
    reaches its target the gradient vanishes, so training stops inflating
    margins by scaling features and parameters drift only while they still
    fix real mistakes or real nuisance variance.  Returns (loss, probs).
    """
    shifted = logits - logits.max()
    log_norm = np.log(np.exp(shifted).sum())
    loss = log_norm - (1.0 - smoothing) * shifted[label] - smoothing * shifted.mean()
    return loss, np.exp(shifted - log_norm)


def _backend_backward(backend: BackendParams, vec, pre, hidden, probs, label,
                      smoothing: float = 0.0):
    """Gradients of the cross-entropy w.r.t. backend params and the input vector."""
    d_logits = probs - smoothing / probs.size
    d_logits[label] -= 1.0 - smoothing
    g_w2 = np.outer(d_logits, hidden)
    g_b2 = d_logits
    d_hidden = backend.w2.T @ d_logits
    d_pre = d_hidden * (pre > 0.0)
    g_w1 = np.outer(d_pre, vec)
    g_b1 = d_pre
    g_vec = backend.w1.T @ d_pre
    return {"w1": g_w1, "b1": g_b1, "w2": g_w2, "b2": g_b2}, g_vec


# ---------------------------------------------------------------------------
# configs, models, histories
# ---------------------------------------------------------------------------


@dataclass
class RegimeConfig:
    """Which stages train, for how long, and with what optimizer settings.

    ``batch_size`` defaults to the production value of 256; with toy
    datasets of dozens of utterances it is normally configured down (a
    batch never exceeds the dataset anyway).  ``learning_rate`` likewise
    defaults well above the production value of 1e-4: with desk-scale data,
    minutes-scale convergence needs a larger step; both are plain config
    values.
    """

    regime: str = "full"
    epochs: int = 25
    batch_size: int = 256
    learning_rate: float = 2e-3
    hidden: int = 64
    label_smoothing: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.regime not in REGIME_MASKS:
            raise ValueError(
                f"unknown regime {self.regime!r}; expected one of {sorted(REGIME_MASKS)}"
            )
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if not self.learning_rate > 0.0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.label_smoothing < 1.0:
            raise ValueError("label_smoothing must lie in [0, 1)")


@dataclass
class TrainedModel:
    """Front-end plus backend, ready for evaluation or adaptation."""

    frontend: FrontendParams
    backend: BackendParams
    label_names: list | None = None

    @property
    def n_classes(self) -> int:
        return self.backend.n_classes

    def copy(self) -> "TrainedModel":
        return TrainedModel(
            self.frontend.copy(),
            self.backend.copy(),
            None if self.label_names is None else list(self.label_names),
        )


@dataclass
class TrainHistory:
    """Per-epoch training loss/accuracy plus start/end parameter snapshots."""

    loss: list = field(default_factory=list)
    accuracy: list = field(default_factory=list)
    start_frontend: FrontendParams | None = None
    end_frontend: FrontendParams | None = None
    start_backend: BackendParams | None = None
    end_backend: BackendParams | None = None


@dataclass
class AdaptConfig:
    """Source model, noisy adaptation data, and adaptation budget.

    Everything except PCEN stays frozen; ``adapt_backend=True`` relaxes that
    for ablation.  The adaptation set must be disjoint from the test set
    (callers' responsibility; the bundled protocol guarantees it).
    """

    source_model: TrainedModel
    adapt_set: LabelledDataset
    epochs: int = 60
    batch_size: int = 32
    learning_rate: float = 2e-3
    label_smoothing: float = 0.1
    seed: int = 0
    adapt_backend: bool = False

    def __post_init__(self):
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if not self.learning_rate > 0.0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.label_smoothing < 1.0:
            raise ValueError("label_smoothing must lie in [0, 1)")


@dataclass
class AdaptHistory:
    """Loss per epoch and the PCEN parameter trajectory (snapshot 0 = start)."""

    loss: list = field(default_factory=list)
    pcen_trajectory: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


def _pooled_map(wave, fe: FrontendParams):
    """Pooled energy of one utterance (the input to PCEN), for caching."""
    energy = filterbank_energy(wave, fe.bank, fe.sample_rate_hz)
    return gaussian_pool(energy, fe.pool)


def _frontend_param_dict(fe: FrontendParams) -> dict:
    return {
        "centre_freq": fe.bank.centre_freq,
        "fwhm": fe.bank.fwhm,
        "pool_sigma": fe.pool.sigma,
        "pcen_s": fe.pcen.s,
        "pcen_alpha": fe.pcen.alpha,
        "pcen_delta": fe.pcen.delta,
        "pcen_gamma": fe.pcen.gamma,
    }


def _write_back(fe: FrontendParams, backend: BackendParams, params: dict):
    fe.bank.centre_freq = params["centre_freq"]
    fe.bank.fwhm = params["fwhm"]
    fe.pool.sigma = params["pool_sigma"]
    fe.pcen.s = params["pcen_s"]
    fe.pcen.alpha = params["pcen_alpha"]
    fe.pcen.delta = params["pcen_delta"]
    fe.pcen.gamma = params["pcen_gamma"]
    backend.w1 = params["w1"]
    backend.b1 = params["b1"]
    backend.w2 = params["w2"]
    backend.b2 = params["b2"]


def _mask_dict(mask: TrainMask) -> dict:
    return {
        "centre_freq": mask.filters,
        "fwhm": mask.filters,
        "pool_sigma": mask.pooling,
        "pcen_s": mask.pcen,
        "pcen_alpha": mask.pcen,
        "pcen_delta": mask.pcen,
        "pcen_gamma": mask.pcen,
        "w1": True,
        "b1": True,
        "w2": True,
        "b2": True,
    }


def _check_dataset(dataset: LabelledDataset):
    if len(dataset) == 0:
        raise ValueError("dataset must contain at least one recording")
    if np.any(dataset.labels < 0):
        raise ValueError("labels must be nonnegative integers")


def _sample_grads_full(wave, fe, backend, label, smoothing):
    """Loss, correctness and all gradients for one utterance (conv stages live)."""
    cache = forward_with_cache(wave, fe)
    vec = _feature_vector(cache.features.data)
    logits, pre, hidden = _backend_logits(backend, vec)
    loss, probs = _softmax_ce(logits, label, smoothing)
    b_grads, g_vec = _backend_backward(backend, vec, pre, hidden, probs, label, smoothing)
    upstream = np.broadcast_to(
        g_vec[:, None] / cache.features.n_frames, cache.features.data.shape
    )
    bundle = backward_from_cache(cache, fe, upstream)
    grads = bundle.to_dict()
    grads.update(b_grads)
    return loss, int(np.argmax(logits) == label), grads


def _sample_grads_pooled(pooled, fe, backend, label, smoothing):
    """Same as above but starting from a cached pooled-energy map."""
    features = pcen_forward(pooled, fe.pcen)
    vec = _feature_vector(features.data)
    logits, pre, hidden = _backend_logits(backend, vec)
    loss, probs = _softmax_ce(logits, label, smoothing)
    b_grads, g_vec = _backend_backward(backend, vec, pre, hidden, probs, label, smoothing)
    if fe.train_mask.pcen:
        upstream = np.broadcast_to(
            g_vec[:, None] / features.n_frames, features.data.shape
        )
        pg = pcen_backward(pooled, fe.pcen, upstream)
        pcen_grads = {
            "pcen_s": pg.s,
            "pcen_alpha": pg.alpha,
            "pcen_delta": pg.delta,
            "pcen_gamma": pg.gamma,
        }
    else:
        n = fe.n_channels
        pcen_grads = {k: np.zeros(n) for k in ("pcen_s", "pcen_alpha", "pcen_delta", "pcen_gamma")}
    grads = {
        "centre_freq": np.zeros(fe.n_channels),
        "fwhm": np.zeros(fe.n_channels),
        "pool_sigma": np.zeros(fe.n_channels),
        **pcen_grads,
        **b_grads,
    }
    return loss, int(np.argmax(logits) == label), grads


def _run_epochs(dataset, fe, backend, mask_dict, epochs, batch_size, learning_rate,
                rng, history_loss, history_acc, pooled_cache=None, on_epoch_end=None,
                smoothing=0.0):
    """Shared minibatch loop for train() and adapt_pcen()."""
    params = {**_frontend_param_dict(fe), "w1": backend.w1, "b1": backend.b1,
              "w2": backend.w2, "b2": backend.b2}
    state = AdamState.for_params(params, learning_rate=learning_rate)
    n = len(dataset)
    for _ in range(epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        epoch_correct = 0
        for start in range(0, n, batch_size):
            batch = order[start : start + batch_size]
            acc_grads = {k: np.zeros_like(v) for k, v in params.items()}
            batch_loss = 0.0
            for idx in batch:
                label = int(dataset.labels[idx])
                if pooled_cache is not None:
                    loss, correct, grads = _sample_grads_pooled(
                        pooled_cache[idx], fe, backend, label, smoothing
                    )
                else:
                    loss, correct, grads = _sample_grads_full(
                        dataset.waveforms[idx], fe, backend, label, smoothing
                    )
                batch_loss += loss
                epoch_correct += correct
                for k in acc_grads:
                    acc_grads[k] += grads[k]
            scale = 1.0 / batch.size
            if not math.isfinite(batch_loss):
                raise TrainingDivergenceError("non-finite training loss")
            for k in acc_grads:
                acc_grads[k] *= scale
            params = adam_step(params, acc_grads, state, mask=mask_dict)
            _write_back(fe, backend, params)
            epoch_loss += batch_loss
        history_loss.append(epoch_loss / n)
        history_acc.append(epoch_correct / n)
        if on_epoch_end is not None:
            on_epoch_end()


def train(dataset: LabelledDataset, frontend: FrontendParams, regime: RegimeConfig):
    """Train a classifier over the front-end under one freeze regime.

    Returns ``(TrainedModel, TrainHistory)``.  The caller's ``frontend`` is
    never mutated; the model holds a copy with the regime's train mask.  When
    the convolutional stages are frozen their pooled energies are computed
    once and cached, which makes the pcen_only and untrained regimes cheap.
    """
    _check_dataset(dataset)
    mask = REGIME_MASKS[regime.regime]
    fe = frontend.copy()
    fe.train_mask = mask
    rng = np.random.default_rng(regime.seed)
    n_classes = int(dataset.labels.max()) + 1
    backend = BackendParams.init(fe.n_channels, n_classes, regime.hidden, rng)

    history = TrainHistory(start_frontend=fe.copy(), start_backend=backend.copy())

    pooled_cache = None
    if not (mask.filters or mask.pooling):
        pooled_cache = [_pooled_map(w, fe) for w in dataset.waveforms]

    _run_epochs(
        dataset, fe, backend, _mask_dict(mask),
        regime.epochs, regime.batch_size, regime.learning_rate,
        rng, history.loss, history.accuracy, pooled_cache=pooled_cache,
        smoothing=regime.label_smoothing,
    )

    history.end_frontend = fe.copy()
    history.end_backend = backend.copy()
    return TrainedModel(fe, backend), history


def evaluate(model: TrainedModel, dataset: LabelledDataset, segment_s=1.0) -> float:
    """Mean accuracy with segment-averaged logits per recording.

    Each recording is split into non-overlapping segments of ``segment_s``
    seconds (the last one zero-padded; recordings shorter than one segment
    are zero-padded to one), logits are averaged over segments, and the
    argmax is compared with the label.  ``segment_s=None`` scores each
    recording as a single segment of its own length.
    """
    _check_dataset(dataset)
    fe = model.frontend
    if dataset.sample_rate != fe.sample_rate_hz:
        raise ValueError(
            f"dataset sample rate {dataset.sample_rate} does not match "
            f"model sample rate {fe.sample_rate_hz}"
        )
    if segment_s is not None and not segment_s > 0.0:
        raise ValueError("segment_s must be positive (or None for whole recordings)")
    correct = 0
    for wave, label in zip(dataset.waveforms, dataset.labels):
        wave = np.asarray(wave, dtype=float)
        if segment_s is None:
            segments = [wave]
        else:
            seg_len = max(1, int(round(segment_s * fe.sample_rate_hz)))
            n_seg = max(1, -(-wave.size // seg_len))
            padded = np.zeros(n_seg * seg_len)
            padded[: wave.size] = wave
            segments = [padded[i * seg_len : (i + 1) * seg_len] for i in range(n_seg)]
        logit_sum = np.zeros(model.n_classes)
        for seg in segments:
            vec = _feature_vector(extract_features(seg, fe).data)
            logits, _, _ = _backend_logits(model.backend, vec)
            logit_sum += logits
        correct += int(np.argmax(logit_sum) == int(label))
    return correct / len(dataset)


def adapt_pcen(config: AdaptConfig):
    """Tune only the PCEN parameters of a trained model on noisy data.

    Returns ``(TrainedModel, AdaptHistory)``.  Every non-PCEN parameter of
    the result is bit-identical to the source model; the history carries the
    full PCEN trajectory (one snapshot per epoch, index 0 = start).
    """
    if len(config.adapt_set) == 0:
        raise ValueError("adaptation set must not be empty")
    _check_dataset(config.adapt_set)
    model = config.source_model.copy()
    fe = model.frontend
    fe.train_mask = TrainMask(filters=False, pooling=False, pcen=True)
    mask_dict = _mask_dict(fe.train_mask)
    if not config.adapt_backend:
        for k in ("w1", "b1", "w2", "b2"):
            mask_dict[k] = False
    rng = np.random.default_rng(config.seed)

    history = AdaptHistory()
    history.pcen_trajectory.append(fe.pcen.copy())

    pooled_cache = [_pooled_map(w, fe) for w in config.adapt_set.waveforms]
    _run_epochs(
        config.adapt_set, fe, model.backend, mask_dict,
        config.epochs, config.batch_size, config.learning_rate,
        rng, history.loss, [], pooled_cache=pooled_cache,
        on_epoch_end=lambda: history.pcen_trajectory.append(fe.pcen.copy()),
        smoothing=config.label_smoothing,
    )
    return model, history


# ---------------------------------------------------------------------------
# the four-model noise protocol
# ---------------------------------------------------------------------------


@dataclass
class ProtocolConfig:
    """Desk-scale sizes and budgets for the four-model noise protocol."""

    seeds: tuple = (0, 1, 2)
    regime: str = "full"
    n_channels: int = 40
    epochs: int = 25
    batch_size: int = 16
    learning_rate: float = 2e-3
    adapt_epochs: int = 60
    adapt_learning_rate: float = 2e-3
    adapt_batch_size: int = 16
    test_per_class: int = 6
    adapt_per_class: int = 4
    babble_sources: int = 3
    hidden: int = 64
    segment_s: float | None = None  # None: score whole utterances
    loudness: LoudnessSpec = field(default_factory=LoudnessSpec)


@dataclass
class ProtocolRow:
    """One accuracy measurement of the results table."""

    model: str
    noise_kind: str
    snr_db: float
    seed: int
    accuracy: float


@dataclass
class ProtocolRun:
    """Everything trained for one seed, kept for drift analysis and demos."""

    seed: int
    init_frontend: FrontendParams
    clean_model: TrainedModel
    base_model: TrainedModel
    noisy_models: dict
    adapted_models: dict


@dataclass
class ProtocolOutcome:
    rows: list
    runs: list


def _mix_dataset(dataset, kind, snr_values, rng, babble_pool, babble_sources):
    """New dataset with every utterance mixed with fresh noise of one kind."""
    mixed = []
    for wave in dataset.waveforms:
        snr = float(rng.choice(snr_values)) if len(snr_values) else math.inf
        if math.isinf(snr):
            mixed.append(np.asarray(wave, dtype=float).copy())
            continue
        if kind == "gaussian":
            noise = rng.standard_normal(len(wave))
        elif kind == "babble":
            noise = make_babble(
                babble_pool,
                n_mix=babble_sources,
                seed=int(rng.integers(2**62)),
                length=len(wave),
            )
        else:
            raise ValueError(f"unknown noise kind {kind!r}")
        mixed.append(mix_at_snr(wave, noise, snr))
    return LabelledDataset(mixed, dataset.labels.copy(), dataset.sample_rate)


def run_noise_protocol(toy_spec: ToyDatasetSpec, noise_kinds=("gaussian", "babble"),
                       snr_grid=(0.0, 5.0, 10.0, 15.0, 20.0),
                       config: ProtocolConfig | None = None) -> ProtocolOutcome:
    """Train clean/noisy/base models, adapt PCEN, and tabulate accuracies.

    Per seed: generate a fresh toy dataset, place utterances at the loudness
    convention, split each class into adaptation / test / remaining-train
    utterances, then train

      * ``clean``   on all non-test utterances,
      * ``noisy``   on the same utterances mixed with noise (per kind),
      * ``base``    on the non-test utterances excluding the adaptation set,
      * ``adapted`` as ``base`` with only PCEN tuned on the noisy adaptation
        set (per kind).

    All four are evaluated on the held-out test set mixed at every SNR of
    ``snr_grid`` for every noise kind; ``snr_db = inf`` rows are clean-test
    evaluations.  Noisy training and adaptation draw SNRs uniformly from the
    finite part of the grid.  Returns all rows plus the per-seed models.
    """
    if config is None:
        config = ProtocolConfig()
    snr_grid = tuple(float(s) for s in snr_grid)
    if len(snr_grid) == 0:
        raise ValueError("snr_grid must not be empty")
    noise_kinds = tuple(noise_kinds)
    if len(noise_kinds) == 0:
        raise ValueError("noise_kinds must not be empty")
    reserved = config.test_per_class + config.adapt_per_class
    if toy_spec.samples_per_class <= reserved:
        raise ValueError(
            f"samples_per_class={toy_spec.samples_per_class} leaves no training data "
            f"after reserving {reserved} per class for test+adaptation"
        )
    finite_snrs = [s for s in snr_grid if math.isfinite(s)]

    rows = []
    runs = []
    for seed in config.seeds:
        ds_spec = replace(toy_spec, seed=toy_spec.seed + 7919 * seed)
        raw = gen_toy_dataset(ds_spec)
        rng = np.random.default_rng([toy_spec.seed, seed, 2861])
        loud = LabelledDataset(
            [rescale_loudness(w, config.loudness, rng) for w in raw.waveforms],
            raw.labels,
            raw.sample_rate,
        )

        # per-class split: adaptation, test, remaining training utterances
        adapt_idx, test_idx, rest_idx = [], [], []
        for c in range(toy_spec.n_classes):
            base = c * toy_spec.samples_per_class
            adapt_idx += range(base, base + config.adapt_per_class)
            test_idx += range(base + config.adapt_per_class, base + reserved)
            rest_idx += range(base + reserved, base + toy_spec.samples_per_class)
        adapt_clean = loud.subset(adapt_idx)
        test_set = loud.subset(test_idx)
        rest_set = loud.subset(rest_idx)
        clean_full = loud.subset(sorted(rest_idx + adapt_idx))
        babble_pool = rest_set.waveforms

        regime = RegimeConfig(
            regime=config.regime, epochs=config.epochs, batch_size=config.batch_size,
            learning_rate=config.learning_rate, hidden=config.hidden, seed=seed,
        )
        init_fe = default_frontend(config.n_channels, toy_spec.sample_rate)
        clean_model, _ = train(clean_full, init_fe, regime)
        base_model, _ = train(rest_set, init_fe, regime)

        noisy_models, adapted_models, tests = {}, {}, {}
        for kind in noise_kinds:
            noisy_train = _mix_dataset(
                clean_full, kind, finite_snrs, rng, babble_pool, config.babble_sources
            )
            noisy_models[kind], _ = train(noisy_train, init_fe, regime)
            adapt_noisy = _mix_dataset(
                adapt_clean, kind, finite_snrs, rng, babble_pool, config.babble_sources
            )
            adapted_models[kind], _ = adapt_pcen(
                AdaptConfig(
                    source_model=base_model,
                    adapt_set=adapt_noisy,
                    epochs=config.adapt_epochs,
                    batch_size=config.adapt_batch_size,
                    learning_rate=config.adapt_learning_rate,
                    seed=seed,
                )
            )
            # one shared noisy test set per (kind, snr) so models compare fairly
            tests[kind] = {
                snr: (
                    test_set
                    if math.isinf(snr)
                    else _mix_dataset(
                        test_set, kind, [snr], rng, babble_pool, config.babble_sources
                    )
                )
                for snr in snr_grid
            }

        for kind in noise_kinds:
            named = [
                ("clean", clean_model),
                ("noisy", noisy_models[kind]),
                ("base", base_model),
                ("adapted", adapted_models[kind]),
            ]
            for snr in snr_grid:
                for name, model in named:
                    acc = evaluate(model, tests[kind][snr], config.segment_s)
                    rows.append(ProtocolRow(name, kind, snr, seed, acc))

        runs.append(
            ProtocolRun(seed, init_fe, clean_model, base_model, noisy_models, adapted_models)
        )
    return ProtocolOutcome(rows, runs)


def write_results_csv(rows, path):
    """Write protocol rows as ``model,noise_kind,snr_db,seed,accuracy``."""
    lines = ["model,noise_kind,snr_db,seed,accuracy"]
    for r in rows:
        lines.append(
            f"{r.model},{r.noise_kind},{format(float(r.snr_db), '.17g')},"
            f"{int(r.seed)},{format(float(r.accuracy), '.17g')}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
