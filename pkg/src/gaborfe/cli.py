"""Command-line interface: extract, train, adapt, analyze, protocol.

Every command is deterministic given its config and seed; diagnostics go to
stderr and data goes only to files.  Exit codes: 0 on success, 1 on runtime
errors (bad files, divergence), 2 on usage errors.
"""

import argparse
import math
import os
import sys

import numpy as np

from .analysis import (
    drift_report,
    write_drift_csv,
    write_gain_curve_csv,
    write_gaussian_response_csv,
)
from .audio_io import load_manifest, read_wav
from .config import RunConfig, load_config
from .frontend import extract_features, rescale_loudness
from .modelio import load_model, save_model
from .noise import make_babble, mix_at_snr
from .optim import TrainingDivergenceError
from .toydata import LabelledDataset
from .trainer import (
    AdaptConfig,
    ProtocolConfig,
    RegimeConfig,
    REGIME_MASKS,
    adapt_pcen,
    run_noise_protocol,
    train,
    write_results_csv,
)

__all__ = ["main"]

_FMT = ".17g"


def _load_cfg(path) -> RunConfig:
    if path is None:
        return RunConfig().validate()
    return load_config(path)


def _write_feature_csv(features, path):
    header = ",".join(str(c) for c in range(features.n_channels))
    lines = [header]
    for frame in features.data.T:
        lines.append(",".join(format(v, _FMT) for v in frame))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _load_split(manifest_path, split, cfg):
    """Read one manifest split into a LabelledDataset plus its label names."""
    manifest = load_manifest(manifest_path)
    rows = manifest.for_split(split)
    if not rows:
        raise ValueError(f"manifest has no rows in split {split!r}")
    labels = manifest.labels  # global label set so splits stay consistent
    index = {name: i for i, name in enumerate(labels)}
    waves = []
    ids = []
    root = cfg.data_root
    for row in rows:
        path = row.path if os.path.isabs(row.path) else os.path.join(root, row.path)
        samples, rate = read_wav(path)
        if rate != cfg.sample_rate:
            raise ValueError(
                f"{path}: sample rate {rate} does not match configured {cfg.sample_rate}"
            )
        waves.append(samples)
        ids.append(index[row.label])
    return LabelledDataset(waves, np.array(ids), cfg.sample_rate), labels


def cmd_extract(args) -> int:
    cfg = _load_cfg(args.config)
    samples, rate = read_wav(args.infile)
    if rate != cfg.sample_rate:
        raise ValueError(
            f"{args.infile}: sample rate {rate} does not match configured {cfg.sample_rate}"
        )
    features = extract_features(samples, cfg.frontend())
    _write_feature_csv(features, args.out)
    return 0


def cmd_train(args) -> int:
    cfg = _load_cfg(args.config)
    dataset, labels = _load_split(args.manifest, "train", cfg)
    rng = np.random.default_rng(cfg.seed)
    loudness = cfg.loudness()
    dataset = LabelledDataset(
        [rescale_loudness(w, loudness, rng) for w in dataset.waveforms],
        dataset.labels,
        dataset.sample_rate,
    )
    regime = RegimeConfig(
        regime=args.regime,
        epochs=cfg.epochs,
        batch_size=cfg.batch_size,
        learning_rate=cfg.learning_rate,
        hidden=cfg.hidden_units,
        label_smoothing=cfg.label_smoothing,
        seed=cfg.seed,
    )
    model, history = train(dataset, cfg.frontend(), regime)
    model.label_names = labels
    save_model(model, args.out)
    history_path = args.history or args.out + ".history.csv"
    lines = ["epoch,loss,accuracy"]
    for i, (loss, acc) in enumerate(zip(history.loss, history.accuracy)):
        lines.append(f"{i},{format(loss, _FMT)},{format(acc, _FMT)}")
    with open(history_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0


def _parse_noise_arg(text):
    """Parse 'kind:snr' (e.g. gaussian:0 or babble:5). snr may be 'inf'."""
    kind, sep, snr_text = text.partition(":")
    if not sep:
        raise ValueError("--noise must look like kind:snr, e.g. gaussian:0")
    kind = kind.strip()
    if kind not in ("gaussian", "babble"):
        raise ValueError(f"unknown noise kind {kind!r}; expected gaussian or babble")
    try:
        snr = float(snr_text)
    except ValueError:
        raise ValueError(f"bad SNR value {snr_text!r} in --noise") from None
    if math.isnan(snr):
        raise ValueError("--noise SNR must not be NaN")
    return kind, snr


def cmd_adapt(args) -> int:
    cfg = _load_cfg(args.config)
    model = load_model(args.model)
    kind, snr = _parse_noise_arg(args.noise)
    dataset, labels = _load_split(args.manifest, "adapt", cfg)
    if model.label_names is not None:
        index = {name: i for i, name in enumerate(model.label_names)}
        missing = [l for l in labels if l not in index]
        if missing:
            raise ValueError(f"adapt labels not known to the model: {missing}")
        remap = np.array([index[labels[i]] for i in dataset.labels])
        dataset = LabelledDataset(dataset.waveforms, remap, dataset.sample_rate)
    rng = np.random.default_rng(cfg.seed)
    loudness = cfg.loudness()
    mixed = []
    pool = dataset.waveforms
    for wave in dataset.waveforms:
        wave = rescale_loudness(wave, loudness, rng)
        if math.isinf(snr):
            mixed.append(wave)
            continue
        if kind == "gaussian":
            noise = rng.standard_normal(len(wave))
        else:
            noise = make_babble(
                pool, n_mix=min(cfg.babble_sources, len(pool)),
                seed=int(rng.integers(2**62)), length=len(wave),
            )
        mixed.append(mix_at_snr(wave, noise, snr))
    adapt_set = LabelledDataset(mixed, dataset.labels, dataset.sample_rate)
    adapted, history = adapt_pcen(
        AdaptConfig(
            source_model=model,
            adapt_set=adapt_set,
            epochs=cfg.adapt_epochs,
            batch_size=cfg.adapt_batch_size,
            learning_rate=cfg.adapt_learning_rate,
            label_smoothing=cfg.label_smoothing,
            seed=cfg.seed,
        )
    )
    save_model(adapted, args.out)
    traj_path = args.trajectory or args.out + ".pcen_trajectory.csv"
    lines = ["epoch,channel,s,alpha,delta,gamma"]
    for epoch, p in enumerate(history.pcen_trajectory):
        for ch in range(p.n_channels):
            lines.append(
                f"{epoch},{ch},{format(p.s[ch], _FMT)},{format(p.alpha[ch], _FMT)},"
                f"{format(p.delta[ch], _FMT)},{format(p.gamma[ch], _FMT)}"
            )
    with open(traj_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0


def cmd_analyze(args) -> int:
    initial = load_model(args.initial)
    trained = load_model(args.trained)
    os.makedirs(args.out, exist_ok=True)
    report = drift_report(initial.frontend, trained.frontend)
    write_drift_csv(report, os.path.join(args.out, "drift.csv"))
    freq_grid = np.linspace(0.0, 0.5, 257)
    write_gaussian_response_csv(
        trained.frontend.pool, freq_grid, os.path.join(args.out, "gaussian_response.csv")
    )
    energy_grid = np.logspace(-6.0, 2.0, 121)
    write_gain_curve_csv(
        trained.frontend.pcen, energy_grid, os.path.join(args.out, "pcen_gains.csv")
    )
    return 0


def cmd_protocol(args) -> int:
    cfg = _load_cfg(args.toy_config)
    protocol = ProtocolConfig(
        seeds=tuple(cfg.protocol_seeds),
        n_channels=cfg.n_channels,
        epochs=cfg.protocol_epochs,
        batch_size=cfg.protocol_batch_size,
        learning_rate=cfg.learning_rate,
        adapt_epochs=cfg.adapt_epochs,
        adapt_learning_rate=cfg.adapt_learning_rate,
        adapt_batch_size=cfg.adapt_batch_size,
        test_per_class=cfg.test_per_class,
        adapt_per_class=cfg.adapt_per_class,
        babble_sources=cfg.babble_sources,
        hidden=cfg.hidden_units,
        loudness=cfg.loudness(),
    )
    outcome = run_noise_protocol(
        cfg.toy_spec(), cfg.noise_kinds, cfg.snr_grid, protocol
    )
    write_results_csv(outcome.rows, args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaborfe",
        description="Learnable Gabor front-end: feature extraction, training, "
        "PCEN adaptation and analysis.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="extract features from a WAV file to CSV")
    p.add_argument("--in", dest="infile", required=True, help="input WAV (mono 16-bit PCM)")
    p.add_argument("--out", required=True, help="output CSV, one frame per row")
    p.add_argument("--config", default=None, help="optional key=value config file")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train a classifier under a freeze regime")
    p.add_argument("--manifest", required=True, help="path,label,split manifest CSV")
    p.add_argument("--regime", required=True, choices=sorted(REGIME_MASKS))
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--history", default=None, help="history CSV (default: <out>.history.csv)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("adapt", help="tune only PCEN on a noisy adapt split")
    p.add_argument("--model", required=True, help="source model file")
    p.add_argument("--manifest", required=True, help="manifest providing the adapt split")
    p.add_argument("--noise", required=True, help="kind:snr, e.g. gaussian:0")
    p.add_argument("--config", default=None)
    p.add_argument("--out", required=True, help="output (adapted) model file")
    p.add_argument(
        "--trajectory", default=None,
        help="PCEN trajectory CSV (default: <out>.pcen_trajectory.csv)",
    )
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("analyze", help="parameter drift and response reports")
    p.add_argument("--initial", required=True, help="initial model file")
    p.add_argument("--trained", required=True, help="trained model file")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("protocol", help="run the four-model noise protocol on toy data")
    p.add_argument("--toy-config", dest="toy_config", default=None)
    p.add_argument("--out", required=True, help="results CSV")
    p.set_defaults(func=cmd_protocol)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TrainingDivergenceError as exc:
        print(f"error: training diverged: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:  # ParseError et al. are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
