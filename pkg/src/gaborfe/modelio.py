"""Flat-text model persistence.

A model file is line-oriented ``key = value`` text in five fixed sections —
``[gabor]``, ``[pool]``, ``[pcen]``, ``[backend]``, ``[meta]`` — with arrays
written as comma-separated floats at 17 significant digits (and matrices
flattened row-major).  The format contains nothing volatile: saving the same
model twice produces byte-identical files, and frozen parameter groups keep
their sections byte-identical across training or adaptation runs.
"""

import numpy as np

from .audio_io import ParseError
from .filterbank import GaborBankParams, GaussianPoolParams
from .frontend import FrontendParams, TrainMask
from .pcen import PcenParams
from .trainer import BackendParams, TrainedModel

__all__ = ["save_model", "load_model", "FORMAT_NAME"]

FORMAT_NAME = "gaborfe-model-1"

_SECTION_KEYS = {
    "gabor": ("centre_freq", "fwhm", "kernel_len"),
    "pool": ("sigma", "kernel_len", "stride"),
    "pcen": ("s", "alpha", "delta", "gamma", "epsilon"),
    "backend": ("hidden", "n_classes", "w1", "b1", "w2", "b2"),
    "meta": ("format", "sample_rate_hz", "train_mask", "labels"),
}


def _fmt_float(x) -> str:
    return format(float(x), ".17g")


def _fmt_array(arr) -> str:
    return ",".join(_fmt_float(v) for v in np.asarray(arr, dtype=float).ravel())


def save_model(model: TrainedModel, path):
    """Write a model file; see the module docstring for the format."""
    fe = model.frontend
    be = model.backend
    labels = model.label_names
    if labels is None:
        labels = [str(i) for i in range(be.n_classes)]
    if len(labels) != be.n_classes:
        raise ValueError("label_names length must equal the number of classes")
    for name in labels:
        if "," in str(name) or "\n" in str(name):
            raise ValueError(f"label {name!r} must not contain commas or newlines")
    mask = fe.train_mask
    lines = [
        "[gabor]",
        f"centre_freq = {_fmt_array(fe.bank.centre_freq)}",
        f"fwhm = {_fmt_array(fe.bank.fwhm)}",
        f"kernel_len = {fe.bank.kernel_len}",
        "[pool]",
        f"sigma = {_fmt_array(fe.pool.sigma)}",
        f"kernel_len = {fe.pool.kernel_len}",
        f"stride = {fe.pool.stride}",
        "[pcen]",
        f"s = {_fmt_array(fe.pcen.s)}",
        f"alpha = {_fmt_array(fe.pcen.alpha)}",
        f"delta = {_fmt_array(fe.pcen.delta)}",
        f"gamma = {_fmt_array(fe.pcen.gamma)}",
        f"epsilon = {_fmt_float(fe.pcen.epsilon)}",
        "[backend]",
        f"hidden = {be.hidden}",
        f"n_classes = {be.n_classes}",
        f"w1 = {_fmt_array(be.w1)}",
        f"b1 = {_fmt_array(be.b1)}",
        f"w2 = {_fmt_array(be.w2)}",
        f"b2 = {_fmt_array(be.b2)}",
        "[meta]",
        f"format = {FORMAT_NAME}",
        f"sample_rate_hz = {_fmt_float(fe.sample_rate_hz)}",
        f"train_mask = {int(mask.filters)},{int(mask.pooling)},{int(mask.pcen)}",
        f"labels = {','.join(str(name) for name in labels)}",
    ]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_sections(path) -> dict:
    sections = {}
    current_name = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line.startswith("[") and line.endswith("]"):
                name = line[1:-1]
                if name not in _SECTION_KEYS:
                    raise ParseError(f"{path}:{lineno}: unknown section [{name}]")
                if name in sections:
                    raise ParseError(f"{path}:{lineno}: duplicate section [{name}]")
                sections[name] = {}
                current_name = name
                continue
            if current_name is None:
                raise ParseError(f"{path}:{lineno}: key outside any section")
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _SECTION_KEYS[current_name]:
                raise ParseError(f"{path}:{lineno}: unknown key {key!r} in [{current_name}]")
            if key in sections[current_name]:
                raise ParseError(f"{path}:{lineno}: duplicate key {key!r}")
            sections[current_name][key] = value.strip()
    for name, keys in _SECTION_KEYS.items():
        if name not in sections:
            raise ParseError(f"{path}: missing section [{name}]")
        for key in keys:
            if key not in sections[name]:
                raise ParseError(f"{path}: missing key {key!r} in [{name}]")
    return sections


def _floats(text) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise ParseError(f"bad float array: {exc}") from None


def load_model(path) -> TrainedModel:
    """Read a model file written by :func:`save_model`."""
    sections = _parse_sections(path)
    meta = sections["meta"]
    if meta["format"] != FORMAT_NAME:
        raise ParseError(f"{path}: unsupported format {meta['format']!r}")
    try:
        bank = GaborBankParams(
            _floats(sections["gabor"]["centre_freq"]),
            _floats(sections["gabor"]["fwhm"]),
            int(sections["gabor"]["kernel_len"]),
        )
        pool = GaussianPoolParams(
            _floats(sections["pool"]["sigma"]),
            int(sections["pool"]["kernel_len"]),
            int(sections["pool"]["stride"]),
        )
        pcen = PcenParams(
            _floats(sections["pcen"]["s"]),
            _floats(sections["pcen"]["alpha"]),
            _floats(sections["pcen"]["delta"]),
            _floats(sections["pcen"]["gamma"]),
            float(sections["pcen"]["epsilon"]),
        )
        mask_bits = sections["meta"]["train_mask"].split(",")
        if len(mask_bits) != 3 or any(b not in ("0", "1") for b in mask_bits):
            raise ParseError(f"{path}: train_mask must be three 0/1 flags")
        mask = TrainMask(*(b == "1" for b in mask_bits))
        fe = FrontendParams(bank, pool, pcen, mask, float(meta["sample_rate_hz"]))
        hidden = int(sections["backend"]["hidden"])
        n_classes = int(sections["backend"]["n_classes"])
        n_channels = bank.n_channels
        be = BackendParams(
            _floats(sections["backend"]["w1"]).reshape(hidden, n_channels),
            _floats(sections["backend"]["b1"]),
            _floats(sections["backend"]["w2"]).reshape(n_classes, hidden),
            _floats(sections["backend"]["b2"]),
        )
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    labels = meta["labels"].split(",")
    if len(labels) != n_classes:
        raise ParseError(f"{path}: labels count does not match n_classes")
    return TrainedModel(fe, be, labels)
