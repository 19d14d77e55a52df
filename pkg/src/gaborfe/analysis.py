"""Parameter forensics: what did training actually change?

Compares two front-end parameter sets channel by channel (drift report),
tabulates the frequency response of the pooling kernels and the steady-state
PCEN gain curves, and round-trips everything through small documented CSV
formats with 17-significant-digit floats so reports written by one process
parse back exactly in another.
"""

from dataclasses import dataclass

import numpy as np

from .filterbank import GaussianPoolParams, pool_kernels
from .frontend import FrontendParams
from .pcen import PcenParams, gain_curve

__all__ = [
    "DriftReport",
    "drift_report",
    "gaussian_response_table",
    "gain_curve_table",
    "write_drift_csv",
    "read_drift_csv",
    "write_gaussian_response_csv",
    "read_gaussian_response_csv",
    "write_gain_curve_csv",
    "read_gain_curve_csv",
]

_FMT = ".17g"

# field order is the CSV contract for drift files
_DELTA_FIELDS = (
    "centre_freq",
    "centre_freq_hz",
    "fwhm",
    "fwhm_hz",
    "pool_sigma",
    "pcen_s",
    "pcen_alpha",
    "pcen_delta",
    "pcen_gamma",
)
_GROUPS = ("filters", "pooling", "pcen")


@dataclass
class DriftReport:
    """Per-channel parameter deltas (trained minus initial) plus group norms.

    Frequency deltas appear twice: in cycles/sample and in Hz.  The group
    norms are relative L2 changes ``||delta|| / ||initial||`` for the three
    trainable groups: filters (centre_freq and fwhm, normalized units),
    pooling (sigma) and pcen (s, alpha, delta, gamma concatenated).
    """

    deltas: dict  # field name -> (n_channels,) array, fields as in _DELTA_FIELDS
    group_relnorm: dict  # group name -> float

    @property
    def n_channels(self) -> int:
        return next(iter(self.deltas.values())).size


def _relnorm(deltas, initials) -> float:
    num = np.sqrt(sum(float(np.sum(d**2)) for d in deltas))
    den = np.sqrt(sum(float(np.sum(v**2)) for v in initials))
    return num / den


def drift_report(initial: FrontendParams, trained: FrontendParams) -> DriftReport:
    """Elementwise parameter drift and relative group norms.

    ``drift_report(x, x)`` is identically zero, and swapping the arguments
    negates every delta (group norms are unchanged).
    """
    if initial.n_channels != trained.n_channels:
        raise ValueError("parameter sets have different channel counts")
    if initial.sample_rate_hz != trained.sample_rate_hz:
        raise ValueError("parameter sets have different sample rates")
    sr = initial.sample_rate_hz
    d_freq = trained.bank.centre_freq - initial.bank.centre_freq
    d_fwhm = trained.bank.fwhm - initial.bank.fwhm
    deltas = {
        "centre_freq": d_freq,
        "centre_freq_hz": d_freq * sr,
        "fwhm": d_fwhm,
        "fwhm_hz": d_fwhm * sr,
        "pool_sigma": trained.pool.sigma - initial.pool.sigma,
        "pcen_s": trained.pcen.s - initial.pcen.s,
        "pcen_alpha": trained.pcen.alpha - initial.pcen.alpha,
        "pcen_delta": trained.pcen.delta - initial.pcen.delta,
        "pcen_gamma": trained.pcen.gamma - initial.pcen.gamma,
    }
    group_relnorm = {
        "filters": _relnorm(
            [d_freq, d_fwhm], [initial.bank.centre_freq, initial.bank.fwhm]
        ),
        "pooling": _relnorm([deltas["pool_sigma"]], [initial.pool.sigma]),
        "pcen": _relnorm(
            [deltas["pcen_s"], deltas["pcen_alpha"], deltas["pcen_delta"], deltas["pcen_gamma"]],
            [initial.pcen.s, initial.pcen.alpha, initial.pcen.delta, initial.pcen.gamma],
        ),
    }
    return DriftReport(deltas, group_relnorm)


def gaussian_response_table(pool: GaussianPoolParams, freq_grid) -> np.ndarray:
    """Magnitude response of each channel's pooling kernel on a frequency grid.

    The grid is in cycles/sample within [0, 0.5]; the result has shape
    ``(n_channels, len(freq_grid))`` with magnitude 1 at DC because kernels
    are unit-sum.
    """
    grid = np.atleast_1d(np.asarray(freq_grid, dtype=float))
    if grid.size == 0 or np.any(grid < 0.0) or np.any(grid > 0.5):
        raise ValueError("freq_grid entries must lie within [0, 0.5] cycles/sample")
    kernels = pool_kernels(pool)
    centre = (pool.kernel_len - 1) / 2.0
    offsets = np.arange(pool.kernel_len) - centre
    phases = np.exp(-2j * np.pi * offsets[:, None] * grid[None, :])
    return np.abs(kernels @ phases)


def gain_curve_table(pcen: PcenParams, grid):
    """Per-channel steady-state gain curves; returns (gain, gain_db) tables.

    Both tables have shape ``(n_channels, len(grid))``; the grid must be
    strictly positive energies.
    """
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    gains = np.empty((pcen.n_channels, grid.size))
    gains_db = np.empty_like(gains)
    for c in range(pcen.n_channels):
        _, gains[c], gains_db[c] = gain_curve(pcen, c, grid)
    return gains, gains_db


# ---------------------------------------------------------------------------
# CSV round-trips
# ---------------------------------------------------------------------------


def _fmt(x) -> str:
    return format(float(x), _FMT)


def write_drift_csv(report: DriftReport, path):
    """Long-format drift file: kind,channel,field,value.

    Per-channel deltas use ``kind=delta``; group norms use ``kind=relnorm``
    with an empty channel column.
    """
    lines = ["kind,channel,field,value"]
    for name in _DELTA_FIELDS:
        values = report.deltas[name]
        for ch in range(values.size):
            lines.append(f"delta,{ch},{name},{_fmt(values[ch])}")
    for group in _GROUPS:
        lines.append(f"relnorm,,{group},{_fmt(report.group_relnorm[group])}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_drift_csv(path) -> DriftReport:
    """Exact inverse of :func:`write_drift_csv`."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "kind,channel,field,value":
        raise ValueError("not a drift file: bad header")
    cells = {}
    relnorm = {}
    for ln in lines[1:]:
        kind, channel, fieldname, value = ln.split(",")
        if kind == "delta":
            cells.setdefault(fieldname, {})[int(channel)] = float(value)
        elif kind == "relnorm":
            relnorm[fieldname] = float(value)
        else:
            raise ValueError(f"unknown drift row kind {kind!r}")
    deltas = {}
    for name in _DELTA_FIELDS:
        if name not in cells:
            raise ValueError(f"drift file is missing field {name!r}")
        per_channel = cells[name]
        n = max(per_channel) + 1
        deltas[name] = np.array([per_channel[i] for i in range(n)])
    for group in _GROUPS:
        if group not in relnorm:
            raise ValueError(f"drift file is missing group norm {group!r}")
    return DriftReport(deltas, relnorm)


def write_gaussian_response_csv(pool: GaussianPoolParams, freq_grid, path):
    """Response table as channel,freq,magnitude rows."""
    grid = np.atleast_1d(np.asarray(freq_grid, dtype=float))
    table = gaussian_response_table(pool, grid)
    lines = ["channel,freq,magnitude"]
    for ch in range(table.shape[0]):
        for j, f in enumerate(grid):
            lines.append(f"{ch},{_fmt(f)},{_fmt(table[ch, j])}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_gaussian_response_csv(path):
    """Returns (freq_grid, table) parsed back exactly."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "channel,freq,magnitude":
        raise ValueError("not a response file: bad header")
    by_channel = {}
    for ln in lines[1:]:
        ch, f, mag = ln.split(",")
        by_channel.setdefault(int(ch), []).append((float(f), float(mag)))
    n = max(by_channel) + 1
    grid = np.array([f for f, _ in by_channel[0]])
    table = np.array([[m for _, m in by_channel[c]] for c in range(n)])
    return grid, table


def write_gain_curve_csv(pcen: PcenParams, grid, path):
    """Gain curves as channel,energy,gain,gain_db rows."""
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    gains, gains_db = gain_curve_table(pcen, grid)
    lines = ["channel,energy,gain,gain_db"]
    for ch in range(gains.shape[0]):
        for j, e in enumerate(grid):
            lines.append(f"{ch},{_fmt(e)},{_fmt(gains[ch, j])},{_fmt(gains_db[ch, j])}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_gain_curve_csv(path):
    """Returns (grid, gain_table, gain_db_table) parsed back exactly."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != "channel,energy,gain,gain_db":
        raise ValueError("not a gain-curve file: bad header")
    by_channel = {}
    for ln in lines[1:]:
        ch, e, g, gdb = ln.split(",")
        by_channel.setdefault(int(ch), []).append((float(e), float(g), float(gdb)))
    n = max(by_channel) + 1
    grid = np.array([e for e, _, _ in by_channel[0]])
    gains = np.array([[g for _, g, _ in by_channel[c]] for c in range(n)])
    gains_db = np.array([[x for _, _, x in by_channel[c]] for c in range(n)])
    return grid, gains, gains_db
