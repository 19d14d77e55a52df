"""Adam over named parameter groups, range projection, and gradient checking.

Parameters live in plain ``{name: ndarray}`` dicts so the same optimizer
drives front-end parameters and classifier weights alike.  A step may carry a
per-name boolean mask; masked-out parameters are passed through untouched
(values and moments).  After each update, parameters with a registered range
are clipped back into it, which keeps every downstream invariant (positive
bandwidths, smoother coefficients in (0, 1], ...) intact during training.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TrainingDivergenceError",
    "AdamState",
    "DEFAULT_RANGES",
    "adam_step",
    "finite_diff_check",
]


class TrainingDivergenceError(RuntimeError):
    """Raised when training produces non-finite losses or gradients."""


# Projection ranges applied after each update.  The PCEN ranges pin the
# normalizer to its valid domain; the filter/pooling ranges are safety clamps
# well outside any trajectory a sane run visits, present so that parameter
# validity is an invariant of training rather than a hope.
DEFAULT_RANGES = {
    "pcen_s": (1e-4, 1.0),
    "pcen_alpha": (0.0, 2.0),
    "pcen_delta": (1e-3, 16.0),
    "pcen_gamma": (1e-3, 4.0),
    "centre_freq": (1e-4, 0.4999),
    "fwhm": (1e-4, 0.4999),
    "pool_sigma": (1e-3, 1.0),
}


@dataclass
class AdamState:
    """First/second moment estimates and step count for named parameters."""

    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step_count: int = 0
    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params: dict, learning_rate=1e-4) -> "AdamState":
        """Zero-initialized state matching the shapes of ``params``."""
        return cls(
            m={k: np.zeros_like(np.asarray(p, dtype=float)) for k, p in params.items()},
            v={k: np.zeros_like(np.asarray(p, dtype=float)) for k, p in params.items()},
            step_count=0,
            learning_rate=float(learning_rate),
        )


def adam_step(params: dict, grads: dict, state: AdamState, mask=None, ranges=None) -> dict:
    """One bias-corrected Adam update over a named parameter dict.

    Returns a new ``{name: ndarray}`` dict and advances ``state`` in place.
    ``mask`` maps names to booleans; names absent from the mask default to
    trainable.  ``ranges`` maps names to (lo, hi) projection bounds and
    defaults to :data:`DEFAULT_RANGES`.  Zero gradients leave parameters
    bit-identical; non-finite gradients raise
    :class:`TrainingDivergenceError`.
    """
    if ranges is None:
        ranges = DEFAULT_RANGES
    if set(grads) != set(params):
        raise ValueError("grads must provide exactly the parameter names")
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise TrainingDivergenceError(
                f"non-finite gradient for parameter {name!r}"
            )

    state.step_count += 1
    t = state.step_count
    bias1 = 1.0 - state.beta1**t
    bias2 = 1.0 - state.beta2**t

    updated = {}
    for name, p in params.items():
        if mask is not None and not mask.get(name, True):
            updated[name] = p
            continue
        g = np.asarray(grads[name], dtype=float)
        if name not in state.m:
            state.m[name] = np.zeros_like(g)
            state.v[name] = np.zeros_like(g)
        state.m[name] = state.beta1 * state.m[name] + (1.0 - state.beta1) * g
        state.v[name] = state.beta2 * state.v[name] + (1.0 - state.beta2) * g**2
        m_hat = state.m[name] / bias1
        v_hat = state.v[name] / bias2
        new_p = p - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
        if name in ranges:
            lo, hi = ranges[name]
            new_p = np.clip(new_p, lo, hi)
        updated[name] = new_p
    return updated


def finite_diff_check(loss_fn, params: dict, analytic: dict, h=1e-6) -> float:
    """Largest relative error between analytic and central-difference grads.

    ``loss_fn`` maps a parameter dict to a scalar.  Every entry of every
    parameter is perturbed by ``+/- h`` in turn; the relative error uses
    ``max(|analytic|, |numeric|, 1e-12)`` as denominator so zero gradients
    compare exactly.
    """
    if not h > 0.0:
        raise ValueError("finite-difference step h must be positive")
    worst = 0.0
    base = {k: np.asarray(v, dtype=float).copy() for k, v in params.items()}
    for name, values in base.items():
        a_grad = np.asarray(analytic[name], dtype=float)
        if a_grad.shape != values.shape:
            raise ValueError(f"analytic gradient shape mismatch for {name!r}")
        flat = values.ravel()
        for idx in range(flat.size):
            keep = flat[idx]
            flat[idx] = keep + h
            hi = loss_fn(base)
            flat[idx] = keep - h
            lo = loss_fn(base)
            flat[idx] = keep
            numeric = (hi - lo) / (2.0 * h)
            a_val = a_grad.ravel()[idx]
            denom = max(abs(a_val), abs(numeric), 1e-12)
            worst = max(worst, abs(a_val - numeric) / denom)
    return worst
