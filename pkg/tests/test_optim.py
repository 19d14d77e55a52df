"""Adam optimizer tests: closed-form first steps, moment recursions,
masking, range projection, and the finite-difference checker itself."""

import numpy as np
import pytest

from gaborfe.optim import (
    DEFAULT_RANGES,
    AdamState,
    TrainingDivergenceError,
    adam_step,
    finite_diff_check,
)


def adam_oracle(params, grads, lr, beta1, beta2, eps, n_steps):
    """Textbook Adam recursion in scalar form."""
    p = {k: np.asarray(v, dtype=float).copy() for k, v in params.items()}
    m = {k: np.zeros_like(v) for k, v in p.items()}
    v = {k: np.zeros_like(val) for k, val in p.items()}
    for t in range(1, n_steps + 1):
        for k in p:
            g = np.asarray(grads[k], dtype=float)
            m[k] = beta1 * m[k] + (1 - beta1) * g
            v[k] = beta2 * v[k] + (1 - beta2) * g**2
            m_hat = m[k] / (1 - beta1**t)
            v_hat = v[k] / (1 - beta2**t)
            p[k] = p[k] - lr * m_hat / (np.sqrt(v_hat) + eps)
    return p


class TestAdamStep:
    def test_first_step_magnitude_is_learning_rate(self):
        # with bias correction, the first step is lr * g/(|g| + eps') ~ lr * sign(g)
        params = {"w": np.array([1.0, -2.0, 3.0])}
        grads = {"w": np.array([0.5, -0.1, 2.0])}
        state = AdamState.for_params(params, learning_rate=0.01)
        new = adam_step(params, grads, state, ranges={})
        step = new["w"] - params["w"]
        np.testing.assert_allclose(step, -0.01 * np.sign(grads["w"]), rtol=1e-6)

    def test_matches_reference_recursion_over_many_steps(self):
        rng = np.random.default_rng(0)
        params = {"a": rng.standard_normal(4), "b": rng.standard_normal((2, 3))}
        grads = {"a": rng.standard_normal(4), "b": rng.standard_normal((2, 3))}
        state = AdamState.for_params(params, learning_rate=0.05)
        p = params
        for _ in range(25):
            p = adam_step(p, grads, state, ranges={})
        want = adam_oracle(params, grads, 0.05, 0.9, 0.999, 1e-8, 25)
        np.testing.assert_allclose(p["a"], want["a"], rtol=1e-12)
        np.testing.assert_allclose(p["b"], want["b"], rtol=1e-12)

    def test_zero_gradient_is_bit_identical(self):
        params = {"w": np.array([0.25, 0.5])}
        state = AdamState.for_params(params)
        for _ in range(5):
            new = adam_step(params, {"w": np.zeros(2)}, state, ranges={})
            np.testing.assert_array_equal(new["w"], params["w"])
            params = new

    def test_masked_parameter_is_same_object_and_moments_untouched(self):
        params = {"w": np.array([1.0]), "frozen": np.array([2.0, 3.0])}
        grads = {"w": np.array([0.5]), "frozen": np.array([10.0, -10.0])}
        state = AdamState.for_params(params, learning_rate=0.1)
        new = adam_step(params, grads, state, mask={"frozen": False}, ranges={})
        assert new["frozen"] is params["frozen"]
        np.testing.assert_array_equal(state.m["frozen"], np.zeros(2))
        np.testing.assert_array_equal(state.v["frozen"], np.zeros(2))
        assert new["w"][0] != params["w"][0]

    def test_mask_defaults_to_trainable(self):
        params = {"w": np.array([1.0])}
        grads = {"w": np.array([1.0])}
        state = AdamState.for_params(params, learning_rate=0.1)
        new = adam_step(params, grads, state, mask={}, ranges={})
        assert new["w"][0] != 1.0

    def test_range_projection_clips(self):
        params = {"pcen_s": np.array([1e-4 + 1e-7])}
        grads = {"pcen_s": np.array([1.0])}  # pushes s below its floor
        state = AdamState.for_params(params, learning_rate=0.5)
        new = adam_step(params, grads, state)
        assert new["pcen_s"][0] == DEFAULT_RANGES["pcen_s"][0]

    def test_names_without_range_are_unclipped(self):
        params = {"bias": np.array([0.0])}
        grads = {"bias": np.array([-1.0])}
        state = AdamState.for_params(params, learning_rate=5.0)
        new = adam_step(params, grads, state)
        assert new["bias"][0] == pytest.approx(5.0, rel=1e-6)

    def test_custom_ranges_override_defaults(self):
        params = {"pcen_delta": np.array([2.0])}
        grads = {"pcen_delta": np.array([-1.0])}
        state = AdamState.for_params(params, learning_rate=100.0)
        new = adam_step(params, grads, state, ranges={"pcen_delta": (0.0, 3.0)})
        assert new["pcen_delta"][0] == 3.0

    def test_nonfinite_gradient_raises(self):
        params = {"w": np.array([1.0])}
        state = AdamState.for_params(params)
        with pytest.raises(TrainingDivergenceError, match="'w'"):
            adam_step(params, {"w": np.array([np.nan])}, state)
        with pytest.raises(TrainingDivergenceError):
            adam_step(params, {"w": np.array([np.inf])}, state)

    def test_gradient_name_mismatch_raises(self):
        params = {"w": np.array([1.0])}
        state = AdamState.for_params(params)
        with pytest.raises(ValueError, match="parameter names"):
            adam_step(params, {"other": np.array([1.0])}, state)
        with pytest.raises(ValueError, match="parameter names"):
            adam_step(params, {}, state)

    def test_descends_a_quadratic(self):
        target = np.array([3.0, -1.0])
        params = {"w": np.zeros(2)}
        state = AdamState.for_params(params, learning_rate=0.05)
        for _ in range(2000):
            grads = {"w": 2.0 * (params["w"] - target)}
            params = adam_step(params, grads, state, ranges={})
        np.testing.assert_allclose(params["w"], target, atol=1e-3)

    def test_input_params_never_mutated(self):
        params = {"w": np.array([1.0, 2.0])}
        snapshot = params["w"].copy()
        state = AdamState.for_params(params, learning_rate=0.1)
        adam_step(params, {"w": np.array([1.0, -1.0])}, state, ranges={})
        np.testing.assert_array_equal(params["w"], snapshot)


class TestFiniteDiffCheck:
    def test_accepts_correct_gradient(self):
        A = np.array([[2.0, 0.3], [0.3, 1.0]])

        def loss(p):
            w = p["w"]
            return float(w @ A @ w)

        w0 = np.array([0.7, -1.2])
        analytic = {"w": 2.0 * A @ w0}
        err = finite_diff_check(loss, {"w": w0}, analytic)
        assert err < 1e-8

    def test_flags_wrong_gradient(self):
        def loss(p):
            return float(np.sum(p["w"] ** 2))

        w0 = np.array([1.0, 2.0])
        wrong = {"w": 2.0 * w0 * 1.05}  # 5% off
        err = finite_diff_check(loss, {"w": w0}, wrong)
        assert err > 1e-2

    def test_zero_gradients_compare_exactly(self):
        def loss(p):
            return 7.0  # constant

        err = finite_diff_check(loss, {"w": np.array([1.0])}, {"w": np.array([0.0])})
        assert err == 0.0

    def test_rejects_bad_step_and_shape(self):
        def loss(p):
            return float(np.sum(p["w"]))

        with pytest.raises(ValueError, match="positive"):
            finite_diff_check(loss, {"w": np.ones(2)}, {"w": np.ones(2)}, h=0.0)
        with pytest.raises(ValueError, match="shape"):
            finite_diff_check(loss, {"w": np.ones(2)}, {"w": np.ones(3)})
