"""Tests for the Adam optimizer."""

import numpy as np
import pytest

from dagfil.core.errors import ContractError, ShapeError
from dagfil.numerics import Adam, AdamState, Parameter, adam_step, backward, sum


class TestAdamStep:
    """Test cases for the pure update rule."""

    def test_zero_gradient_leaves_params(self):
        """Zero gradients move nothing but the step counter advances."""
        params = [np.array([1.0, -2.0])]
        state = AdamState.zeros_like(params)
        new, state = adam_step(params, [np.zeros(2)], state)
        assert np.array_equal(new[0], params[0])
        assert state.step == 1

    def test_first_step_is_lr_times_sign(self):
        """From zeroed moments the first update is about −lr·sign(g)."""
        params = [np.array([0.0, 0.0])]
        state = AdamState.zeros_like(params, lr=1e-3)
        new, _ = adam_step(params, [np.array([5.0, -3.0])], state)
        assert np.allclose(new[0], [-1e-3, 1e-3], rtol=1e-6)

    def test_deterministic(self):
        """Identical inputs give bit-identical outputs."""
        rng = np.random.default_rng(0)
        params = [rng.normal(size=(3, 2))]
        grads = [rng.normal(size=(3, 2))]
        state = AdamState.zeros_like(params)
        a, sa = adam_step(params, grads, state)
        b, sb = adam_step(params, grads, state)
        assert a[0].tobytes() == b[0].tobytes()
        assert sa.m[0].tobytes() == sb.m[0].tobytes()

    def test_length_mismatch(self):
        """Parameter and gradient counts must agree."""
        params = [np.zeros(2), np.zeros(3)]
        with pytest.raises(ShapeError):
            adam_step(params, [np.zeros(2)], AdamState.zeros_like(params))

    def test_shape_mismatch(self):
        """Each gradient must match its parameter."""
        params = [np.zeros(2)]
        with pytest.raises(ShapeError):
            adam_step(params, [np.zeros(3)], AdamState.zeros_like(params))

    def test_non_positive_learning_rate(self):
        """The learning rate must be positive."""
        params = [np.zeros(2)]
        with pytest.raises(ContractError):
            adam_step(params, [np.zeros(2)], AdamState.zeros_like(params, lr=0.0))


class TestAdam:
    """Test cases for the parameter-level optimizer."""

    def test_skips_parameters_without_gradient(self):
        """A parameter that received no gradient is untouched and keeps its state."""
        a = Parameter(np.ones(2), "a")
        b = Parameter(np.ones(2), "b")
        opt = Adam([a, b], lr=0.1)
        backward(sum(a * a))
        assert opt.step() == 1
        assert np.array_equal(b.data, np.ones(2))
        assert opt.states["b"].step == 0
        assert opt.states["a"].step == 1

    def test_descends_quadratic(self):
        """Repeated steps shrink a quadratic."""
        x = Parameter(np.array([3.0, -4.0]), "x")
        opt = Adam([x], lr=0.1)
        for _ in range(200):
            opt.zero_grad()
            backward(sum(x * x))
            opt.step()
        assert np.all(np.abs(x.data) < 0.5)
