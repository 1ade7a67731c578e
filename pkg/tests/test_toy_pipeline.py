# tests/test_toy_pipeline.py
"""
Tests for the toy permutation-invariant autoencoder: gradients, invariance and training.
"""
import numpy as np
import pytest
from pydantic import ValidationError

from analysis.probing import cross_validate
from core.errors import DimensionMismatchError, PreconditionError
from core.rng import Rng
from core.types import Codebook
from data_generator import generate_dataset, stack_images
from features.presence import build_presence
from models.toy import (
    PARAMETER_NAMES,
    ToyArchitecture,
    backward,
    decode_codes,
    decode_indices,
    decode_pooled,
    encode,
    forward,
    init_model,
)
from sampling.interpolation import interpolate
from training.toy import ToyConfig, train_toy

H = 1e-5
ARCH = ToyArchitecture(image_size=4, L=3, d=4, K=8, hidden=5)


def _setup(seed=0, batch=2):
    rng = Rng(seed)
    model = init_model(ARCH, rng)
    # spread the codebook so that quantization is not degenerate
    model.codebook = Codebook(rng.normal(size=(ARCH.K, ARCH.d)))
    images = rng.uniform(0.0, 1.0, size=(batch, ARCH.image_size, ARCH.image_size))
    upstream = rng.normal(size=(batch, ARCH.pixels))
    return model, images, upstream


def _relative_error(analytic, numeric):
    scale = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), 1e-12)
    return float(np.max(np.abs(analytic - numeric)) / scale)


def _finite_difference(loss, params, name):
    grad = np.zeros_like(params[name])
    for idx in np.ndindex(grad.shape):
        original = params[name][idx]
        params[name][idx] = original + H
        plus = loss()
        params[name][idx] = original - H
        minus = loss()
        params[name][idx] = original
        grad[idx] = (plus - minus) / (2 * H)
    return grad


class TestGradients:
    def test_decoder_parameters(self):
        model, images, upstream = _setup()
        _, _, cache = forward(model, images)
        grads = backward(model, cache, upstream)

        def loss():
            _, y = decode_pooled(model, cache.pooled)
            return float(np.sum(upstream * y))

        for name in ("V1", "c1", "V2", "c2"):
            assert _relative_error(grads[name], _finite_difference(loss, model.params, name)) < 1e-4

    def test_encoder_parameters_through_straight_through(self):
        model, images, upstream = _setup(seed=1)
        beta = 0.3
        _, _, cache = forward(model, images)
        grads = backward(model, cache, upstream, commitment_beta=beta)
        offset = cache.decoder_input - cache.z_e
        z_q = cache.decoder_input.copy()
        x = images.reshape(images.shape[0], -1)

        def surrogate():
            _, z_e = encode(model, x)
            _, y = decode_pooled(model, (z_e + offset).sum(axis=1))
            return float(np.sum(upstream * y) + beta * np.sum((z_e - z_q) ** 2))

        for name in ("W1", "b1", "W2", "b2"):
            assert _relative_error(grads[name], _finite_difference(surrogate, model.params, name)) < 1e-4

    def test_codebook_gradient(self):
        model, images, upstream = _setup(seed=2)
        weight = 0.7
        _, _, cache = forward(model, images)
        grads = backward(model, cache, upstream, codebook_weight=weight)
        entries = {"codebook": np.array(model.codebook.entries)}
        flat = cache.indices.ravel()
        z_e = cache.z_e.reshape(-1, ARCH.d)

        def loss():
            return float(weight * np.sum((z_e - entries["codebook"][flat]) ** 2))

        numeric = _finite_difference(loss, entries, "codebook")
        assert _relative_error(grads["codebook"], numeric) < 1e-4

    def test_codebook_has_no_gradient_from_reconstruction(self):
        model, images, upstream = _setup(seed=3)
        _, _, cache = forward(model, images)
        grads = backward(model, cache, upstream, commitment_beta=0.5)
        assert not np.any(grads["codebook"])

    def test_zero_upstream_gradient(self):
        model, images, _ = _setup(seed=4)
        _, _, cache = forward(model, images)
        grads = backward(model, cache, np.zeros((2, ARCH.pixels)))
        for name in PARAMETER_NAMES + ("codebook",):
            assert not np.any(grads[name])

    def test_unquantized_pass(self):
        model, images, upstream = _setup(seed=5)
        _, results, cache = forward(model, images, quantize=False)
        assert results is None
        grads = backward(model, cache, upstream, commitment_beta=1.0)
        assert not np.any(grads["codebook"])


class TestPermutationInvariance:
    def test_untrained_forward(self):
        model = init_model(ToyArchitecture(), Rng(0))
        image = generate_dataset(1, Rng(1))[0].image
        reconstruction, result, _ = forward(model, image)
        assert reconstruction.shape == (8, 8)
        assert np.all(np.isfinite(reconstruction))
        assert result.code_set.length == 8

    def test_any_order_decodes_bit_identically(self, rng):
        model, images, _ = _setup(seed=6)
        _, results, _ = forward(model, images)
        for result in results:
            base = decode_indices(model, result.indices)
            for _ in range(100):
                shuffled = rng.permutation(list(result.indices))
                assert np.array_equal(decode_indices(model, shuffled), base)
            assert np.array_equal(decode_codes(model, result.code_set), base)

    def test_forward_matches_decoding_codes(self):
        model, images, _ = _setup(seed=7)
        reconstruction, results, _ = forward(model, images)
        for image, result in zip(reconstruction, results):
            assert np.allclose(image, decode_indices(model, result.indices), rtol=0, atol=1e-12)

    def test_interpolating_a_set_with_itself(self, rng):
        model, images, _ = _setup(seed=8)
        _, results, _ = forward(model, images)
        code_set = results[0].code_set
        assert np.array_equal(decode_codes(model, interpolate(code_set, code_set, rng)), decode_codes(model, code_set))

    def test_out_of_range_codes(self):
        model, _, _ = _setup()
        with pytest.raises(PreconditionError):
            decode_indices(model, [0, ARCH.K])

    def test_wrong_image_size(self):
        model, _, _ = _setup()
        with pytest.raises(DimensionMismatchError):
            forward(model, np.zeros((5, 5)))


class TestToyTraining:
    SMALL = dict(
        steps=300, T_q=100, W=50, train_size=128, holdout_size=32, K=32, L=4, d=8, hidden=32, log_every=50, seed=3
    )

    def test_config_validation(self):
        with pytest.raises(ValidationError):
            ToyConfig(T_q=10, W=20)
        with pytest.raises(ValidationError):
            ToyConfig(image_size=6, n_factors=4)
        with pytest.raises(ValidationError):
            ToyConfig(K=4, L=8)
        with pytest.raises(ValidationError):
            ToyConfig(learning_rate=0.1, lr=0.1)

    def test_small_run(self):
        run = train_toy(ToyConfig(**self.SMALL))
        assert run.metrics.reinit_iterations == [100, 150, 200]
        assert run.metrics.max_k_img == 4
        assert len(run.holdout_codes) == 32
        assert all(sample.codes.length == 4 for sample in run.holdout_codes)
        assert run.model.is_finite()
        assert np.isfinite(run.metrics.final_mse)
        assert run.metrics.loss_history[0][0] == 0
        assert run.metrics.loss_history[-1][0] == 299

    def test_deterministic(self):
        first = train_toy(ToyConfig(**self.SMALL))
        second = train_toy(ToyConfig(**self.SMALL))
        assert first.metrics.model_dump() == second.metrics.model_dump()
        assert first.model.codebook == second.model.codebook

    def test_labels_attached_to_codes(self):
        run = train_toy(ToyConfig(**dict(self.SMALL, steps=120)))
        sample, coded = run.holdout[0], run.holdout_codes[0]
        assert coded.labels[f"factor1_eq{sample.factors[1]}"] == 1
        assert sum(coded.labels.values()) == 4

    def test_zero_steps(self):
        run = train_toy(ToyConfig(**dict(self.SMALL, steps=0)))
        assert run.metrics.final_mse == run.metrics.initial_mse
        assert run.metrics.reinit_iterations == []

    @pytest.mark.slow
    def test_full_run_halves_reconstruction_error(self):
        run = train_toy(ToyConfig(seed=0))
        assert run.metrics.mse_reduction >= 0.5
        presence = build_presence(run.holdout_codes, run.model.codebook.size)
        y = presence.labels["factor1_eq0"].to_numpy()
        score = cross_validate(presence.values, y, 5, Rng(0))
        assert score.cv_accuracy_mean > score.baseline_accuracy


def test_images_stack_to_architecture_shape():
    samples = generate_dataset(3, Rng(0))
    assert stack_images(samples).shape == (3, 64)
