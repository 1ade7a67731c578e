# training/toy.py
"""
Training loop for the toy permutation-invariant autoencoder.

The loss is mean L1 reconstruction error plus the commitment term
beta * mean ||z_e - sg(e)||^2. Network weights follow SGD with optional
momentum; the codebook follows the same delayed-initialization schedule and
gradient step as the streaming codebook trainer.
"""
import logging
from dataclasses import dataclass
from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.rng import Rng
from core.serialization import CodedSample
from core.types import CodeSet, UsageStats
from data_generator import SyntheticSample, factor_labels, generate_dataset, stack_images
from models.toy import PARAMETER_NAMES, ToyArchitecture, ToyModel, backward, encode, forward, init_model
from training.codebook import WindowBuffer, codebook_gradient_step, reinit_iterations
from training.kmeans import kmeanspp_init

logger = logging.getLogger("pivq.toy_trainer")


class ToyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    image_size: int = Field(default=8, ge=2)
    n_factors: int = Field(default=4, ge=1)
    n_values: int = Field(default=4, ge=2)
    noise: float = Field(default=0.01, ge=0.0, le=0.01)
    L: int = Field(default=8, ge=1)
    d: int = Field(default=16, ge=1)
    K: int = Field(default=64, ge=1)
    hidden: int = Field(default=64, ge=1)
    steps: int = Field(default=20_000, ge=0)
    batch_size: int = Field(default=8, ge=1)
    learning_rate: float = Field(default=0.05, gt=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    codebook_learning_rate: float = Field(default=0.1, gt=0.0)
    commitment_beta: float = Field(default=0.25, ge=0.0)
    T_q: int = Field(default=1_000, ge=1)
    W: int = Field(default=500, ge=1)
    reinit_count: int = Field(default=3, ge=0)
    lloyd_iterations: int = Field(default=10, ge=0)
    method: Literal["nearest", "matching"] = "matching"
    ema_beta: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    train_size: int = Field(default=2048, ge=1)
    holdout_size: int = Field(default=256, ge=1)
    log_every: int = Field(default=100, ge=1)
    seed: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _check(self) -> "ToyConfig":
        if self.T_q < self.W:
            raise ValueError(f"T_q ({self.T_q}) must be >= W ({self.W})")
        if self.image_size % self.n_factors:
            raise ValueError(f"image_size ({self.image_size}) must be divisible by n_factors ({self.n_factors})")
        if self.method == "matching" and self.L > self.K:
            raise ValueError(f"matching needs L <= K, got L={self.L} and K={self.K}")
        return self

    def architecture(self) -> ToyArchitecture:
        return ToyArchitecture(image_size=self.image_size, L=self.L, d=self.d, K=self.K, hidden=self.hidden)


class ToyMetrics(BaseModel):
    steps: int
    initial_mse: float
    final_mse: float
    mse_reduction: float
    k_data: int
    max_k_img: int
    dead_codes: int
    reinit_iterations: List[int]
    loss_history: List[Tuple[int, float, float, float]]


@dataclass
class ToyRun:
    model: ToyModel
    metrics: ToyMetrics
    holdout: List[SyntheticSample]
    holdout_codes: List[CodedSample]


def _images(samples: List[SyntheticSample], size: int) -> np.ndarray:
    return stack_images(samples).reshape(-1, size, size)


def evaluate_mse(model: ToyModel, images: np.ndarray, method: str = "matching") -> float:
    """Mean squared reconstruction error with quantization on."""
    reconstruction, _, _ = forward(model, images, quantize=True, method=method)
    return float(np.mean((reconstruction - images) ** 2))


def encode_dataset(
    model: ToyModel, samples: List[SyntheticSample], method: str = "matching", n_values: int = 4
) -> Tuple[List[CodedSample], UsageStats]:
    """Quantized codes of every sample, with its binarized factors as labels."""
    ids = [f"h{i:05d}" for i in range(len(samples))]
    usage = UsageStats.empty(model.codebook.size)
    if not samples:
        return [], usage
    _, results, _ = forward(model, _images(samples, model.architecture.image_size), quantize=True, method=method)
    labels = factor_labels(samples, ids, n_values)
    coded = []
    for sample_id, result in zip(ids, results):
        usage = usage.merge(result.stats)
        coded.append(CodedSample(sample_id, result.code_set, {k: int(v) for k, v in labels.loc[sample_id].items()}))
    return coded, usage


def train_toy(cfg: ToyConfig) -> ToyRun:
    """
    Train the toy autoencoder on synthetic data.

    Before T_q the decoder consumes z_e directly. At each scheduled iteration
    the codebook is refit with KMeans++ to the encoder outputs of the last W
    steps; after T_q every step quantizes.
    """
    data_rng, init_rng, batch_rng, kmeans_rng = Rng(cfg.seed).spawn(4)
    train = generate_dataset(cfg.train_size, data_rng, cfg.image_size, cfg.n_factors, cfg.n_values, cfg.noise)
    holdout = generate_dataset(cfg.holdout_size, data_rng, cfg.image_size, cfg.n_factors, cfg.n_values, cfg.noise)
    train_images = _images(train, cfg.image_size)
    holdout_images = _images(holdout, cfg.image_size)

    model = init_model(cfg.architecture(), init_rng)
    ema = model.copy() if cfg.ema_beta else None
    initial_mse = evaluate_mse(model, holdout_images, cfg.method)
    logger.info("Toy training: %d steps, initial held-out MSE %.5f", cfg.steps, initial_mse)

    schedule = set(reinit_iterations(cfg))
    buffer = WindowBuffer(cfg.W)
    velocity = {name: np.zeros_like(model.params[name]) for name in PARAMETER_NAMES}
    history: List[Tuple[int, float, float, float]] = []
    reinitialized: List[int] = []
    elements = cfg.batch_size * cfg.L * cfg.d
    pixels = cfg.batch_size * cfg.image_size * cfg.image_size

    for step in range(cfg.steps):
        batch = train_images[batch_rng.integers(0, len(train_images), size=cfg.batch_size)]
        pushed = False
        if step in schedule:
            _, z_e = encode(model, batch.reshape(cfg.batch_size, -1))
            buffer.push(z_e)
            pushed = True
            model.codebook = kmeanspp_init(buffer.samples().reshape(-1, cfg.d), cfg.K, kmeans_rng, cfg.lloyd_iterations)
            reinitialized.append(step)
            logger.info("Toy codebook re-initialized at step %d", step)

        quantized = step >= cfg.T_q
        reconstruction, _, cache = forward(model, batch, quantize=quantized, method=cfg.method)
        if not pushed:
            buffer.push(cache.z_e)

        residual = reconstruction - batch
        l1 = float(np.mean(np.abs(residual)))
        grads = backward(model, cache, np.sign(residual) / pixels, commitment_beta=cfg.commitment_beta / elements)
        for name in PARAMETER_NAMES:
            velocity[name] = cfg.momentum * velocity[name] + grads[name]
            model.params[name] = model.params[name] - cfg.learning_rate * velocity[name]

        codebook_loss = 0.0
        if quantized:
            model.codebook, codebook_loss = codebook_gradient_step(
                model.codebook, cache.z_e.reshape(-1, cfg.d), cache.indices.ravel(), cfg.codebook_learning_rate
            )

        if ema is not None:
            for name in PARAMETER_NAMES:
                ema.params[name] = cfg.ema_beta * ema.params[name] + (1.0 - cfg.ema_beta) * model.params[name]
            ema.codebook = model.codebook

        if step % cfg.log_every == 0 or step == cfg.steps - 1:
            history.append((step, l1, codebook_loss, cfg.commitment_beta * codebook_loss))
            logger.debug("step %d: L1 %.5f codebook %.5f", step, l1, codebook_loss)

    final_model = ema if ema is not None else model
    final_mse = evaluate_mse(final_model, holdout_images, cfg.method)
    holdout_codes, usage = encode_dataset(final_model, holdout, cfg.method, cfg.n_values)
    metrics = ToyMetrics(
        steps=cfg.steps,
        initial_mse=initial_mse,
        final_mse=final_mse,
        mse_reduction=1.0 - final_mse / initial_mse if initial_mse > 0 else 0.0,
        k_data=usage.dataset_usage,
        max_k_img=usage.max_per_image_usage,
        dead_codes=usage.dead_codes,
        reinit_iterations=reinitialized,
        loss_history=history,
    )
    logger.info("Toy training finished: held-out MSE %.5f -> %.5f", initial_mse, final_mse)
    return ToyRun(final_model, metrics, holdout, holdout_codes)
