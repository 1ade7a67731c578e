# training/codebook.py
"""
Streaming codebook learning with delayed, data-dependent initialization.

Schedule for a run with quantization start T_q, window W and reinit_count R:

    iteration < T_q                  pass-through, embeddings only fill the window
    iteration == T_q + m*W, m < R    codebook refit to the window with KMeans++
    otherwise                        quantize, then move each used entry by
                                     the mean of 2 (z_e - e) over its own
                                     assigned embeddings

The window holds the batches of the most recent W iterations, so each
re-initialization fits the W iterations that preceded it.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.errors import DimensionMismatchError, PreconditionError
from core.rng import Rng
from core.types import Codebook, UsageStats
from quantization.quantizer import quantize_batch
from training.kmeans import kmeanspp_init

logger = logging.getLogger("pivq.trainer")


class TrainerConfig(BaseModel):
    """Codebook training settings. JSON/TOML config keys use these field names."""

    model_config = ConfigDict(extra="forbid")

    K: int = Field(default=16, ge=1)
    d: int = Field(default=2, ge=1)
    L: int = Field(default=4, ge=1)
    T_q: int = Field(default=60_000, ge=1)
    W: int = Field(default=5_000, ge=1)
    reinit_count: int = Field(default=3, ge=0)
    learning_rate: float = Field(default=0.1, gt=0.0)
    commitment_beta: float = Field(default=0.25, gt=0.0)
    method: Literal["nearest", "matching"] = "matching"
    seed: int = Field(default=0, ge=0)
    iterations: int = Field(default=80_000, ge=0)
    batch_size: int = Field(default=8, ge=1)
    lloyd_iterations: int = Field(default=10, ge=0)
    lr_decay: float = Field(default=1.0, gt=0.0, le=1.0)
    init_method: Literal["kmeanspp", "random"] = "kmeanspp"
    # Half-width of the fixed box the random control draws its entries from
    random_init_range: float = Field(default=10.0, gt=0.0)
    squared_distance: bool = False

    @model_validator(mode="after")
    def _check_schedule(self) -> "TrainerConfig":
        if self.T_q < self.W:
            raise ValueError(f"T_q ({self.T_q}) must be >= W ({self.W})")
        if self.method == "matching" and self.L > self.K:
            raise ValueError(f"matching needs L <= K, got L={self.L} and K={self.K}")
        return self


class TrainingReport(BaseModel):
    iterations: int
    k_data: int
    max_k_img: int
    dead_codes: int
    final_distortion: Optional[float]
    reinit_iterations: List[int]
    loss_history: List[Tuple[int, float, float]]


class WindowBuffer:
    """Ring buffer of the embedding batches of the last W iterations; oldest evicted first."""

    def __init__(self, window: int):
        if window < 1:
            raise PreconditionError(f"window must be at least 1 iteration, got {window}")
        self.window = window
        self._batches = deque(maxlen=window)

    def push(self, batch: np.ndarray) -> None:
        self._batches.append(np.array(batch, dtype=np.float64))

    def __len__(self) -> int:
        return len(self._batches)

    def batches(self) -> List[np.ndarray]:
        return list(self._batches)

    def samples(self) -> np.ndarray:
        """All buffered embeddings flattened to (n, d)."""
        if not self._batches:
            return np.zeros((0, 0))
        return np.concatenate([batch.reshape(-1, batch.shape[-1]) for batch in self._batches])


@dataclass
class TrainState:
    codebook: Codebook
    buffer: WindowBuffer
    rng: Rng
    iteration: int = 0
    usage: Optional[UsageStats] = None
    loss_history: List[Tuple[int, float, float]] = field(default_factory=list)
    reinitialized_at: List[int] = field(default_factory=list)

    def __post_init__(self):
        if self.usage is None:
            self.usage = UsageStats.empty(self.codebook.size)


def reinit_iterations(cfg: TrainerConfig) -> List[int]:
    """Iterations at which the codebook is refit to the window."""
    return [cfg.T_q + m * cfg.W for m in range(cfg.reinit_count)]


def initial_state(cfg: TrainerConfig, rng: Optional[Rng] = None) -> TrainState:
    """
    Untrained state: codebook entries uniform in (-1/K, 1/K).

    With init_method="random" the entries are instead drawn once from
    uniform(-random_init_range, random_init_range) and never refit, so nothing
    about the codebook depends on the data.
    """
    rng = rng or Rng(cfg.seed)
    bound = cfg.random_init_range if cfg.init_method == "random" else 1.0 / cfg.K
    entries = rng.uniform(-bound, bound, size=(cfg.K, cfg.d))
    return TrainState(codebook=Codebook(entries), buffer=WindowBuffer(cfg.W), rng=rng)


def _as_batch(batch, cfg: TrainerConfig) -> np.ndarray:
    array = np.asarray(batch, dtype=np.float64)
    if array.ndim != 3 or array.shape[1:] != (cfg.L, cfg.d):
        raise DimensionMismatchError(f"batch must have shape (B, {cfg.L}, {cfg.d}), got {array.shape}")
    if not np.all(np.isfinite(array)):
        raise PreconditionError("batch contains non-finite values")
    return array


def codebook_gradient_step(
    codebook: Codebook, z_e: np.ndarray, indices: np.ndarray, learning_rate: float
) -> Tuple[Codebook, float]:
    """
    Move every used entry by learning_rate * mean over its pairs of 2 (z_e - e).

    Args:
        z_e: (n, d) embeddings
        indices: (n,) assigned code per embedding

    Returns:
        (updated codebook, mean squared distance before the update)
    """
    entries = np.array(codebook.entries)
    diff = z_e - entries[indices]
    loss = float(np.mean(np.sum(diff**2, axis=1))) if len(diff) else 0.0
    counts = np.bincount(indices, minlength=codebook.size)
    sums = np.zeros_like(entries)
    np.add.at(sums, indices, diff)
    used = counts > 0
    entries[used] += learning_rate * 2.0 * sums[used] / counts[used, None]
    return Codebook(entries), loss


def train_step(state: TrainState, batch, cfg: TrainerConfig) -> TrainState:
    """
    Advance the state by one iteration on `batch` of shape (B, L, d).

    Raises:
        DimensionMismatchError: batch shape does not match cfg
        PreconditionError: matching quantization with L > K
    """
    batch = _as_batch(batch, cfg)
    iteration = state.iteration
    state.buffer.push(batch)

    if iteration < cfg.T_q:
        state.iteration += 1
        return state

    if iteration in reinit_iterations(cfg):
        if cfg.init_method == "kmeanspp":
            state.codebook = kmeanspp_init(state.buffer.samples(), cfg.K, state.rng, cfg.lloyd_iterations)
            logger.info("Codebook re-initialized at iteration %d from %d buffered iterations", iteration, len(state.buffer))
        state.reinitialized_at.append(iteration)
        state.iteration += 1
        return state

    results = quantize_batch(state.codebook, batch, cfg.method, cfg.squared_distance)
    indices = np.concatenate([np.asarray(r.indices, dtype=np.int64) for r in results])
    learning_rate = cfg.learning_rate * cfg.lr_decay ** (iteration - cfg.T_q)
    state.codebook, codebook_loss = codebook_gradient_step(
        state.codebook, batch.reshape(-1, cfg.d), indices, learning_rate
    )
    for result in results:
        state.usage = state.usage.merge(result.stats)
    state.loss_history.append((iteration, codebook_loss, cfg.commitment_beta * codebook_loss))
    state.iteration += 1
    return state


def evaluate_window(state: TrainState, cfg: TrainerConfig) -> Tuple[UsageStats, Optional[float]]:
    """Quantize every buffered sample with the current codebook; returns usage and mean squared distance."""
    usage = UsageStats.empty(cfg.K)
    batches = state.buffer.batches()
    if not batches:
        return usage, None
    squared = []
    for batch in batches:
        for sample, result in zip(batch, quantize_batch(state.codebook, batch, cfg.method, cfg.squared_distance)):
            usage = usage.merge(result.stats)
            squared.append(np.sum((sample - result.quantized) ** 2, axis=1))
    return usage, float(np.mean(np.concatenate(squared)))


def run_training(stream: Iterable, cfg: TrainerConfig) -> Tuple[TrainState, TrainingReport]:
    """
    Run cfg.iterations steps over batches drawn from `stream`.

    Stops early, with a warning, if the stream runs out.
    """
    state = initial_state(cfg)
    logger.info("Training codebook K=%d L=%d d=%d for %d iterations (%s)", cfg.K, cfg.L, cfg.d, cfg.iterations, cfg.method)
    batches = iter(stream)
    for _ in range(cfg.iterations):
        try:
            batch = next(batches)
        except StopIteration:
            logger.warning("Embedding stream exhausted after %d iterations", state.iteration)
            break
        train_step(state, batch, cfg)

    window_usage, final_distortion = evaluate_window(state, cfg)
    report = TrainingReport(
        iterations=state.iteration,
        k_data=window_usage.dataset_usage,
        max_k_img=max(state.usage.max_per_image_usage, window_usage.max_per_image_usage),
        dead_codes=cfg.K - window_usage.dataset_usage,
        final_distortion=final_distortion,
        reinit_iterations=list(state.reinitialized_at),
        loss_history=[(int(i), float(a), float(b)) for i, a, b in state.loss_history],
    )
    logger.info("Training finished: K_data=%d, dead codes=%d", report.k_data, report.dead_codes)
    return state, report
