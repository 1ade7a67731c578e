# models/toy.py
"""
Miniature permutation-invariant autoencoder with manual gradients.

    encoder    x -> tanh(W1 x + b1) -> W2 . + b2 -> L embeddings z_e of dimension d
    quantizer  matching quantization, z_q = codebook rows (straight-through)
    decoder    s = sum of z_q rows taken in ascending code-index order
               -> tanh(V1 s + c1) -> sigmoid(V2 . + c2) -> image

The decoder sees no positions, only the pooled sum, so any reordering of the
quantized codes gives a bit-identical reconstruction: the rows are sorted by
code index before a fixed left-to-right summation.

All functions accept a batch of images (B, n, n) or a single image (n, n).
Gradients are summed over the batch.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy.special import expit

from core.errors import DimensionMismatchError, PreconditionError
from core.rng import Rng
from core.types import Codebook, CodeSet
from quantization.quantizer import QuantizationResult, quantize_batch

logger = logging.getLogger("pivq.toy_model")

PARAMETER_NAMES = ("W1", "b1", "W2", "b2", "V1", "c1", "V2", "c2")


class ToyArchitecture(BaseModel):
    image_size: int = Field(default=8, ge=1)
    L: int = Field(default=8, ge=1)
    d: int = Field(default=16, ge=1)
    K: int = Field(default=64, ge=1)
    hidden: int = Field(default=64, ge=1)

    @property
    def pixels(self) -> int:
        return self.image_size * self.image_size


@dataclass
class ToyModel:
    architecture: ToyArchitecture
    params: Dict[str, np.ndarray]
    codebook: Codebook

    def copy(self) -> "ToyModel":
        return ToyModel(self.architecture, {k: v.copy() for k, v in self.params.items()}, self.codebook)

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.params.values()) and bool(
            np.all(np.isfinite(self.codebook.entries))
        )


@dataclass
class ForwardCache:
    x: np.ndarray
    h: np.ndarray
    z_e: np.ndarray
    decoder_input: np.ndarray
    order: np.ndarray
    pooled: np.ndarray
    g: np.ndarray
    y: np.ndarray
    indices: Optional[np.ndarray] = None
    results: List[QuantizationResult] = field(default_factory=list)
    single: bool = False

    @property
    def quantized(self) -> bool:
        return self.indices is not None


def init_model(architecture: ToyArchitecture, rng: Rng) -> ToyModel:
    """Gaussian weights scaled by 1/sqrt(fan_in), zero biases, codebook uniform in (-1/K, 1/K)."""
    a = architecture
    shapes = {
        "W1": (a.hidden, a.pixels),
        "W2": (a.L * a.d, a.hidden),
        "V1": (a.hidden, a.d),
        "V2": (a.pixels, a.hidden),
    }
    params = {name: rng.normal(0.0, 1.0 / np.sqrt(shape[1]), size=shape) for name, shape in shapes.items()}
    params["b1"] = np.zeros(a.hidden)
    params["b2"] = np.zeros(a.L * a.d)
    params["c1"] = np.zeros(a.hidden)
    params["c2"] = np.zeros(a.pixels)
    codebook = Codebook(rng.uniform(-1.0 / a.K, 1.0 / a.K, size=(a.K, a.d)))
    return ToyModel(architecture, params, codebook)


def _as_images(model: ToyModel, images) -> Tuple[np.ndarray, bool]:
    images = np.asarray(images, dtype=np.float64)
    n = model.architecture.image_size
    single = images.ndim == 2
    if single:
        images = images[None]
    if images.ndim != 3 or images.shape[1:] != (n, n):
        raise DimensionMismatchError(f"expected images of shape ({n}, {n}), got {images.shape}")
    return images.reshape(images.shape[0], -1), single


def _pool(rows: np.ndarray) -> np.ndarray:
    """Left-to-right sum over axis -2 of (..., L, d)."""
    total = rows[..., 0, :].copy()
    for r in range(1, rows.shape[-2]):
        total = total + rows[..., r, :]
    return total


def encode(model: ToyModel, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    p = model.params
    h = np.tanh(x @ p["W1"].T + p["b1"])
    z_e = (h @ p["W2"].T + p["b2"]).reshape(x.shape[0], model.architecture.L, model.architecture.d)
    return h, z_e


def decode_pooled(model: ToyModel, pooled: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Decoder MLP on pooled vectors (B, d); returns (hidden, flat reconstruction)."""
    p = model.params
    g = np.tanh(pooled @ p["V1"].T + p["c1"])
    y = expit(g @ p["V2"].T + p["c2"])
    return g, y


def forward(model: ToyModel, images, quantize: bool = True, method: str = "matching"):
    """
    Run the autoencoder.

    Args:
        images: (B, n, n) or (n, n)
        quantize: False feeds z_e straight to the decoder (before quantization starts)
        method: quantization method when quantize is True

    Returns:
        (reconstruction, QuantizationResult or list of them or None, ForwardCache)

    Raises:
        DimensionMismatchError: image shape does not match the architecture
    """
    x, single = _as_images(model, images)
    h, z_e = encode(model, x)
    indices = None
    results: List[QuantizationResult] = []
    if quantize:
        results = quantize_batch(model.codebook, list(z_e), method)
        indices = np.array([r.indices for r in results], dtype=np.int64).reshape(x.shape[0], -1)
        decoder_input = np.stack([r.quantized for r in results])
        order = np.argsort(indices, axis=1, kind="stable")
    else:
        decoder_input = z_e
        order = np.tile(np.arange(model.architecture.L), (x.shape[0], 1))
    pooled = _pool(np.take_along_axis(decoder_input, order[..., None], axis=1))
    g, y = decode_pooled(model, pooled)

    cache = ForwardCache(x, h, z_e, decoder_input, order, pooled, g, y, indices, results, single)
    n = model.architecture.image_size
    reconstruction = y.reshape(-1, n, n)
    if single:
        return reconstruction[0], (results[0] if results else None), cache
    return reconstruction, (results or None), cache


def backward(
    model: ToyModel,
    cache: ForwardCache,
    grad_out,
    commitment_beta: float = 0.0,
    codebook_weight: float = 0.0,
) -> Dict[str, np.ndarray]:
    """
    Gradients of <grad_out, reconstruction> + commitment_beta * ||z_e - sg(e)||^2
    + codebook_weight * ||sg(z_e) - e||^2, summed over the batch.

    The decoder-input gradient is copied unchanged to z_e (straight-through);
    the codebook only receives the codebook-loss term.

    Returns:
        dict with one entry per parameter name plus "codebook" (K, d)
    """
    p = model.params
    grad_out = np.asarray(grad_out, dtype=np.float64).reshape(cache.y.shape)

    da2 = grad_out * cache.y * (1.0 - cache.y)
    grads = {"V2": da2.T @ cache.g, "c2": da2.sum(axis=0)}
    da1 = (da2 @ p["V2"]) * (1.0 - cache.g**2)
    grads["V1"] = da1.T @ cache.pooled
    grads["c1"] = da1.sum(axis=0)
    d_pooled = da1 @ p["V1"]

    # sum pooling: every decoder input row gets the pooled gradient
    d_z = np.repeat(d_pooled[:, None, :], model.architecture.L, axis=1)
    codebook_grad = np.zeros_like(model.codebook.entries)
    if cache.quantized:
        d_z = d_z + 2.0 * commitment_beta * (cache.z_e - cache.decoder_input)
        np.add.at(
            codebook_grad,
            cache.indices.ravel(),
            (2.0 * codebook_weight * (cache.decoder_input - cache.z_e)).reshape(-1, model.architecture.d),
        )
    grads["codebook"] = codebook_grad

    d_z = d_z.reshape(d_z.shape[0], -1)
    grads["W2"] = d_z.T @ cache.h
    grads["b2"] = d_z.sum(axis=0)
    dh = (d_z @ p["W2"]) * (1.0 - cache.h**2)
    grads["W1"] = dh.T @ cache.x
    grads["b1"] = dh.sum(axis=0)
    return grads


def decode_indices(model: ToyModel, indices: Sequence[int]) -> np.ndarray:
    """Decode a list of code indices in any order; the result only depends on the multiset."""
    indices = np.sort(np.asarray(indices, dtype=np.int64), kind="stable")
    if indices.size and (indices[0] < 0 or indices[-1] >= model.codebook.size):
        raise PreconditionError(f"code index out of range for codebook of size {model.codebook.size}")
    if indices.size == 0:
        pooled = np.zeros((1, model.architecture.d))
    else:
        pooled = _pool(model.codebook.entries[indices][None])
    _, y = decode_pooled(model, pooled)
    n = model.architecture.image_size
    return y.reshape(n, n)


def decode_codes(model: ToyModel, code_set: CodeSet) -> np.ndarray:
    """Decode a CodeSet to an image."""
    code_set.check_range(model.codebook.size)
    return decode_indices(model, code_set.codes)
