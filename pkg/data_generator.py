"""
Synthetic data: aligned toy images with compositional factors, and the
16-Gaussian embedding stream used to exercise codebook initialization.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Tuple

import numpy as np
import pandas as pd

from core.errors import PreconditionError
from core.rng import Rng

logger = logging.getLogger("pivq.data_generator")
logger.addHandler(logging.NullHandler())

TEMPLATE_SEED = 20_240_601
BACKGROUND = 0.1
TEMPLATE_INTENSITY = 0.8
MAX_NOISE = 0.01


# =========================================================
# Toy images
# =========================================================
@dataclass(frozen=True, eq=False)
class SyntheticSample:
    """An n x n image in [0, 1] and the discrete factors that produced it."""

    image: np.ndarray
    factors: Tuple[int, ...]


def build_templates(size: int = 8, n_factors: int = 4, n_values: int = 4) -> np.ndarray:
    """
    Fixed additive templates, shape (n_factors, n_values, size, size).

    Factor f only paints its own horizontal band of size // n_factors rows, so
    the contributions of different factors never overlap. Templates do not
    depend on any user seed.
    """
    if size % n_factors:
        raise PreconditionError(f"image size {size} is not divisible by {n_factors} factors")
    band = size // n_factors
    masks = Rng(TEMPLATE_SEED).random((n_factors, n_values, band, size)) > 0.5
    templates = np.zeros((n_factors, n_values, size, size))
    for f in range(n_factors):
        templates[f, :, f * band : (f + 1) * band, :] = TEMPLATE_INTENSITY * masks[f]
    return templates


def render_image(factors, templates: np.ndarray, rng: Rng, noise: float = MAX_NOISE) -> np.ndarray:
    """Background plus one template per factor plus uniform noise in [-noise, noise], clipped to [0, 1]."""
    if not 0.0 <= noise <= MAX_NOISE:
        raise PreconditionError(f"noise must be within [0, {MAX_NOISE}], got {noise}")
    size = templates.shape[-1]
    image = np.full((size, size), BACKGROUND)
    for f, value in enumerate(factors):
        image += templates[f, value]
    image += rng.uniform(-noise, noise, size=image.shape)
    return np.clip(image, 0.0, 1.0)


def generate_dataset(
    count: int,
    rng: Rng,
    size: int = 8,
    n_factors: int = 4,
    n_values: int = 4,
    noise: float = MAX_NOISE,
) -> List[SyntheticSample]:
    """
    Draw `count` samples, stratified over the factor combinations.

    Combinations are visited in a fresh random order every full cycle, so any
    count >= n_values ** n_factors covers every combination.
    """
    if count < 0:
        raise PreconditionError(f"count must be non-negative, got {count}")
    templates = build_templates(size, n_factors, n_values)
    combinations = list(itertools.product(range(n_values), repeat=n_factors))
    samples: List[SyntheticSample] = []
    order: List[Tuple[int, ...]] = []
    while len(samples) < count:
        if not order:
            order = rng.permutation(combinations)
        factors = tuple(int(v) for v in order.pop())
        samples.append(SyntheticSample(render_image(factors, templates, rng, noise), factors))
    logger.debug("Generated %d synthetic images of size %dx%d", count, size, size)
    return samples


def stack_images(samples: List[SyntheticSample]) -> np.ndarray:
    """Flattened images, shape (N, size * size)."""
    if not samples:
        return np.zeros((0, 0))
    return np.stack([sample.image.ravel() for sample in samples])


def factor_labels(samples: List[SyntheticSample], ids: Optional[List[str]] = None, n_values: int = 4) -> pd.DataFrame:
    """Binary attributes factor{f}_eq{v}, one row per sample."""
    ids = ids if ids is not None else [str(i) for i in range(len(samples))]
    columns = {}
    if samples:
        factors = np.array([sample.factors for sample in samples])
        for f in range(factors.shape[1]):
            for v in range(n_values):
                columns[f"factor{f}_eq{v}"] = (factors[:, f] == v).astype(np.int64)
    return pd.DataFrame(columns, index=ids)


# =========================================================
# Gaussian grid stream
# =========================================================
def gaussian_grid_means(grid: int = 4) -> np.ndarray:
    """Component means on a unit-spaced grid x grid lattice in R^2."""
    return np.array([(float(i), float(j)) for i in range(grid) for j in range(grid)])


def gaussian_grid_stream(
    rng: Rng,
    batch_size: int,
    length: int,
    sigma: float = 0.05,
    grid: int = 4,
) -> Iterator[np.ndarray]:
    """
    Endless stream of (batch_size, length, 2) batches from an equal-weight
    mixture of grid * grid isotropic Gaussians.
    """
    means = gaussian_grid_means(grid)
    while True:
        components = rng.integers(0, len(means), size=(batch_size, length))
        yield means[components] + rng.normal(0.0, sigma, size=(batch_size, length, 2))
