"""
`pivq train-codebook`: streaming codebook training with delayed initialization.
"""
import itertools
from typing import Iterator

import click
import numpy as np

from cli.quantize import group_samples
from cli.utils import build_config, handle_data_error, write_report
from core.errors import ConfigurationError
from core.rng import Rng
from core.serialization import load_embeddings, save_codebook
from data_generator import gaussian_grid_stream
from training.codebook import TrainerConfig, run_training

SYNTHETIC_PREFIX = "synthetic:"
SYNTHETIC_SOURCES = ("gauss16",)


def embedding_stream(source: str, cfg: TrainerConfig) -> Iterator[np.ndarray]:
    """
    Batches of shape (batch_size, L, d).

    `synthetic:gauss16` draws from the 16-Gaussian grid mixture (d must be 2);
    a file source is grouped into samples of L rows and cycled in file order.
    """
    if source.startswith(SYNTHETIC_PREFIX):
        name = source[len(SYNTHETIC_PREFIX):]
        if name not in SYNTHETIC_SOURCES:
            raise ConfigurationError(f"unknown synthetic source {name!r}, expected one of {SYNTHETIC_SOURCES}")
        if cfg.d != 2:
            raise ConfigurationError(f"synthetic:gauss16 produces 2-dimensional embeddings, config has d={cfg.d}")
        # separate stream from the one the trainer seeds with cfg.seed
        (stream_rng,) = Rng(cfg.seed).spawn(1)
        return gaussian_grid_stream(stream_rng, cfg.batch_size, cfg.L)

    samples = group_samples(load_embeddings(source), cfg.L)
    if samples.shape[0] == 0:
        raise ConfigurationError(f"{source}: no embeddings")
    if samples.shape[2] != cfg.d:
        raise ConfigurationError(f"{source}: embeddings have dimension {samples.shape[2]}, config has d={cfg.d}")
    order = itertools.cycle(range(samples.shape[0]))
    return (samples[[next(order) for _ in range(cfg.batch_size)]] for _ in itertools.count())


@click.command("train-codebook")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="TrainerConfig as JSON or TOML")
@click.option("--embeddings", "source", required=True, help="Embedding file or synthetic:gauss16")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Codebook output (.json for text)")
@click.option("--report", "report_path", type=click.Path(dir_okay=False), default=None, help="Training report JSON (stdout if omitted)")
@click.option("--seed", type=click.IntRange(min=0), default=None)
@click.option("--iterations", type=click.IntRange(min=0), default=None)
@click.option("--method", type=click.Choice(["nearest", "matching"]), default=None)
@click.option("--init-method", type=click.Choice(["kmeanspp", "random"]), default=None)
@click.option("--k", "K", type=click.IntRange(min=1), default=None)
@click.option("--len", "L", type=click.IntRange(min=1), default=None)
@click.option("--tq", "T_q", type=click.IntRange(min=1), default=None)
@click.option("--window", "W", type=click.IntRange(min=1), default=None)
@handle_data_error
def train_codebook(config_path, source, out_path, report_path, **overrides):
    """Train a codebook on an embedding stream."""
    cfg = build_config(TrainerConfig, config_path, **overrides)
    state, report = run_training(embedding_stream(source, cfg), cfg)
    save_codebook(state.codebook, out_path)
    write_report(report, report_path)
