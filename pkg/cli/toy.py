"""
`pivq toy-train` and `pivq toy-decode`.
"""
from typing import Optional

import click
import numpy as np
import pandas as pd

from cli.utils import build_config, handle_data_error, write_report, write_text
from core.serialization import load_coded_dataset, save_coded_dataset
from models.registry import load_model, save_model
from models.toy import decode_codes
from training.toy import ToyConfig, train_toy


@click.command("toy-train")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="ToyConfig as JSON or TOML")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Model artifact (joblib)")
@click.option("--metrics", "metrics_path", type=click.Path(dir_okay=False), default=None, help="Metrics JSON (stdout if omitted)")
@click.option("--codes", "codes_path", type=click.Path(dir_okay=False), default=None, help="Also write held-out codes (JSON Lines)")
@click.option("--labels", "labels_path", type=click.Path(dir_okay=False), default=None, help="Also write held-out factor labels (CSV)")
@click.option("--seed", type=click.IntRange(min=0), default=None)
@click.option("--steps", type=click.IntRange(min=0), default=None)
@handle_data_error
def toy_train(config_path, out_path, metrics_path, codes_path, labels_path, seed, steps):
    """Train the toy permutation-invariant autoencoder on synthetic images."""
    cfg = build_config(ToyConfig, config_path, seed=seed, steps=steps)
    run = train_toy(cfg)
    save_model(run.model, out_path)
    write_report(run.metrics, metrics_path)
    if codes_path is not None:
        save_coded_dataset(run.holdout_codes, codes_path)
    if labels_path is not None:
        frame = pd.DataFrame([sample.labels for sample in run.holdout_codes])
        frame.insert(0, "id", [sample.id for sample in run.holdout_codes])
        frame.to_csv(labels_path, index=False)


@click.command("toy-decode")
@click.option("--model", "model_path", required=True, type=click.Path(dir_okay=False), help="Model artifact from toy-train")
@click.option("--codes", "codes_path", required=True, type=click.Path(dir_okay=False), help="Coded dataset (JSON Lines)")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="Reconstructions CSV (stdout if omitted)")
@handle_data_error
def toy_decode(model_path, codes_path, out_path: Optional[str]):
    """Decode CodeSets to images; one CSV row per sample (id, p0 .. p{n*n-1})."""
    model = load_model(model_path)
    dataset = load_coded_dataset(codes_path, model.codebook.size)
    pixels = model.architecture.pixels
    rows = np.array([decode_codes(model, sample.codes).ravel() for sample in dataset]).reshape(-1, pixels)
    frame = pd.DataFrame(rows, columns=[f"p{i}" for i in range(pixels)])
    frame.insert(0, "id", [sample.id for sample in dataset])
    write_text(frame.to_csv(index=False, float_format="%.17g"), out_path)
