"""
`pivq probe`: logistic-regression probes on code-presence features.
"""
from typing import Optional

import click
import pandas as pd

from analysis.probing import ProbeHyperparams, probe_attributes, rank_attributes
from cli.utils import handle_data_error, write_report
from core.errors import DimensionMismatchError, ParseError
from core.rng import Rng
from core.serialization import load_coded_dataset
from features.presence import build_presence


def read_labels(path: str, ids) -> pd.DataFrame:
    """
    Labels CSV with a header of attribute names and one 0/1 row per sample.

    An "id" column, when present, matches rows to sample ids; otherwise rows
    follow the dataset order.
    """
    try:
        frame = pd.read_csv(path, dtype={"id": str})
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise ParseError(f"{path}: {e}") from e
    if "id" in frame.columns:
        frame = frame.set_index("id")
    else:
        if len(frame) != len(ids):
            raise DimensionMismatchError(f"{path}: {len(frame)} label rows for {len(ids)} samples")
        frame.index = list(ids)
    if not frame.isin([0, 1]).all().all():
        raise ParseError(f"{path}: labels must be 0 or 1")
    return frame.astype(int)


@click.command()
@click.option("--codes", "codes_path", required=True, type=click.Path(dir_okay=False), help="Coded dataset (JSON Lines)")
@click.option("--labels", "labels_path", required=True, type=click.Path(dir_okay=False), help="Labels CSV")
@click.option("--k", "k", type=click.IntRange(min=1), default=None, help="Codebook size (default: largest code + 1)")
@click.option("--folds", type=click.IntRange(min=2), default=5, show_default=True)
@click.option("--l2", type=click.FloatRange(min=0.0), default=None)
@click.option("--epochs", type=click.IntRange(min=0), default=None)
@click.option("--lr", "learning_rate", type=click.FloatRange(min=0.0, min_open=True), default=None)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="Probe report JSON (stdout if omitted)")
@handle_data_error
def probe(codes_path, labels_path, k, folds, l2, epochs, learning_rate, seed, out_path: Optional[str]):
    """Cross-validated probe accuracy per attribute, against a majority baseline."""
    dataset = load_coded_dataset(codes_path, k)
    if k is None:
        largest = max((max(sample.codes.codes, default=-1) for sample in dataset), default=-1)
        k = max(1, largest + 1)
    labels = read_labels(labels_path, [sample.id for sample in dataset])
    presence = build_presence(dataset, k, labels)
    hyper = ProbeHyperparams(
        **{key: value for key, value in {"l2": l2, "epochs": epochs, "learning_rate": learning_rate}.items() if value is not None}
    )
    report = probe_attributes(presence, folds, Rng(seed), hyper)
    write_report(report, out_path)
    if out_path is not None:
        for name, margin in rank_attributes(report):
            score = report.attributes[name]
            click.echo(f"{name}: {score.cv_accuracy_mean:.3f} ± {score.cv_accuracy_std:.3f} (baseline {score.baseline_accuracy:.3f}, margin {margin:+.3f})")
