"""
`pivq quantize`: quantize an embedding file into a coded dataset.
"""
import click
import numpy as np

from cli.schemas.reports import QuantizeSummary
from cli.utils import handle_data_error, write_report
from core.errors import DimensionMismatchError
from core.serialization import CodedSample, load_codebook, load_embeddings, save_coded_dataset
from core.types import UsageStats
from quantization.quantizer import accumulate_usage, quantize_batch


def group_samples(embeddings: np.ndarray, length: int) -> np.ndarray:
    """Consecutive rows grouped into samples of `length` embeddings, shape (S, L, d)."""
    if length < 1:
        raise DimensionMismatchError(f"--len must be positive, got {length}")
    if embeddings.shape[0] % length:
        raise DimensionMismatchError(f"{embeddings.shape[0]} embeddings do not split into samples of {length}")
    return embeddings.reshape(-1, length, embeddings.shape[1])


@click.command()
@click.option("--codebook", "codebook_path", required=True, type=click.Path(dir_okay=False), help="Codebook (.json text or binary)")
@click.option("--embeddings", "embeddings_path", required=True, type=click.Path(dir_okay=False), help="Embeddings (.csv or binary)")
@click.option("--len", "length", type=int, default=None, help="Embeddings per sample (default: all rows form one sample)")
@click.option("--method", type=click.Choice(["nearest", "matching"]), default="matching", show_default=True)
@click.option("--squared", is_flag=True, help="Use squared Euclidean distances")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Coded dataset (JSON Lines)")
@click.option("--stats", "stats_path", type=click.Path(dir_okay=False), default=None, help="Usage summary JSON (stdout if omitted)")
@handle_data_error
def quantize(codebook_path, embeddings_path, length, method, squared, out_path, stats_path):
    """Quantize embeddings with the nearest or matching method."""
    codebook = load_codebook(codebook_path)
    embeddings = load_embeddings(embeddings_path)
    if embeddings.shape[0] and embeddings.shape[1] != codebook.dim:
        raise DimensionMismatchError(f"embeddings have dimension {embeddings.shape[1]}, codebook has {codebook.dim}")
    samples = group_samples(embeddings, length or max(1, embeddings.shape[0]))

    results = quantize_batch(codebook, list(samples), method, squared)
    usage = UsageStats.empty(codebook.size)
    for result in results:
        usage = accumulate_usage(usage, result)
    width = max(1, len(str(len(results) - 1)))
    save_coded_dataset(
        [CodedSample(f"{i:0{width}d}", result.code_set) for i, result in enumerate(results)],
        out_path,
    )
    summary = QuantizeSummary(
        method=method,
        samples=len(results),
        codebook_size=codebook.size,
        k_data=usage.dataset_usage,
        max_k_img=usage.max_per_image_usage,
        total_distance=float(sum(result.total_distance for result in results)),
    )
    write_report(summary, stats_path)
