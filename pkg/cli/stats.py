"""
`pivq stats`: codebook usage of a coded dataset.
"""
from typing import Optional

import click

from analysis.capacity import matching_capacity_bits, nearest_capacity_bits
from cli.schemas.reports import StatsReport
from cli.utils import handle_data_error, write_report
from core.serialization import load_coded_dataset
from core.types import UsageStats


def usage_summary(dataset, codebook_size: int) -> StatsReport:
    """K_data, max K_img and both capacities at the measured K_data (null for an empty dataset)."""
    usage = UsageStats.empty(codebook_size)
    for sample in dataset:
        usage = usage.add_indices(sample.codes.codes)
    if usage.dataset_usage == 0:
        return StatsReport(k_data=0, max_k_img=usage.max_per_image_usage)
    k_data = usage.dataset_usage
    k_img = usage.max_per_image_usage
    length = k_img
    return StatsReport(
        k_data=k_data,
        max_k_img=k_img,
        nearest_capacity_bits=nearest_capacity_bits(k_data, k_img, length),
        matching_capacity_bits=matching_capacity_bits(k_data, length),
    )


@click.command()
@click.option("--codes", "codes_path", required=True, type=click.Path(dir_okay=False), help="Coded dataset (JSON Lines)")
@click.option("--k", "k", type=click.IntRange(min=1), required=True, help="Codebook size")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="JSON output (stdout if omitted)")
@handle_data_error
def stats(codes_path, k, out_path: Optional[str]):
    """Summarize codebook usage of a coded dataset."""
    write_report(usage_summary(load_coded_dataset(codes_path, k), k), out_path)
