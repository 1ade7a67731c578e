"""
`pivq interpolate` and `pivq smooth-path`.
"""
from typing import Dict, List, Optional

import click

from cli.utils import handle_data_error, write_text
from core.errors import PreconditionError
from core.rng import Rng
from core.serialization import CodedSample, dumps_coded_dataset, load_coded_dataset
from core.types import CodeSet
from sampling.interpolation import interpolate, random_smooth_path, split_pair


def _lookup(samples: List[CodedSample], *ids: str) -> List[CodeSet]:
    by_id: Dict[str, CodeSet] = {sample.id: sample.codes for sample in samples}
    missing = [sample_id for sample_id in ids if sample_id not in by_id]
    if missing:
        raise PreconditionError(f"no sample with id {missing[0]!r} in dataset")
    return [by_id[sample_id] for sample_id in ids]


@click.command("interpolate")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(dir_okay=False), help="Coded dataset (JSON Lines)")
@click.option("--a", "id_a", required=True, help="Id of the first sample")
@click.option("--b", "id_b", required=True, help="Id of the second sample")
@click.option("--n", "count", type=click.IntRange(min=0), default=10, show_default=True, help="Number of samples to draw")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="JSON Lines output (stdout if omitted)")
@handle_data_error
def interpolate_command(dataset_path, id_a, id_b, count, seed, out_path: Optional[str]):
    """Draw CodeSets that mix the codes of two samples."""
    code_a, code_b = _lookup(load_coded_dataset(dataset_path), id_a, id_b)
    rng = Rng(seed)
    drawn = [CodedSample(f"interp-{i}", interpolate(code_a, code_b, rng)) for i in range(count)]
    write_text(dumps_coded_dataset(drawn), out_path)


@click.command("smooth-path")
@click.option("--dataset", "dataset_path", required=True, type=click.Path(dir_okay=False), help="Coded dataset (JSON Lines)")
@click.option("--a", "id_a", required=True, help="Id of the sample the path ends at")
@click.option("--b", "id_b", required=True, help="Id of the sample the path starts from")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--reverse", is_flag=True, help="Walk from --a to --b instead")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="JSON Lines output (stdout if omitted)")
@handle_data_error
def smooth_path_command(dataset_path, id_a, id_b, seed, reverse, out_path: Optional[str]):
    """Emit a one-swap-per-step path between two samples."""
    code_a, code_b = _lookup(load_coded_dataset(dataset_path), id_a, id_b)
    path = random_smooth_path(split_pair(code_a, code_b), Rng(seed), reverse=reverse)
    write_text(dumps_coded_dataset(CodedSample(f"t{t}", codes) for t, codes in enumerate(path)), out_path)
