"""
`pivq assign`: solve one assignment problem from a CSV cost matrix.
"""
import click
import pandas as pd

from cli.utils import handle_data_error
from core.errors import ParseError
from quantization.assignment import CostMatrix, brute_force_assignment, solve_assignment


def read_cost_csv(path: str) -> CostMatrix:
    """Headerless CSV, one row per codebook entry, one column per embedding."""
    try:
        frame = pd.read_csv(path, header=None, float_precision="round_trip")
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise ParseError(f"{path}: {e}") from e
    try:
        values = frame.to_numpy(dtype=float)
    except ValueError as e:
        raise ParseError(f"{path}: non-numeric cost entry") from e
    return CostMatrix(values)


@click.command()
@click.option("--cost", "cost_path", required=True, type=click.Path(dir_okay=False), help="Cost matrix CSV (K rows x L cols)")
@click.option("--oracle", is_flag=True, help="Use exhaustive search instead of the solver (L <= 8)")
@click.option("--square", is_flag=True, help="Solve the zero-padded K x K problem")
@handle_data_error
def assign(cost_path: str, oracle: bool, square: bool):
    """Print the optimal column-to-row mapping and its total cost."""
    cost = read_cost_csv(cost_path)
    result = brute_force_assignment(cost) if oracle else solve_assignment(cost, square=square)
    click.echo("mapping: " + " ".join(str(row) for row in result.mapping))
    click.echo(f"cost: {result.total_cost!r}")
