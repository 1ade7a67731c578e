# quantization/assignment.py
"""
Exact minimum-cost assignment between L embeddings and K >= L codebook rows.

The solver is the shortest-augmenting-path variant of the Hungarian method
(Jonker-Volgenant style): one Dijkstra-like search per embedding over reduced
costs, with row/column potentials kept dual-feasible. Worst case O(L^2 K),
which is O(n^3) for n = max(L, K).

Ties between optimal mappings are broken towards the lexicographically
smallest mapping vector. The search for it only touches edges whose reduced
cost is (numerically) zero, so on inputs without ties it costs one pass over
the reduced-cost matrix.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from core.errors import InstanceTooLargeError, PreconditionError
from core.types import Assignment

logger = logging.getLogger("pivq.assignment")

BRUTE_FORCE_MAX_COLS = 8
BRUTE_FORCE_MAX_MAPPINGS = 5_000_000
# Edges whose reduced cost is within this (relative) slack are re-solved as tie candidates
CANDIDATE_RTOL = 1e-10
# Two totals tie when they differ by at most this many ulps per chosen entry
TIE_ULPS = 4


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """
    Rectangular cost matrix with K rows (codebook side) and L columns (embedding side), K >= L.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim == 1 and values.size == 0:
            values = values.reshape(0, 0)
        if values.ndim != 2:
            raise PreconditionError(f"cost matrix must be 2-dimensional, got shape {values.shape}")
        if values.shape[0] < values.shape[1]:
            raise PreconditionError(
                f"cost matrix needs rows >= cols, got {values.shape[0]} rows and {values.shape[1]} cols"
            )
        if not np.all(np.isfinite(values)):
            raise PreconditionError("cost matrix contains non-finite entries")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def rows(self) -> int:
        return int(self.values.shape[0])

    @property
    def cols(self) -> int:
        return int(self.values.shape[1])

    def padded(self) -> np.ndarray:
        """Square K x K matrix: the real columns followed by K - L zero-cost virtual columns."""
        square = np.zeros((self.rows, self.rows), dtype=np.float64)
        square[:, : self.cols] = self.values
        return square


def _shortest_augmenting_path(a: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Solve min sum a[i, col(i)] over injective col() for an n x m matrix with n <= m.

    Returns:
        (col_for_row, u, v): assignment and dual potentials with
        a[i, j] - u[i] - v[j] >= 0 everywhere and == 0 on assigned pairs
    """
    n, m = a.shape
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    # 1-based: p[j] is the row matched to column j, 0 means free; column 0 is the search root
    p = np.zeros(m + 1, dtype=np.int64)
    way = np.zeros(m + 1, dtype=np.int64)
    reduced = np.empty(m + 1)
    reduced[0] = np.inf

    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used
            reduced[1:] = a[i0 - 1] - u[i0] - v[1:]
            better = free & (reduced < minv)
            minv[better] = reduced[better]
            way[better] = j0
            masked = np.where(free, minv, np.inf)
            j1 = int(np.argmin(masked))
            delta = masked[j1]
            u[p[used]] += delta
            v[used] -= delta
            minv[free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        # flip the augmenting path back to the root
        while j0 != 0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1

    col_for_row = np.empty(n, dtype=np.int64)
    matched = np.flatnonzero(p[1:])
    col_for_row[p[1:][matched] - 1] = matched
    return col_for_row, u[1:], v[1:]


def _solve_with_prefix(a: np.ndarray, prefix: Sequence[int]) -> np.ndarray:
    """Optimal solution of `a` (rows = embeddings) with rows 0..len(prefix)-1 forced to `prefix`."""
    k = len(prefix)
    n, m = a.shape
    solution = np.empty(n, dtype=np.int64)
    solution[:k] = prefix
    if k == n:
        return solution
    free_cols = np.setdiff1d(np.arange(m), np.asarray(prefix, dtype=np.int64), assume_unique=True)
    sub_solution, _, _ = _shortest_augmenting_path(a[k:, free_cols])
    solution[k:] = free_cols[sub_solution]
    return solution


def _exact_cost(a: np.ndarray, solution: Sequence[int]) -> Tuple[float, float]:
    """Correctly rounded total of the chosen entries and the sum of their magnitudes."""
    chosen = [float(a[i, c]) for i, c in enumerate(solution)]
    return math.fsum(chosen), math.fsum(abs(x) for x in chosen)


def _candidate_tolerance(values: np.ndarray) -> float:
    """Loose bound on dual round-off, only used to shortlist candidate edges."""
    if values.size == 0:
        return 0.0
    return CANDIDATE_RTOL * float(np.abs(values).max()) * max(1, min(values.shape))


def _within_rounding(total: float, magnitude: float, best: float, best_magnitude: float, n: int) -> bool:
    """True when `total` is no worse than `best` up to the rounding error of the entries themselves."""
    bound = TIE_ULPS * n * np.finfo(np.float64).eps * max(magnitude, best_magnitude)
    return total <= best + bound


def _lexicographic_optimum(a: np.ndarray, solution: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Move from one optimal solution to the lexicographically smallest optimal one."""
    n = a.shape[0]
    shortlist_tol = _candidate_tolerance(a)
    best, best_magnitude = _exact_cost(a, solution)
    reduced = a - u[:, None] - v[None, :]
    current = solution.copy()
    for row in range(n):
        fixed = set(current[:row].tolist())
        tight = np.flatnonzero(reduced[row] <= shortlist_tol)
        for col in tight[tight < current[row]]:
            if col in fixed:
                continue
            candidate = _solve_with_prefix(a, list(current[:row]) + [int(col)])
            total, magnitude = _exact_cost(a, candidate)
            if _within_rounding(total, magnitude, best, best_magnitude, n):
                current = candidate
                if total < best:
                    best, best_magnitude = total, magnitude
                break
    return current


def solve_assignment(cost: CostMatrix, square: bool = False) -> Assignment:
    """
    Minimum-cost injective mapping from the L columns to the K rows of `cost`.

    Args:
        cost: K x L cost matrix, K >= L
        square: Solve the zero-padded K x K problem and drop the virtual columns
            instead of solving the rectangular problem directly. Both give the
            same optimum; the rectangular path is faster when K >> L.

    Returns:
        Assignment with mapping[j] = row assigned to column j; among all optimal
        mappings, the lexicographically smallest one

    Raises:
        PreconditionError: rows < cols or non-finite entries (raised by CostMatrix)
    """
    if not isinstance(cost, CostMatrix):
        cost = CostMatrix(cost)
    if cost.cols == 0:
        return Assignment((), 0.0)

    # Work on the transpose: one search per embedding column
    a = np.ascontiguousarray(cost.values.T)
    if square:
        padded = np.ascontiguousarray(cost.padded().T)
        solution, u, v = _shortest_augmenting_path(padded)
        solution, u = solution[: cost.cols], u[: cost.cols]
    else:
        solution, u, v = _shortest_augmenting_path(a)

    solution = _lexicographic_optimum(a, solution, u, v)
    logger.debug("Assignment solved for %dx%d (square=%s)", cost.rows, cost.cols, square)
    return Assignment.from_mapping(cost.values, solution.tolist())


def brute_force_assignment(cost: CostMatrix) -> Assignment:
    """
    Exhaustive minimum over all injective mappings (test oracle).

    Mappings are visited in lexicographic order and the first one whose exact
    total is within rounding of the minimum wins, which is the same tie rule
    as solve_assignment.

    Raises:
        InstanceTooLargeError: more than 8 columns or too many mappings to enumerate
    """
    if not isinstance(cost, CostMatrix):
        cost = CostMatrix(cost)
    k, l = cost.rows, cost.cols
    if l > BRUTE_FORCE_MAX_COLS:
        raise InstanceTooLargeError(f"brute force supports at most {BRUTE_FORCE_MAX_COLS} columns, got {l}")
    count = math.perm(k, l)
    if count > BRUTE_FORCE_MAX_MAPPINGS:
        raise InstanceTooLargeError(f"brute force would enumerate {count} mappings")
    if l == 0:
        return Assignment((), 0.0)

    mappings = np.array(list(itertools.permutations(range(k), l)), dtype=np.int64)
    a = np.ascontiguousarray(cost.values.T)
    totals = a[np.arange(l), mappings].sum(axis=1)
    shortlist = np.flatnonzero(totals <= totals.min() + _candidate_tolerance(a))
    exact = [_exact_cost(a, mappings[index]) for index in shortlist]
    best, best_magnitude = min(exact)
    for index, (total, magnitude) in zip(shortlist, exact):
        if _within_rounding(total, magnitude, best, best_magnitude, l):
            return Assignment.from_mapping(cost.values, mappings[index].tolist())
    raise AssertionError("unreachable: the minimum is within rounding of itself")


def assignment_cost(cost: CostMatrix, mapping: Sequence[int]) -> float:
    """Total cost of an arbitrary injective mapping."""
    return Assignment.from_mapping(cost.values, list(mapping)).total_cost
