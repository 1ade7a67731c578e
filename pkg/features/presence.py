"""
Code-presence features.

Each sample becomes a row of K binary indicators, one per codebook entry,
set to 1 when the code occurs in the sample's CodeSet. Because the row only
depends on set membership, features are invariant to code order.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from core.errors import DimensionMismatchError
from core.serialization import CodedSample

logger = logging.getLogger("pivq.features")


@dataclass(frozen=True, eq=False)
class PresenceMatrix:
    """
    Attributes:
        values: (n, K) uint8 indicator matrix
        ids: sample ids, one per row
        labels: DataFrame indexed by id with one 0/1 column per attribute (may have no columns)
    """

    values: np.ndarray
    ids: tuple
    labels: pd.DataFrame

    @property
    def codebook_size(self) -> int:
        return int(self.values.shape[1])

    @property
    def attributes(self) -> List[str]:
        return list(self.labels.columns)

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def row_sums(self) -> np.ndarray:
        return self.values.sum(axis=1, dtype=np.int64)

    def to_frame(self) -> pd.DataFrame:
        """Indicators as a DataFrame with columns code_0 .. code_{K-1}."""
        columns = [f"code_{i}" for i in range(self.codebook_size)]
        return pd.DataFrame(self.values, index=list(self.ids), columns=columns)


def build_presence(
    dataset: Sequence[CodedSample],
    codebook_size: int,
    labels: Optional[pd.DataFrame] = None,
) -> PresenceMatrix:
    """
    Build the presence matrix of a coded dataset.

    Args:
        dataset: coded samples
        codebook_size: K
        labels: attribute table indexed by sample id; when omitted, the
            per-record labels stored in the dataset are used

    Returns:
        PresenceMatrix whose row sums equal each sample's K_img

    Raises:
        CodeRangeError: a code is >= K
        DimensionMismatchError: labels are missing for some sample ids
    """
    values = np.zeros((len(dataset), codebook_size), dtype=np.uint8)
    for row, sample in enumerate(dataset):
        sample.codes.check_range(codebook_size)
        values[row, list(sample.codes)] = 1

    ids = tuple(sample.id for sample in dataset)
    if labels is None:
        table = pd.DataFrame([sample.labels for sample in dataset], index=list(ids))
        if len(table.columns) and table.isna().any().any():
            raise DimensionMismatchError("some samples lack labels present on others")
    else:
        missing = [sample_id for sample_id in ids if sample_id not in labels.index]
        if missing:
            raise DimensionMismatchError(f"no labels for {len(missing)} sample(s), e.g. {missing[0]!r}")
        table = labels.loc[list(ids)]
    table = table.astype(np.int64) if len(table.columns) else pd.DataFrame(index=list(ids))

    values.setflags(write=False)
    logger.debug("Built presence matrix %s with %d attributes", values.shape, len(table.columns))
    return PresenceMatrix(values=values, ids=ids, labels=table)
