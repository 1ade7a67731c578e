# core/serialization.py
"""
File formats for codebooks, embeddings and coded datasets.

Formats:
    Codebook text:    JSON object {"dim": d, "entries": [[...], ...]}
    Codebook binary:  b"PIVQCB1\\0", u32 K, u32 d, K*d little-endian float64
    Embeddings text:  CSV, one row per embedding, d columns, no header
    Embeddings binary: b"PIVQEM1\\0", u32 count, u32 d, count*d little-endian float64
    Coded dataset:    JSON Lines, {"id": str, "codes": [sorted ints]} per sample,
                      optionally with a "labels" object of 0/1 attributes

Floats in the JSON format are written with repr precision, so the text
round-trip is value-exact; the binary round-trip is bit-exact.
"""
import io
import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from core.errors import DimensionMismatchError, ParseError, PreconditionError
from core.types import Codebook, CodeSet, as_embeddings

logger = logging.getLogger("pivq.serialization")

CODEBOOK_MAGIC = b"PIVQCB1\x00"
EMBEDDINGS_MAGIC = b"PIVQEM1\x00"
_HEADER = struct.Struct("<8sII")
_FLOAT = np.dtype("<f8")

PathLike = Union[str, Path]


@dataclass(frozen=True)
class CodedSample:
    """One record of a coded dataset."""

    id: str
    codes: CodeSet
    labels: Dict[str, int] = field(default_factory=dict)

    def to_record(self) -> dict:
        record = {"id": self.id, "codes": self.codes.to_list()}
        if self.labels:
            record["labels"] = {name: int(value) for name, value in self.labels.items()}
        return record


# =========================================================
# Binary matrices (shared by codebooks and embeddings)
# =========================================================
def _pack_matrix(magic: bytes, matrix: np.ndarray) -> bytes:
    rows, cols = matrix.shape
    return _HEADER.pack(magic, rows, cols) + np.ascontiguousarray(matrix, dtype=_FLOAT).tobytes()


def _unpack_matrix(magic: bytes, data: bytes, what: str) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise ParseError(f"{what}: truncated header ({len(data)} bytes)")
    found, rows, cols = _HEADER.unpack_from(data)
    if found != magic:
        raise ParseError(f"{what}: bad magic bytes {found!r}")
    expected = _HEADER.size + rows * cols * _FLOAT.itemsize
    if len(data) != expected:
        raise ParseError(f"{what}: expected {expected} bytes for {rows}x{cols} payload, got {len(data)}")
    payload = np.frombuffer(data, dtype=_FLOAT, offset=_HEADER.size, count=rows * cols)
    return payload.reshape(rows, cols).astype(np.float64)


# =========================================================
# Codebooks
# =========================================================
def serialize_codebook(codebook: Codebook, binary: bool = True) -> bytes:
    """
    Serialize a codebook.

    Args:
        codebook: Codebook to encode
        binary: Binary format when True, JSON text otherwise

    Returns:
        Encoded bytes
    """
    if binary:
        return _pack_matrix(CODEBOOK_MAGIC, codebook.entries)
    document = {"dim": codebook.dim, "entries": codebook.entries.tolist()}
    return json.dumps(document).encode("utf-8")


def parse_codebook(data: bytes) -> Codebook:
    """
    Parse a codebook from either format (detected by the magic prefix).

    Raises:
        ParseError: malformed header, bad magic, truncation, empty entry list
        DimensionMismatchError: entries disagree with the declared dimension
    """
    if data[:4] == CODEBOOK_MAGIC[:4] or data[:1] not in (b"{", b" ", b"\n", b"\t", b"\r"):
        entries = _unpack_matrix(CODEBOOK_MAGIC, data, "codebook")
        if entries.shape[0] == 0:
            raise ParseError("codebook: empty entry list")
        return Codebook(entries)

    try:
        document = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ParseError(f"codebook: invalid JSON ({e})") from e
    if not isinstance(document, dict) or "dim" not in document or "entries" not in document:
        raise ParseError('codebook: expected an object with "dim" and "entries"')
    entries = document["entries"]
    dim = document["dim"]
    if not isinstance(entries, list) or not all(isinstance(row, list) for row in entries):
        raise ParseError('codebook: "entries" must be a list of rows')
    if not entries:
        raise ParseError("codebook: empty entry list")
    if isinstance(dim, bool) or not isinstance(dim, int):
        raise ParseError(f'codebook: "dim" must be an integer, got {dim!r}')
    if any(len(row) != dim for row in entries):
        raise DimensionMismatchError(f"codebook: entries disagree with declared dim {dim}")
    try:
        return Codebook(np.array(entries, dtype=np.float64))
    except (PreconditionError, TypeError, ValueError) as e:
        raise ParseError(f"codebook: {e}") from e


def save_codebook(codebook: Codebook, path: PathLike) -> None:
    """Write a codebook; `.json` paths get the text format, everything else binary."""
    path = Path(path)
    path.write_bytes(serialize_codebook(codebook, binary=path.suffix.lower() != ".json"))
    logger.info("Codebook K=%d d=%d written to %s", codebook.size, codebook.dim, path)


def load_codebook(path: PathLike) -> Codebook:
    return parse_codebook(Path(path).read_bytes())


# =========================================================
# Embedding datasets
# =========================================================
def serialize_embeddings(embeddings: np.ndarray) -> bytes:
    return _pack_matrix(EMBEDDINGS_MAGIC, as_embeddings(embeddings))


def parse_embeddings(data: bytes) -> np.ndarray:
    """Parse the binary embedding format into a read-only (count, d) array."""
    return as_embeddings(_unpack_matrix(EMBEDDINGS_MAGIC, data, "embeddings"))


def load_embeddings(path: PathLike) -> np.ndarray:
    """Load embeddings from CSV (no header, d columns) or the binary format."""
    path = Path(path)
    data = path.read_bytes()
    if data.startswith(EMBEDDINGS_MAGIC):
        return parse_embeddings(data)
    try:
        frame = pd.read_csv(io.BytesIO(data), header=None, dtype=np.float64, float_precision="round_trip")
    except (ValueError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(f"embeddings: cannot parse {path} as CSV ({e})") from e
    return as_embeddings(frame.to_numpy())


def save_embeddings(embeddings: np.ndarray, path: PathLike) -> None:
    path = Path(path)
    embeddings = as_embeddings(embeddings)
    if path.suffix.lower() == ".csv":
        pd.DataFrame(embeddings).to_csv(path, header=False, index=False, float_format="%.17g")
    else:
        path.write_bytes(serialize_embeddings(embeddings))


# =========================================================
# Coded datasets (JSON Lines)
# =========================================================
def dumps_coded_dataset(samples: Iterable[CodedSample]) -> str:
    lines = [json.dumps(sample.to_record(), sort_keys=False) for sample in samples]
    return "".join(line + "\n" for line in lines)


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def loads_coded_dataset(text: str, codebook_size: Optional[int] = None) -> List[CodedSample]:
    """
    Parse a JSON Lines coded dataset.

    Raises:
        ParseError: invalid JSON, missing fields, duplicate ids or duplicate codes
        CodeRangeError: a code is out of range for `codebook_size`
    """
    samples: List[CodedSample] = []
    seen = set()
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(f"coded dataset line {number}: invalid JSON ({e})") from e
        if not isinstance(record, dict) or "id" not in record or "codes" not in record:
            raise ParseError(f'coded dataset line {number}: expected "id" and "codes"')
        codes = record["codes"]
        if not isinstance(codes, list) or not all(_is_int(c) for c in codes):
            raise ParseError(f'coded dataset line {number}: "codes" must be a list of integers')
        if len(set(codes)) != len(codes):
            raise ParseError(f"coded dataset line {number}: repeated codes in a set")
        sample_id = str(record["id"])
        if sample_id in seen:
            raise ParseError(f"coded dataset line {number}: duplicate id {sample_id!r}")
        seen.add(sample_id)
        labels = record.get("labels") or {}
        if not isinstance(labels, dict) or not all(_is_int(v) for v in labels.values()):
            raise ParseError(f'coded dataset line {number}: "labels" must map names to integers')
        labels = {str(k): int(v) for k, v in labels.items()}
        samples.append(CodedSample(sample_id, CodeSet.from_indices(codes, codebook_size), labels))
    return samples


def save_coded_dataset(samples: Iterable[CodedSample], path: PathLike) -> None:
    Path(path).write_text(dumps_coded_dataset(samples), encoding="utf-8")


def load_coded_dataset(path: PathLike, codebook_size: Optional[int] = None) -> List[CodedSample]:
    return loads_coded_dataset(Path(path).read_text(encoding="utf-8"), codebook_size)
