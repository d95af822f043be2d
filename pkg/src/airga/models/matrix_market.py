"""Matrix Market coordinate format reader and writer.

Only real ``coordinate`` files with ``general`` or ``symmetric`` storage are
supported. Values are written with 17 significant digits, which makes a
write/read cycle reproduce every double exactly.
"""
import logging
from pathlib import Path
from typing import List, Union

import numpy as np
import scipy.io
import scipy.sparse

from airga.linalg import AirgaError, SparseMatrix, as_sparse

logger = logging.getLogger(__name__)

HEADER = "%%MatrixMarket"
SUPPORTED_FIELDS = ("real", "integer", "double")
SUPPORTED_SYMMETRY = ("general", "symmetric")
PRECISION = 17


class MatrixMarketError(AirgaError):
    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line


def read_mm(path: Union[str, Path]) -> SparseMatrix:
    """Reads a Matrix Market coordinate file into a canonical CSR matrix.

    Symmetric storage is expanded to the full matrix.

    Raises:
        MatrixMarketError: The header, size line or an entry is malformed, or an
            index is out of range. The error carries the 1-based line number.
    """
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)

    banner = lines[0].split()
    if len(banner) != 5 or banner[0] != HEADER or banner[1].lower() != "matrix":
        raise MatrixMarketError(f"not a Matrix Market header: {lines[0]!r}", 1)
    layout, value_field, symmetry = (token.lower() for token in banner[2:])
    if layout != "coordinate":
        raise MatrixMarketError(f"unsupported layout {layout!r}", 1)
    if value_field not in SUPPORTED_FIELDS:
        raise MatrixMarketError(f"unsupported field {value_field!r}", 1)
    if symmetry not in SUPPORTED_SYMMETRY:
        raise MatrixMarketError(f"unsupported symmetry {symmetry!r}", 1)

    line_no = 1
    while line_no < len(lines) and (
        lines[line_no].startswith("%") or not lines[line_no].strip()
    ):
        line_no += 1
    if line_no >= len(lines):
        raise MatrixMarketError("missing size line", line_no + 1)
    try:
        nrows, ncols, nnz = (int(token) for token in lines[line_no].split())
    except ValueError:
        raise MatrixMarketError(f"malformed size line {lines[line_no]!r}", line_no + 1)
    if nrows < 0 or ncols < 0 or nnz < 0:
        raise MatrixMarketError("negative size", line_no + 1)
    if symmetry == "symmetric" and nrows != ncols:
        raise MatrixMarketError(
            "symmetric storage requires a square matrix", line_no + 1
        )

    stored = 0
    rows: List[int] = []
    cols: List[int] = []
    values: List[float] = []
    for index in range(line_no + 1, len(lines)):
        text = lines[index].strip()
        if not text or text.startswith("%"):
            continue
        tokens = text.split()
        if len(tokens) != 3:
            raise MatrixMarketError(
                f"expected 'row col value', got {text!r}", index + 1
            )
        try:
            i, j, value = int(tokens[0]), int(tokens[1]), float(tokens[2])
        except ValueError:
            raise MatrixMarketError(f"malformed entry {text!r}", index + 1)
        if not (1 <= i <= nrows and 1 <= j <= ncols):
            raise MatrixMarketError(
                f"index ({i}, {j}) outside a {nrows}x{ncols} matrix", index + 1
            )
        if symmetry == "symmetric" and j > i:
            raise MatrixMarketError(
                f"entry ({i}, {j}) above the diagonal in symmetric storage", index + 1
            )
        stored += 1
        rows.append(i - 1)
        cols.append(j - 1)
        values.append(value)
        if symmetry == "symmetric" and i != j:
            rows.append(j - 1)
            cols.append(i - 1)
            values.append(value)
    if stored != nnz:
        raise MatrixMarketError(
            f"size line announces {nnz} entries, found {stored}", len(lines)
        )
    matrix = scipy.sparse.coo_matrix(
        (np.array(values, dtype=np.float64), (np.array(rows), np.array(cols))),
        shape=(nrows, ncols),
    )
    logger.debug(f"Read {nrows}x{ncols} matrix with {nnz} stored entries from {path}")
    return as_sparse(matrix)


def write_mm(path: Union[str, Path], matrix: Union[SparseMatrix, np.ndarray]) -> None:
    """Writes ``matrix`` in general coordinate storage with 17 significant digits."""
    coo = scipy.sparse.coo_matrix(as_sparse(matrix))
    scipy.io.mmwrite(str(path), coo, precision=PRECISION, symmetry="general")
