from pathlib import Path
from tempfile import TemporaryDirectory

import numpy as np
import pytest

from airga.linalg import as_sparse, identity
from airga.models.beam import tridiagonal
from airga.models.matrix_market import MatrixMarketError, read_mm, write_mm
from tests import random_sparse, test_data


def test_identity_round_trip() -> None:
    with TemporaryDirectory() as tmp_dir:
        path = Path(tmp_dir) / "I.mtx"
        write_mm(path, identity(3))
        restored = read_mm(path)
    assert (restored != identity(3)).nnz == 0


def test_symmetric_storage_expands() -> None:
    matrix = read_mm(test_data.get_path("data-files/mm/K3_symmetric.mtx"))
    expected = tridiagonal(3, -1.0, 2.0, -1.0).toarray()
    np.testing.assert_array_equal(matrix.toarray(), expected)


def test_random_round_trip_is_bitwise() -> None:
    matrix = random_sparse(50, 0.1, seed=1)
    matrix.data *= np.pi
    with TemporaryDirectory() as tmp_dir:
        path = Path(tmp_dir) / "A.mtx"
        write_mm(path, matrix)
        restored = read_mm(path)
    np.testing.assert_array_equal(restored.indptr, matrix.indptr)
    np.testing.assert_array_equal(restored.indices, matrix.indices)
    np.testing.assert_array_equal(restored.data, matrix.data)


def test_dense_round_trip() -> None:
    block = np.array([[1.0 / 3.0, 0.0], [0.0, -2.5e-17]])
    with TemporaryDirectory() as tmp_dir:
        path = Path(tmp_dir) / "F.mtx"
        write_mm(path, block)
        np.testing.assert_array_equal(read_mm(path).toarray(), block)


def test_empty_matrix_round_trip() -> None:
    with TemporaryDirectory() as tmp_dir:
        path = Path(tmp_dir) / "Z.mtx"
        write_mm(path, as_sparse(np.zeros((2, 3))))
        restored = read_mm(path)
    assert restored.shape == (2, 3)
    assert restored.nnz == 0


@pytest.mark.parametrize(
    "name,line",
    [
        ("array_layout.mtx", 1),
        ("bad_entry.mtx", 4),
        ("out_of_range.mtx", 4),
        ("short_count.mtx", 4),
    ],
)
def test_parse_errors_carry_line_numbers(name: str, line: int) -> None:
    with pytest.raises(MatrixMarketError) as info:
        read_mm(test_data.get_path(f"data-files/mm/{name}"))
    assert info.value.line == line
    assert f"line {line}" in str(info.value)
