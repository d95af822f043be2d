from pathlib import Path
from tempfile import TemporaryDirectory

import numpy as np
import pytest

from airga.models import constants as c
from airga.models.matrix_market import write_mm
from airga.models.system_io import (
    MissingSystemFileError,
    read_manifest,
    read_system,
    write_system,
)
from airga.reduction.system import SystemValidationError
from tests import beam


def assert_same_system(left, right) -> None:  # type: ignore[no-untyped-def]
    for name in ("M", "D", "K"):
        assert (getattr(left, name) != getattr(right, name)).nnz == 0, name
    for name in ("F", "Cp", "Cv"):
        np.testing.assert_array_equal(getattr(left, name), getattr(right, name))
    assert (left.alpha, left.beta, left.proportional) == (
        right.alpha,
        right.beta,
        right.proportional,
    )


def test_round_trip() -> None:
    system = beam(100, alpha=0.07, beta=0.03)
    with TemporaryDirectory() as tmp_dir:
        write_system(tmp_dir, system)
        names = sorted(p.name for p in Path(tmp_dir).iterdir())
        assert names == ["Cp.mtx", "D.mtx", "F.mtx", "K.mtx", "M.mtx", "manifest.txt"]
        manifest = read_manifest(Path(tmp_dir) / c.MANIFEST_FILE)
        assert manifest["n"] == "100"
        assert manifest["proportional"] == "true"
        restored = read_system(tmp_dir)
    assert_same_system(system, restored)


def test_manifest_only_damping() -> None:
    system = beam(30, alpha=0.1, beta=0.2)
    with TemporaryDirectory() as tmp_dir:
        write_system(tmp_dir, system)
        (Path(tmp_dir) / c.DAMPING_FILE).unlink()
        restored = read_system(tmp_dir)
    assert (restored.D != system.D).nnz == 0


def test_velocity_output_round_trip() -> None:
    system = beam(10)
    cv = np.zeros_like(system.Cp)
    cv[0, 3] = 0.5
    with_velocity = type(system)(
        M=system.M,
        D=system.D,
        K=system.K,
        F=system.F,
        Cp=system.Cp,
        Cv=cv,
        alpha=system.alpha,
        beta=system.beta,
        proportional=True,
    )
    with TemporaryDirectory() as tmp_dir:
        write_system(tmp_dir, with_velocity)
        assert (Path(tmp_dir) / c.VELOCITY_OUTPUT_FILE).is_file()
        restored = read_system(tmp_dir)
    np.testing.assert_array_equal(restored.Cv, cv)


def test_missing_file() -> None:
    with TemporaryDirectory() as tmp_dir:
        write_system(tmp_dir, beam(5))
        (Path(tmp_dir) / "K.mtx").unlink()
        with pytest.raises(MissingSystemFileError, match="K.mtx"):
            read_system(tmp_dir)


def test_mismatched_input_rows() -> None:
    with TemporaryDirectory() as tmp_dir:
        write_system(tmp_dir, beam(5))
        write_mm(Path(tmp_dir) / "F.mtx", np.ones((4, 1)))
        with pytest.raises(SystemValidationError, match="F has 4 rows"):
            read_system(tmp_dir)
