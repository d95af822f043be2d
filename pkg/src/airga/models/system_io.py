"""Second-order systems stored as a directory of Matrix Market files.

The directory holds M.mtx, K.mtx, F.mtx, Cp.mtx, optionally D.mtx and Cv.mtx,
and a ``manifest.txt`` of key=value lines (n, alpha, beta, proportional). When
D.mtx is absent, D is assembled as alpha M + beta K from the manifest.
"""
import logging
from pathlib import Path
from typing import Dict, Union

import numpy as np

from airga.linalg import AirgaError, as_sparse, sp_add_scaled
from airga.models import constants as c
from airga.models.matrix_market import read_mm, write_mm
from airga.reduction.system import SecondOrderSystem, SystemValidationError

logger = logging.getLogger(__name__)


class MissingSystemFileError(AirgaError, FileNotFoundError):
    pass


def read_manifest(path: Union[str, Path]) -> Dict[str, str]:
    manifest: Dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for number, line in enumerate(f, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if "=" not in text:
                raise SystemValidationError(
                    f"{path}:{number}: expected key=value, got {text!r}"
                )
            key, value = text.split("=", 1)
            manifest[key.strip()] = value.strip()
    return manifest


def write_manifest(path: Union[str, Path], system: SecondOrderSystem) -> None:
    lines = [
        f"n={system.n}",
        f"m={system.m}",
        f"q={system.q}",
        f"alpha={system.alpha!r}",
        f"beta={system.beta!r}",
        f"proportional={'true' if system.proportional else 'false'}",
    ]
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def write_system(directory: Union[str, Path], system: SecondOrderSystem) -> Path:
    """Writes ``system`` into ``directory`` (created if needed)."""
    target = Path(directory)
    target.mkdir(parents=True, exist_ok=True)
    write_mm(target / "M.mtx", system.M)
    write_mm(target / "K.mtx", system.K)
    write_mm(target / c.DAMPING_FILE, system.D)
    write_mm(target / "F.mtx", system.F)
    write_mm(target / "Cp.mtx", system.Cp)
    if system.has_velocity_output:
        write_mm(target / c.VELOCITY_OUTPUT_FILE, system.Cv)
    write_manifest(target / c.MANIFEST_FILE, system)
    logger.info(f"Wrote system with n={system.n} to {target}")
    return target


def read_system(directory: Union[str, Path]) -> SecondOrderSystem:
    """Reads a system directory written by ``write_system``.

    Raises:
        MissingSystemFileError: A required file is missing.
        SystemValidationError: Dimensions or manifest values are inconsistent.
    """
    source = Path(directory)
    for name in c.REQUIRED_FILES + (c.MANIFEST_FILE,):
        if not (source / name).is_file():
            raise MissingSystemFileError(f"System directory {source} has no {name}")
    manifest = read_manifest(source / c.MANIFEST_FILE)
    try:
        alpha = float(manifest.get("alpha", "0"))
        beta = float(manifest.get("beta", "0"))
    except ValueError as e:
        raise SystemValidationError(f"Bad damping coefficient in manifest: {e}") from e
    proportional = manifest.get("proportional", "false").lower() == "true"

    M = read_mm(source / "M.mtx")
    K = read_mm(source / "K.mtx")
    F = read_mm(source / "F.mtx").toarray()
    Cp = read_mm(source / "Cp.mtx").toarray()
    if (source / c.DAMPING_FILE).is_file():
        D = read_mm(source / c.DAMPING_FILE)
    elif proportional:
        if M.shape != K.shape:
            raise SystemValidationError(f"M is {M.shape} but K is {K.shape}")
        D = sp_add_scaled(M, K, alpha, beta)
    else:
        raise MissingSystemFileError(
            f"System directory {source} has no {c.DAMPING_FILE} and is not "
            f"proportionally damped"
        )
    if (source / c.VELOCITY_OUTPUT_FILE).is_file():
        Cv = read_mm(source / c.VELOCITY_OUTPUT_FILE).toarray()
    else:
        Cv = np.zeros_like(Cp)

    if "n" in manifest and int(manifest["n"]) != M.shape[0]:
        raise SystemValidationError(
            f"Manifest says n={manifest['n']} but M is {M.shape[0]}x{M.shape[1]}"
        )
    if F.shape[0] != M.shape[0]:
        raise SystemValidationError(f"F has {F.shape[0]} rows, expected {M.shape[0]}")
    if Cp.shape[1] != M.shape[0]:
        raise SystemValidationError(
            f"Cp has {Cp.shape[1]} columns, expected {M.shape[0]}"
        )
    return SecondOrderSystem(
        M=as_sparse(M),
        D=as_sparse(D),
        K=as_sparse(K),
        F=F,
        Cp=Cp,
        Cv=Cv,
        alpha=alpha,
        beta=beta,
        proportional=proportional,
    )
