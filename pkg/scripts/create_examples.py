#!/usr/bin/env python3
"""
Generate example reductions of small benchmark beams
"""
import shutil
from dataclasses import replace
from pathlib import Path

from airga.diagnostics.ledger import DEFAULT_MAX_DIM
from airga.diagnostics.report import diagnose, write_report
from airga.models.beam import ModelSpec, beam_generate
from airga.models.system_io import write_system
from airga.reduction.algorithm import airga_run
from airga.reduction.config import AirgaConfig, SolverKind, default_r_max
from airga.reduction.trace import write_trace

root = Path(__file__).parents[1]
examples = root / "examples-output"

shutil.rmtree(examples, ignore_errors=True)

for n in (200, 2000):
    system = beam_generate(ModelSpec.benchmark(n))
    system_dir = write_system(examples / f"beam-{n}", system)
    base = AirgaConfig(r_max=default_r_max(n))

    for solver in (SolverKind.DIRECT, SolverKind.CG_SPAI_UPDATE):
        run = examples / f"beam-{n}-{solver.value}"
        reduced, trace = airga_run(system, replace(base, solver=solver))
        write_system(run / "reduced", reduced.to_system())
        write_trace(trace, run)
        if trace.ledger is not None and n <= DEFAULT_MAX_DIM:
            write_report(diagnose(system, trace), run)
        print(f"{system_dir.name} {solver.value}: r={reduced.r}")
