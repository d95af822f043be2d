from dataclasses import astuple, replace
from itertools import combinations
from typing import Any, List, Sequence

import numpy as np
import pytest
import scipy.sparse

from airga.linalg import as_sparse
from airga.models.beam import ModelSpec, beam_generate
from airga.reduction.algorithm import ReductionError, airga_run, assemble_basis
from airga.reduction.config import AirgaConfig, H2Method, SolverKind, default_r_max
from airga.reduction.evaluation import evaluate_reduction
from airga.reduction.norms import h2_norm, relative_h2_change
from airga.reduction.points import ExpansionPointSet
from airga.reduction.system import (
    ReducedSystem,
    SecondOrderSystem,
    state_moments,
    transfer_moments,
)
from tests import beam


def without_timings(records: Sequence[Any]) -> List[tuple]:
    rows = []
    for record in records:
        rows.append(
            tuple(
                value
                for name, value in zip(record.__dataclass_fields__, astuple(record))
                if not name.endswith("_seconds")
            )
        )
    return rows


def single_point_config(r_max: int) -> AirgaConfig:
    return AirgaConfig(
        r_max=r_max,
        initial_points=ExpansionPointSet((10.0,)),
        inner_tol=1e-30,
        max_outer=1,
    )


def test_state_moments_are_matched() -> None:
    system = beam(200)
    reduced, trace = airga_run(system, single_point_config(5))
    assert reduced.r == 5
    assert trace.iterations[0].inner_steps == 6

    v = reduced.basis.assembled
    full = state_moments(system, 10.0, 5)
    projected = state_moments(reduced, 10.0, 5)
    for j in range(5):
        error = np.linalg.norm(v @ projected[j] - full[j])
        assert error <= 1e-6 * np.linalg.norm(full[j]), f"moment {j}"


def test_output_moments_are_matched() -> None:
    system = beam_generate(ModelSpec(n=200, output_node=0))
    reduced, _ = airga_run(system, single_point_config(5))
    full = transfer_moments(system, 10.0, 5)
    projected = transfer_moments(reduced, 10.0, 5)
    for j in range(5):
        np.testing.assert_allclose(
            projected[j], full[j], rtol=1e-6, err_msg=f"moment {j}"
        )


def test_basis_is_orthonormal_and_damping_preserved() -> None:
    system = beam(200)
    reduced, trace = airga_run(system, AirgaConfig())
    v = reduced.basis.assembled
    assert reduced.r <= 30
    np.testing.assert_allclose(v.T @ v, np.eye(reduced.r), atol=1e-10)

    expected = system.alpha * reduced.Mh + system.beta * reduced.Kh
    assert np.linalg.norm(reduced.Dh - expected) <= 1e-10 * np.linalg.norm(reduced.Dh)
    assert reduced.proportional

    assert [record.outer for record in trace.iterations] == list(
        range(1, trace.outer_iterations + 1)
    )
    for record in trace.iterations[1:]:
        assert all(point > 0.0 for point in record.points)
    assert trace.solves and trace.ledger is None
    assert trace.summary()["r"] == reduced.r


def test_full_order_reduction_is_a_fixed_point() -> None:
    system = beam(6)
    reduced, trace = airga_run(system, AirgaConfig(r_max=6, inner_tol=1e-30))
    assert reduced.r == 6
    assert trace.converged
    assert trace.outer_iterations <= 2
    assert relative_h2_change(system, reduced).value <= 1e-6


def test_runs_are_deterministic() -> None:
    system = beam(60)
    cfg = AirgaConfig(r_max=12, max_outer=3)
    first, first_trace = airga_run(system, cfg)
    second, second_trace = airga_run(system, cfg)
    for name in ("Mh", "Dh", "Kh", "Fh", "Cph"):
        np.testing.assert_array_equal(getattr(first, name), getattr(second, name))
    assert repr(without_timings(first_trace.iterations)) == repr(
        without_timings(second_trace.iterations)
    )
    assert without_timings(first_trace.solves) == without_timings(second_trace.solves)


def relative_h2_distance(first: ReducedSystem, second: ReducedSystem) -> float:
    quadrature = H2Method.QUADRATURE
    return h2_norm(first, second, quadrature) / h2_norm(first, method=quadrature)


def test_solver_strategies_agree() -> None:
    system = beam_generate(ModelSpec.benchmark(200))
    base = AirgaConfig(cg_rtol=1e-12)
    kinds = (SolverKind.DIRECT, SolverKind.CG_SPAI, SolverKind.CG_SPAI_UPDATE)
    results = {kind: airga_run(system, replace(base, solver=kind)) for kind in kinds}

    for kind in kinds:
        reduced, trace = results[kind]
        assert trace.converged, kind
        assert reduced.r <= base.r_max
        if kind.preconditioned:
            assert trace.ledger is not None and trace.ledger.entries
            assert all(record.columns_over_tol == 0 for record in trace.preconditioners)
    for first, second in combinations(kinds, 2):
        a, b = results[first][0], results[second][0]
        assert a.r == b.r, (first, second)
        assert relative_h2_distance(a, b) <= 1e-8, (first, second)


@pytest.mark.parametrize("kind", [SolverKind.CG_SPAI, SolverKind.CG_SPAI_UPDATE])
def test_preconditioned_runs_finish_on_the_plain_beam(kind: SolverKind) -> None:
    system = beam(200)
    cfg = AirgaConfig(solver=kind, max_outer=4)
    reduced, trace = airga_run(system, cfg)
    assert reduced.r <= cfg.r_max
    assert trace.outer_iterations >= 2
    assert {record.outer for record in trace.preconditioners} == set(
        range(1, trace.outer_iterations + 1)
    )
    for record in trace.preconditioners:
        if record.columns_over_tol == 0:
            assert record.max_column_residual <= cfg.spai_tol


def test_update_chain_grows_from_the_start_iteration() -> None:
    system = beam_generate(ModelSpec.benchmark(100))
    cfg = AirgaConfig(
        r_max=20,
        outer_tol=1e-14,
        max_outer=3,
        update_start_iteration=3,
        solver=SolverKind.CG_SPAI_UPDATE,
    )
    _, trace = airga_run(system, cfg)
    lengths = {(r.outer, r.chain_length) for r in trace.preconditioners}
    assert lengths == {(1, 1), (2, 1), (3, 2)}


def test_benchmark_beam_reaches_the_accuracy_bound() -> None:
    system = beam_generate(ModelSpec.benchmark(2000))
    cfg = AirgaConfig(r_max=default_r_max(system.n), solver=SolverKind.CG_SPAI)
    reduced, _ = airga_run(system, cfg)
    assert reduced.r <= 30
    evaluation = evaluate_reduction(system, reduced, [])
    assert evaluation.h2_method is H2Method.QUADRATURE
    assert evaluation.relative_h2_error <= 1e-4


def test_update_builds_faster_than_fresh_preconditioners() -> None:
    system = beam_generate(ModelSpec.benchmark(2000))
    base = AirgaConfig(outer_tol=1e-14, max_outer=5)
    seconds = {}
    for kind in (SolverKind.CG_SPAI, SolverKind.CG_SPAI_UPDATE):
        _, trace = airga_run(system, replace(base, solver=kind))
        assert trace.outer_iterations >= base.update_start_iteration
        seconds[kind] = trace.precond_seconds(base.update_start_iteration)
    assert seconds[SolverKind.CG_SPAI] > 0.0
    ratio = seconds[SolverKind.CG_SPAI_UPDATE] / seconds[SolverKind.CG_SPAI]
    assert ratio < 1.0


def test_errors_carry_the_iteration() -> None:
    n = 3
    system = SecondOrderSystem(
        M=as_sparse(scipy.sparse.identity(n)),
        D=as_sparse(scipy.sparse.csr_matrix((n, n))),
        K=as_sparse(-scipy.sparse.identity(n)),
        F=np.ones((n, 1)),
        Cp=np.ones((1, n)),
        Cv=np.zeros((1, n)),
    )
    cfg = AirgaConfig(r_max=2, initial_points=ExpansionPointSet((1.0,)))
    with pytest.raises(ReductionError, match="outer iteration 1") as info:
        airga_run(system, cfg)
    assert info.value.outer == 1


def test_r_max_below_input_count() -> None:
    base = beam(10)
    system = SecondOrderSystem.proportionally_damped(
        base.M, base.K, np.eye(10)[:, :2], base.Cp, base.alpha, base.beta
    )
    with pytest.raises(ValueError):
        airga_run(system, AirgaConfig(r_max=1))


def test_assemble_basis_truncates() -> None:
    blocks = [np.eye(5)[:, [i]] for i in range(4)]
    basis = assemble_basis(blocks, 3)
    assert basis.r == 3
    assert len(basis.blocks) == 4
    np.testing.assert_allclose(np.abs(basis.assembled), np.eye(5)[:, :3])
