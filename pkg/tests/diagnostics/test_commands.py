from pathlib import Path
from tempfile import TemporaryDirectory
from typing import Callable, List

from click import Command, Group

from airga.commands import create_airga_command
from airga.diagnostics.report import ORTHOGONALITY_FILE, REPORT_FILE
from airga.models.system_io import write_system
from tests import CliTestCase, beam


class DiagnoseTest(CliTestCase):
    def create_subcommand_functions(self) -> List[Callable[[Group], Command]]:
        return [create_airga_command]

    def reduce(self, system_dir: Path, out: Path, solver: str) -> None:
        cmd = [
            "reduce",
            "--in",
            str(system_dir),
            "--out",
            str(out),
            "--solver",
            solver,
            "--rmax",
            "8",
            "--max-outer",
            "2",
        ]
        result = self.run_command(cmd)
        assert result.exit_code == 0, "\n{}".format(result.output)

    def test_diagnose_cg_run(self) -> None:
        with TemporaryDirectory() as tmp_dir:
            system_dir = write_system(Path(tmp_dir) / "full", beam(60))
            run = Path(tmp_dir) / "run"
            self.reduce(system_dir, run, "cg")
            result = self.run_command(
                [
                    "diagnose",
                    "--trace",
                    str(run),
                    "--system",
                    str(system_dir),
                    "--grid",
                    "1e-2:1e2:40",
                ]
            )
            assert result.exit_code == 0, "\n{}".format(result.output)
            self.assertIn("stable: true", result.output)
            self.assertIn("orthogonality:", result.output)
            self.assertTrue((run / REPORT_FILE).is_file())
            self.assertTrue((run / ORTHOGONALITY_FILE).is_file())

    def test_direct_run_has_no_ledger(self) -> None:
        with TemporaryDirectory() as tmp_dir:
            system_dir = write_system(Path(tmp_dir) / "full", beam(20))
            run = Path(tmp_dir) / "run"
            self.reduce(system_dir, run, "direct")
            result = self.run_command(
                ["diagnose", "--trace", str(run), "--system", str(system_dir)]
            )
            self.assertEqual(result.exit_code, 1)
            self.assertIn("no residual ledger", result.output)

    def test_mismatched_system(self) -> None:
        with TemporaryDirectory() as tmp_dir:
            system_dir = write_system(Path(tmp_dir) / "full", beam(30))
            other_dir = write_system(Path(tmp_dir) / "other", beam(12))
            run = Path(tmp_dir) / "run"
            self.reduce(system_dir, run, "cg")
            result = self.run_command(
                ["diagnose", "--trace", str(run), "--system", str(other_dir)]
            )
            self.assertEqual(result.exit_code, 1)
            self.assertIn("diagnose: ", result.output)
