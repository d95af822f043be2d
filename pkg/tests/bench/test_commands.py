import csv
from pathlib import Path
from tempfile import TemporaryDirectory
from typing import Callable, List

from click import Command, Group

from airga.bench.runner import TOTALS_FILE
from airga.commands import create_airga_command
from tests import CliTestCase


class BenchTest(CliTestCase):
    def create_subcommand_functions(self) -> List[Callable[[Group], Command]]:
        return [create_airga_command]

    def test_bench(self) -> None:
        with TemporaryDirectory() as tmp_dir:
            cmd = [
                "bench",
                "--sizes",
                "20",
                "--solvers",
                "direct,cg",
                "--repeats",
                "1",
                "--rmax",
                "4",
                "--max-outer",
                "2",
                "--out",
                tmp_dir,
            ]
            result = self.run_command(cmd)
            assert result.exit_code == 0, "\n{}".format(result.output)
            self.assertIn("n=20 direct: ok", result.output)
            self.assertIn("n=20 cg: ok", result.output)

            with open(Path(tmp_dir) / TOTALS_FILE, newline="") as f:
                rows = list(csv.DictReader(f))
            self.assertEqual([row["solver"] for row in rows], ["direct", "cg"])

    def test_bad_lists(self) -> None:
        with TemporaryDirectory() as tmp_dir:
            for option, value in (
                ("--sizes", "20,x"),
                ("--sizes", "1"),
                ("--solvers", "lu"),
                ("--points", "1:2"),
                ("--model", "truss"),
            ):
                result = self.run_command(["bench", option, value, "--out", tmp_dir])
                self.assertEqual(result.exit_code, 2, (option, value))
