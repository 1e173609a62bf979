"""
TC-009: Command Line
Validates the report envelope, exit codes and argument parsing of padic-ode
"""

import pytest
import sys
import os
import json
from fractions import Fraction

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def _report(path):
    with open(path) as fh:
        return json.load(fh)


class TestParser:
    """Test argument parsing"""

    def test_commands_registered(self):
        """Test every command has a subparser"""
        from padic_ode.cli import COMMANDS, build_parser

        required = {
            "newton": ["--op", "x.json"],
            "factor": ["--op", "x.json", "--index", "1"],
            "loggrowth": ["--series", "s.json"],
        }
        parser = build_parser()
        for command in COMMANDS:
            args = parser.parse_args([command] + required.get(command, []))
            assert args.command == command
        assert set(COMMANDS) == {"radii", "newton", "factor", "decompose", "solve", "loggrowth",
                                 "verify-example"}

    def test_missing_subcommand(self):
        """Test a bare invocation is a usage error"""
        from padic_ode.cli import build_parser

        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_parse_grid(self):
        """Test 'lo:hi:n' and comma lists"""
        from padic_ode.cli import parse_grid

        assert parse_grid("0:1/16:3") == [Fraction(0), Fraction(1, 32), Fraction(1, 16)]
        assert parse_grid("0,1/8") == [Fraction(0), Fraction(1, 8)]

    def test_parse_grid_malformed(self):
        """Test malformed grids are located at --grid"""
        from padic_ode.cli import parse_grid
        from padic_ode.errors import InputFormatError

        with pytest.raises(InputFormatError) as info:
            parse_grid("a:b")
        assert info.value.location == "--grid"


class TestCommands:
    """Test commands end to end through run()"""

    def test_radii(self, example_operator_doc, write_json, tmp_path):
        """Test radii {1/4, 0} of T^2 + tT + 1 at the generic point"""
        from padic_ode.cli import run

        op = write_json("op.json", example_operator_doc)
        out = str(tmp_path / "report.json")
        assert run(["radii", "--op", op, "--out", out]) == 0
        report = _report(out)
        assert report["command"] == "radii"
        assert report["status"] == "ok"
        assert report["data"]["radii"] == {"1/4": 1, "0": 1}

    def test_newton(self, example_operator_doc, write_json, tmp_path):
        """Test the flat polygon of T^2 + tT + 1"""
        from padic_ode.cli import run

        op = write_json("op.json", example_operator_doc)
        out = str(tmp_path / "report.json")
        assert run(["newton", "--op", op, "--out", out]) == 0
        assert _report(out)["data"]["slopes"] == [["0", 2]]

    def test_factor_not_separated(self, example_operator_doc, write_json, tmp_path):
        """Test an unseparated split exits with 2"""
        from padic_ode.cli import run

        op = write_json("op.json", example_operator_doc)
        out = str(tmp_path / "report.json")
        assert run(["factor", "--op", op, "--index", "1", "--out", out]) == 2
        report = _report(out)
        assert report["status"] == "error"
        assert report["data"]["error"] == "radii-not-separated"

    def test_loggrowth(self, write_json, tmp_path):
        """Test a bounded series"""
        from padic_ode.cli import run

        doc = {"p": 5, "series": {"terms": {str(e): 1 for e in range(100)}, "hi": 99}}
        path = write_json("series.json", doc)
        out = str(tmp_path / "report.json")
        assert run(["loggrowth", "--series", path, "--out", out]) == 0
        data = _report(out)["data"]
        assert data["radius_bracket"][0] == "0"
        assert data["log_growth"]["delta_estimate"] == "bounded"

    def test_malformed_document(self, example_operator_doc, write_json, tmp_path):
        """Test validation failures exit with 1 and name the location"""
        from padic_ode.cli import run

        op = write_json("op.json", {**example_operator_doc, "coeffs": []})
        out = str(tmp_path / "report.json")
        assert run(["radii", "--op", op, "--out", out]) == 1
        data = _report(out)["data"]
        assert data["error"] == "malformed-input"
        assert data["location"] == "coeffs"

    def test_missing_file(self, tmp_path):
        """Test a missing input file exits with 1"""
        from padic_ode.cli import run

        out = str(tmp_path / "report.json")
        assert run(["radii", "--op", str(tmp_path / "absent.json"), "--out", out]) == 1

    def test_no_input(self, tmp_path):
        """Test radii without --op or --module"""
        from padic_ode.cli import run

        out = str(tmp_path / "report.json")
        assert run(["radii", "--out", out]) == 1
        assert _report(out)["status"] == "error"


class TestSolveAndExample:
    """Test the solve and verify-example commands and unexpected failures"""

    def test_solve_example_over_disc(self, example_operator_doc, write_json, tmp_path):
        """Test T^2 + tT + 1 has one convergent solution, (t, 1), out of two"""
        from padic_ode.cli import run

        doc = {**example_operator_doc, "ring": {"kind": "disc"}}
        op = write_json("op.json", doc)
        out = str(tmp_path / "report.json")
        assert run(["solve", "--op", op, "--out", out]) == 0
        data = _report(out)["data"]
        assert data["formal_dimension"] == 2
        assert data["convergent_dimension"] == 1
        assert data["basis_convergent"] == 1

    def test_unexpected_exception(self, monkeypatch, tmp_path):
        """Test an exception outside the library error tree exits 4 with a report"""
        from padic_ode import cli

        def broken(args, settings):
            raise RuntimeError("boom")

        monkeypatch.setitem(cli.COMMANDS, "solve", broken)
        out = str(tmp_path / "report.json")
        assert cli.run(["solve", "--out", out]) == 4
        report = _report(out)
        assert report["status"] == "error"
        assert report["data"]["error"] == "internal-error"
        assert "RuntimeError" in report["data"]["detail"]

    @pytest.mark.slow
    def test_verify_example(self, tmp_path):
        """Test the exit code follows the report status and M has one convergent solution"""
        from padic_ode.cli import run

        out = str(tmp_path / "report.json")
        code = run(["verify-example", "--p", "5", "--out", out])
        report = _report(out)
        assert report["command"] == "verify-example"
        assert (code == 0) == (report["status"] == "ok")
        data = report["data"]
        assert data["solutions"]["module"]["holds"] is True
        assert {"frobenius", "split", "profile"} <= set(data)
