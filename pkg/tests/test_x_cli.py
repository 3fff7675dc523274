"""Tests for the fombound console script."""
import json
import logging

from fombound import cli as cli_module
from fombound.checks import CheckResult
from fombound.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, FomCli

from .const import INSTANCE_FILE

logger = logging.getLogger("fombound")
logger.setLevel(logging.DEBUG)


class TestCli:
    """Test suite for FomCli."""

    def setup_method(self):
        """Initialize the test suite."""
        self.cli = FomCli()  # pylint: disable=attribute-defined-outside-init

    def run(self, *args):
        """Parse and run a command line."""
        self.cli.argv = ["cli", *args]
        self.cli.parse_command_line()
        return self.cli.run_command()

    def test_no_command(self, capsys):
        """Test cli: no command."""
        assert self.run() == EXIT_USAGE
        captured = capsys.readouterr()
        assert "ERROR: provide a command" in captured.out
        assert "Usage:" in captured.out

    def test_unknown_command(self, capsys):
        """Test cli: unknown command."""
        assert self.run("solve") == EXIT_USAGE
        assert "unknown command solve" in capsys.readouterr().out

    def test_unknown_option(self, capsys):
        """Test cli: unknown option."""
        assert self.run("bound", "--lambda", "2", "--verbose") == EXIT_USAGE
        assert "unknown option --verbose" in capsys.readouterr().out

    def test_missing_value(self, capsys):
        """Test cli: flag without value."""
        assert self.run("bound", "--lambda") == EXIT_USAGE
        assert "missing value for --lambda" in capsys.readouterr().out

    def test_extra_argument(self, capsys):
        """Test cli: unexpected positional argument."""
        assert self.run("bound", "now", "--lambda", "2") == EXIT_USAGE
        assert "unexpected arguments now" in capsys.readouterr().out

    def test_bound(self, capsys):
        """Test bound: default JSON output."""
        assert self.run("bound", "--lambda", "2") == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "0.638817"
        document = json.loads("\n".join(lines[1:]))
        assert document["ell"] == 0
        assert document["value_rounded"] == 0.638817

    def test_bound_csv(self, capsys):
        """Test bound: CSV output with gamma-levels."""
        assert self.run("bound", "--lambda", "2.58117", "--gammas", "8.0532", "--format", "csv") == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("0.62974")
        assert lines[1] == "ell,lambda,gamma_1,value"
        assert lines[2].startswith("1,2.581170,8.053200,0.62974")

    def test_bound_errors(self, capsys):
        """Test bound: invalid parameters."""
        assert self.run("bound") == EXIT_USAGE
        assert "provide --lambda" in capsys.readouterr().out
        self.setup_method()
        assert self.run("bound", "--lambda", "1") == EXIT_USAGE
        assert "lambda must be" in capsys.readouterr().out
        self.setup_method()
        assert self.run("bound", "--lambda", "2", "--format", "xml") == EXIT_USAGE

    def test_simulate(self, capsys):
        """Test simulate: water-filling passes every budget."""
        assert self.run("simulate", "--h", "3", "--lambda", "2") == EXIT_OK
        out = capsys.readouterr().out
        assert "p = 0, 1/3, 2/9, 7/27" in out
        assert "All budgets pass" in out
        assert '"predicted_ratio"' in out

    def test_simulate_triangle(self, capsys):
        """Test simulate: bare triangle with the default lambda."""
        assert self.run("simulate", "--h", "0", "--scale", "2") == EXIT_OK
        assert "rho = 3/4, ratio = 0.750000" in capsys.readouterr().out

    def test_simulate_random(self, capsys):
        """Test simulate: random algorithm has no prediction."""
        assert self.run("simulate", "--h", "1", "--lambda", "2", "--alg", "random:5") == EXIT_OK
        out = capsys.readouterr().out
        assert '"algorithm": "random:5"' in out
        assert "predicted_ratio" not in out

    def test_simulate_file(self, tmp_path, capsys):
        """Test simulate: instance file and CSV output file."""
        instance = tmp_path / "instance.json"
        instance.write_text(json.dumps(INSTANCE_FILE), encoding="utf-8")
        output = tmp_path / "report.csv"
        args = ("simulate", "--params", str(instance), "--format", "csv", "--output", str(output))
        assert self.run(*args) == EXIT_OK
        assert "All budgets pass" in capsys.readouterr().out
        assert output.read_text(encoding="utf-8").startswith("i,n,p,q,")

    def test_simulate_trace(self, tmp_path):
        """Test simulate: trace file."""
        trace = tmp_path / "trace.jsonl"
        assert self.run("simulate", "--h", "1", "--lambda", "2", "--trace", str(trace)) == EXIT_OK
        first = json.loads(trace.read_text(encoding="utf-8").splitlines()[0])
        assert first["event"] == "departure"

    def test_simulate_errors(self, capsys):
        """Test simulate: usage errors."""
        assert self.run("simulate") == EXIT_USAGE
        assert "provide --params or --h" in capsys.readouterr().out
        self.setup_method()
        assert self.run("simulate", "--h", "2") == EXIT_USAGE
        self.setup_method()
        assert self.run("simulate", "--h", "x", "--lambda", "2") == EXIT_USAGE
        self.setup_method()
        assert self.run("simulate", "--h", "1", "--lambda", "2", "--alg", "greedy") == EXIT_USAGE
        self.setup_method()
        assert self.run("simulate", "--h", "1", "--lambda", "2", "--ell", "1") == EXIT_USAGE
        self.setup_method()
        assert self.run("simulate", "--h", "1", "--lambda", "3/2") == EXIT_OK
        self.setup_method()
        assert self.run("simulate", "--h", "30", "--lambda", "2") == EXIT_USAGE
        assert "exceed the limit" in capsys.readouterr().out

    def test_export(self, capsys):
        """Test export: schedule as CSV."""
        assert self.run("export", "--h", "1", "--lambda", "2", "--format", "csv") == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "phase,index,first_id,size,next_size,factor"
        assert lines[1] == "initial,0,0,1,,"
        assert lines[-1] == "final,0,,2,,"

    def test_optimize(self, capsys):
        """Test optimize: no gamma-levels."""
        assert self.run("optimize", "--ell", "0", "--restarts", "1") == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("ell=0 params=(7.23")
        assert "value=0.63174" in lines[0]
        assert lines[1] == "ell,lambda,value,converged"

    def test_optimize_rational_init(self, capsys):
        """Test optimize: start point and tolerance given as fractions."""
        args = ("optimize", "--ell", "0", "--restarts", "1", "--init", "29/4", "--tol", "1/10000000000")
        assert self.run(*args) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("ell=0 params=(7.23")
        assert "value=0.63174" in lines[0]

    def test_optimize_errors(self, capsys):
        """Test optimize: usage errors."""
        assert self.run("optimize") == EXIT_USAGE
        assert "provide --ell or --table" in capsys.readouterr().out
        self.setup_method()
        assert self.run("optimize", "--table") == EXIT_USAGE
        self.setup_method()
        assert self.run("optimize", "--ell", "0", "--tol", "fast") == EXIT_USAGE
        self.setup_method()
        assert self.run("optimize", "--ell", "0", "--restarts", "0") == EXIT_USAGE

    def test_check(self, capsys, monkeypatch):
        """Test check: all pass and one failing."""
        monkeypatch.setattr(cli_module, "run_checks", lambda quick: [CheckResult("oracle_l0", True, "ok", 0.1)])
        assert self.run("check", "--quick") == EXIT_OK
        assert "All 1 checks pass" in capsys.readouterr().out
        failing = [CheckResult("oracle_l0", True, "ok"), CheckResult("optimizer", False, "values 0.7")]
        monkeypatch.setattr(cli_module, "run_checks", lambda quick: failing)
        self.setup_method()
        assert self.run("check") == EXIT_FAILED
        assert "Failing: optimizer" in capsys.readouterr().out

    def test_logging(self, capsys):
        """Test cli: logging option."""
        assert self.run("--logging", "debug", "bound", "--lambda", "2") == EXIT_OK
        assert self.cli.loggingconfig["level"] == "DEBUG"
        capsys.readouterr()
