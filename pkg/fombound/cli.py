"""Console script for fombound."""
import logging
import re
import sys
from typing import Optional

from .bound import BoundPoint, finite_h_prediction
from .checks import run_checks
from .const import DEFAULT_ALGORITHM, DEFAULT_TOLERANCE, OUTPUT_FORMATS, ROUND_DIGITS
from .construction import ConstructionParams, build_schedule
from .engine import WaterFilling
from .exceptions import (
    ContractViolation,
    InvalidParameters,
    OptimizationFailed,
    ScaleOverflow,
    UnknownAlgorithm,
    UsageError,
)
from .export import (
    bound_document,
    bound_rows,
    render,
    schedule_document,
    schedule_rows,
    simulation_document,
    simulation_rows,
    table_document,
    table_rows,
    write_output,
)
from .optimizer import FomOptimizer
from .rational import format_fraction, parse_list, parse_real
from .simulator import FomSimulator, verify_error_budget

_LOGGER: logging.Logger = logging.getLogger(__package__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

# flags taking a value, mapped to the attribute they set
VALUE_FLAGS = {
    "--lambda": "lam",
    "--gammas": "gammas",
    "--format": "format",
    "--output": "output",
    "--ell": "ell",
    "--max-ell": "max_ell",
    "--restarts": "restarts",
    "--tol": "tolerance",
    "--init": "initial",
    "--workers": "workers",
    "--params": "params_file",
    "--h": "h",
    "--scale": "scale",
    "--alg": "algorithm",
    "--trace": "trace",
}
SWITCH_FLAGS = {"--full-precision": "full_precision", "--table": "table", "--quick": "quick"}


class FomCli:
    """CLI class."""

    def __init__(self):
        """Initialize."""
        self.logging = "WARNING"
        self.command = None
        self.lam = None
        self.gammas = None
        self.format = None
        self.output = None
        self.ell = None
        self.max_ell = None
        self.restarts = None
        self.tolerance = None
        self.initial = None
        self.workers = None
        self.params_file = None
        self.h = None
        self.scale = None
        self.algorithm = None
        self.trace = None
        self.full_precision = False
        self.table = False
        self.quick = False
        self.loggingconfig = {
            'level': 'WARNING',
            'format': '%(asctime)s %(levelname)s <%(name)s %(module)s %(funcName)s> %(message)s',
            'datefmt': '%a, %d %b %Y %H:%M:%S',
        }
        self.args = []
        self.argv = None
        self.error = None

    def parse_command_line(self):
        """Parse command line arguments."""
        skip_next = False
        self.argv = sys.argv if self.argv is None else self.argv
        for i in range(1, len(self.argv)):
            if skip_next:
                skip_next = False
                continue
            arg = self.argv[i]
            arg = re.sub(' +', ' ', arg)
            if arg == "--logging" or arg in VALUE_FLAGS:
                if i + 1 >= len(self.argv):
                    self.error = f"missing value for {arg}"
                    return
                skip_next = True
                if arg == "--logging":
                    self.logging = self.argv[i + 1]
                    self.loggingconfig["level"] = self.logging.upper()
                    logging.basicConfig(**self.loggingconfig)  # type: ignore
                    continue
                setattr(self, VALUE_FLAGS[arg], self.argv[i + 1])
                continue
            if arg in SWITCH_FLAGS:
                setattr(self, SWITCH_FLAGS[arg], True)
                continue
            if arg.startswith("--"):
                self.error = f"unknown option {arg}"
                return
            if self.command is None:
                self.command = arg
                continue
            self.args.append(arg)

    def run_command(self) -> int:
        """Run the requested command and return the exit code."""
        commands = {
            "bound": self.cmd_bound,
            "optimize": self.cmd_optimize,
            "simulate": self.cmd_simulate,
            "check": self.cmd_check,
            "export": self.cmd_export,
        }
        if self.error is None and self.command not in commands:
            self.error = "provide a command" if self.command is None else f"unknown command {self.command}"
        if self.error is None and self.args:
            self.error = f"unexpected arguments {' '.join(self.args)}"
        if self.error is not None:
            print(f"ERROR: {self.error}")
            print("")
            self.print_usage()
            return EXIT_USAGE
        try:
            return commands[self.command]()
        except (UsageError, InvalidParameters, UnknownAlgorithm, ScaleOverflow) as exception:
            print(f"ERROR: {exception.message}")
            return EXIT_USAGE
        except ContractViolation as exception:
            _LOGGER.error(exception.to_string())
            print(f"ERROR: contract violation, {exception.message}")
            return EXIT_FAILED
        except OptimizationFailed as exception:
            print(f"ERROR: {exception.message}")
            return EXIT_FAILED

    # helpers

    def _int(self, name: str, value: Optional[str], minimum: int = 0) -> Optional[int]:
        if value is None:
            return None
        try:
            number = int(value)
        except ValueError as exception:
            raise UsageError(f"{name} must be an integer, got {value}") from exception
        if number < minimum:
            raise UsageError(f"{name} must be >= {minimum}, got {number}")
        return number

    def _floats(self, name: str, value: str) -> list[float]:
        try:
            numbers = [parse_real(item) for item in parse_list(value)]
        except InvalidParameters as exception:
            raise UsageError(f"{name} must be a number or a comma separated list, got {value}") from exception
        if not numbers:
            raise UsageError(f"{name} needs a value")
        return numbers

    def _output_format(self, default: str) -> str:
        fmt = default if self.format is None else self.format.lower()
        if fmt not in OUTPUT_FORMATS:
            raise UsageError(f"format must be one of {', '.join(OUTPUT_FORMATS)}, got {self.format}")
        return fmt

    def _gamma_list(self) -> list[str]:
        return [] if self.gammas is None else parse_list(self.gammas)

    def _construction_params(self) -> ConstructionParams:
        if self.params_file is not None:
            return ConstructionParams.from_file(self.params_file)
        h = self._int("--h", self.h)
        if h is None:
            raise UsageError("provide --params or --h")
        gammas = self._gamma_list()
        ell = self._int("--ell", self.ell)
        if ell is not None and ell != len(gammas):
            raise UsageError(f"--ell {ell} needs {ell} values in --gammas, got {len(gammas)}")
        lam = self.lam
        if lam is None:
            if h > 0 or gammas:
                raise UsageError("provide --lambda")
            lam = "2"
        multiplier = self._int("--scale", self.scale, minimum=1) or 1
        return ConstructionParams.create(h, lam, gammas, multiplier)

    # commands

    def cmd_bound(self) -> int:
        """Evaluate the bound at the given parameters."""
        if self.lam is None:
            raise UsageError("provide --lambda")
        point = BoundPoint.evaluate(self.lam, self._gamma_list())
        print(f"{point.value:.{ROUND_DIGITS}f}")
        fmt = self._output_format("json")
        write_output(render(bound_rows([point]), bound_document(point), fmt, self.full_precision, "bound"), self.output)
        return EXIT_OK

    def cmd_optimize(self) -> int:
        """Minimize the bound for one ell or reproduce the whole table."""
        tolerance = DEFAULT_TOLERANCE if self.tolerance is None else self._floats("--tol", self.tolerance)[0]
        optimizer = FomOptimizer()
        optimizer.set_tolerance(tolerance)
        optimizer.set_restarts(self._int("--restarts", self.restarts, minimum=1))
        optimizer.set_workers(self._int("--workers", self.workers, minimum=1) or 1)
        if self.table:
            max_ell = self._int("--max-ell", self.max_ell)
            if max_ell is None:
                raise UsageError("provide --max-ell with --table")
            results = optimizer.reproduce_table(max_ell)
        else:
            ell = self._int("--ell", self.ell)
            if ell is None:
                raise UsageError("provide --ell or --table")
            initial = None if self.initial is None else self._floats("--init", self.initial)
            results = [optimizer.minimize(ell, initial=initial)]
        _LOGGER.info("Optimized %d table rows", len(results))
        for result in results:
            parameters = ", ".join(f"{value:.6f}" for value in result.point.parameters)
            print(f"ell={result.ell} params=({parameters}) value={result.point.value:.{ROUND_DIGITS}f}")
        fmt = self._output_format("csv")
        rendered = render(table_rows(results), table_document(results), fmt, self.full_precision, "optimize")
        write_output(rendered, self.output)
        if not all(result.converged for result in results):
            print("ERROR: optimum not certified as a local minimum")
            return EXIT_FAILED
        return EXIT_OK

    def cmd_simulate(self) -> int:
        """Simulate an instance and verify the error budgets."""
        params = self._construction_params()
        simulator = FomSimulator(params, self.algorithm or DEFAULT_ALGORITHM)
        simulator.set_trace_path(self.trace)
        report = simulator.run()
        _LOGGER.info("Simulated %s with %s, ratio %s", params, report.algorithm, report.ratio)
        checks = verify_error_budget(report, params)
        prediction = finite_h_prediction(params) if isinstance(simulator.get_algorithm(), WaterFilling) else None
        print(f"p = {', '.join(format_fraction(value) for value in report.p)}")
        print(f"rho = {format_fraction(report.rho)}, ratio = {float(report.ratio):.{ROUND_DIGITS}f}")
        fmt = self._output_format("json")
        document = simulation_document(report, checks, prediction)
        rendered = render(simulation_rows(report, checks), document, fmt, self.full_precision, "simulate")
        write_output(rendered, self.output)
        failed = [check for check in checks if not check.passed]
        if failed:
            for check in failed:
                print(f"FAILED: {check.name} at {check.index}, deviation {float(check.deviation):.3e}")
            return EXIT_FAILED
        print("All budgets pass")
        return EXIT_OK

    def cmd_check(self) -> int:
        """Run the invariant suite."""
        results = run_checks(self.quick)
        for result in results:
            verdict = "PASS" if result.passed else "FAIL"
            print(f"{result.name:<24} {verdict}  {result.seconds:7.2f}s  {result.detail}")
        failed = [result.name for result in results if not result.passed]
        if failed:
            print(f"Failing: {', '.join(failed)}")
            return EXIT_FAILED
        print(f"All {len(results)} checks pass")
        return EXIT_OK

    def cmd_export(self) -> int:
        """Export the event schedule of an instance."""
        schedule = build_schedule(self._construction_params())
        _LOGGER.info("Exporting %d phases over %d vertices", len(schedule.phases), schedule.vertex_count)
        fmt = self._output_format("json")
        rendered = render(schedule_rows(schedule), schedule_document(schedule), fmt, self.full_precision, "export")
        write_output(rendered, self.output)
        return EXIT_OK

    def print_usage(self):
        """Print CLI usage."""
        print("fombound cli")
        print("Usage: python -m fombound.cli [OPTIONS] COMMAND <FLAGS>")
        print("")
        print("Options:")
        print("  --logging <level>                       The logging level (debug, info, warning)")
        print("")
        print("Commands:")
        print("  bound --lambda <x> [--gammas g1,g2,...]  Evaluate the upper bound on the competitive ratio")
        print("  optimize --ell <l> [--restarts <r>] [--tol <t>] [--init x0,x1,...] [--workers <w>]")
        print("                                          Minimize the bound with l gamma-levels")
        print("  optimize --table --max-ell <l>          Minimize the bound for every ell up to l")
        print("  simulate (--params <file> | --h <h> [--ell <l>] --lambda <p/q> [--gammas ...] [--scale <m>])")
        print("           [--alg waterfilling|random:<seed>] [--trace <path>]")
        print("                                          Run the adversary against an algorithm, verify budgets")
        print("  check [--quick]                         Run the invariant suite")
        print("  export (--params <file> | --h <h> ...)  Write the event schedule of an instance")
        print("")
        print("Output flags (all commands):")
        print("  --format <csv|json>                     Output format")
        print("  --output <path>                         Write to a file instead of stdout")
        print("  --full-precision                        Do not round CSV values to 6 decimals")


def main() -> None:
    """Run the console script."""
    # create an instance of the cli
    cli = FomCli()
    # parse provided command line
    cli.parse_command_line()
    # run the command requested by the user
    sys.exit(cli.run_command())


if __name__ == "__main__":
    main()
