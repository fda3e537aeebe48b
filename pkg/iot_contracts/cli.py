"""
Command line front end : scenario solves, parameter sweeps, figure data, proposition suites and root queries.

Exit status : 0 on success, 1 when a proposition is violated, 2 on invalid input.
"""
import argparse
import sys
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from tabulate import tabulate

from . import base_utils
from .base_utils import (
    ConfigException, DegenerateFollowerException, DomainViolationException, EvaluationException, InsufficientRootsException,
    NoStationaryPointException, ParamValidationException, SpecializationException, _parallel_map, debug, error, set_debug)
from .io import ledger_frame, outcomes_frame, read_config, reports_frame, thresholds_frame, to_csv, write_outputs
from .oracle import compare_methods, solve
from .params import BENCHMARK, PARAM_KEYS, SOLVED_BENCHMARK, SCENARIOS, Method, ModelParams, ProfitView, Scenario, list_parameters
from .roots import PolySpec, poly_root
from .statics import FIGURES, PropositionGrid, discover_thresholds, figure_data, proposition_suite

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INVALID = 2

# Keys of a config file which are not model parameters
CONFIG_KEYS = ("scenario", "method", "out", "ledger", "vary", "profit_view")


# Errors reported with exit status 2
_INPUT_ERRORS = (
    ConfigException, ParamValidationException, DomainViolationException, SpecializationException,
    DegenerateFollowerException, NoStationaryPointException, InsufficientRootsException, EvaluationException, OSError)


@dataclass
class RunConfig :
    """Resolved settings of a run : config file values overridden by the command line """
    scenarios: List[Scenario]
    params: ModelParams
    method: Optional[str] = None
    vary: Optional[Tuple[str, float, float, int]] = None
    out: Optional[str] = None
    ledger: Optional[str] = None
    profit_view: str = ProfitView.PERCEIVED

    def points(self) -> List[ModelParams]:
        """Parameter points of a sweep, in increasing order """
        if self.vary is None :
            return [self.params]
        name, start, stop, count = self.vary
        return [self.params.with_values(**{name : float(val)}) for val in np.linspace(start, stop, count)]


def _float(key, value) :
    try :
        return float(value)
    except ValueError :
        raise ConfigException("Value of '%s' should be a number, got '%s'" % (key, value))


def _parse_assignment(text) :
    if not "=" in text :
        raise ConfigException("Expected key=value, got '%s'" % text)
    key, value = text.split("=", 1)
    return key.strip(), value.strip()


def _check_param_key(key) :
    if not key in PARAM_KEYS and not key in PARAM_KEYS.values() :
        raise ConfigException("Unknown parameter '%s'. Expected one of %s" % (key, ", ".join(PARAM_KEYS)))
    return key


def _parse_vary(text) :
    """name=start:stop:count """
    key, value = _parse_assignment(text)
    parts = value.split(":")
    if len(parts) != 3 :
        raise ConfigException("Expected name=start:stop:count, got '%s'" % text)
    count = int(_float(key, parts[2]))
    if count < 2 :
        raise ConfigException("A sweep needs at least 2 points, got %d" % count)
    return _check_param_key(key), _float(key, parts[0]), _float(key, parts[1]), count


def _parse_scenarios(text) :
    codes = [code.strip() for code in text.split(",") if code.strip()]
    for code in codes :
        if not code in SCENARIOS :
            raise ConfigException("Unknown scenario '%s'. Expected one of %s" % (code, ", ".join(SCENARIOS)))
    return [SCENARIOS[code] for code in codes]


def build_config(args, base: ModelParams=BENCHMARK) -> RunConfig :
    settings = read_config(args.config) if getattr(args, "config", None) else dict()
    for assignment in getattr(args, "set", None) or [] :
        key, value = _parse_assignment(assignment)
        settings[key] = value

    # Command line options win over the config file
    for key in ("scenario", "method", "out", "ledger", "vary", "profit_view") :
        value = getattr(args, key, None)
        if value is not None :
            settings[key] = value

    values = {_check_param_key(key) : _float(key, value) for key, value in settings.items() if not key in CONFIG_KEYS}
    method = settings.get("method")
    if method is not None and not method in (Method.CLOSED, Method.ORACLE, Method.BOTH) :
        raise ConfigException("Unknown method '%s'" % method)
    profit_view = settings.get("profit_view", ProfitView.PERCEIVED)
    if not profit_view in (ProfitView.PERCEIVED, ProfitView.REALIZED) :
        raise ConfigException("Unknown profit view '%s'" % profit_view)

    config = RunConfig(
        scenarios=_parse_scenarios(settings.get("scenario", "un")),
        params=base.with_values(**values),
        method=method,
        vary=_parse_vary(settings["vary"]) if "vary" in settings else None,
        out=settings.get("out"),
        ledger=settings.get("ledger"),
        profit_view=profit_view)
    debug("Run config : %s" % config)
    return config


def _emit(df, out) :
    if out is None :
        sys.stdout.write(to_csv(df))
    else :
        write_outputs({out : df})


def _solve_point(config: RunConfig, params: ModelParams) :
    """Outcomes and reconciliation reports of all scenarios at one point """
    method = config.method or Method.CLOSED
    outcomes, reports = [], []
    for sc in config.scenarios :
        if method == Method.BOTH :
            closed, oracle, report = compare_methods(sc, params)
            outcomes.extend([closed, oracle])
            reports.append(report)
        else :
            outcomes.append(solve(sc, params, method))
    return outcomes, reports


def _write_solutions(config: RunConfig, results) :
    outcomes = [outcome for point_outcomes, _ in results for outcome in point_outcomes]
    reports = [report for _, point_reports in results for report in point_reports]

    if config.ledger and (config.method or Method.CLOSED) != Method.BOTH :
        raise ConfigException("The reconciliation ledger requires --method both")

    df = outcomes_frame(outcomes)
    if config.out is None :
        sys.stdout.write(to_csv(df))
        if config.ledger :
            write_outputs({config.ledger : ledger_frame(reports)})
    else :
        outputs = {config.out : df}
        if config.ledger :
            outputs[config.ledger] = ledger_frame(reports)
        write_outputs(outputs)

    for report in reports :
        for entry in report.mismatches :
            debug("Mismatch %s.%s : closed=%g oracle=%g%s" % (
                entry.scenario, entry.variable, entry.closed, entry.oracle, " (%s)" % entry.note if entry.note else ""))


def cmd_solve(args) :
    config = build_config(args)
    if config.vary is not None :
        raise ConfigException("Use the 'sweep' command to vary a parameter")
    _write_solutions(config, [_solve_point(config, config.params)])
    return EXIT_OK


def cmd_sweep(args) :
    config = build_config(args)
    if config.vary is None :
        raise ConfigException("The 'sweep' command requires --vary name=start:stop:count")
    points = config.points()
    results = _parallel_map(lambda params : _solve_point(config, params), points)
    _write_solutions(config, results)
    return EXIT_OK


def cmd_figure(args) :
    _emit(figure_data(args.id, args.points), args.out)
    return EXIT_OK


def cmd_props(args) :
    config = build_config(args, base=SOLVED_BENCHMARK)
    if config.method == Method.BOTH :
        raise ConfigException("Propositions are evaluated with one method : closed or oracle")
    grid = PropositionGrid(
        base=config.params,
        resolution=args.resolution,
        profit_view=config.profit_view,
        method=config.method)

    reports = [proposition_suite(id, grid) for id in args.ids]
    df = reports_frame(reports)
    _emit(df, config.out)
    if config.out is not None :
        print(tabulate(df[["proposition", "claim", "checked", "passed", "verdict"]].values.tolist(),
                       headers=["proposition", "claim", "checked", "passed", "verdict"]))

    for report in reports :
        if not report.acceptable :
            error("Proposition %d : %s" % (report.proposition, report.verdict))
    return EXIT_OK if all(report.acceptable for report in reports) else EXIT_VIOLATION


def cmd_roots(args) :
    bracket = None
    if args.lo is not None or args.hi is not None :
        if args.lo is None or args.hi is None :
            raise ConfigException("A bracket needs both --lo and --hi")
        bracket = (args.lo, args.hi)
    try :
        spec = PolySpec(tuple(args.coefficients), args.index, bracket)
    except Exception as e :
        raise ConfigException(str(e))
    print("%.12g" % poly_root(spec))
    return EXIT_OK


def cmd_params(args) :
    print(list_parameters())
    return EXIT_OK


def cmd_thresholds(args) :
    config = build_config(args, base=SOLVED_BENCHMARK)
    thresholds = discover_thresholds(config.params, resolution=args.resolution, curve_points=args.curve_points)
    _emit(thresholds_frame(thresholds), config.out)
    return EXIT_OK


def _parser() :
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--debug", action="store_true", help="Print debug messages")
    common.add_argument("--parallel", action="store_true", help="Solve independent points in a thread pool")
    common.add_argument("--out", help="Output CSV path. Default : stdout")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--config", help="key=value file of parameters and options")
    model.add_argument("--set", action="append", metavar="KEY=VALUE", help="Override a parameter (repeatable)")

    solving = argparse.ArgumentParser(add_help=False)
    solving.add_argument("--scenario", help="Scenario codes, comma separated : un, rn, uo, ro. Default : un")
    solving.add_argument("--method", help="closed, oracle or both. Default : closed")
    solving.add_argument("--ledger", help="Reconciliation ledger CSV path (with --method both)")

    parser = argparse.ArgumentParser(prog="iot-contracts", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    commands = parser.add_subparsers(dest="command", required=True)

    cmd = commands.add_parser("solve", parents=[common, model, solving], help="Equilibrium of each scenario")
    cmd.set_defaults(func=cmd_solve)

    cmd = commands.add_parser("sweep", parents=[common, model, solving], help="Equilibria along one varying parameter")
    cmd.add_argument("--vary", help="name=start:stop:count")
    cmd.set_defaults(func=cmd_sweep)

    cmd = commands.add_parser("figure", parents=[common], help="Data of figure 3, 4 or 5")
    cmd.add_argument("--id", type=int, choices=FIGURES, required=True)
    cmd.add_argument("--points", type=int, default=101)
    cmd.set_defaults(func=cmd_figure)

    cmd = commands.add_parser("props", parents=[common, model], help="Proposition sign suites")
    cmd.add_argument("ids", type=int, nargs="+", choices=range(1, 7), metavar="ID", help="Proposition ids, 1 to 6")
    cmd.add_argument("--method", help="Evaluator of propositions 1 and 2 : closed or oracle. Default : oracle")
    cmd.add_argument("--resolution", type=int, default=20, help="Grid points per axis")
    cmd.add_argument("--profit-view", dest="profit_view", choices=(ProfitView.PERCEIVED, ProfitView.REALIZED))
    cmd.set_defaults(func=cmd_props)

    cmd = commands.add_parser("roots", parents=[common], help="Real root of a polynomial (ascending coefficients, '--' before negative ones)")
    cmd.add_argument("coefficients", type=float, nargs="+")
    cmd.add_argument("--index", type=int, default=1, help="1-based index of the real root, ascending")
    cmd.add_argument("--lo", type=float)
    cmd.add_argument("--hi", type=float)
    cmd.set_defaults(func=cmd_roots)

    cmd = commands.add_parser("params", parents=[common], help="List the model parameters")
    cmd.set_defaults(func=cmd_params)

    cmd = commands.add_parser("thresholds", parents=[common, model], help="Share thresholds and boundary curves")
    cmd.add_argument("--resolution", type=int, default=21, help="Scan points in r")
    cmd.add_argument("--curve-points", dest="curve_points", type=int, default=5)
    cmd.set_defaults(func=cmd_thresholds)

    return parser


def main(argv=None) -> int :
    try :
        args = _parser().parse_args(argv)
    except SystemExit as e :
        return e.code if isinstance(e.code, int) else EXIT_INVALID

    if args.debug :
        set_debug()
    if args.parallel :
        base_utils.PARALLEL = True

    try :
        return args.func(args)
    except _INPUT_ERRORS as e :
        error("Error : %s" % e)
        return EXIT_INVALID


def run() :
    sys.exit(main())
