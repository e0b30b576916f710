import argparse
import logging
import sys
from typing import Dict, List, Optional

from config import DEFAULT_K, DEFAULT_LEVEL_BOUND, DEFAULT_SCHEDULE, DEFAULT_TOLERANCE
from models import HamiltonianModel, LevelIndex, PhysParams, ShiftOrder, SpectrumModel, SweepSpec
from services import analytic, oracle, scan
from services.fock import algebra_checks
from utils.errors import InvalidRequest, SpectraError, UnknownModel
from utils.file_system import (
    FileSystemUtil,
    critical_frame,
    fock_check_frame,
    frame_to_csv,
    spectrum_frame,
    sweep_frame,
    to_json,
)

VERIFY_ALIASES = {
    "landau_nc": HamiltonianModel.LANDAU_NC_EXPANDED,
    "oscillator_nc": HamiltonianModel.OSCILLATOR_NC_EXPANDED,
}

file_system = FileSystemUtil()


class CliParser(argparse.ArgumentParser):
    """Usage errors exit with status 1; status 2 is reserved for failed checks."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _normalize(model: str) -> str:
    return model.strip().lower().replace("-", "_")


def _spectrum_model(model: Optional[str]) -> SpectrumModel:
    if not model:
        raise InvalidRequest("--model is required.")
    try:
        return SpectrumModel(_normalize(model))
    except ValueError:
        raise UnknownModel(f"Unknown model '{model}', expected one of {[m.value for m in SpectrumModel]}.")


def _hamiltonian_model(model: Optional[str]) -> HamiltonianModel:
    if not model:
        raise InvalidRequest("--model is required.")
    name = _normalize(model)
    if name in VERIFY_ALIASES:
        return VERIFY_ALIASES[name]
    try:
        return HamiltonianModel(name)
    except ValueError:
        raise UnknownModel(f"Unknown model '{model}', expected one of {[m.value for m in HamiltonianModel]}.")


def _phys(args: argparse.Namespace) -> PhysParams:
    for name in ("m", "e"):
        if getattr(args, name) is None:
            raise InvalidRequest(f"--{name} is required.")
    return PhysParams(m=args.m, e=args.e, B=args.B, omega=args.omega, theta=args.theta, s_z=args.s_z)


def _schedule(text: str) -> List[int]:
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid cutoff schedule '{text}'")


def _render(args: argparse.Namespace, result, frame=None):
    if args.format == "json" or frame is None:
        text = to_json(result)
    else:
        text = frame_to_csv(frame)
    file_system.emit(text, args.out)


def cmd_spectrum(args: argparse.Namespace) -> int:
    model = _spectrum_model(args.model)
    table = analytic.spectrum(model, _phys(args), args.n1_max, args.n2_max, args.n_max, args.substitute_critical)
    _render(args, table, spectrum_frame(table))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    model = _hamiltonian_model(args.model)
    phys = _phys(args)
    if args.report == "gauge":
        result = oracle.gauge_compare(model.family, phys, args.cutoff, args.l_ref)
        _render(args, result)
        return 0
    if args.report == "splitting":
        result = oracle.oracle_splitting(model, phys, args.k, args.tol, args.schedule, args.l_ref, args.shift_order)
        _render(args, result)
        return 2 if result.spin_binding == "unmatched" else 0
    report = oracle.verify(model, phys, args.k, args.tol, args.schedule, args.l_ref, args.shift_order)
    _render(args, report)
    return 0 if report.matched_variant != "none" else 2


def cmd_scan(args: argparse.Namespace) -> int:
    for name in ("param", "start", "stop", "steps"):
        if getattr(args, name) is None:
            raise InvalidRequest(f"--{'from' if name == 'start' else 'to' if name == 'stop' else name} is required.")
    model = _spectrum_model(args.model)
    levels = [LevelIndex(n1=0, n2=0, sigma_z=1), LevelIndex(n1=0, n2=0, sigma_z=-1)]
    if args.levels:
        levels = [LevelIndex(n1=n1, n2=n2, sigma_z=sigma) for n1 in range(args.levels) for n2 in range(args.levels)
                  for sigma in (1, -1)]
    try:
        spec = SweepSpec(model=model.value, base=_phys(args), parameter=args.param,
                         grid=scan.linear_grid(args.start, args.stop, args.steps), levels=levels)
    except ValueError as e:
        if isinstance(e, SpectraError):
            raise
        raise InvalidRequest(str(e))
    table = scan.sweep(spec)
    _render(args, table, sweep_frame(table))
    return 0


def cmd_critical(args: argparse.Namespace) -> int:
    if not args.model:
        raise InvalidRequest("--model is required.")
    result = scan.locate_critical(_normalize(args.model), _phys(args), args.parameter)
    _render(args, result, critical_frame(result))
    return 0


def cmd_fock_check(args: argparse.Namespace) -> int:
    phys = None
    if args.B is not None:
        phys = PhysParams(m=args.m or 1.0, e=args.e or 1.0, B=args.B, theta=args.theta)
    result = algebra_checks(args.cutoff, args.theta, args.margin, args.l_ref, phys)
    _render(args, result, fock_check_frame(result))
    if args.format == "csv":
        for note in result.notes:
            sys.stderr.write(f"ncspectra: note: {note}\n")
    return 0 if result.passed else 2


def _shared_flags() -> argparse.ArgumentParser:
    shared = CliParser(add_help=False)
    shared.add_argument("--m", type=float, help="Particle mass.")
    shared.add_argument("--e", type=float, help="Charge.")
    shared.add_argument("--B", type=float, default=0.0, help="Magnetic field.")
    shared.add_argument("--omega", type=float, default=0.0, help="Oscillator frequency.")
    shared.add_argument("--theta", type=float, default=0.0, help="Non-commutativity parameter.")
    shared.add_argument("--s-z", dest="s_z", type=float, default=0.5, help="Spin projection, +0.5 or -0.5.")
    shared.add_argument("--model", help="Model identifier; hyphens and underscores are interchangeable.")
    shared.add_argument("--format", choices=["csv", "json"], default="csv")
    shared.add_argument("--config", help="key = value file (or .yml mapping) with default flag values.")
    shared.add_argument("--out", help="Output path; standard output when omitted.")
    shared.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    return shared


def build_parser() -> CliParser:
    parser = CliParser(prog="ncspectra", description="Noncommutative Landau and Klein-Gordon oscillator spectra.")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)

    spectrum = subparsers.add_parser("spectrum", parents=[_shared_flags()], help="Closed-form spectrum table.")
    spectrum.add_argument("--n1-max", type=int, default=DEFAULT_LEVEL_BOUND)
    spectrum.add_argument("--n2-max", type=int, default=DEFAULT_LEVEL_BOUND)
    spectrum.add_argument("--n-max", type=int, default=DEFAULT_LEVEL_BOUND)
    spectrum.add_argument("--substitute-critical", action="store_true", help="Use B_c for the critical oscillator.")
    spectrum.set_defaults(handler=cmd_spectrum)

    verify = subparsers.add_parser("verify", parents=[_shared_flags()], help="Truncated-Fock check of the closed forms.")
    verify.add_argument("--k", type=int, default=DEFAULT_K)
    verify.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE)
    verify.add_argument("--schedule", type=_schedule, default=list(DEFAULT_SCHEDULE))
    verify.add_argument("--l-ref", type=float)
    verify.add_argument("--shift-order", type=ShiftOrder, choices=list(ShiftOrder), default=ShiftOrder.FIRST_ORDER)
    verify.add_argument("--report", choices=["levels", "splitting", "gauge"], default="levels")
    verify.add_argument("--cutoff", type=int, default=16, help="Cutoff for --report gauge.")
    verify.set_defaults(handler=cmd_verify, format="json")

    sweep = subparsers.add_parser("scan", parents=[_shared_flags()], help="Parameter sweep of a closed-form spectrum.")
    sweep.add_argument("--param", choices=list(scan.SWEEP_PARAMETERS))
    sweep.add_argument("--from", dest="start", type=float)
    sweep.add_argument("--to", dest="stop", type=float)
    sweep.add_argument("--steps", type=int)
    sweep.add_argument("--levels", type=int, help="Report every (n1, n2) below this bound instead of the ground pair.")
    sweep.set_defaults(handler=cmd_scan)

    critical = subparsers.add_parser("critical", parents=[_shared_flags()], help="Critical theta or field.")
    critical.add_argument("--parameter", choices=["theta", "B"])
    critical.set_defaults(handler=cmd_critical)

    fock = subparsers.add_parser("fock-check", parents=[_shared_flags()], help="Operator-algebra self-checks.")
    fock.add_argument("--cutoff", type=int, default=24)
    fock.add_argument("--margin", type=int)
    fock.add_argument("--l-ref", type=float, default=1.0)
    fock.set_defaults(handler=cmd_fock_check, B=None)
    parser.commands = {"spectrum": spectrum, "verify": verify, "scan": sweep, "critical": critical, "fock-check": fock}
    return parser


def _config_tokens(values: Dict[str, str], parser: CliParser, command: str) -> List[str]:
    """Turns config-file entries into flag tokens; boolean flags are emitted only when true."""
    actions = {action.dest: action for action in parser.commands[command]._actions}
    tokens = []
    for key, value in values.items():
        if key == "config":
            continue
        dest = {"from": "start", "to": "stop"}.get(key, key)
        action = actions.get(dest)
        if action is None:
            raise InvalidRequest(f"Unknown config key '{key}'.")
        flag = max(action.option_strings, key=len)
        if action.nargs == 0:
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(flag)
            continue
        tokens.extend([flag, value])
    return tokens


def _expand_config(argv: List[str], parser: CliParser) -> List[str]:
    if not argv or argv[0] not in parser.commands:
        return argv
    locator = argparse.ArgumentParser(add_help=False)
    locator.add_argument("--config")
    known, _ = locator.parse_known_args(argv[1:])
    if not known.config:
        return argv
    values = file_system.read_config_file(known.config)
    return [argv[0], *_config_tokens(values, parser, argv[0]), *argv[1:]]


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point of the ``ncspectra`` console script. Returns 0 on success, 1 on usage or validation errors,
    2 on failed checks, unmatched verifications or missing sign changes, 3 on ill-posed physics.
    """
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_expand_config(argv, parser))
    except SystemExit as e:
        return int(e.code or 0)
    except SpectraError as e:
        sys.stderr.write(f"ncspectra: error: {e}\n")
        return e.exit_code

    logging.basicConfig(level=args.log_level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.handler(args)
    except SpectraError as e:
        if e.exit_code == 3:
            logging.info(f"Refused ill-posed input: {e}")
        sys.stderr.write(f"ncspectra: error: {e}\n")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
