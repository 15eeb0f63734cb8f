"""
krausgadget - Command Line

Subcommands:

- identities: run registered circuit identities, write a JSON report
- kraus-compare: distance between the contracted and the assembled Kraus operator
- ec-sweep: EC chain fidelity sweep, written as CSV
- ec-chain: one EC chain, written as a JSON chain report
- wavefunction: position or momentum wavefunction of a state, written as CSV

A ``--config`` JSON file may hold Settings fields and flag defaults (by flag
name with dashes replaced by underscores); flags on the command line win.
"""

import argparse
import asyncio
import json
import logging
import math
import sys
from typing import Any, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from ..client import KrausSimulator
from ..config import Settings, load_settings
from ..exceptions import KrausGadgetError
from ..gkp_ec import ChainMode, EcVariant, ec_schedule, run_chain
from ..reports.validator import CHAIN_SCHEMA, IDENTITY_SCHEMA, ReportValidator, write_wavefunction_csv
from ..states import (
    AncillaSpec,
    ancilla_state,
    approximate_gkp_wavefunction,
    cutoff_for_damping,
    gkp_codeword,
    gkp_plus_minus,
    qunaught,
    wavefunction,
)
from ..teleport_gadget import GadgetConfig, HomodyneOutcome
from ..work_pool import WorkPool
from .identities import registry_ids
from .sweeps import SweepParameter, SweepSpec

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_ERROR = 2


class UsageError(Exception):
    """Bad command-line usage."""

    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> Any:  # type: ignore[override]
        raise UsageError(message)


def parse_grid(text: str) -> np.ndarray:
    """`low:high:step`, both ends included."""
    try:
        low, high, step = (float(part) for part in text.split(":"))
    except ValueError:
        raise UsageError(f"grid must be low:high:step, got {text!r}") from None
    if not (high > low and step > 0):
        raise UsageError(f"grid {text!r} needs high > low and step > 0")
    count = int(round((high - low) / step)) + 1
    return low + step * np.arange(count)


_RANGE_FLAGS = ("--grid", "--values")


def _attach_range_values(tokens: Sequence[str]) -> list[str]:
    """Turn `--grid -6:6:0.01` into `--grid=-6:6:0.01`; argparse reads a leading dash as a flag."""
    out: list[str] = []
    i = 0
    while i < len(tokens):
        if tokens[i] in _RANGE_FLAGS and i + 1 < len(tokens):
            out.append(f"{tokens[i]}={tokens[i + 1]}")
            i += 2
        else:
            out.append(tokens[i])
            i += 1
    return out


def _parse_pair(text: str) -> tuple[float, float]:
    a, _, b = text.partition(",")
    return float(a), float(b)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _emit(payload: Any) -> None:
    print(json.dumps(payload, sort_keys=True))


async def _cmd_identities(args: argparse.Namespace, settings: Settings) -> int:
    if not args.all and not args.id:
        raise UsageError("identities needs --all or at least one --id")
    ids = registry_ids() if args.all else args.id
    async with KrausSimulator(workers=args.workers, settings=settings) as sim:
        reports = await sim.identities.run_all(cutoff=args.cutoff, beta_schedule=args.beta, ids=ids)
    validator = ReportValidator(IDENTITY_SCHEMA)
    if args.out:
        validator.write(args.out, reports)
        _emit({"out": str(args.out), "passed": sum(r.passed for r in reports), "total": len(reports)})
    else:
        print(validator.dumps(reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED_CHECK


def _ancilla(token: str, beta: Optional[float]) -> AncillaSpec:
    spec = AncillaSpec.parse(token)
    return spec if beta is None else AncillaSpec.model_validate({**spec.model_dump(), "beta": beta})


async def _cmd_kraus_compare(args: argparse.Namespace, settings: Settings) -> int:
    config = GadgetConfig(
        theta_a=args.theta_a,
        theta_b=args.theta_b,
        ancilla_psi=_ancilla(args.ancilla_psi, args.beta),
        ancilla_phi=_ancilla(args.ancilla_phi, args.beta),
        cutoff=args.cutoff,
        interior_fraction=settings.interior_fraction,
    )
    outcome = HomodyneOutcome(m_a=args.ma, m_b=args.mb)
    async with KrausSimulator(workers=args.workers, settings=settings) as sim:
        (comparison,) = await sim.kraus.compare(config, [outcome])
    _emit(comparison.model_dump(mode="json"))
    return EXIT_OK


def _sweep_values(args: argparse.Namespace) -> list[Any]:
    parameter = SweepParameter(args.sweep)
    if args.values is None:
        defaults = {
            SweepParameter.BETA: [args.beta],
            SweepParameter.STEPS: [args.steps],
            SweepParameter.THETA: [(args.theta_a, args.theta_b)],
        }
        if parameter not in defaults:
            raise UsageError(f"--values is required when sweeping {parameter.value}")
        return defaults[parameter]
    tokens = args.values.split(";") if parameter is SweepParameter.THETA else args.values.split(",")
    if parameter is SweepParameter.THETA:
        return [_parse_pair(t) for t in tokens]
    return [float(t) for t in tokens]


async def _cmd_ec_sweep(args: argparse.Namespace, settings: Settings) -> int:
    spec = SweepSpec(
        parameter=args.sweep,
        values=_sweep_values(args),
        variant=EcVariant(args.case),
        beta=args.beta,
        steps=args.steps,
        ec_period=args.ec_period,
        theta_a=args.theta_a,
        theta_b=args.theta_b,
        seeds=args.seeds,
        seed_offset=args.seed_offset,
        mode=ChainMode(args.mode),
        cutoff=args.cutoff,
        out=args.out,
    )
    async with KrausSimulator(workers=args.workers, settings=settings) as sim:
        rows = await sim.sweeps.run(spec)
    _emit({"out": str(args.out), "rows": len(rows)})
    return EXIT_OK


async def _cmd_ec_chain(args: argparse.Namespace, settings: Settings) -> int:
    schedule = ec_schedule(args.steps, args.ec_period, args.beta, EcVariant(args.case), args.cutoff)
    c0, c1 = _parse_pair(args.qubit)
    async with WorkPool(workers=args.workers, settings=settings) as pool:
        report = await pool.run(
            run_chain, args.steps, schedule, (c0, c1), args.beta, args.seed, ChainMode(args.mode), args.cutoff
        )
    validator = ReportValidator(CHAIN_SCHEMA)
    if args.out:
        validator.write(args.out, report)
        _emit({"out": str(args.out), "logical_fidelity": report.logical_fidelity})
    else:
        print(validator.dumps(report))
    return EXIT_OK


_CODEWORDS = {"gkp0": 0, "gkp1": 1}


def _wavefunction_values(args: argparse.Namespace, grid: np.ndarray) -> np.ndarray:
    method = args.method
    if method == "auto":
        method = "analytic" if args.state in _CODEWORDS and args.cutoff is None and args.basis == "q" else "fock"
    if method == "analytic":
        if args.state not in _CODEWORDS or args.basis != "q":
            raise UsageError("the analytic path covers gkp0/gkp1 position wavefunctions only")
        return np.asarray(approximate_gkp_wavefunction(_CODEWORDS[args.state], args.beta, grid), dtype=np.complex128)

    cutoff = args.cutoff or cutoff_for_damping(args.beta)
    if args.state in _CODEWORDS:
        state = gkp_codeword(_CODEWORDS[args.state], args.beta, cutoff)
    elif args.state in ("plus", "minus"):
        state = gkp_plus_minus(1 if args.state == "plus" else -1, args.beta, cutoff)
    elif args.state == "qunaught":
        state = qunaught(args.beta, cutoff)
    else:
        spec = AncillaSpec.parse(args.state)
        if spec.beta == 0.0 and not spec.ideal_normalizable:
            spec = AncillaSpec.model_validate({**spec.model_dump(), "beta": args.beta})
        state = ancilla_state(spec, cutoff)
    return wavefunction(state, args.basis, grid)


async def _cmd_wavefunction(args: argparse.Namespace, settings: Settings) -> int:
    grid = parse_grid(args.grid)
    values = _wavefunction_values(args, grid)
    write_wavefunction_csv(args.out, grid, values)
    _emit({"out": str(args.out), "points": int(grid.size)})
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat JSON file with settings and flag defaults")
    common.add_argument("--workers", type=int, help="work pool threads")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG")

    parser = _Parser(prog="krausgadget", description="CV gate-teleportation and GKP error-correction simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("identities", parents=[common], help="run circuit identity checks")
    p.add_argument("--all", action="store_true", help="run the whole registry")
    p.add_argument("--id", action="append", help="identity id (repeatable)")
    p.add_argument("--cutoff", type=int, default=60)
    p.add_argument("--beta", type=float, action="append", help="damping schedule entry (repeatable, largest first)")
    p.add_argument("--out", help="JSON report path (default: stdout)")
    p.set_defaults(handler=_cmd_identities)

    p = sub.add_parser("kraus-compare", parents=[common], help="compare the two Kraus pipelines")
    p.add_argument("--theta-a", type=float, default=math.pi / 2)
    p.add_argument("--theta-b", type=float, default=0.0)
    p.add_argument("--ancilla-psi", required=True, help="ancilla token, kind[:value][@beta]")
    p.add_argument("--ancilla-phi", required=True, help="ancilla token, kind[:value][@beta]")
    p.add_argument("--beta", type=float, help="damping applied to both ancillas")
    p.add_argument("--ma", type=float, required=True)
    p.add_argument("--mb", type=float, required=True)
    p.add_argument("--cutoff", type=int, default=60)
    p.set_defaults(handler=_cmd_kraus_compare)

    def chain_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--case", choices=[v.value for v in EcVariant], default=EcVariant.AB.value)
        p.add_argument("--beta", type=float, default=0.05)
        p.add_argument("--steps", type=int, default=8)
        p.add_argument("--ec-period", type=int, default=2)
        p.add_argument("--mode", choices=[m.value for m in ChainMode], default=ChainMode.ACTIVE.value)
        p.add_argument("--cutoff", type=int)

    p = sub.add_parser("ec-sweep", parents=[common], help="EC chain fidelity sweep")
    chain_flags(p)
    p.add_argument("--sweep", choices=[s.value for s in SweepParameter], default=SweepParameter.BETA.value)
    p.add_argument("--values", help="comma-separated values; theta pairs as a,b;a,b")
    p.add_argument("--theta-a", type=float, default=math.pi / 2)
    p.add_argument("--theta-b", type=float, default=0.0)
    p.add_argument("--seeds", type=int, default=50)
    p.add_argument("--seed-offset", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(handler=_cmd_ec_sweep)

    p = sub.add_parser("ec-chain", parents=[common], help="run one EC chain")
    chain_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--qubit", default="1,1", help="logical input c0,c1")
    p.add_argument("--out", help="JSON report path (default: stdout)")
    p.set_defaults(handler=_cmd_ec_chain)

    p = sub.add_parser("wavefunction", parents=[common], help="export a wavefunction as CSV")
    p.add_argument("--state", required=True, help="gkp0, gkp1, plus, minus, qunaught or an ancilla token")
    p.add_argument("--beta", type=float, default=0.05)
    p.add_argument("--basis", choices=["q", "p"], default="q")
    p.add_argument("--grid", default="-6:6:0.01", help="low:high:step")
    p.add_argument("--cutoff", type=int)
    p.add_argument("--method", choices=["auto", "fock", "analytic"], default="auto")
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(handler=_cmd_wavefunction)
    return parser


def _config_path(argv: Sequence[str]) -> Optional[str]:
    pre = _Parser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(list(argv))
    return known.config


def _apply_file_defaults(parser: argparse.ArgumentParser, argv: Sequence[str], path: str) -> None:
    """Use keys of the config file that name flags of the chosen subcommand as defaults."""
    with open(path, encoding="utf-8") as f:
        document = json.load(f)
    if not isinstance(document, dict):
        raise UsageError("config file must hold a JSON object")
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    command = next((token for token in argv if token in subparsers.choices), None)
    if command is None:
        return
    subparser = subparsers.choices[command]
    dests = {action.dest for action in subparser._actions}
    subparser.set_defaults(**{k: v for k, v in document.items() if k in dests and k != "config"})


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _fail(error: BaseException) -> int:
    name = "ValidationError" if isinstance(error, ValidationError) else type(error).__name__
    print(json.dumps({"error": name, "message": str(error)}), file=sys.stderr)
    return EXIT_ERROR


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Entry point of the ``krausgadget`` console script.

    Returns:
        0 on success, 1 if an identity check failed, 2 on any error (with a
        JSON object {"error", "message"} on stderr)

    Example:
        ```python
        main(["kraus-compare", "--theta-a", "1.2", "--theta-b", "0.3",
              "--ancilla-psi", "squeezed_p:0.05", "--ancilla-phi", "squeezed_q:0.05",
              "--ma", "0.5", "--mb", "-0.2"])
        ```
    """
    tokens = _attach_range_values(sys.argv[1:] if argv is None else argv)
    try:
        parser = build_parser()
        config_path = _config_path(tokens)
        if config_path:
            _apply_file_defaults(parser, tokens, config_path)
        args = parser.parse_args(tokens)
        _configure_logging(args.verbose)
        settings = load_settings(config_path, workers=args.workers)
        return asyncio.run(args.handler(args, settings))
    except (KrausGadgetError, ValidationError, UsageError, ValueError, OSError) as e:
        return _fail(e)


if __name__ == "__main__":
    sys.exit(main())
