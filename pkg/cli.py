"""
Batch command line: read objects, run one operation, write canonical output.

Exit status 0 on success, 1 on a mathematical failure (validator, certificate,
support condition, no equivalence) and 2 when an input cannot be read or parsed.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from config import configure_logging, get_settings, override_settings
from convolution import Kernel, ModuleObject, convolve_kernel_module, convolve_kernels, potential_identities
from dgmod import dg_validate
from koszul import build_K, kappa
from mf import EquivalenceCertificate, MatrixFactorization, mf_external_tensor, mf_pullback, \
    mf_pushforward_finite, mf_tensor, mf_validate, OK
from polyring import MFError, ParseError, format_poly
from reduce import DefinitelyDistinct, NotFound, ReductionTrace, eliminate_variables, equiv_check, \
    split_contractibles
from scenario import BUILTIN_SCENARIOS, Scenario, builtin_scenario
from simple_file_reader import parse_object, read_text
from utils import format_object

LOGGER = logging.getLogger(__name__)

VERBS = ("validate", "tensor", "pullback", "pushforward", "koszul", "kappa", "convolve", "act", "reduce",
         "equiv", "check-potentials", "selftest")


class CommandFailed(MFError):
    """A check ran to completion and said no."""


def _load(path: str, expected=None):
    try:
        text = read_text(path)
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    return parse_object(text, expected)


def _scenario(arg: str) -> Scenario:
    if arg in BUILTIN_SCENARIOS:
        return builtin_scenario(arg)
    return _load(arg, "scenario")


def _write(text: str, path: Optional[str]):
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit(obj, args):
    _write(format_object(obj, args.format), args.output)


def _emit_trace(trace: ReductionTrace, args):
    if args.trace:
        report = trace.verify()
        if not report.ok:
            raise CommandFailed(f"trace does not verify: {report.message}")
        _write(format_object(trace, args.format), args.trace)


# -- verbs ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    obj = _load(args.input)
    if isinstance(obj, MatrixFactorization):
        report = mf_validate(obj)
    elif isinstance(obj, (EquivalenceCertificate, ReductionTrace)):
        report = obj.verify()
    elif hasattr(obj, "degrees"):
        report = dg_validate(obj)
    else:
        report = OK
    if not report.ok:
        raise CommandFailed(report.message)
    _write("ok\n", args.output)
    return 0


def cmd_tensor(args) -> int:
    m, n = _load(args.left, "mf"), _load(args.right, "mf")
    _emit(mf_tensor(m, n) if m.ring == n.ring else mf_external_tensor(m, n), args)
    return 0


def cmd_pullback(args) -> int:
    _emit(mf_pullback(_load(args.input, "mf"), _load(args.map, "map")), args)
    return 0


def cmd_pushforward(args) -> int:
    m, phi = _load(args.input, "mf"), _load(args.map, "map")
    basis = [b.strip() for b in args.basis.split(",") if b.strip()]
    _emit(mf_pushforward_finite(m, phi, basis, args.potential), args)
    return 0


def cmd_koszul(args) -> int:
    _emit(build_K(_scenario(args.scenario).kernel_ext()).mf, args)
    return 0


def cmd_kappa(args) -> int:
    _emit(kappa(_load(args.input, "dg")), args)
    return 0


def cmd_convolve(args) -> int:
    s = _scenario(args.scenario)
    trace = ReductionTrace()
    result = convolve_kernels(Kernel(s, _load(args.left, "mf")), Kernel(s, _load(args.right, "mf")), trace)
    _emit_trace(trace, args)
    _emit(result.mf, args)
    return 0


def cmd_act(args) -> int:
    s = _scenario(args.scenario)
    trace = ReductionTrace()
    result = convolve_kernel_module(Kernel(s, _load(args.kernel, "mf")), ModuleObject(s, _load(args.module, "mf")),
                                    trace)
    _emit_trace(trace, args)
    _emit(result.mf, args)
    return 0


def cmd_reduce(args) -> int:
    m = _load(args.input, "mf")
    names = [v.strip() for v in (args.eliminate or "").split(",") if v.strip()]
    if names:
        result, trace = eliminate_variables(m, names)
    else:
        result, trace = split_contractibles(m)
    _emit_trace(trace, args)
    _emit(result, args)
    return 0


def cmd_equiv(args) -> int:
    result = equiv_check(_load(args.left, "mf"), _load(args.right, "mf"), args.bound)
    if isinstance(result, DefinitelyDistinct):
        raise CommandFailed(f"not equivalent: {result.reason}")
    if isinstance(result, NotFound):
        raise CommandFailed(f"no equivalence found up to weight {result.bound}")
    _emit(result, args)
    return 0


def cmd_check_potentials(args) -> int:
    s = _scenario(args.scenario)
    potential_identities(s)
    _write(f"w: {format_poly(s.w())}\nh: {format_poly(s.h())}\nok\n", args.output)
    return 0


def cmd_selftest(args) -> int:
    from acceptance import run_acceptance

    results = run_acceptance()
    _write(results.to_string(index=False) + "\n", args.output)
    if args.csv:
        results.to_csv(args.csv, index=False)
    return 0 if bool(results["passed"].all()) else 1


# -- parser ------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write the result here instead of stdout")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--trace", help="write the reduction trace to this file")
    common.add_argument("--bound", type=int, default=None, help="weight bound of the equivalence search")
    common.add_argument("--seed", type=int, default=None, help="seed of every random corpus")
    common.add_argument("--log-level", default=None)

    parser = argparse.ArgumentParser(prog="mfcalc", description="Matrix factorization calculus")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("validate", parents=[common], help="check any object file")
    p.add_argument("input")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("tensor", parents=[common], help="tensor (or box) product of two factorizations")
    p.add_argument("left")
    p.add_argument("right")
    p.set_defaults(func=cmd_tensor)

    p = sub.add_parser("pullback", parents=[common], help="pull a factorization back along a ring map")
    p.add_argument("input")
    p.add_argument("map")
    p.set_defaults(func=cmd_pullback)

    p = sub.add_parser("pushforward", parents=[common], help="restriction of scalars along a finite map")
    p.add_argument("input")
    p.add_argument("map")
    p.add_argument("--basis", required=True, help="comma-separated monomial basis, e.g. '1, x'")
    p.add_argument("--potential", default=None, help="potential over the map's source")
    p.set_defaults(func=cmd_pushforward)

    p = sub.add_parser("koszul", parents=[common], help="the folded Koszul complex of a scenario")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_koszul)

    p = sub.add_parser("kappa", parents=[common], help="apply kappa to a DG-module file")
    p.add_argument("input")
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("convolve", parents=[common], help="compose two kernels")
    p.add_argument("scenario")
    p.add_argument("left")
    p.add_argument("right")
    p.set_defaults(func=cmd_convolve)

    p = sub.add_parser("act", parents=[common], help="act with a kernel on a module")
    p.add_argument("scenario")
    p.add_argument("kernel")
    p.add_argument("module")
    p.set_defaults(func=cmd_act)

    p = sub.add_parser("reduce", parents=[common], help="split contractibles, optionally exclude variables")
    p.add_argument("input")
    p.add_argument("--eliminate", default=None, help="comma-separated variables to exclude")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("equiv", parents=[common], help="certify a homotopy equivalence")
    p.add_argument("left")
    p.add_argument("right")
    p.set_defaults(func=cmd_equiv)

    p = sub.add_parser("check-potentials", parents=[common], help="verify the potential identities")
    p.add_argument("scenario")
    p.set_defaults(func=cmd_check_potentials)

    p = sub.add_parser("selftest", parents=[common], help="run the acceptance criteria")
    p.add_argument("--csv", default=None, help="also write the results table as CSV")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.bound is not None:
        changes["weight_bound"] = args.bound
    if args.log_level:
        changes["log_level"] = args.log_level.upper()
    if changes:
        override_settings(**changes)
    configure_logging(get_settings().log_level)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except MFError as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
