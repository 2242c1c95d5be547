"""Command-line interface: ``padic-hh <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .errors import Inadmissible, NoClosedForm, PadicHHError, PrecisionExhausted
from .exact import as_fraction, fraction_str, to_decimal
from .operators import (
    DEFAULT_TOL,
    KernelSpec,
    SampledImage,
    apply_operator,
    constant_closed_form,
    constant_series,
)
from .radial import RadialFunction, lr_norm_pow
from .records import Outcome, TheoremId, VerificationRecord, value_json
from .spaces import (
    SpaceParams,
    block_norm_lower,
    block_norm_upper,
    certify_block,
    holder_pairing_check,
    morrey_sup,
)
from .verify import (
    SweepGrid,
    emit_report,
    run_sweep,
    summary_counts,
    verify_dilation,
    verify_operator_bound,
    verify_transport,
)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3


class UsageError(Exception):
    pass


def rational(text: str) -> Fraction:
    """Rationals are written num/den (a bare integer is accepted too)."""
    try:
        return as_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational num/den: {text!r}") from exc


def kernel(text: str) -> KernelSpec:
    try:
        return KernelSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc


def _load_function(path: str) -> RadialFunction:
    try:
        return RadialFunction.from_json(_load_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad function file {path}: {exc}") from exc


def _print_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _params(args) -> SpaceParams:
    try:
        return SpaceParams(args.r, args.alpha)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


# -- subcommands ----------------------------------------------------------------------


def cmd_constant(args) -> int:
    params = _params(args)
    if args.method == "closed":
        try:
            res = constant_closed_form(args.kernel, params, args.prime)
        except Inadmissible as exc:
            _print_json({"admissible": False, "window": exc.window, "witness": exc.witness})
            return EXIT_PASS
        except NoClosedForm as exc:
            raise UsageError(f"{exc}; use --method series") from exc
    else:
        res = constant_series(args.kernel, params, args.prime, args.tol)
    _print_json({"kernel": str(args.kernel), "prime": args.prime, **params.to_json(), **res.to_json()})
    return EXIT_PASS


def cmd_apply(args) -> int:
    f = _load_function(args.input)
    image = apply_operator(args.kernel, f)
    data = image.to_json()
    with open(args.output, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")
    kind = "sampled" if isinstance(image, SampledImage) else "exact"
    sys.stdout.write(f"wrote {kind} image under {args.kernel} to {args.output}\n")
    return EXIT_PASS


def cmd_norm(args) -> int:
    f = _load_function(args.input)
    if f.p != args.prime:
        raise UsageError(f"function is over p={f.p}, not p={args.prime}")
    params = _params(args)
    out = {"space": args.space, "prime": args.prime, **params.to_json()}
    if args.space == "lr":
        out["lr_norm_pow"] = value_json(lr_norm_pow(f, params.r))
    elif args.space == "morrey":
        ms = morrey_sup(f, params)
        out["morrey_norm_pow"] = value_json(ms.value)
        out["attained_at"] = ms.at
    elif args.space == "block-upper":
        dec = block_norm_upper(f, params)
        out["upper"] = value_json(dec.total)
        out["decomposition"] = dec.to_json()
    else:
        lower, w = block_norm_lower(f, params)
        out["lower"] = value_json(lower)
        out["witness"] = None if w is None else w.to_json()
    _print_json(out)
    return EXIT_PASS


def _default_block(p: int, params: SpaceParams):
    return certify_block(RadialFunction.ball_indicator(p, 0), 0, params)


def cmd_verify(args) -> int:
    params = _params(args)
    p = args.prime
    f = _load_function(args.input) if args.input else RadialFunction.ball_indicator(p, 0)
    tid = TheoremId(args.theorem)
    if tid is TheoremId.DILATION:
        rec = verify_dilation(f, args.shift, params)
    elif tid is TheoremId.HOLDER:
        rec = holder_pairing_check(f, f, params)
    elif tid is TheoremId.MINKOWSKI:
        from .verify import verify_minkowski

        rec = verify_minkowski([f, f], [1, 1], params)
    else:
        n = f.nonzero_indices()[-1] if f.nonzero_indices() else 0
        try:
            a = certify_block(f, n, params) if args.input else _default_block(p, params)
        except PadicHHError as exc:
            raise UsageError(f"input is not a block on B^{n}: {exc}") from exc
        if tid is TheoremId.TRANSPORT:
            rec = verify_transport(args.kernel or KernelSpec("hardy"), a, args.tol)
        else:
            from .verify import DEFAULT_KERNEL, OPERATOR_THEOREMS

            K = args.kernel or KernelSpec.parse(DEFAULT_KERNEL[OPERATOR_THEOREMS[tid]])
            rec = verify_operator_bound(K, a, tid, args.tol)
    sys.stdout.buffer.write(emit_report([rec], "json", {"command": "verify"}))
    return EXIT_FAIL if rec.outcome is Outcome.FAIL else EXIT_PASS


def cmd_sweep(args) -> int:
    try:
        grid = SweepGrid.from_json(_load_json(args.grid))
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad grid file: {exc}") from exc
    if args.seed is not None:
        grid.seed = args.seed
    try:
        checks = [TheoremId(c.strip()) for c in args.checks.split(",") if c.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    records = run_sweep(grid, checks, args.tol)
    header = {"grid": grid.to_json(), "checks": [c.value for c in checks], "tol": fraction_str(args.tol)}
    sys.stdout.buffer.write(emit_report(records, args.format, header))
    if any(r.notes.get("error") == "PrecisionExhausted" for r in records):
        return EXIT_PRECISION
    counts = summary_counts(records)
    return EXIT_FAIL if counts[Outcome.FAIL] else EXIT_PASS


# -- parser ---------------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="padic-hh", description="Certified computations for p-adic Hardy-Hilbert type operators.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def space_args(sp, kernel_required=False):
        sp.add_argument("--prime", type=int, required=True)
        sp.add_argument("--r", type=rational, required=True)
        sp.add_argument("--alpha", type=rational, required=True)
        sp.add_argument("--kernel", type=kernel, required=kernel_required)

    sp = sub.add_parser("constant", help="operator constant C_{r,alpha}")
    space_args(sp, kernel_required=True)
    sp.add_argument("--method", choices=["closed", "series"], default="closed")
    sp.add_argument("--tol", type=rational, default=DEFAULT_TOL)
    sp.set_defaults(func=cmd_constant)

    sp = sub.add_parser("apply", help="apply an operator to a radial function")
    sp.add_argument("--kernel", type=kernel, required=True)
    sp.add_argument("--input", required=True)
    sp.add_argument("--output", required=True)
    sp.set_defaults(func=cmd_apply)

    sp = sub.add_parser("norm", help="L^r, Morrey or block norms")
    sp.add_argument("--space", choices=["lr", "morrey", "block-upper", "block-lower"], required=True)
    space_args(sp)
    sp.add_argument("--input", required=True)
    sp.set_defaults(func=cmd_norm)

    sp = sub.add_parser("verify", help="check one theorem instance")
    sp.add_argument("--theorem", choices=[t.value for t in TheoremId], required=True)
    space_args(sp)
    sp.add_argument("--input")
    sp.add_argument("--shift", type=int, default=1)
    sp.add_argument("--tol", type=rational, default=DEFAULT_TOL)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sweep", help="run checks over a parameter grid")
    sp.add_argument("--grid", required=True)
    sp.add_argument("--checks", required=True)
    sp.add_argument("--format", choices=["json", "csv", "text"], default="json")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--tol", type=rational, default=DEFAULT_TOL)
    sp.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "prime", None) is not None:
            from .exact import is_prime

            if not is_prime(args.prime):
                raise UsageError(f"{args.prime} is not a prime")
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"padic-hh: error: {exc}\n")
        return EXIT_USAGE
    except PrecisionExhausted as exc:
        sys.stderr.write(f"padic-hh: precision exhausted: {exc}\n")
        return EXIT_PRECISION
    except PadicHHError as exc:
        sys.stderr.write(f"padic-hh: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
