"""Command-line front door.

Subcommands: expand, psi, validate, certify, measure, demo.
Exit codes: 0 success, 1 verification failure, 2 usage/config error.

Options may come from a flat key=value config file (--config); explicit
flags override file values.  Every report embeds version, config hash and
seed, and reruns with the same triple are byte-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .codec import expand as codec_expand
from .dense import BoundedModeRequired, DenseMapFamily
from .family import make_demo, validate
from .measure import decay_report
from .psi import psi_truncated
from .slices import (
    NoAdmissibleLevel,
    choose_index,
    covering_certificate,
    verify_term_domination,
)


class UsageError(Exception):
    pass


def _read_config(path: str) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, val = line.partition("=")
        if not sep:
            raise UsageError(f"malformed config line: {line!r}")
        out[key.strip()] = val.strip()
    return out


def _apply_config(argv: list[str]) -> list[str]:
    """Expand --config FILE into flags inserted right after the subcommand,
    so that explicit command-line flags still win."""
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise UsageError("--config requires a path")
    path = argv[i + 1]
    rest = argv[:i] + argv[i + 2 :]
    if not rest:
        raise UsageError("--config requires a subcommand")
    flags: list[str] = []
    for key, val in _read_config(path).items():
        flags.extend([f"--{key.replace('_', '-')}", val])
    return [rest[0]] + flags + rest[1:]


def _config_hash(args: argparse.Namespace) -> str:
    payload = {k: repr(v) for k, v in sorted(vars(args).items()) if k != "func"}
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def _family(args) -> "FamilySpec":
    try:
        return make_demo(args.family, args.lam, args.t_max)
    except KeyError as e:
        raise UsageError(str(e))


def _parse_vector(text: str) -> list[Fraction]:
    try:
        return [Fraction(part) for part in text.split(",")]
    except (ValueError, ZeroDivisionError) as e:
        raise UsageError(f"cannot parse rational vector {text!r}: {e}")


# -- subcommands -------------------------------------------------------------


def cmd_expand(args, parser) -> int:
    vec = _parse_vector(args.value)
    if args.depth < 3:
        raise UsageError("--depth must be >= 3")
    try:
        digits = codec_expand(vec, args.depth - 1)
    except ValueError as e:
        raise UsageError(str(e))
    print(digits.to_text())
    return 0


def cmd_psi(args, parser) -> int:
    vec = _parse_vector(args.value)
    p = len(vec)
    family = DenseMapFamily(p, args.q)
    digits = codec_expand(vec, max(args.N - 1, 2))
    try:
        trunc = psi_truncated(family, digits, args.N)
    except BoundedModeRequired as e:
        print(str(e), file=sys.stderr)
        return 2
    print(json.dumps(trunc.to_json(), indent=2, sort_keys=True))
    return 0


def cmd_validate(args, parser) -> int:
    spec = _family(args)
    report = validate(spec)
    print(json.dumps(report.to_json(), indent=2, sort_keys=True))
    return 0 if report.ok else 1


def cmd_certify(args, parser) -> int:
    spec = _family(args)
    family = DenseMapFamily(spec.p, spec.q)
    t = [float(x) for x in args.t.split(",")]
    try:
        cert = covering_certificate(spec, family, args.eps, t)
    except NoAdmissibleLevel as e:
        print(str(e), file=sys.stderr)
        return 1
    payload = cert.to_json()
    payload["version"] = __version__
    payload["config_hash"] = _config_hash(args)
    verified = True
    if not cert.bounded_mode:
        chosen = choose_index(spec, family, cert.k, t)
        worst = verify_term_domination(
            spec, family, cert.k, chosen, args.eps, t,
            suffixes=args.suffixes, seed=args.seed,
        )
        payload["term_domination_ratios"] = worst
        verified = all(r <= 1.0 for r in worst.values())
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n")
    print(text)
    return 0 if verified else 1


def cmd_measure(args, parser) -> int:
    spec = _family(args)
    family = DenseMapFamily(spec.p, spec.q)
    truncations = [int(x) for x in args.truncations.split(",") if x]
    t = [float(x) for x in args.t.split(",")]
    report = decay_report(
        spec, family, truncations, args.delta, args.seed, t, y_samples=args.samples
    )
    report.provenance["version"] = __version__
    report.provenance["config_hash"] = _config_hash(args)
    if args.output:
        out = Path(args.output)
        out.write_text(report.csv_text)
        out.with_suffix(".json").write_text(
            json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"
        )
        if not args.no_figure:
            from .report import render_decay_figure

            render_decay_figure(report, str(out.with_suffix(".png")))
    else:
        sys.stdout.write(report.csv_text)
    return 0


def cmd_demo(args, parser) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    spec = _family(args)
    family = DenseMapFamily(spec.p, spec.q)
    report = validate(spec)
    (outdir / "validate.json").write_text(
        json.dumps(report.to_json(), indent=2, sort_keys=True) + "\n"
    )
    cert = covering_certificate(spec, family, args.eps, [1.0])
    (outdir / "certificate.json").write_text(cert.dumps() + "\n")
    dec = decay_report(
        spec, family, [4, 67], 2.0**-20, args.seed, [1.0], y_samples=args.samples
    )
    (outdir / "decay.csv").write_text(dec.csv_text)
    from .report import render_decay_figure

    render_decay_figure(dec, str(outdir / "decay.png"))
    print(f"demo artifacts written to {outdir}")
    return 0 if report.ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nullpack",
        description="Pack families of surfaces into a null set: factorial "
        "expansions, dense matrix maps, slice covering certificates, and "
        "cover-counting measure reports.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def family_opts(p):
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.add_argument("--family", default="sawyer_line")
        p.add_argument("--lambda", dest="lam", type=float, default=0.3)
        p.add_argument("--t-max", dest="t_max", type=float, default=1.0)

    p = sub.add_parser("expand", help="factorial digits of a rational vector")
    p.add_argument("value", help="rational or comma-separated rational vector")
    p.add_argument("--depth", type=int, default=17,
                   help="digits are printed for levels 2..depth-1")
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser("psi", help="exact truncation of the universal function")
    p.add_argument("value")
    p.add_argument("--N", type=int, default=16, help="truncation position")
    p.add_argument("--q", type=int, default=1)
    p.set_defaults(func=cmd_psi)

    p = sub.add_parser("validate", help="check a family's declared data")
    family_opts(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("certify", help="slice covering certificate")
    family_opts(p)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--t", default="1.0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--suffixes", type=int, default=3)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("measure", help="cover-count decay table (CSV + figure)")
    family_opts(p)
    p.add_argument("--truncations", default="4,67")
    p.add_argument("--delta", type=float, default=2.0**-20)
    p.add_argument("--t", default="1.0")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=10**4)
    p.add_argument("--output", default=None, help="CSV path; JSON and PNG beside it")
    p.add_argument("--no-figure", action="store_true")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("demo", help="end-to-end run into an output directory")
    family_opts(p)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--outdir", default="nullpack-demo")
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(_apply_config(list(argv)))
        return args.func(args, parser)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
