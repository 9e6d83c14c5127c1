"""Command-line entry point: ``ncsurface <subcommand> [options]``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from .audit import (AuditConfig, ConfigError, _interior_equal, _jsonable, parse_chain, resolve_element,
                    resolve_with_report, run_audit)
from .algebra import truncate
from .dirac import commutator_D, spectrum, spectrum_csv_rows
from .geometry import PairingError, PairingInput, ParityObstruction, k0_battery, orientation_obstruction, pairing_report

DEFAULT_SURFACE = {"kind": "sphere"}


def _load_config(args) -> AuditConfig:
    if args.config:
        cfg = AuditConfig.from_file(args.config)
    else:
        cfg = AuditConfig.from_dict({"surface": DEFAULT_SURFACE})
    if args.seed is not None:
        d = cfg.to_dict()
        d["seed"] = args.seed
        cfg = AuditConfig.from_dict(d)
    return cfg


def _emit_json(obj, out) -> None:
    out.write(json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n")


def cmd_axioms(args, out) -> int:
    cfg = _load_config(args)
    report = run_audit(cfg)
    path = args.output or cfg.output.get("path")
    fmt = cfg.output.get("format", "json")
    if fmt == "csv":
        text = _records_csv(report)
    else:
        text = report.to_json() + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        out.write(text)
    failed = [r.name for r in report.records if r.status == "fail"]
    if failed:
        sys.stderr.write("failed checks: " + ", ".join(failed) + "\n")
    return 0 if not failed else 1


def _records_csv(report) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "status", "n", "tolerance", "paper_anchor"])
    for r in report.records:
        w.writerow([r.name, r.status, r.n, r.tolerance, r.paper_anchor])
    return buf.getvalue()


def cmd_spectrum(args, out) -> int:
    rep = spectrum(args.n)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "eigenvalue", "multiplicity", "boundary_flag"])
    for row in spectrum_csv_rows(rep):
        w.writerow(row)
    return 0


def cmd_commutator(args, out) -> int:
    cfg = _load_config(args)
    a = resolve_element(args.element, cfg.surface)
    res = commutator_D(a, args.n)
    m = res.interior
    up = res.operator[0, 1][:m, :m]
    lo = res.operator[1, 0][:m, :m]
    tu = truncate(res.upper, args.n).matrix[:m, :m]
    tl = truncate(res.lower, args.n).matrix[:m, :m]
    ok_u, du = _interior_equal(up, tu, m, cfg.tolerances["commutator"])
    ok_l, dl = _interior_equal(lo, tl, m, cfg.tolerances["commutator"])
    _emit_json({
        "element": args.element, "n": args.n, "interior": m,
        "interior_norm": res.operator.norm(m),
        "upper_symbol": _symbol_dict(res.upper.symbol), "lower_symbol": _symbol_dict(res.lower.symbol),
        "upper_corner_size": res.upper.corner_size, "lower_corner_size": res.lower.corner_size,
        "matches_symbolic": bool(ok_u and ok_l), "deviation": max(du, dl),
    }, out)
    return 0 if ok_u and ok_l else 1


def _symbol_dict(f, limit: int = 16) -> dict:
    items = sorted(f.items(), key=lambda kv: -abs(complex(kv[1])))[:limit]
    return {str(k): (str(v) if f.exact else [complex(v).real, complex(v).imag]) for k, v in sorted(items)}


def _projection(name: str):
    for p in k0_battery():
        if p.name == name:
            return p
    raise ConfigError(f"unknown projection {name!r}; choose from {[p.name for p in k0_battery()]}")


def cmd_index(args, out) -> int:
    res = pairing_report(PairingInput(_projection(args.p), _projection(args.q)), None, args.n)
    out.write(f"{res.index}\n")
    return 0


def cmd_orientation(args, out) -> int:
    cfg = _load_config(args)
    chain = parse_chain(args.chain, cfg.surface)
    try:
        res = orientation_obstruction(chain, None, args.n, cfg.tolerances["orientation"])
    except ParityObstruction as exc:
        _emit_json({"chain": args.chain, "degree": chain.degree, "status": "obstructed-as-predicted",
                    "obstruction": "parity", "detail": str(exc)}, out)
        return 0
    ok = res.diagonals_agree and res.verdict == "obstructed"
    _emit_json({"chain": args.chain, "degree": chain.degree,
                "status": "obstructed-as-predicted" if ok else "fail",
                "diag_top": _symbol_dict(res.diag_top), "diag_bottom": _symbol_dict(res.diag_bottom),
                "diagonals_agree": res.diagonals_agree, "residual": res.residual,
                "interior": res.interior, "obstruction": res.verdict}, out)
    return 0 if ok else 1


def cmd_decay(args, out) -> int:
    cfg = _load_config(args)
    _, rep = resolve_with_report(args.element, cfg.surface)
    _emit_json({"element": args.element, **rep.to_dict()}, out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="audit configuration (JSON file)")
    common.add_argument("--seed", type=int, default=None, help="seed for randomized batteries")
    parser = argparse.ArgumentParser(prog="ncsurface",
                                     description="Audit the spectral triple of noncommutative surfaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("axioms", parents=[common], help="run the full audit")
    p.add_argument("--output", help="write the report here instead of stdout")
    p.set_defaults(func=cmd_axioms)

    p = sub.add_parser("spectrum", parents=[common], help="truncated spectrum of D as CSV")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("commutator", parents=[common], help="[D, pi(a)] against its symbolic form")
    p.add_argument("--element", required=True)
    p.add_argument("--n", type=int, default=32)
    p.set_defaults(func=cmd_commutator)

    p = sub.add_parser("index", parents=[common], help="index pairing of two projections")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--n", type=int, default=32)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("orientation", parents=[common], help="orientation obstruction for a chain")
    p.add_argument("--chain", required=True, help="terms 'a0,b,a1,...' joined by '+'")
    p.add_argument("--n", type=int, default=32)
    p.set_defaults(func=cmd_orientation)

    p = sub.add_parser("decay", parents=[common], help="decay report of an element's symbol")
    p.add_argument("--element", required=True)
    p.set_defaults(func=cmd_decay)
    return parser


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "n", None) is not None and args.n < 2:
        parser.error("--n must be at least 2")
    try:
        return args.func(args, out)
    except (ConfigError, PairingError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
