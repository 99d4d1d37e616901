"""Command-line front end.

Exit status: 0 on success, 2 when a certificate is refuted, 1 on bad input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

from . import report
from .defining_graph import ParseError, parse
from .metric_synth import HYPERBOLIC, MOUSSONG, ClassificationMismatch, build_params

OK, INPUT_ERROR, REFUTED = 0, 1, 2
COMMANDS = ("validate", "metric", "links", "trees", "cone", "geodesics", "report")


class InputError(Exception):
    pass


def write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename; ``-`` means stdout."""
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _read(path: Optional[str]) -> str:
    if path is None:
        raise InputError("--input is required for this command")
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _graph(text: str):
    try:
        return parse(text)
    except ParseError as exc:
        raise InputError(str(exc)) from None


def _params(g, mode: str):
    try:
        return build_params(g, mode)
    except ClassificationMismatch as exc:
        raise InputError(str(exc)) from None


def _write_dots(directory: Optional[str], files: dict) -> None:
    if directory is None:
        return
    for name, text in files.items():
        write_atomic(str(Path(directory) / name), text)


def _dot_name(prefix: str, vertex_type: str) -> str:
    inner = vertex_type.strip("{}").replace(",", "_")
    return f"{prefix}_{inner or 'empty'}.dot"


def _complexes(text: Optional[str]):
    from .geodesic import TEST_COMPLEXES, loads

    if text is None:
        return [(name, build()) for name, build in TEST_COMPLEXES.items()]
    try:
        return [("input", loads(text))]
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"not a complex document: {exc}") from None


def run(args: argparse.Namespace) -> int:
    cmd = args.command
    params = {"mode": args.mode, "radius": args.radius, "seed": args.seed, "trials": args.trials}
    text = None if cmd == "geodesics" and args.input is None else _read(args.input)
    status = OK
    body: dict = {}
    dots: dict = {}

    if cmd == "geodesics":
        from .geodesic import NotCertifiedError

        rows = []
        for name, Y in _complexes(text):
            try:
                rows.append(report.geodesic_summary(name, Y, args.trials, args.seed))
            except NotCertifiedError as exc:
                rows.append({"complex": name, "status": "refuted", "reason": str(exc)})
                status = REFUTED
                continue
            stab = rows[-1].get("stability")
            cov = rows[-1].get("cover_check")
            if (stab and stab["failed"]) or (cov and (cov["uncovered"] or cov["not_nested"] or cov["leaks"])):
                status = REFUTED
        body["geodesics"] = rows
        write_atomic(args.out, report.dumps(report.envelope(cmd, text, params, body)))
        return status

    g = _graph(text)
    body["input"] = report.graph_input(g)
    cls = report.classification(g)
    body["classification"] = cls
    if cmd == "validate":
        pass
    elif cmd in ("metric", "links", "cone", "report"):
        if args.mode == HYPERBOLIC and not cls["hyperbolic_type"] and cmd != "report":
            raise InputError("the graph is not of hyperbolic type; use --mode moussong for two-dimensional graphs")
        if cmd == "report" and not cls["hyperbolic_type"]:
            raise InputError("report needs a graph of hyperbolic type")
        p = _params(g, args.mode)
        if cmd in ("metric", "report"):
            body["metric"] = report.metric(p)
        if cmd in ("links", "report"):
            rows, graphs = report.links(g, p, args.radius, coned=False)
            body["links"] = rows
            dots.update({_dot_name("link", k): L.to_dot() for k, L in graphs.items()})
            status = status if report.all_verified(rows) else REFUTED
        if cmd in ("cone", "report"):
            if p.mode == MOUSSONG:
                raise InputError("coned links need --mode hyperbolic")
            rows, graphs = report.links(g, p, args.radius, coned=True)
            body["coned_links"] = rows
            dots.update({_dot_name("coned_link", k): L.to_dot() for k, L in graphs.items()})
            status = status if report.all_verified(rows) else REFUTED
        if cmd == "report":
            body["trees"], dots["cut_graph.dot"] = report.trees(g)
            if args.trials > 0:
                body["geodesics"] = [report.geodesic_summary(name, Y, args.trials, args.seed)
                                     for name, Y in _complexes(None)]
    elif cmd == "trees":
        body["trees"], dots["cut_graph.dot"] = report.trees(g)

    _write_dots(args.dot, dots)
    write_atomic(args.out, report.dumps(report.envelope(cmd, text, params, body)))
    return status


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="deligne", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--input", help="defining graph (JSON); for geodesics, a complex document")
    ap.add_argument("--mode", choices=(HYPERBOLIC, MOUSSONG), default=HYPERBOLIC)
    ap.add_argument("--radius", type=int, default=2, help="truncation radius of infinite links")
    ap.add_argument("--trials", type=int, default=None, help="stability trials per complex")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="-", help="output path, '-' for standard output")
    ap.add_argument("--dot", help="directory for DOT exports")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.trials is None:
        args.trials = 100 if args.command == "geodesics" else 0
    if args.radius < 1 or args.trials < 0:
        print("error: --radius must be >= 1 and --trials >= 0", file=sys.stderr)
        return INPUT_ERROR
    try:
        return run(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
