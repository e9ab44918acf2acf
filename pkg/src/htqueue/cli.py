"""Command line: ``htqueue {moments,error-scan,cdf,selfcheck}``.

Exit status is 0 on success, 1 when any cell or check failed and 2 on a
configuration error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import reporting as rp
from .errors import ConfigError

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="htqueue",
                                description="Heavy-traffic waiting-time moments of GI/G/1 queues.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, hlp in (("moments", "exact and approximate scaled moments"),
                      ("error-scan", "approximation errors and log-log slopes"),
                      ("cdf", "waiting-time CDFs by transform inversion")):
        s = sub.add_parser(name, help=hlp)
        src = s.add_mutually_exclusive_group(required=True)
        src.add_argument("--config", metavar="PATH")
        src.add_argument("--preset", metavar="NAME", help=f"one of {', '.join(rp.list_presets())}")
        s.add_argument("--format", choices=("md", "csv", "json"), default="md")
        s.add_argument("--out", metavar="PATH")
        s.add_argument("--threads", type=int, default=1, metavar="N")
        s.add_argument("--precision", choices=("double", "extended"), default=None)
    s = sub.add_parser("selfcheck", help="internal consistency checks")
    s.add_argument("--format", choices=("md", "json"), default="md")
    s.add_argument("--out", metavar="PATH")
    return p


def _emit(text, out, sidecar=None):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.write_text(text, encoding="utf-8", newline="")
    if sidecar is not None:
        path.with_suffix(path.suffix + ".json").write_text(rp.render_json(sidecar),
                                                           encoding="utf-8")


def _moments(cfg, args):
    report = rp.moments_report(cfg, args.threads)
    render = {"md": rp.render_markdown, "csv": rp.render_csv, "json": rp.render_json}[args.format]
    _emit(render(report), args.out, None if args.format == "json" else report)
    return EXIT_FAILED if rp.failed_cells(report) else EXIT_OK


def _error_scan(cfg, args):
    report = rp.moments_report(cfg, args.threads)
    scan = rp.error_scan(report)
    if args.format == "json":
        text = json.dumps(scan, indent=2) + "\n"
    elif args.format == "csv":
        text = rp.render_error_scan_csv(scan)
    else:
        text = rp.render_error_scan_md(scan)
    _emit(text, args.out, None if args.format == "json" else report)
    return EXIT_FAILED if rp.failed_cells(report) else EXIT_OK


def _cdf(cfg, args):
    report = rp.cdf_report(cfg, args.threads)
    render = {"md": rp.render_cdf_md, "csv": rp.render_cdf_csv, "json": rp.render_json}[args.format]
    _emit(render(report), args.out, None if args.format == "json" else report)
    return EXIT_FAILED if rp.cdf_failed(report) else EXIT_OK


def _selfcheck(args):
    from .selfcheck import run_selfcheck
    results = run_selfcheck()
    if args.format == "json":
        text = json.dumps([{"check": n, "passed": ok, "detail": d, "seconds": t}
                           for n, ok, d, t in results], indent=2) + "\n"
    else:
        lines = [f"{'PASS' if ok else 'FAIL'} {n}: {d} ({t:.2f}s)" for n, ok, d, t in results]
        bad = sum(not ok for _, ok, _, _ in results)
        lines.append(f"{len(results) - bad}/{len(results)} checks passed")
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return EXIT_OK if all(ok for _, ok, _, _ in results) else EXIT_FAILED


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "selfcheck":
        return _selfcheck(args)
    try:
        cfg = rp.load_config(args.config, args.preset, args.precision)
        if args.threads < 1:
            raise ConfigError("--threads must be at least 1")
        return {"moments": _moments, "error-scan": _error_scan, "cdf": _cdf}[args.command](cfg, args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
