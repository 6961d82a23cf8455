"""Command-line client for the run service.

The CLI never computes anything itself: it assembles a run request from a
JSON config file and/or flags, posts it to the service (in-process by
default, or a live server via ``--server``), prints the summary, and maps
the outcome to exit codes:

* 0 — all hard invariants pass,
* 2 — a hard invariant failed, or the request was rejected,
* 3 — the generated set failed a theorem hypothesis,
* 4 — every hard invariant passed but a log-only slack exceeded
  ``--max-slack``.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path
from typing import Any

import httpx

from .experiments.report import emit_payload
from .service import ENDPOINT_MODES, create_app

__all__ = ["build_parser", "main"]

EXIT_OK = 0
EXIT_HARD = 2
EXIT_HYPOTHESIS = 3
EXIT_SLACK = 4

_RUN_HELP = {
    "diffprod": "difference-set vs product-set chain on one generated set",
    "sumprod": "sum-set vs product-set chain on one generated set",
    "energy": "tube-incidence representation and third-energy bounds",
    "content": "dyadic content of the popular difference cells",
    "incidence": "incidence count against the quasi-product tube bound",
}


class _RequestError(ValueError):
    """The command line or config file cannot be turned into a request."""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sumprodlab",
        description="run dyadic-grid experiments and report their inequality ledgers",
    )
    sub = parser.add_subparsers(dest="run", required=True, metavar="run")
    for name in ENDPOINT_MODES:
        sp = sub.add_parser(name, help=_RUN_HELP[name])
        sp.add_argument("--config", type=Path, metavar="PATH",
                        help="JSON config file; explicit flags override its fields")
        sp.add_argument("--m", type=int, help="scale exponent (cells have side 2**-m)")
        sp.add_argument("--s", type=str, metavar="FRAC",
                        help="nominal dimension, e.g. 1/2")
        sp.add_argument("--eps", type=float, help="uniformity budget")
        sp.add_argument("--seed", type=int,
                        help="use a random Frostman set with this seed")
        sp.add_argument("--eta", type=float,
                        help="slack exponent for the closing display")
        sp.add_argument("--c-scale", type=float,
                        help="scale-range constant for the branching exponent")
        sp.add_argument("--out", type=Path, metavar="DIR",
                        help="write report.json, ledger.csv and profile CSVs here")
        sp.add_argument("--brute-check", action="store_true",
                        help="force the independent brute-force recounts")
        sp.add_argument("--max-slack", type=float, metavar="X",
                        help="exit 4 if any log-only slack exponent exceeds X")
        sp.add_argument("--server", type=str, metavar="URL",
                        help="base URL of a running service (default: in-process)")
    return parser


def _assemble(args: argparse.Namespace) -> tuple[dict[str, Any], Path | None]:
    """Merge the config file and flags into a request payload."""
    base: dict[str, Any] = {}
    if args.config is not None:
        try:
            base = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise _RequestError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise _RequestError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(base, dict):
            raise _RequestError("config file must hold a JSON object")
    mode = ENDPOINT_MODES[args.run]
    file_mode = base.pop("mode", None)
    if file_mode is not None and file_mode != mode:
        raise _RequestError(
            f"config file is for mode {file_mode!r}, but the subcommand "
            f"runs {mode!r}"
        )
    out = base.pop("out", None)
    overrides = (
        ("m", args.m),
        ("s", args.s),
        ("eps", args.eps),
        ("seed", args.seed),
        ("eta", args.eta),
        ("c_scale", args.c_scale),
    )
    for key, val in overrides:
        if val is not None:
            base[key] = val
    if args.brute_check:
        base["brute_check"] = True
    outdir = args.out if args.out is not None else (Path(out) if out else None)
    return base, outdir


async def _post(args: argparse.Namespace, payload: dict[str, Any]) -> httpx.Response:
    url = f"/runs/{args.run}"
    if args.server:
        async with httpx.AsyncClient(base_url=args.server, timeout=600.0) as client:
            return await client.post(url, json=payload)
    transport = httpx.ASGITransport(app=create_app())
    async with httpx.AsyncClient(
        transport=transport, base_url="http://sumprodlab", timeout=None
    ) as client:
        return await client.post(url, json=payload)


def _rejection(resp: httpx.Response) -> int:
    try:
        detail = resp.json().get("detail")
    except ValueError:
        detail = resp.text
    if isinstance(detail, dict):
        kind = detail.get("kind", "config")
        message = detail.get("message", "")
        if kind == "hypothesis":
            measured = detail.get("measured")
            extra = "" if measured is None else f" (measured {measured})"
            print(f"hypothesis failure: {message}{extra}", file=sys.stderr)
            return EXIT_HYPOTHESIS
        print(f"config error: {message}", file=sys.stderr)
        return EXIT_HARD
    print(f"request rejected: {detail}", file=sys.stderr)
    return EXIT_HARD


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        payload, outdir = _assemble(args)
    except _RequestError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_HARD

    try:
        resp = asyncio.run(_post(args, payload))
    except httpx.HTTPError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_HARD

    if resp.status_code != 200:
        return _rejection(resp)

    body = resp.json()
    for line in body["summary"]:
        print(line)

    if outdir is not None:
        try:
            paths = emit_payload(
                body["report"], body["ledger_csv"], body["profiles"], outdir
            )
        except OSError as exc:
            print(f"output error: {exc}", file=sys.stderr)
            return EXIT_HARD
        print(f"wrote {len(paths)} files under {outdir}")

    if not body["hard_pass"]:
        print("hard invariant violation; see the ledger", file=sys.stderr)
        return EXIT_HARD

    if args.max_slack is not None:
        over = [
            row["name"]
            for row in body["report"]["ledger"]
            if row["kind"] == "log"
            and row["slack"] is not None
            and row["slack"] > args.max_slack
        ]
        if over:
            print(
                f"slack budget {args.max_slack} exceeded by: {', '.join(over)}",
                file=sys.stderr,
            )
            return EXIT_SLACK

    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
