"""Command-line client: validate | compile | simulate | render | play | remap.

Every command except ``play`` is a thin HTTP client over the bundled
service app (ropera.service).  Without --server the app runs in-process via
an ASGI transport, so no network or separate process is needed; with
--server URL the same requests go to a remote instance.  ``play`` streams a
compiled command stream to a hardware bridge over TCP in real time.

Scores are looked up as given, then under $ROPERA_HOME, then among the
packaged assets (so ``ropera validate peony_pavilion.ropera`` works out of
the box).
"""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import queue
import socket
import sys
import threading
import time
from pathlib import Path

import httpx

from .stream import decode_record

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISSING = 2

OVERRUN_WARN_S = 0.05


class PeerNack(Exception):
    """The bridge refused a record."""


def resolve_input(path_text: str) -> Path | None:
    p = Path(path_text)
    if p.exists():
        return p
    home = os.environ.get("ROPERA_HOME")
    if home and (Path(home) / path_text).exists():
        return Path(home) / path_text
    try:
        from .vocabulary import asset_path

        return asset_path(path_text)
    except Exception:
        return None


def request(server: str | None, method: str, path: str, payload=None):
    """One request against the remote server or the in-process app."""

    async def go():
        if server:
            client = httpx.AsyncClient(base_url=server, timeout=120.0)
        else:
            from .service import app

            client = httpx.AsyncClient(
                transport=httpx.ASGITransport(app=app), base_url="http://ropera.internal",
                timeout=120.0,
            )
        async with client:
            resp = await client.request(method, path, json=payload)
            return resp.status_code, resp.content

    return asyncio.run(go())


def _detail_message(content: bytes) -> str:
    try:
        detail = json.loads(content).get("detail")
    except (json.JSONDecodeError, AttributeError):
        return content.decode(errors="replace")
    if isinstance(detail, dict):
        if {"line", "column", "message"} <= set(detail):
            return f"line {detail['line']}, col {detail['column']}: {detail['message']}"
        return detail.get("message", str(detail))
    return str(detail)


def _read_score(args) -> tuple[Path, str] | int:
    path = resolve_input(args.score)
    if path is None:
        print(f"error: score {args.score!r} not found", file=sys.stderr)
        return EXIT_MISSING
    return path, path.read_bytes().decode("utf-8", errors="replace")


def cmd_validate(args) -> int:
    loaded = _read_score(args)
    if isinstance(loaded, int):
        return loaded
    path, text = loaded
    status, content = request(args.server, "POST", "/validate", {"text": text})
    if status != 200:
        print(f"error: {_detail_message(content)}", file=sys.stderr)
        return EXIT_ERROR
    body = json.loads(content)
    if not body["valid"]:
        err = body["error"]
        print(f"{path}:{err['line']}:{err['column']}: {err['kind']}: {err['message']}")
        return EXIT_ERROR
    print(f"OK, {body['frame_count']} frames, {body['servo_count']} servos, "
          f"{body['total_duration_s']} s total")
    return EXIT_OK


def _compile_text(args) -> tuple[str, int] | int:
    loaded = _read_score(args)
    if isinstance(loaded, int):
        return loaded
    _, text = loaded
    payload = {"text": text, "profile": getattr(args, "profile", None)}
    status, content = request(args.server, "POST", "/compile", payload)
    if status != 200:
        print(f"error: {_detail_message(content)}", file=sys.stderr)
        return EXIT_ERROR
    body = json.loads(content)
    return body["stream"], body["record_count"]


def cmd_compile(args) -> int:
    compiled = _compile_text(args)
    if isinstance(compiled, int):
        return compiled
    stream, count = compiled
    if args.out:
        Path(args.out).write_bytes(stream.encode())
        print(f"wrote {count} records to {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(stream)
    return EXIT_OK


def cmd_simulate(args) -> int:
    loaded = _read_score(args)
    if isinstance(loaded, int):
        return loaded
    _, text = loaded
    payload = {
        "text": text,
        "profile": args.profile,
        "rate": args.rate,
        "include_samples": args.samples_out is not None,
    }
    status, content = request(args.server, "POST", "/simulate", payload)
    if status != 200:
        print(f"error: {_detail_message(content)}", file=sys.stderr)
        return EXIT_ERROR
    body = json.loads(content)
    m = body["metrics"]
    print(f"samples: {body['sample_count']}  duration: {body['duration_s']} s")
    print(f"timing_deviation: {m['timing_deviation']} s")
    print(f"smoothness (mean squared jerk): {m['smoothness']} (deg/s^3)^2")
    print(f"jitter: {m['jitter']} deg")
    if args.metrics_out:
        Path(args.metrics_out).write_text(json.dumps(m, indent=2) + "\n")
    if args.samples_out:
        Path(args.samples_out).write_text(body["samples_csv"])
    return EXIT_OK


def cmd_render(args) -> int:
    loaded = _read_score(args)
    if isinstance(loaded, int):
        return loaded
    path, text = loaded
    payload = {
        "text": text,
        "profile": args.profile,
        "rate": args.rate,
        "plane": args.plane,
        "width": args.width,
        "height": args.height,
        "title": args.title or path.stem,
    }
    if args.chain:
        chain_path = Path(args.chain)
        if not chain_path.exists():
            print(f"error: chain file {args.chain!r} not found", file=sys.stderr)
            return EXIT_MISSING
        payload["chain_text"] = chain_path.read_text()
    status, content = request(args.server, "POST", "/render", payload)
    if status != 200:
        print(f"error: {_detail_message(content)}", file=sys.stderr)
        return EXIT_ERROR
    out = args.out or (path.stem + ".svg")
    Path(out).write_bytes(content)
    print(f"wrote {out}", file=sys.stderr)
    return EXIT_OK


def cmd_remap(args) -> int:
    loaded = _read_score(args)
    if isinstance(loaded, int):
        return loaded
    _, text = loaded
    rules = [r for r in args.map.split(",") if r.strip()]
    status, content = request(args.server, "POST", "/remap", {"text": text, "rules": rules})
    if status != 200:
        print(f"error: {_detail_message(content)}", file=sys.stderr)
        return EXIT_ERROR
    out_text = json.loads(content)["text"]
    if args.out:
        Path(args.out).write_text(out_text)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(out_text)
    return EXIT_OK


def stream_records(records, host: str, port: int, warn=None) -> list[str]:
    """Send records at their scheduled times; returns the peer's reply lines.

    Never sends early (monotonic clock); warns when a send lags its schedule
    by more than OVERRUN_WARN_S.  Raises PeerNack on any nack reply.
    """
    warn = warn or (lambda msg: print(f"warning: {msg}", file=sys.stderr))
    replies: queue.Queue[str | None] = queue.Queue()

    with socket.create_connection((host, port), timeout=10.0) as sock:

        def reader():
            try:
                with sock.makefile("r", encoding="utf-8", newline="\n") as lines:
                    for line in lines:
                        replies.put(line.strip())
            except OSError:
                pass
            replies.put(None)

        thread = threading.Thread(target=reader, daemon=True)
        thread.start()

        start = time.monotonic()
        for msg, line in records:
            delay = msg.t - (time.monotonic() - start)
            if delay > 0:
                time.sleep(delay)
            lag = (time.monotonic() - start) - msg.t
            if lag > OVERRUN_WARN_S:
                warn(f"schedule overrun: seq {msg.seq} sent {lag * 1000:.0f} ms late")
            sock.sendall((line + "\n").encode())

        acks: list[str] = []
        deadline = time.monotonic() + 10.0
        while len(acks) < len(records) and time.monotonic() < deadline:
            try:
                reply = replies.get(timeout=0.25)
            except queue.Empty:
                continue
            if reply is None:
                break
            acks.append(reply)
            if reply.startswith("nack"):
                raise PeerNack(reply)
    return acks


def cmd_play(args) -> int:
    compiled = _compile_text(args)
    if isinstance(compiled, int):
        return compiled
    stream, count = compiled
    lines = [l for l in stream.splitlines() if l.strip()]
    records = [(decode_record(l), l) for l in lines]

    if args.dry_run:
        for msg, line in records:
            print(f"{msg.t:8.3f}s  {line}")
        print(f"dry run: {count} records (nothing sent)", file=sys.stderr)
        return EXIT_OK

    host, _, port_text = args.connect.partition(":")
    try:
        port = int(port_text)
    except ValueError:
        print(f"error: --connect needs host:port, got {args.connect!r}", file=sys.stderr)
        return EXIT_ERROR
    try:
        acks = stream_records(records, host, port)
    except ConnectionRefusedError:
        print(f"error: connection refused by {host}:{port}", file=sys.stderr)
        return EXIT_ERROR
    except PeerNack as exc:
        print(f"error: bridge refused a record: {exc}", file=sys.stderr)
        return EXIT_ERROR
    expected = [f"ack {msg.seq}" for msg, _ in records]
    if acks != expected:
        print(f"error: expected {len(expected)} acks in order, got {acks[:5]}...", file=sys.stderr)
        return EXIT_ERROR
    print(f"streamed {count} records, all acked", file=sys.stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ropera", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--server", default=None,
                        help="base URL of a running service (default: in-process)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and check a score")
    p.add_argument("score")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compile", help="compile a score to a command stream")
    p.add_argument("score")
    p.add_argument("--profile", choices=["vendor_default", "linear_smoothed", "min_jerk", "s_curve"])
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("simulate", help="plan a trajectory and report motion metrics")
    p.add_argument("score")
    p.add_argument("--profile", choices=["vendor_default", "linear_smoothed", "min_jerk", "s_curve"])
    p.add_argument("--rate", type=float, help="sample rate in Hz (default: score header)")
    p.add_argument("--metrics-out", help="write metrics JSON here")
    p.add_argument("--samples-out", help="write sampled angles CSV here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("render", help="render a light-trail SVG")
    p.add_argument("score")
    p.add_argument("--out", help="output SVG path (default: <score>.svg)")
    p.add_argument("--profile", choices=["vendor_default", "linear_smoothed", "min_jerk", "s_curve"])
    p.add_argument("--rate", type=float)
    p.add_argument("--plane", choices=["XY", "XZ", "YZ"], default="XZ")
    p.add_argument("--width", type=int, default=800)
    p.add_argument("--height", type=int, default=600)
    p.add_argument("--title", default=None)
    p.add_argument("--chain", help="chain description file overriding the default arm")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("play", help="stream a compiled score to a bridge in real time")
    p.add_argument("score")
    p.add_argument("--profile", choices=["vendor_default", "linear_smoothed", "min_jerk", "s_curve"])
    p.add_argument("--connect", default="127.0.0.1:7340", help="bridge host:port")
    p.add_argument("--dry-run", action="store_true", help="print the stream, open no socket")
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("remap", help="rewrite a score for a different servo layout")
    p.add_argument("score")
    p.add_argument("--map", required=True,
                   help="comma-separated target rules, e.g. s1,s2,s4,s6 or s1,=A")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_remap)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except httpx.ConnectError:
        print(f"error: cannot reach server {args.server!r}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
