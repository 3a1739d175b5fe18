"""Listen for newline-delimited command records and drive a backend.

The wire protocol is one JSON object per line:

    {"seq":0,"t":0.0,"angles":[0.0,45.0,-45.0,-45.0,0.0,135.0],"speed":100,"last":false}

Every valid record is handed to the backend and answered with ``ack <seq>``;
anything else gets ``nack <seq> <reason>`` (seq -1 when the line cannot be
parsed) and the stream continues.  The bridge does no trajectory math: it
forwards angle values exactly as received.

Backends:
  mock    append each record, plus a ``recv_t`` receive timestamp relative to
          the first record of the connection, to a log file
  vendor  call the arm API's send_angles(angles, speed); needs pymycobot

One connection is served at a time with a blocking line loop; EOF on the
connection ends it cleanly.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
import time
from dataclasses import dataclass
from pathlib import Path

CLIP_LIMIT = 175.0
DEFAULT_PORT = 7340


@dataclass
class BridgeConfig:
    host: str = "127.0.0.1"
    port: int = DEFAULT_PORT
    backend: str = "mock"          # "mock" or "vendor"
    device: str = "/dev/ttyAMA0"   # vendor serial device
    log_path: str | None = None    # mock log destination

    def __post_init__(self):
        if self.backend not in ("mock", "vendor"):
            raise ValueError("backend must be 'mock' or 'vendor'")


class MockBackend:
    """Records every accepted command instead of moving anything."""

    def __init__(self, log_path: str | None):
        self.log_path = Path(log_path) if log_path else None
        self.records: list[dict] = []
        if self.log_path:
            self.log_path.write_text("")

    def handle(self, record: dict, recv_t: float) -> None:
        entry = dict(record)
        entry["recv_t"] = recv_t
        self.records.append(entry)
        if self.log_path:
            with self.log_path.open("a") as f:
                f.write(json.dumps(entry, separators=(",", ":")) + "\n")


class VendorBackend:
    """Thin adapter over the arm vendor's Python API."""

    def __init__(self, device: str):
        try:
            from pymycobot.mycobot import MyCobot
        except ImportError as exc:
            raise RuntimeError(
                "vendor backend needs the pymycobot package (pip install pymycobot)"
            ) from exc
        self.arm = MyCobot(device)

    def handle(self, record: dict, recv_t: float) -> None:
        speed = record["speed"] if record["speed"] is not None else 50
        self.arm.send_angles(list(record["angles"]), speed)


def validate_record(line: str) -> tuple[dict | None, int, str | None]:
    """Returns (record, seq, reason); record is None when the line is bad."""
    try:
        raw = json.loads(line)
    except json.JSONDecodeError:
        return None, -1, "parse_error"
    if not isinstance(raw, dict):
        return None, -1, "parse_error"
    seq = raw.get("seq")
    if not isinstance(seq, int) or isinstance(seq, bool) or seq < 0:
        return None, -1, "bad_seq"
    if not isinstance(raw.get("t"), (int, float)) or isinstance(raw.get("t"), bool):
        return None, seq, "bad_fields"
    angles = raw.get("angles")
    if not isinstance(angles, list) or not angles or not all(
        isinstance(a, (int, float)) and not isinstance(a, bool) for a in angles
    ):
        return None, seq, "bad_fields"
    if any(abs(a) > CLIP_LIMIT for a in angles):
        return None, seq, "clip_violation"
    speed = raw.get("speed")
    if speed is not None and (not isinstance(speed, int) or isinstance(speed, bool)
                              or not 1 <= speed <= 100):
        return None, seq, "bad_fields"
    if not isinstance(raw.get("last"), bool):
        return None, seq, "bad_fields"
    return raw, seq, None


class Bridge:
    def __init__(self, config: BridgeConfig):
        self.config = config
        if config.backend == "mock":
            self.backend = MockBackend(config.log_path)
        else:
            self.backend = VendorBackend(config.device)
        self.server = socket.create_server((config.host, config.port))

    @property
    def port(self) -> int:
        return self.server.getsockname()[1]

    def handle_connection(self, conn: socket.socket) -> int:
        """Blocking line loop over one connection; returns records accepted."""
        accepted = 0
        first_arrival = None
        with conn, conn.makefile("rw", encoding="utf-8", newline="\n") as stream:
            for line in stream:
                line = line.strip()
                if not line:
                    continue
                now = time.monotonic()
                if first_arrival is None:
                    first_arrival = now
                record, seq, reason = validate_record(line)
                if record is None:
                    stream.write(f"nack {seq} {reason}\n")
                    stream.flush()
                    continue
                try:
                    self.backend.handle(record, now - first_arrival)
                except Exception as exc:  # device failure must not kill the stream
                    stream.write(f"nack {seq} backend_error: {exc}\n")
                    stream.flush()
                    continue
                accepted += 1
                stream.write(f"ack {seq}\n")
                stream.flush()
        return accepted

    def serve_once(self) -> int:
        conn, peer = self.server.accept()
        return self.handle_connection(conn)

    def serve_forever(self) -> None:
        while True:
            try:
                self.serve_once()
            except OSError:
                break

    def close(self) -> None:
        self.server.close()


def serve(config: BridgeConfig) -> None:
    """Bind and serve until interrupted."""
    bridge = Bridge(config)
    print(f"listening on {config.host}:{bridge.port} backend={config.backend}",
          file=sys.stderr)
    try:
        bridge.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        bridge.close()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ropera-bridge", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--listen", default=f"127.0.0.1:{DEFAULT_PORT}",
                        help="host:port to bind (default %(default)s)")
    parser.add_argument("--backend", choices=["mock", "vendor"], default="mock")
    parser.add_argument("--device", default="/dev/ttyAMA0", help="vendor serial device")
    parser.add_argument("--log", default=None, help="mock log file")
    args = parser.parse_args(argv)
    host, _, port_text = args.listen.partition(":")
    try:
        port = int(port_text)
    except ValueError:
        parser.error(f"--listen needs host:port, got {args.listen!r}")
    try:
        serve(BridgeConfig(host=host, port=port, backend=args.backend,
                           device=args.device, log_path=args.log))
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
