"""Client for the stdio parser/printer adapter service.

The adapter is a child process speaking newline-delimited JSON:
requests `{id, op: "parse"|"print", source?|ast?}` and one ordered reply
per request. The launch command comes from the FRAGGEN_ADAPTER environment
variable or an explicit command; when absent, the bundled frontend build is
used if present.
"""

from __future__ import annotations

import json
import os
import shlex
import shutil
import subprocess
from pathlib import Path

from .estree import AstNode, UnsupportedKind, decode_json, encode_json

ADAPTER_ENV = "FRAGGEN_ADAPTER"

_FRONTEND_SERVER = Path(__file__).resolve().parents[2] / "frontend" / "dist" / "server.js"


class AdapterError(Exception):
    def __init__(self, kind: str, message: str = "", line: int | None = None,
                 col: int | None = None):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.line = line
        self.col = col


def default_command() -> list[str] | None:
    env = os.environ.get(ADAPTER_ENV)
    if env:
        return shlex.split(env)
    if _FRONTEND_SERVER.exists() and shutil.which("node"):
        return ["node", str(_FRONTEND_SERVER)]
    return None


def available() -> bool:
    return default_command() is not None


class ParserAdapter:
    """One adapter child process; requests are serialized in order."""

    def __init__(self, command: list[str] | str | None = None):
        if command is None:
            command = default_command()
            if command is None:
                raise AdapterError("unavailable", "no adapter command configured")
        if isinstance(command, str):
            command = shlex.split(command)
        self.command = command
        self.proc: subprocess.Popen | None = None
        self._next_id = 0

    def start(self) -> None:
        if self.proc is None:
            self.proc = subprocess.Popen(
                self.command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL, text=True, bufsize=1)

    def stop(self) -> None:
        if self.proc is not None:
            try:
                self.proc.stdin.close()
                self.proc.wait(timeout=5)
            except (OSError, subprocess.TimeoutExpired):
                self.proc.kill()
            self.proc = None

    def __enter__(self) -> "ParserAdapter":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()

    def request(self, payload: dict) -> dict:
        self.start()
        self._next_id += 1
        payload = dict(payload, id=self._next_id)
        self.proc.stdin.write(json.dumps(payload) + "\n")
        self.proc.stdin.flush()
        line = self.proc.stdout.readline()
        if not line:
            raise AdapterError("protocol", "adapter closed the stream")
        reply = json.loads(line)
        if reply.get("id") != self._next_id:
            raise AdapterError("protocol", f"reply id {reply.get('id')} out of order")
        return reply

    def send_raw(self, line: str) -> dict:
        """One raw request line; used to probe protocol robustness."""
        self.start()
        self.proc.stdin.write(line.rstrip("\n") + "\n")
        self.proc.stdin.flush()
        out = self.proc.stdout.readline()
        if not out:
            raise AdapterError("protocol", "adapter closed the stream")
        return json.loads(out)

    def parse(self, source: str) -> AstNode:
        reply = self.request({"op": "parse", "source": source})
        if not reply.get("ok"):
            err = reply.get("error") or {}
            if err.get("kind") == "unsupported":
                raise UnsupportedKind(err.get("message", ""))
            raise AdapterError(err.get("kind", "unknown"), err.get("message", ""),
                               err.get("line"), err.get("col"))
        return decode_json(reply["ast"])

    def print(self, ast: AstNode) -> str:
        reply = self.request({"op": "print", "ast": encode_json(ast)})
        if not reply.get("ok"):
            err = reply.get("error") or {}
            raise AdapterError(err.get("kind", "unknown"), err.get("message", ""))
        return reply["source"]
