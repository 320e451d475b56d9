"""HTTP adapter exposing a simulated service over the rpcfuzz-wire/1 format.

POST /call with {interfaceId, actionName, args, auth} returns
{ok: true, result: ...} or {ok: false, error: {name, message, type?, ...}}.
POST /reset returns 204 after resetting service state. This mirrors the
thin adapter that would sit next to a real SUT.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from ..execution import RawCallError, normalize_exception
from ..schema.jsonio import decode_phenotype, encode_phenotype
from .services import SimulatedService


def _make_handler(service: SimulatedService):
    class Handler(BaseHTTPRequestHandler):
        def log_message(self, fmt, *args):   # keep test output quiet
            pass

        def _send_json(self, status: int, payload: dict) -> None:
            body = json.dumps(payload).encode()
            self.send_response(status)
            self.send_header("Content-Type", "application/json")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)

        def do_POST(self):
            if self.path == "/reset":
                service.reset_state()
                self.send_response(204)
                self.end_headers()
                return
            if self.path != "/call":
                self._send_json(404, {"ok": False, "error": {
                    "name": "NotFound", "message": self.path}})
                return
            length = int(self.headers.get("Content-Length") or 0)
            try:
                request = json.loads(self.rfile.read(length).decode())
                args = [decode_phenotype(a) for a in request.get("args", [])]
                value = service.invoke(request["actionName"], args,
                                       request.get("auth") or {})
            except (json.JSONDecodeError, KeyError) as exc:
                self._send_json(400, {"ok": False, "error": {
                    "name": "BadRequest", "message": str(exc)}})
                return
            except Exception as exc:          # noqa: BLE001 - SUT faults become data
                raw = exc if isinstance(exc, RawCallError) else normalize_exception(exc)
                self._send_json(200, {"ok": False, "error": raw.to_wire()})
                return
            self._send_json(200, {"ok": True, "result": encode_phenotype(value)})

    return Handler


def serve_harness(service: SimulatedService, host: str = "127.0.0.1",
                  port: int = 0) -> ThreadingHTTPServer:
    """Start the adapter on a background thread; caller owns shutdown()."""
    server = ThreadingHTTPServer((host, port), _make_handler(service))
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server
