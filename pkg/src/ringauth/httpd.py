"""Minimal JSON-over-HTTP plumbing shared by the three services.

Each service is a plain object exposing a ``routes()`` table mapping
(method, path) to a handler ``fn(query, body, client_ip) -> dict``.
Handlers raise :class:`ServiceError` for protocol-level failures, which
the wire layer turns into ``{"error": code, "detail": text}`` with the
right status.  Keeping services as plain objects means tests can call
handlers directly without sockets.
"""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Protocol
from urllib.parse import parse_qs, urlparse

log = logging.getLogger(__name__)

Handler = Callable[[dict, dict | None, str], dict]

LOCAL_ADDRESSES = ("127.0.0.1", "::1", "localhost")


class ServiceError(Exception):
    """A protocol failure with a stable machine-readable code."""

    def __init__(self, code: str, detail: str, status: int = 400) -> None:
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail
        self.status = status

    def to_dict(self) -> dict:
        return {"error": self.code, "detail": self.detail}


class JsonApp(Protocol):
    def routes(self) -> dict[tuple[str, str], Handler]: ...


def require_local(client_ip: str, what: str) -> None:
    """Admin endpoints only answer loopback peers."""
    if client_ip not in LOCAL_ADDRESSES:
        raise ServiceError("admin_only", f"{what} is restricted to local administrators", 403)


class _RequestHandler(BaseHTTPRequestHandler):
    app: JsonApp  # set on the subclass built by serve()

    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # route access noise through logging
        log.debug("%s %s", self.address_string(), fmt % args)

    def _reply(self, status: int, obj: dict) -> None:
        payload = json.dumps(obj).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def _dispatch(self, method: str) -> None:
        parsed = urlparse(self.path)
        query = {k: v[0] for k, v in parse_qs(parsed.query).items()}
        body = None
        if method == "POST":
            length = int(self.headers.get("Content-Length") or 0)
            raw = self.rfile.read(length) if length else b""
            if raw:
                try:
                    body = json.loads(raw)
                except json.JSONDecodeError:
                    self._reply(400, {"error": "bad_request", "detail": "body is not valid JSON"})
                    return
        handler = self.app.routes().get((method, parsed.path))
        if handler is None:
            self._reply(404, {"error": "not_found", "detail": f"no route {method} {parsed.path}"})
            return
        try:
            result = handler(query, body, self.client_address[0])
        except ServiceError as err:
            self._reply(err.status, err.to_dict())
            return
        except Exception:
            log.exception("unhandled error in %s %s", method, parsed.path)
            self._reply(500, {"error": "internal", "detail": "internal server error"})
            return
        self._reply(200, result)

    def do_GET(self) -> None:
        self._dispatch("GET")

    def do_POST(self) -> None:
        self._dispatch("POST")


class RunningServer:
    """A ThreadingHTTPServer bound to its serve_forever thread."""

    def __init__(self, app: JsonApp, host: str, port: int) -> None:
        handler = type("BoundHandler", (_RequestHandler,), {"app": app})
        self.app = app
        self.httpd = ThreadingHTTPServer((host, port), handler)
        self.httpd.daemon_threads = True
        self.host, self.port = self.httpd.server_address[:2]
        self._thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        return f"http://{self.host}:{self.port}"

    def start(self) -> "RunningServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self.httpd.shutdown()
        self.httpd.server_close()


def serve(app: JsonApp, host: str = "127.0.0.1", port: int = 0) -> RunningServer:
    return RunningServer(app, host, port).start()


def require_fields(body: dict | None, *names: str) -> dict:
    if body is None:
        raise ServiceError("bad_request", "request body required", 400)
    for name in names:
        if name not in body:
            raise ServiceError("bad_request", f"missing field {name!r}", 400)
    return body
