"""Read-only HTTP endpoint for public newsletter links.

``GET /n/<token>`` returns ``<out_dir>/<token>.html``; ``GET /healthz`` returns
``ok``. The token must match the public-token grammar before any file is
touched, so no request can name a path outside the output directory.
"""

from __future__ import annotations

import logging
import os
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import urlsplit

from .newsletter import TOKEN_RE

log = logging.getLogger(__name__)


class NewsletterHandler(BaseHTTPRequestHandler):
    out_dir: Path = Path("out")
    server_version = "vjournal"
    sys_version = ""

    def _send(self, status: HTTPStatus, body: bytes, ctype: str = "text/plain; charset=utf-8", head=False):
        self.send_response(status)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("X-Content-Type-Options", "nosniff")
        self.end_headers()
        if not head:
            self.wfile.write(body)

    def _route(self, head: bool = False):
        path = urlsplit(self.path).path
        if path == "/healthz":
            return self._send(HTTPStatus.OK, b"ok", head=head)
        if path.startswith("/n/"):
            token = path[3:]
            if TOKEN_RE.match(token):
                target = self.out_dir / f"{token}.html"
                try:
                    body = target.read_bytes()
                except FileNotFoundError:
                    body = None
                if body is not None:
                    return self._send(HTTPStatus.OK, body, "text/html; charset=utf-8", head=head)
        self._send(HTTPStatus.NOT_FOUND, b"not found", head=head)

    def do_GET(self):
        self._route()

    def do_HEAD(self):
        self._route(head=True)

    def log_message(self, fmt, *args):
        log.info("%s %s", self.address_string(), fmt % args)


def make_server(host: str, port: int, out_dir: str | os.PathLike) -> ThreadingHTTPServer:
    """Bind the server; bind failures raise OSError immediately."""
    d = Path(out_dir)
    if not d.is_dir():
        raise FileNotFoundError(f"output directory {d} does not exist")
    handler = type("BoundNewsletterHandler", (NewsletterHandler,), {"out_dir": d.resolve()})
    return ThreadingHTTPServer((host, port), handler)


def serve_newsletters(host: str, port: int, out_dir: str | os.PathLike) -> None:
    httpd = make_server(host, port, out_dir)
    log.info("serving %s on %s:%d", out_dir, *httpd.server_address[:2])
    try:
        httpd.serve_forever()
    finally:
        httpd.server_close()
