"""HTTP review service.

Serves the review queue as JSON, appends decisions to an append-only JSONL
log (fsynced before the response goes out, so an acknowledged decision
survives a crash), and statically hosts the review UI bundle.  Listens on
loopback by default; there is no authentication, by design.
"""

from __future__ import annotations

import json
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import Optional
from urllib.parse import parse_qs, urlsplit

from .alignment import (
    ReviewDecision,
    ReviewItem,
    apply_decisions,
    decision_from_json,
    latest_decisions,
    read_decisions,
    read_review_queue,
)
from .corpus import document_to_json, dumps_record
from .errors import MalformedDecisionError

_FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>Review service</title></head>
<body><h1>Review service is running</h1>
<p>No UI bundle is installed (start with --ui-dir to host one).</p>
<p>JSON API: /api/items, /api/items/{id}, /api/items/{id}/decision,
/api/progress, /api/export</p></body></html>
"""

_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".png": "image/png",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
    ".map": "application/json",
}


class ReviewState:
    """Queue plus decision log; decision appends are serialized and durable."""

    def __init__(self, queue_path: str | Path, decisions_path: str | Path):
        self.queue = read_review_queue(queue_path)
        self.by_id = {item.example.id: item for item in self.queue}
        self.decisions_path = Path(decisions_path)
        self.decisions: list[ReviewDecision] = (
            read_decisions(self.decisions_path) if self.decisions_path.exists() else []
        )
        self._lock = threading.Lock()

    def latest(self) -> dict[str, ReviewDecision]:
        with self._lock:
            return latest_decisions(self.decisions)

    def record(self, decision: ReviewDecision) -> bool:
        """Append a decision durably; returns True if it supersedes one."""
        with self._lock:
            superseded = any(
                d.item_id == decision.item_id for d in self.decisions
            )
            with open(self.decisions_path, "a", encoding="utf-8") as fh:
                fh.write(dumps_record(decision.to_json()) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self.decisions.append(decision)
            return superseded

    def export(self):
        with self._lock:
            return apply_decisions(self.queue, self.decisions)

    def item_json(self, item: ReviewItem, decided: dict[str, ReviewDecision]) -> dict:
        obj = item.to_json()
        decision = decided.get(item.example.id)
        obj["status"] = "decided" if decision else "pending"
        if decision:
            obj["decision"] = decision.to_json()
        return obj


class _Handler(BaseHTTPRequestHandler):
    state: ReviewState
    ui_dir: Optional[Path] = None
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # quiet by default
        pass

    # -- helpers --------------------------------------------------------

    def _send(self, code: int, body: bytes, content_type: str) -> None:
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _json(self, code: int, obj: dict) -> None:
        self._send(code, (json.dumps(obj) + "\n").encode(), "application/json")

    def _error(self, code: int, message: str) -> None:
        self._json(code, {"error": message})

    # -- routes -----------------------------------------------------------

    def do_GET(self):
        url = urlsplit(self.path)
        parts = [p for p in url.path.split("/") if p]
        if parts[:1] == ["api"]:
            if parts == ["api", "items"]:
                return self._list_items(parse_qs(url.query))
            if len(parts) == 3 and parts[1] == "items":
                return self._get_item(parts[2])
            if parts == ["api", "progress"]:
                return self._progress()
            if parts == ["api", "export"]:
                return self._export()
            return self._error(404, "no such endpoint")
        return self._static(url.path)

    def do_POST(self):
        parts = [p for p in urlsplit(self.path).path.split("/") if p]
        if len(parts) == 4 and parts[:2] == ["api", "items"] and parts[3] == "decision":
            return self._post_decision(parts[2])
        return self._error(404, "no such endpoint")

    def _list_items(self, query: dict) -> None:
        status = query.get("status", ["all"])[0]
        try:
            offset = int(query.get("offset", ["0"])[0])
            limit = int(query.get("limit", ["50"])[0])
        except ValueError:
            return self._error(400, "offset and limit must be integers")
        decided = self.state.latest()
        items = [self.state.item_json(i, decided) for i in self.state.queue]
        if status != "all":
            items = [i for i in items if i["status"] == status]
        page = items[offset : offset + limit] if limit >= 0 else items[offset:]
        self._json(
            200, {"items": page, "total": len(items), "offset": offset, "limit": limit}
        )

    def _get_item(self, item_id: str) -> None:
        item = self.state.by_id.get(item_id)
        if item is None:
            return self._error(404, f"unknown item {item_id!r}")
        self._json(200, self.state.item_json(item, self.state.latest()))

    def _progress(self) -> None:
        decided = self.state.latest()
        self._json(200, {"decided": len(decided), "total": len(self.state.queue)})

    def _export(self) -> None:
        body = "".join(
            dumps_record(document_to_json(doc)) + "\n" for doc in self.state.export()
        ).encode()
        self._send(200, body, "application/x-ndjson")

    def _post_decision(self, item_id: str) -> None:
        if item_id not in self.state.by_id:
            return self._error(404, f"unknown item {item_id!r}")
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length) or b"{}")
            if not isinstance(payload, dict):
                raise MalformedDecisionError("decision body must be an object")
            payload.pop("item_id", None)
            decision = decision_from_json({**payload, "item_id": item_id})
        except (json.JSONDecodeError, MalformedDecisionError) as exc:
            return self._error(400, str(exc))
        superseded = self.state.record(decision)
        decided = self.state.latest()
        body = {
            "recorded": True,
            "superseded": superseded,
            "decided": len(decided),
            "total": len(self.state.queue),
        }
        # a later decision for an already-decided item is a resolved conflict:
        # kept in the log, last write wins, signalled with 409
        self._json(409 if superseded else 200, body)

    def _static(self, path: str) -> None:
        if self.ui_dir is None:
            if path in ("/", "/index.html"):
                return self._send(200, _FALLBACK_PAGE.encode(), "text/html; charset=utf-8")
            return self._error(404, "no UI bundle installed")
        rel = path.lstrip("/") or "index.html"
        base = self.ui_dir.resolve()
        target = (base / rel).resolve()
        if not target.is_relative_to(base) or not target.is_file():
            return self._error(404, "not found")
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        self._send(200, target.read_bytes(), ctype)


class ReviewService:
    """Owns the HTTP server; start() binds and serves on a daemon thread."""

    def __init__(
        self,
        queue_path: str | Path,
        decisions_path: str | Path,
        ui_dir: Optional[str | Path] = None,
    ):
        self.state = ReviewState(queue_path, decisions_path)
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self._server: Optional[ThreadingHTTPServer] = None
        self._thread: Optional[threading.Thread] = None

    @property
    def port(self) -> int:
        assert self._server is not None, "service not started"
        return self._server.server_address[1]

    def start(self, bind: str = "127.0.0.1", port: int = 7878) -> "ReviewService":
        handler = type(
            "BoundHandler", (_Handler,), {"state": self.state, "ui_dir": self.ui_dir}
        )
        self._server = ThreadingHTTPServer((bind, port), handler)
        self._server.daemon_threads = True
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None

    def serve_forever(self, bind: str = "127.0.0.1", port: int = 7878) -> None:
        handler = type(
            "BoundHandler", (_Handler,), {"state": self.state, "ui_dir": self.ui_dir}
        )
        with ThreadingHTTPServer((bind, port), handler) as server:
            server.daemon_threads = True
            server.serve_forever()
