"""A local stand-in for an OpenAI-compatible chat-completion endpoint.

Replies are chosen by a ``responder`` callable that sees the request body, so
tests and demos can script a model, inject HTTP errors or add latency::

    with MockChatServer(lambda body: "CLUE: water, 2") as server:
        cfg = LlmEndpointConfig(base_url=server.base_url, model="mock")
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Callable, Iterable


@dataclass
class MockReply:
    content: str = ""
    status: int = 200
    delay_s: float = 0.0


Responder = Callable[[dict[str, Any]], "str | MockReply"]


class QueueResponder:
    """Plays back replies in order; used up -> 500."""

    def __init__(self, replies: Iterable[str | MockReply]) -> None:
        self.replies = list(replies)
        self._lock = threading.Lock()

    def __call__(self, body: dict[str, Any]) -> str | MockReply:
        with self._lock:
            if not self.replies:
                return MockReply("mock script exhausted", status=500)
            return self.replies.pop(0)


class RoleResponder:
    """Routes by the agent's system prompt: a codemaster queue and a guesser queue."""

    def __init__(self, codemaster: Iterable[str | MockReply], guesser: Iterable[str | MockReply],
                 marker: str = "codemaster") -> None:
        self.codemaster = QueueResponder(codemaster)
        self.guesser = QueueResponder(guesser)
        self.marker = marker

    def __call__(self, body: dict[str, Any]) -> str | MockReply:
        system = body["messages"][0]["content"].lower()
        role = "codemaster" if f"you are the {self.marker}" in system else "guesser"
        return (self.codemaster if role == "codemaster" else self.guesser)(body)


class MockChatServer:
    def __init__(self, responder: Responder, host: str = "127.0.0.1", port: int = 0) -> None:
        self.responder = responder
        self.requests: list[dict[str, Any]] = []
        self.headers: list[dict[str, str]] = []
        self._lock = threading.Lock()
        server = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args) -> None:
                pass

            def do_POST(self) -> None:
                length = int(self.headers.get("Content-Length", 0))
                body = json.loads(self.rfile.read(length) or b"{}")
                with server._lock:
                    server.requests.append(body)
                    server.headers.append(dict(self.headers))
                if not self.path.endswith("/chat/completions"):
                    self._send(404, {"error": "not found"})
                    return
                reply = server.responder(body)
                if isinstance(reply, str):
                    reply = MockReply(reply)
                if reply.delay_s:
                    time.sleep(reply.delay_s)
                if reply.status != 200:
                    self._send(reply.status, {"error": reply.content})
                    return
                self._send(200, {
                    "id": f"mock-{len(server.requests)}",
                    "object": "chat.completion",
                    "model": body.get("model"),
                    "choices": [{"index": 0, "finish_reason": "stop",
                                 "message": {"role": "assistant", "content": reply.content}}],
                })

            def _send(self, status: int, payload: dict) -> None:
                data = json.dumps(payload).encode()
                self.send_response(status)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(data)))
                self.end_headers()
                self.wfile.write(data)

        self._httpd = ThreadingHTTPServer((host, port), Handler)
        self._httpd.daemon_threads = True
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, kwargs={"poll_interval": 0.02}, daemon=True
        )

    @property
    def base_url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}/v1"

    @property
    def request_count(self) -> int:
        with self._lock:
            return len(self.requests)

    def start(self) -> "MockChatServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self) -> "MockChatServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
