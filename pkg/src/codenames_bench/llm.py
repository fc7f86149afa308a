"""LLM-backed agents talking to any OpenAI-compatible chat-completion endpoint."""

from __future__ import annotations

import logging
import os
import re
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from string import Template
from typing import Any, Callable, Sequence

import httpx
from pydantic import BaseModel, ConfigDict, Field

from .agents import (
    Codemaster,
    CodemasterView,
    Guesser,
    GuesserView,
    InvalidResponse,
    TransportFailure,
)
from .game import Clue, ClueEvent, GuessEvent, Mode, StopEvent

log = logging.getLogger(__name__)

PROMPT_VERSION = "v1"


class TransportError(TransportFailure):
    pass


class AuthError(TransportFailure):
    pass


class RateLimited(TransportFailure):
    pass


# --- prompts ----------------------------------------------------------------


def _template(name: str, version: str) -> Template:
    path = resources.files("codenames_bench").joinpath(f"prompts/{version}/{name}.txt")
    return Template(path.read_text(encoding="utf-8"))


def build_rules_prompt(mode: Mode | str, role: str | None = None, team: str = "red",
                       version: str = PROMPT_VERSION) -> str:
    """System prompt: game rules, scoring for the single-team game, then the role task."""
    mode = Mode(mode)
    parts = [_template("rules", version).template]
    if mode is Mode.SINGLE:
        parts.append(_template("single_team", version).template)
    if role is not None:
        parts.append(_template(f"{role}_task", version).substitute(team=team))
    return "".join(parts)


def _history_lines(history: Sequence[Any]) -> str:
    lines = []
    for e in history:
        if isinstance(e, ClueEvent):
            lines.append(f"turn {e.turn}: {e.team.value} clue ({e.word or '<none>'}, {e.count})")
        elif isinstance(e, GuessEvent):
            lines.append(f"  {e.team.value} guessed {e.word.upper()} -> {e.identity.value}")
        elif isinstance(e, StopEvent):
            lines.append(f"  {e.team.value} stopped guessing")
    return "\n".join(lines) or "(none)"


def _revealed(cards) -> str:
    out = [f"{c.word.upper()} ({c.identity.value})" for c in cards if c.revealed]
    return ", ".join(out) or "none"


def format_codemaster_turn(view: CodemasterView, version: str = PROMPT_VERSION) -> str:
    board = "\n".join(
        f"{c.word.upper()} - {c.identity.value}" for c in view.cards if not c.revealed
    )
    text = _template("codemaster_turn", version).substitute(
        turn=view.turn_index,
        board=board,
        revealed=_revealed(view.cards),
        own=", ".join(w.upper() for w in view.own_words),
    )
    return f"Game so far:\n{_history_lines(view.history)}\n\n{text}"


def format_guesser_turn(view: GuesserView, version: str = PROMPT_VERSION) -> str:
    assert view.clue is not None
    remaining = "any number" if view.remaining_guesses is None else view.remaining_guesses
    revealed = ", ".join(f"{w.upper()} ({i.value})" for w, i in view.revealed) or "none"
    text = _template("guesser_turn", version).substitute(
        turn=view.turn_index,
        clue=view.clue.word or "<no clue>",
        count=view.clue.count,
        made=view.guesses_this_turn,
        remaining=remaining,
        revealed=revealed,
        words=", ".join(w.upper() for w in view.unrevealed),
    )
    return f"Game so far:\n{_history_lines(view.history)}\n\n{text}"


def format_continue(view: GuesserView, last_word: str, version: str = PROMPT_VERSION) -> str:
    remaining = "any number" if view.remaining_guesses is None else view.remaining_guesses
    return _template("continue", version).substitute(
        word=last_word.upper(), made=view.guesses_this_turn, remaining=remaining
    )


def format_clue(clue: Clue) -> str:
    return f"CLUE: {clue.word}, {clue.count}"


# --- parsing ----------------------------------------------------------------


@dataclass(frozen=True)
class Guess:
    word: str


@dataclass(frozen=True)
class Continue:
    keep_going: bool


@dataclass(frozen=True)
class Unparseable:
    raw: str
    reason: str = "unparseable"


ParsedResponse = Clue | Guess | Continue | Unparseable

_CLUE_PAIR = re.compile(r"([A-Za-z][A-Za-z'\-]*)\s*[,:]?\s*\(?\s*(-?\d+)\b")
_LABEL = re.compile(r"^\s*(clue|guess)\s*:\s*", re.IGNORECASE)
_STRIP = " \t\r\n\"'`.,;:!?()[]{}*"


def parse_clue(text: str) -> ParsedResponse:
    """Read ``word, N`` / ``(word, N)`` / ``word N``, optionally labelled ``CLUE:``.

    Surrounding prose is tolerated only when exactly one word-number pair occurs.
    """
    body = _LABEL.sub("", text or "")
    pairs = _CLUE_PAIR.findall(body)
    if len(pairs) != 1:
        return Unparseable(text, "unparseable" if not pairs else "ambiguous")
    word, count = pairs[0]
    if word.lower() in {"clue", "number"}:
        return Unparseable(text)
    return Clue(word.lower(), int(count))


def parse_guess(text: str, unrevealed: Sequence[str]) -> ParsedResponse:
    """Accept the response only if, trimmed, it is exactly one remaining board word."""
    body = _LABEL.sub("", (text or "").strip()).strip(_STRIP).lower()
    matches = [w for w in unrevealed if w.lower() == body]
    if len(matches) == 1:
        return Guess(matches[0])
    if body in {"yes", "no"}:
        return Unparseable(text, "yes_no_in_guess_slot")
    return Unparseable(text, "not_a_board_word")


_YES_NO = re.compile(r"^\W*(yes|no)\b", re.IGNORECASE)


def parse_continue(text: str) -> ParsedResponse:
    m = _YES_NO.match(text or "")
    if not m:
        return Unparseable(text)
    return Continue(m.group(1).lower() == "yes")


# --- transport --------------------------------------------------------------


class LlmEndpointConfig(BaseModel):
    """Where and how to reach a chat-completion endpoint. Holds no secrets."""

    model_config = ConfigDict(extra="forbid")

    base_url: str
    model: str
    sampling: dict[str, Any] = Field(default_factory=dict)
    api_key_env: str | None = None
    timeout_s: float = 60.0
    max_retries: int = 3
    backoff_s: float = 1.0
    requests_per_minute: float | None = None

    def api_key(self) -> str | None:
        if self.api_key_env is None:
            return None
        key = os.environ.get(self.api_key_env)
        if not key:
            raise AuthError(f"environment variable {self.api_key_env} is not set")
        return key


class RateLimiter:
    """Spaces requests evenly to stay under ``per_minute``."""

    def __init__(self, per_minute: float) -> None:
        self.interval = 60.0 / per_minute
        self._next = 0.0
        self._lock = threading.Lock()

    def acquire(self) -> None:
        with self._lock:
            now = time.monotonic()
            wait = self._next - now
            self._next = max(now, self._next) + self.interval
        if wait > 0:
            time.sleep(wait)


_limiters: dict[str, RateLimiter] = {}
_limiters_lock = threading.Lock()


def _limiter_for(config: LlmEndpointConfig) -> RateLimiter | None:
    if not config.requests_per_minute:
        return None
    with _limiters_lock:
        key = config.base_url
        if key not in _limiters:
            _limiters[key] = RateLimiter(config.requests_per_minute)
        return _limiters[key]


class ChatClient:
    """Blocking chat-completion client with retry and exponential backoff."""

    def __init__(
        self,
        config: LlmEndpointConfig,
        http: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.config = config
        config.api_key()  # fail before any game starts
        self.http = http or httpx.Client(timeout=config.timeout_s)
        self.sleep = sleep
        self.retries = 0

    def complete(self, messages: Sequence[dict[str, str]]) -> str:
        cfg = self.config
        url = cfg.base_url.rstrip("/") + "/chat/completions"
        body = {"model": cfg.model, "messages": list(messages), **cfg.sampling}
        headers = {}
        key = cfg.api_key()
        if key:
            headers["Authorization"] = f"Bearer {key}"
        limiter = _limiter_for(cfg)

        last: Exception | None = None
        for attempt in range(cfg.max_retries + 1):
            if attempt:
                self.retries += 1
                delay = cfg.backoff_s * 2 ** (attempt - 1)
                log.warning("retrying %s (%d/%d) in %.2fs after: %s",
                            cfg.model, attempt, cfg.max_retries, delay, last)
                self.sleep(delay)
            if limiter:
                limiter.acquire()
            try:
                resp = self.http.post(url, json=body, headers=headers, timeout=cfg.timeout_s)
            except httpx.TimeoutException:
                last = TransportError(f"timeout after {cfg.timeout_s}s")
                continue
            except httpx.HTTPError as exc:
                last = TransportError(f"{type(exc).__name__}: {exc}")
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"{resp.status_code} from {cfg.base_url}")
            if resp.status_code == 429:
                last = RateLimited(f"429 from {cfg.base_url}")
                continue
            if resp.status_code >= 500:
                last = TransportError(f"{resp.status_code} from {cfg.base_url}")
                continue
            if resp.status_code >= 400:
                raise TransportError(f"{resp.status_code} from {cfg.base_url}: {resp.text[:200]}")
            try:
                return resp.json()["choices"][0]["message"]["content"] or ""
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise TransportError(f"malformed completion response: {exc}") from exc
        assert last is not None
        raise last


def request_completion(config: LlmEndpointConfig, transcript: "ChatTranscript") -> str:
    return ChatClient(config).complete(transcript.messages)


# --- agents -----------------------------------------------------------------


@dataclass
class ChatTranscript:
    messages: list[dict[str, str]] = field(default_factory=list)

    def add(self, role: str, content: str) -> None:
        self.messages.append({"role": role, "content": content})

    def __len__(self) -> int:
        return len(self.messages)


class _LlmAgent:
    role = ""

    def __init__(self, client: ChatClient, mode: Mode | str, team: str = "red", *,
                 version: str = PROMPT_VERSION, prune_invalid: bool = False,
                 name: str | None = None) -> None:
        self.client = client
        self.version = version
        self.prune_invalid = prune_invalid
        self.name = name or client.config.model
        self.transcript = ChatTranscript()
        self.transcript.add("system", build_rules_prompt(mode, self.role, team, version))
        self._slot_start: int | None = None
        self._slot_retried = False

    def _ask(self, prompt: str, feedback: str | None) -> str:
        if feedback is None:
            self._close_slot()
            self._slot_start = len(self.transcript)
            self.transcript.add("user", prompt)
        else:
            self._slot_retried = True
            self.transcript.add(
                "user", _template("reprompt", self.version).substitute(feedback=feedback)
            )
        reply = self.client.complete(self.transcript.messages)
        self.transcript.add("assistant", reply)
        return reply

    def _close_slot(self) -> None:
        # Drop resolved invalid exchanges, keeping the original question and final answer.
        if self.prune_invalid and self._slot_retried and self._slot_start is not None:
            start = self._slot_start
            msgs = self.transcript.messages
            self.transcript.messages = msgs[: start + 1] + msgs[-1:]
        self._slot_retried = False


class LlmCodemaster(_LlmAgent, Codemaster):
    role = "codemaster"

    def give_clue(self, view: CodemasterView, feedback: str | None = None) -> Clue:
        reply = self._ask(format_codemaster_turn(view, self.version), feedback)
        parsed = parse_clue(reply)
        if isinstance(parsed, Unparseable):
            raise InvalidResponse(reply, parsed.reason)
        return parsed


class LlmGuesser(_LlmAgent, Guesser):
    role = "guesser"

    def guess(self, view: GuesserView, feedback: str | None = None) -> str:
        reply = self._ask(format_guesser_turn(view, self.version), feedback)
        parsed = parse_guess(reply, view.unrevealed)
        if isinstance(parsed, Unparseable):
            raise InvalidResponse(reply, parsed.reason)
        return parsed.word

    def keep_guessing(self, view: GuesserView, feedback: str | None = None) -> bool:
        last = next(
            (e.word for e in reversed(view.history) if isinstance(e, GuessEvent)), ""
        )
        reply = self._ask(format_continue(view, last, self.version), feedback)
        parsed = parse_continue(reply)
        if isinstance(parsed, Unparseable):
            raise InvalidResponse(reply, parsed.reason)
        return parsed.keep_going
