"""Agent roles, per-role views and the turn protocol.

A turn solicits one clue and then guesses, each slot allowing up to
``MAX_ATTEMPTS`` consecutive invalid responses. When the clue slot is
exhausted the empty fallback clue ``("", 1)`` is played; when a guess slot is
exhausted a uniformly random unrevealed word is drawn from the match rng.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

from . import game
from .game import (
    Clue,
    ClueEvent,
    ContinueDecision,
    GameState,
    GuessEvent,
    Identity,
    InvalidAttempt,
    Mode,
    Phase,
    StopEvent,
    Team,
    WordCard,
)
from .rng import SplitMix64

log = logging.getLogger(__name__)

MAX_ATTEMPTS = 10
FALLBACK_CLUE = Clue("", 1)
# Stream key for the fallback-guess rng of a match.
FALLBACK_STREAM = 0xFA11BAC45EED0001


class InvalidResponse(Exception):
    """A well-formed call that produced an unusable answer; triggers a retry."""

    def __init__(self, response: str, reason: str) -> None:
        super().__init__(f"{reason}: {response!r}")
        self.response = response
        self.reason = reason


class TransportFailure(Exception):
    """Infrastructure failure inside an agent (network, auth, quota)."""


class AgentTransportError(Exception):
    """A :class:`TransportFailure` annotated with where in the game it happened."""

    def __init__(self, role: str, team: Team, turn: int, cause: Exception) -> None:
        super().__init__(f"{team.value} {role} failed on turn {turn}: {cause}")
        self.role = role
        self.team = team
        self.turn = turn
        self.cause = cause


class ViewUnavailable(game.CodenamesError):
    pass


# --- views ------------------------------------------------------------------


def _public_history(history: Sequence[game.Event]) -> tuple[game.Event, ...]:
    return tuple(e for e in history if isinstance(e, (ClueEvent, GuessEvent, StopEvent)))


@dataclass(frozen=True)
class CodemasterView:
    team: Team
    mode: Mode
    turn_index: int
    cards: tuple[WordCard, ...]
    history: tuple[game.Event, ...]

    def words(self, identity: Identity) -> list[str]:
        return [c.word for c in self.cards if c.identity is identity and not c.revealed]

    @property
    def own_words(self) -> list[str]:
        return self.words(self.team.identity)

    @property
    def unrevealed(self) -> list[str]:
        return [c.word for c in self.cards if not c.revealed]

    @property
    def non_team_words(self) -> list[str]:
        own = self.team.identity
        return [c.word for c in self.cards if not c.revealed and c.identity is not own]

    def to_dict(self) -> dict[str, Any]:
        return {
            "team": self.team.value,
            "mode": self.mode.value,
            "turn_index": self.turn_index,
            "cards": [
                {"word": c.word, "identity": c.identity.value, "revealed": c.revealed}
                for c in self.cards
            ],
            "history": [game.event_to_dict(e) for e in self.history],
        }


@dataclass(frozen=True)
class GuesserView:
    team: Team
    mode: Mode
    turn_index: int
    unrevealed: tuple[str, ...]
    revealed: tuple[tuple[str, Identity], ...]
    clue: Clue | None
    guesses_this_turn: int
    remaining_guesses: int | None
    history: tuple[game.Event, ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "team": self.team.value,
            "mode": self.mode.value,
            "turn_index": self.turn_index,
            "unrevealed": list(self.unrevealed),
            "revealed": [[w, i.value] for w, i in self.revealed],
            "clue": None if self.clue is None else [self.clue.word, self.clue.count],
            "guesses_this_turn": self.guesses_this_turn,
            "remaining_guesses": self.remaining_guesses,
            "history": [game.event_to_dict(e) for e in self.history],
        }


def build_codemaster_view(state: GameState, team: Team) -> CodemasterView:
    if state.finished:
        raise ViewUnavailable("game is finished")
    return CodemasterView(
        team=team,
        mode=state.mode,
        turn_index=state.turn_index,
        cards=state.board.cards,
        history=_public_history(state.history),
    )


def build_guesser_view(state: GameState, team: Team) -> GuesserView:
    if state.finished:
        raise ViewUnavailable("game is finished")
    own_turn = state.active_team is team and state.phase is Phase.AWAITING_GUESS
    return GuesserView(
        team=team,
        mode=state.mode,
        turn_index=state.turn_index,
        unrevealed=tuple(c.word for c in state.board.cards if not c.revealed),
        revealed=tuple((c.word, c.identity) for c in state.board.cards if c.revealed),
        clue=state.current_clue if own_turn else None,
        guesses_this_turn=state.guesses_this_turn if own_turn else 0,
        remaining_guesses=state.remaining_guesses if own_turn else 0,
        history=_public_history(state.history),
    )


# --- roles ------------------------------------------------------------------


class Codemaster:
    name = "codemaster"

    def give_clue(self, view: CodemasterView, feedback: str | None = None) -> Clue:
        raise NotImplementedError


class Guesser:
    name = "guesser"

    def guess(self, view: GuesserView, feedback: str | None = None) -> str:
        raise NotImplementedError

    def keep_guessing(self, view: GuesserView, feedback: str | None = None) -> bool:
        raise NotImplementedError


# --- turn protocol ----------------------------------------------------------


def _call(role: str, state: GameState, fn, *args):
    try:
        return fn(*args)
    except TransportFailure as exc:
        raise AgentTransportError(role, state.active_team, state.turn_index, exc) from exc


def _clue_feedback(clue: Clue, check: game.ClueCheck) -> str:
    if check.reason is game.InvalidReason.SUBSTRING:
        return f"The clue '{clue.word}' is invalid because it shares letters with the board word '{check.conflict}' (no substrings allowed)."
    if check.reason is game.InvalidReason.NEGATIVE_COUNT:
        return "The clue number must be greater than or equal to zero."
    return "The clue must be a single English word."


def _solicit_clue(state: GameState, codemaster: Codemaster, max_attempts: int) -> GameState:
    team = state.active_team
    feedback = None
    for attempt in range(1, max_attempts + 1):
        view = build_codemaster_view(state, team)
        try:
            clue = _call("codemaster", state, codemaster.give_clue, view, feedback)
        except InvalidResponse as exc:
            state = game.annotate(
                state, InvalidAttempt(state.turn_index, team, "clue", exc.response, exc.reason)
            )
            feedback = f"Your response could not be read as a clue ({exc.reason})."
            continue
        check = game.validate_clue(state, clue)
        if check.ok:
            return game.apply_clue(state, clue, attempts=attempt)
        state = game.annotate(
            state,
            InvalidAttempt(
                state.turn_index, team, "clue", f"{clue.word}, {clue.count}", check.reason.value
            ),
        )
        feedback = _clue_feedback(clue, check)
    log.info("%s codemaster gave %d invalid clues; using fallback", team.value, max_attempts)
    return game.apply_clue(state, FALLBACK_CLUE, fallback=True, attempts=max_attempts)


def _solicit_guess(
    state: GameState, guesser: Guesser, rng: SplitMix64, max_attempts: int
) -> GameState:
    team = state.active_team
    feedback = None
    for attempt in range(1, max_attempts + 1):
        view = build_guesser_view(state, team)
        try:
            word = _call("guesser", state, guesser.guess, view, feedback)
        except InvalidResponse as exc:
            reason, response = exc.reason, exc.response
        else:
            word = word.strip().lower()
            if word in view.unrevealed:
                state, _ = game.apply_guess(state, word, attempts=attempt)
                return state
            revealed = {w for w, _ in view.revealed}
            reason = "already_revealed" if word in revealed else "not_on_board"
            response = word
        state = game.annotate(
            state, InvalidAttempt(state.turn_index, team, "guess", response, reason)
        )
        feedback = f"'{response}' is not one of the remaining words on the board ({reason})."
    word = rng.choice(state.board.unrevealed())
    log.info("%s guesser gave %d invalid guesses; picked %r at random", team.value, max_attempts, word)
    state, _ = game.apply_guess(state, word, fallback=True, attempts=max_attempts)
    return state


def _solicit_continue(
    state: GameState, guesser: Guesser, max_attempts: int
) -> tuple[GameState, bool, int | None]:
    team = state.active_team
    feedback = None
    for attempt in range(1, max_attempts + 1):
        view = build_guesser_view(state, team)
        try:
            keep = _call("guesser", state, guesser.keep_guessing, view, feedback)
        except InvalidResponse as exc:
            state = game.annotate(
                state, InvalidAttempt(state.turn_index, team, "continue", exc.response, exc.reason)
            )
            feedback = "Please answer with just yes or no."
            continue
        return state, bool(keep), attempt
    return state, False, None


def run_turn(
    state: GameState,
    codemaster: Codemaster,
    guesser: Guesser,
    rng: SplitMix64,
    *,
    max_attempts: int = MAX_ATTEMPTS,
) -> GameState:
    """Play one full turn for the active team and return the resulting state."""
    if state.finished:
        raise game.GameFinished("the game is already finished")
    if state.phase is not Phase.AWAITING_CLUE:
        raise game.InvalidPhase("a turn starts with a clue")
    team, turn = state.active_team, state.turn_index
    try:
        state = _solicit_clue(state, codemaster, max_attempts)
        while True:
            state = _solicit_guess(state, guesser, rng, max_attempts)
            if state.finished or state.turn_index != turn:
                return state
            state, keep, attempts = _solicit_continue(state, guesser, max_attempts)
            state = game.annotate(
                state,
                ContinueDecision(turn, team, keep, fallback=attempts is None,
                                 attempts=attempts or max_attempts),
            )
            if not keep:
                return game.apply_stop(state)
    except Exception as exc:
        # lets callers persist the partial log of a failed game
        exc.partial_state = state
        raise


def play_game(
    state: GameState,
    teams: Mapping[Team, tuple[Codemaster, Guesser]],
    rng: SplitMix64,
    *,
    max_attempts: int = MAX_ATTEMPTS,
) -> GameState:
    while not state.finished:
        codemaster, guesser = teams[state.active_team]
        state = run_turn(state, codemaster, guesser, rng, max_attempts=max_attempts)
    return state


# --- simple agents ----------------------------------------------------------


class RandomCodemaster(Codemaster):
    """Gives a nonsense clue with a random count; a baseline and test driver."""

    def __init__(self, seed: int, max_count: int = 3, name: str = "random") -> None:
        self.rng = SplitMix64(seed)
        self.max_count = max_count
        self.name = name

    def give_clue(self, view: CodemasterView, feedback: str | None = None) -> Clue:
        letters = "".join(chr(ord("a") + self.rng.below(26)) for _ in range(12))
        return Clue("q" + letters, self.rng.below(self.max_count + 1))


class RandomGuesser(Guesser):
    """Picks uniformly among legal moves."""

    def __init__(self, seed: int, stop_probability: float = 0.3, name: str = "random") -> None:
        self.rng = SplitMix64(seed)
        self.stop_probability = stop_probability
        self.name = name

    def guess(self, view: GuesserView, feedback: str | None = None) -> str:
        return self.rng.choice(list(view.unrevealed))

    def keep_guessing(self, view: GuesserView, feedback: str | None = None) -> bool:
        return self.rng.below(1000) >= int(self.stop_probability * 1000)


class ScriptExhausted(InvalidResponse):
    def __init__(self) -> None:
        super().__init__("", "script_exhausted")


@dataclass
class Script:
    """Raw text responses replayed in order, like a recorded model.

    File format (JSON)::

        {"clues": ["water, 2", ...], "guesses": ["snow", ...],
         "continues": ["yes", ...], "seeds": {"3": {"clues": [...]}}}

    Entries under ``seeds`` replace the top-level lists for that seed.
    """

    clues: list[str]
    guesses: list[str]
    continues: list[str]

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], seed: int | None = None) -> "Script":
        unknown = set(data) - {"clues", "guesses", "continues", "seeds"}
        if unknown:
            raise ValueError(f"unknown script keys: {sorted(unknown)}")
        merged = dict(data)
        if seed is not None:
            merged.update(data.get("seeds", {}).get(str(seed), {}))
        return cls(
            list(merged.get("clues", [])),
            list(merged.get("guesses", [])),
            list(merged.get("continues", [])),
        )

    @classmethod
    def load(cls, path: str | Path, seed: int | None = None) -> "Script":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")), seed)


class ScriptedCodemaster(Codemaster):
    def __init__(self, responses: Sequence[str], name: str = "scripted") -> None:
        self.responses = list(responses)
        self.calls = 0
        self.name = name

    def give_clue(self, view: CodemasterView, feedback: str | None = None) -> Clue:
        from .llm import Unparseable, parse_clue

        self.calls += 1
        if not self.responses:
            raise ScriptExhausted()
        text = self.responses.pop(0)
        parsed = parse_clue(text)
        if isinstance(parsed, Unparseable):
            raise InvalidResponse(text, parsed.reason)
        return parsed


class ScriptedGuesser(Guesser):
    def __init__(
        self, guesses: Sequence[str], continues: Sequence[str] = (), name: str = "scripted"
    ) -> None:
        self.guesses = list(guesses)
        self.continues = list(continues)
        self.calls = 0
        self.name = name

    def guess(self, view: GuesserView, feedback: str | None = None) -> str:
        from .llm import Unparseable, parse_guess

        self.calls += 1
        if not self.guesses:
            raise ScriptExhausted()
        text = self.guesses.pop(0)
        parsed = parse_guess(text, view.unrevealed)
        if isinstance(parsed, Unparseable):
            raise InvalidResponse(text, parsed.reason)
        return parsed.word

    def keep_guessing(self, view: GuesserView, feedback: str | None = None) -> bool:
        from .llm import Unparseable, parse_continue

        self.calls += 1
        if not self.continues:
            raise ScriptExhausted()
        text = self.continues.pop(0)
        parsed = parse_continue(text)
        if isinstance(parsed, Unparseable):
            raise InvalidResponse(text, parsed.reason)
        return parsed.keep_going
