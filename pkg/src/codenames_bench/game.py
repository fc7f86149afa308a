"""Codenames rules engine.

The engine is event-sourced: every transition returns a new immutable
:class:`GameState` whose ``history`` is enough to rebuild it with
:func:`replay`. Both the single-team (cooperative, scored) and the two-team
(competitive) variants are supported.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Sequence

from .rng import SplitMix64

BOARD_SIZE = 25
IDENTITY_COUNTS = (("red", 9), ("blue", 8), ("civilian", 7), ("assassin", 1))
LOSS_SCORE = 25

# Stream key for board generation. Chosen once by scanning keys so that seed 0
# over the bundled pool yields the published seed-0 example words
# (school, spell, lion, fire) without "war", which would block "hogwarts".
BOARD_STREAM = 0xC0DE000000045F5E


class CodenamesError(Exception):
    """Base class for rule violations raised by the engine."""


class WordlistTooSmall(CodenamesError, ValueError):
    pass


class InvalidPhase(CodenamesError):
    pass


class InvalidClue(CodenamesError):
    def __init__(self, reason: "InvalidReason", clue: "Clue") -> None:
        super().__init__(f"invalid clue {clue.word!r} ({clue.count}): {reason.value}")
        self.reason = reason
        self.clue = clue


class WordNotOnBoard(CodenamesError):
    pass


class AlreadyRevealed(CodenamesError):
    pass


class StopBeforeFirstGuess(CodenamesError):
    pass


class GameStillOngoing(CodenamesError):
    pass


class GameFinished(CodenamesError):
    pass


class Identity(str, Enum):
    RED = "red"
    BLUE = "blue"
    CIVILIAN = "civilian"
    ASSASSIN = "assassin"


class Team(str, Enum):
    RED = "red"
    BLUE = "blue"

    @property
    def other(self) -> "Team":
        return Team.BLUE if self is Team.RED else Team.RED

    @property
    def identity(self) -> Identity:
        return Identity(self.value)


class Mode(str, Enum):
    SINGLE = "single"
    TWO = "two"


class Phase(str, Enum):
    AWAITING_CLUE = "awaiting_clue"
    AWAITING_GUESS = "awaiting_guess"


class GuessOutcome(str, Enum):
    OWN_TEAM_WORD = "own_team_word"
    OPPONENT_WORD = "opponent_word"
    CIVILIAN_WORD = "civilian_word"
    ASSASSIN_WORD = "assassin_word"
    VOLUNTARY_STOP = "voluntary_stop"


class EndReason(str, Enum):
    ALL_OWN_WORDS_FOUND = "all_own_words_found"
    ALL_OPPONENT_WORDS_FOUND = "all_opponent_words_found"
    ASSASSIN_SELECTED = "assassin_selected"


class InvalidReason(str, Enum):
    SUBSTRING = "substring"
    WHITESPACE = "whitespace"
    NEGATIVE_COUNT = "negative_count"
    EMPTY = "empty"


@dataclass(frozen=True)
class WordCard:
    word: str
    identity: Identity
    revealed: bool = False


@dataclass(frozen=True)
class Board:
    cards: tuple[WordCard, ...]

    def __post_init__(self) -> None:
        words = [c.word for c in self.cards]
        if any(not w or w != w.lower() or _has_space(w) for w in words):
            raise ValueError("board words must be non-empty lowercase tokens")
        if len(set(words)) != len(words):
            raise ValueError("board words must be unique")
        if sum(c.identity is Identity.ASSASSIN for c in self.cards) != 1:
            raise ValueError("a board has exactly one assassin")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, Identity | str]]) -> "Board":
        return cls(tuple(WordCard(w.lower(), Identity(i)) for w, i in pairs))

    @property
    def words(self) -> list[str]:
        return [c.word for c in self.cards]

    def index(self, word: str) -> int:
        word = word.strip().lower()
        for i, card in enumerate(self.cards):
            if card.word == word:
                return i
        raise WordNotOnBoard(word)

    def unrevealed(self) -> list[str]:
        return [c.word for c in self.cards if not c.revealed]

    def remaining(self, identity: Identity) -> int:
        return sum(1 for c in self.cards if c.identity is identity and not c.revealed)

    def reveal(self, i: int) -> "Board":
        cards = list(self.cards)
        cards[i] = dataclasses.replace(cards[i], revealed=True)
        return Board(tuple(cards))

    def to_dict(self) -> dict[str, list[str]]:
        return {
            "words": self.words,
            "identities": [c.identity.value for c in self.cards],
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Board":
        return cls.from_pairs(zip(data["words"], data["identities"]))


@dataclass(frozen=True)
class Clue:
    word: str
    count: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "word", self.word.strip().lower())


# --- events -----------------------------------------------------------------


@dataclass(frozen=True)
class ClueEvent:
    turn: int
    team: Team
    word: str
    count: int
    fallback: bool = False
    attempts: int = 1
    kind: str = field(default="clue", init=False)


@dataclass(frozen=True)
class GuessEvent:
    turn: int
    team: Team
    word: str
    identity: Identity
    outcome: GuessOutcome
    fallback: bool = False
    attempts: int = 1
    kind: str = field(default="guess", init=False)


@dataclass(frozen=True)
class StopEvent:
    turn: int
    team: Team
    guesses: int
    kind: str = field(default="stop", init=False)


@dataclass(frozen=True)
class InvalidAttempt:
    """A rejected agent response; annotation only, ignored by replay."""

    turn: int
    team: Team
    slot: str
    response: str
    reason: str
    kind: str = field(default="invalid", init=False)


@dataclass(frozen=True)
class ContinueDecision:
    """The guesser's answer when asked whether to keep guessing."""

    turn: int
    team: Team
    keep_going: bool
    fallback: bool = False
    attempts: int = 1
    kind: str = field(default="continue", init=False)


Event = ClueEvent | GuessEvent | StopEvent | InvalidAttempt | ContinueDecision

_EVENT_TYPES = {
    "clue": ClueEvent,
    "guess": GuessEvent,
    "stop": StopEvent,
    "invalid": InvalidAttempt,
    "continue": ContinueDecision,
}
_ENUM_FIELDS = {"team": Team, "identity": Identity, "outcome": GuessOutcome}


def event_to_dict(event: Event) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for f in dataclasses.fields(event):
        value = getattr(event, f.name)
        out[f.name] = value.value if isinstance(value, Enum) else value
    return out


def event_from_dict(data: dict[str, Any]) -> Event:
    data = dict(data)
    cls = _EVENT_TYPES[data.pop("kind")]
    for name, enum in _ENUM_FIELDS.items():
        if name in data:
            data[name] = enum(data[name])
    return cls(**data)


# --- state ------------------------------------------------------------------


@dataclass(frozen=True)
class GameState:
    board: Board
    mode: Mode = Mode.TWO
    active_team: Team = Team.RED
    turn_index: int = 1
    phase: Phase = Phase.AWAITING_CLUE
    current_clue: Clue | None = None
    guesses_this_turn: int = 0
    unlimited_guesses: bool = False
    history: tuple[Event, ...] = ()
    finished: bool = False
    winner: Team | None = None
    end_reason: EndReason | None = None
    ended_by: Team | None = None

    @property
    def status(self) -> str:
        return "finished" if self.finished else "ongoing"

    @property
    def remaining_guesses(self) -> int | None:
        """Guesses left this turn; ``None`` means unlimited."""
        if self.current_clue is None:
            return 0
        if self.unlimited_guesses:
            return None
        return self.current_clue.count + 1 - self.guesses_this_turn


@dataclass(frozen=True)
class GameResult:
    mode: Mode
    winner: Team | None
    reason: EndReason
    ended_by: Team
    turns_taken: int
    single_team_score: int | None = None

    @property
    def assassin_team(self) -> Team | None:
        return self.ended_by if self.reason is EndReason.ASSASSIN_SELECTED else None

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode.value,
            "winner": self.winner.value if self.winner else None,
            "reason": self.reason.value,
            "ended_by": self.ended_by.value,
            "turns_taken": self.turns_taken,
            "single_team_score": self.single_team_score,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GameResult":
        return cls(
            mode=Mode(data["mode"]),
            winner=Team(data["winner"]) if data["winner"] else None,
            reason=EndReason(data["reason"]),
            ended_by=Team(data["ended_by"]),
            turns_taken=data["turns_taken"],
            single_team_score=data["single_team_score"],
        )


# --- wordlists and boards ---------------------------------------------------


def _has_space(word: str) -> bool:
    return any(ch.isspace() for ch in word)


def parse_wordlist(text: str) -> list[str]:
    """Parse one-word-per-line text; ``#`` starts a comment line."""
    words = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if _has_space(line):
            raise ValueError(f"wordlist entry {line!r} is not a single token")
        words.append(line.lower())
    return words


def load_wordlist(path: str | Path | None = None) -> list[str]:
    """Load a wordlist file, or the bundled 400-word pool when ``path`` is None."""
    if path is None:
        text = resources.files("codenames_bench").joinpath("data/wordpool.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_wordlist(text)


def generate_board(wordlist: Sequence[str], seed: int) -> Board:
    """Deterministically derive a standard 25-card board from ``seed``.

    The sorted, lowercased, de-duplicated wordlist is Fisher-Yates shuffled
    with a SplitMix64 stream and its first 25 words are kept; the 9/8/7/1
    identity list is then shuffled with the same stream.
    """
    pool = sorted({w.strip().lower() for w in wordlist if w.strip()})
    if len(pool) < BOARD_SIZE:
        raise WordlistTooSmall(f"need {BOARD_SIZE} unique words, got {len(pool)}")
    rng = SplitMix64.for_stream(seed, BOARD_STREAM)
    rng.shuffle(pool, prefix=BOARD_SIZE)
    identities = [Identity(name) for name, n in IDENTITY_COUNTS for _ in range(n)]
    rng.shuffle(identities)
    return Board(tuple(WordCard(w, i) for w, i in zip(pool[:BOARD_SIZE], identities)))


def new_game(board: Board, mode: Mode = Mode.TWO) -> GameState:
    return GameState(board=board, mode=Mode(mode))


# --- transitions ------------------------------------------------------------


def substring_conflict(word: str, board_words: Iterable[str]) -> str | None:
    """Return the first board word that contains or is contained in ``word``."""
    word = word.lower()
    for other in board_words:
        if word in other or other in word:
            return other
    return None


@dataclass(frozen=True)
class ClueCheck:
    reason: InvalidReason | None = None
    conflict: str | None = None

    @property
    def ok(self) -> bool:
        return self.reason is None


def validate_clue(state: GameState, clue: Clue, *, fallback: bool = False) -> ClueCheck:
    """Check a clue against the rules; revealed words impose no constraint."""
    if clue.count < 0:
        return ClueCheck(InvalidReason.NEGATIVE_COUNT)
    if _has_space(clue.word):
        return ClueCheck(InvalidReason.WHITESPACE)
    if not clue.word:
        return ClueCheck() if fallback else ClueCheck(InvalidReason.EMPTY)
    conflict = substring_conflict(clue.word, state.board.unrevealed())
    if conflict is not None:
        return ClueCheck(InvalidReason.SUBSTRING, conflict)
    return ClueCheck()


def _require_ongoing(state: GameState) -> None:
    if state.finished:
        raise GameFinished("the game is already finished")


def apply_clue(
    state: GameState, clue: Clue, *, fallback: bool = False, attempts: int = 1
) -> GameState:
    _require_ongoing(state)
    if state.phase is not Phase.AWAITING_CLUE:
        raise InvalidPhase(f"cannot give a clue while {state.phase.value}")
    check = validate_clue(state, clue, fallback=fallback)
    if not check.ok:
        raise InvalidClue(check.reason, clue)
    event = ClueEvent(state.turn_index, state.active_team, clue.word, clue.count, fallback, attempts)
    return dataclasses.replace(
        state,
        phase=Phase.AWAITING_GUESS,
        current_clue=clue,
        guesses_this_turn=0,
        unlimited_guesses=clue.count == 0,
        history=state.history + (event,),
    )


def _pass_turn(state: GameState) -> GameState:
    team = state.active_team if state.mode is Mode.SINGLE else state.active_team.other
    return dataclasses.replace(
        state,
        active_team=team,
        turn_index=state.turn_index + 1,
        phase=Phase.AWAITING_CLUE,
        current_clue=None,
        guesses_this_turn=0,
        unlimited_guesses=False,
    )


def _outcome(identity: Identity, team: Team) -> GuessOutcome:
    if identity is Identity.ASSASSIN:
        return GuessOutcome.ASSASSIN_WORD
    if identity is Identity.CIVILIAN:
        return GuessOutcome.CIVILIAN_WORD
    if identity is team.identity:
        return GuessOutcome.OWN_TEAM_WORD
    return GuessOutcome.OPPONENT_WORD


def apply_guess(
    state: GameState, word: str, *, fallback: bool = False, attempts: int = 1
) -> tuple[GameState, GuessOutcome]:
    _require_ongoing(state)
    if state.phase is not Phase.AWAITING_GUESS:
        raise InvalidPhase(f"cannot guess while {state.phase.value}")
    i = state.board.index(word)
    card = state.board.cards[i]
    if card.revealed:
        raise AlreadyRevealed(card.word)
    team = state.active_team
    outcome = _outcome(card.identity, team)
    event = GuessEvent(
        state.turn_index, team, card.word, card.identity, outcome, fallback, attempts
    )
    board = state.board.reveal(i)
    state = dataclasses.replace(
        state,
        board=board,
        guesses_this_turn=state.guesses_this_turn + 1,
        history=state.history + (event,),
    )

    # In the single-team game only red scores, so a loss has no winner.
    opponent = None if state.mode is Mode.SINGLE else team.other
    if outcome is GuessOutcome.ASSASSIN_WORD:
        return _finish(state, opponent, EndReason.ASSASSIN_SELECTED), outcome
    if board.remaining(team.identity) == 0:
        return _finish(state, team, EndReason.ALL_OWN_WORDS_FOUND), outcome
    if board.remaining(team.other.identity) == 0:
        return _finish(state, opponent, EndReason.ALL_OPPONENT_WORDS_FOUND), outcome

    if outcome is not GuessOutcome.OWN_TEAM_WORD or state.remaining_guesses == 0:
        return _pass_turn(state), outcome
    return state, outcome


def _finish(state: GameState, winner: Team | None, reason: EndReason) -> GameState:
    return dataclasses.replace(
        state, finished=True, winner=winner, end_reason=reason, ended_by=state.active_team
    )


def apply_stop(state: GameState) -> GameState:
    _require_ongoing(state)
    if state.phase is not Phase.AWAITING_GUESS:
        raise InvalidPhase(f"cannot stop while {state.phase.value}")
    if state.guesses_this_turn < 1:
        raise StopBeforeFirstGuess("at least one guess is required each turn")
    event = StopEvent(state.turn_index, state.active_team, state.guesses_this_turn)
    return _pass_turn(dataclasses.replace(state, history=state.history + (event,)))


def annotate(state: GameState, event: InvalidAttempt | ContinueDecision) -> GameState:
    """Append a protocol-only event that does not change the game."""
    return dataclasses.replace(state, history=state.history + (event,))


def game_result(state: GameState) -> GameResult:
    if not state.finished:
        raise GameStillOngoing("the game has not finished")
    assert state.end_reason is not None and state.ended_by is not None
    score = None
    if state.mode is Mode.SINGLE:
        won = state.end_reason is EndReason.ALL_OWN_WORDS_FOUND
        score = min(state.turn_index, LOSS_SCORE) if won else LOSS_SCORE
    return GameResult(
        mode=state.mode,
        winner=state.winner,
        reason=state.end_reason,
        ended_by=state.ended_by,
        turns_taken=state.turn_index,
        single_team_score=score,
    )


def replay(board: Board, mode: Mode, events: Iterable[Event]) -> GameState:
    """Rebuild a game by feeding recorded events back through the engine."""
    board = Board(tuple(dataclasses.replace(c, revealed=False) for c in board.cards))
    state = new_game(board, mode)
    for event in events:
        if isinstance(event, ClueEvent):
            state = apply_clue(
                state, Clue(event.word, event.count), fallback=event.fallback, attempts=event.attempts
            )
        elif isinstance(event, GuessEvent):
            state, _ = apply_guess(
                state, event.word, fallback=event.fallback, attempts=event.attempts
            )
        elif isinstance(event, StopEvent):
            state = apply_stop(state)
        else:
            state = annotate(state, event)
    return state
