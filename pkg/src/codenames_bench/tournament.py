"""Seeded trial execution, match logs and the summary statistics."""

from __future__ import annotations

import csv
import io
import json
import logging
import statistics
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Iterable, Iterator, Sequence

from . import game
from .agents import FALLBACK_STREAM, AgentTransportError, Codemaster, Guesser, play_game
from .game import (
    Board,
    ClueEvent,
    EndReason,
    GameResult,
    GuessEvent,
    Identity,
    Mode,
    StopEvent,
    Team,
)
from .rng import SplitMix64

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


class ModeMismatch(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class SchemaVersionMismatch(ValueError):
    pass


class CorruptLine(ValueError):
    def __init__(self, path: str | Path, lineno: int, detail: str) -> None:
        super().__init__(f"{path}:{lineno}: corrupt record ({detail})")
        self.lineno = lineno


# --- records ------------------------------------------------------------------


@dataclass
class MatchRecord:
    seed: int
    mode: Mode
    agents: dict[str, str]
    board: Board
    events: list[game.Event]
    result: GameResult | None
    duration_s: float | None = None
    error: str | None = None
    error_kind: str | None = None
    transcripts: dict[str, list[dict[str, str]]] | None = None

    @property
    def pairing(self) -> str:
        red = f"{self.agents['red_codemaster']} - {self.agents['red_guesser']}"
        if self.mode is Mode.SINGLE:
            return red
        return f"{red} vs. {self.agents['blue_codemaster']} - {self.agents['blue_guesser']}"

    def to_dict(self) -> dict[str, Any]:
        out = {
            "schema_version": SCHEMA_VERSION,
            "seed": self.seed,
            "mode": self.mode.value,
            "agents": self.agents,
            "board": self.board.to_dict(),
            "events": [game.event_to_dict(e) for e in self.events],
            "result": self.result.to_dict() if self.result else None,
            "duration_s": self.duration_s,
            "error": self.error,
            "error_kind": self.error_kind,
        }
        if self.transcripts is not None:
            out["transcripts"] = self.transcripts
        return out

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MatchRecord":
        return cls(
            seed=data["seed"],
            mode=Mode(data["mode"]),
            agents=dict(data["agents"]),
            board=Board.from_dict(data["board"]),
            events=[game.event_from_dict(e) for e in data["events"]],
            result=GameResult.from_dict(data["result"]) if data["result"] else None,
            duration_s=data.get("duration_s"),
            error=data.get("error"),
            error_kind=data.get("error_kind"),
            transcripts=data.get("transcripts"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def replay_record(record: MatchRecord) -> GameResult:
    return game.game_result(game.replay(record.board, record.mode, record.events))


def persist(records: Iterable[MatchRecord], path: str | Path, *, append: bool = False) -> None:
    with open(path, "a" if append else "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")


def iter_records(path: str | Path) -> Iterator[MatchRecord]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorruptLine(path, lineno, exc.msg) from exc
            version = data.get("schema_version") if isinstance(data, dict) else None
            if version != SCHEMA_VERSION:
                raise SchemaVersionMismatch(
                    f"{path}:{lineno}: schema_version {version!r}, expected {SCHEMA_VERSION}"
                )
            try:
                yield MatchRecord.from_dict(data)
            except (KeyError, TypeError, ValueError) as exc:
                raise CorruptLine(path, lineno, str(exc)) from exc


def load(path: str | Path) -> list[MatchRecord]:
    return list(iter_records(path))


# --- running ------------------------------------------------------------------

AgentFactory = Callable[[Team, int], Any]


@dataclass
class AgentSpec:
    """A named agent kind; ``factory(team, seed)`` builds a fresh per-match instance."""

    name: str
    factory: AgentFactory


@dataclass
class TournamentSpec:
    mode: Mode
    seeds: Sequence[int]
    wordlist: Sequence[str]
    red: tuple[AgentSpec, AgentSpec]
    blue: tuple[AgentSpec, AgentSpec] | None = None
    workers: int = 1
    record_timing: bool = True
    max_attempts: int = 10

    def __post_init__(self) -> None:
        self.mode = Mode(self.mode)
        if self.mode is Mode.TWO and self.blue is None:
            raise ConfigError("the two-team game needs a blue team")
        if len(self.wordlist) < game.BOARD_SIZE:
            raise ConfigError("wordlist has fewer than 25 words")

    def agent_names(self) -> dict[str, str]:
        names = {"red_codemaster": self.red[0].name, "red_guesser": self.red[1].name}
        if self.mode is Mode.TWO:
            assert self.blue is not None
            names |= {"blue_codemaster": self.blue[0].name, "blue_guesser": self.blue[1].name}
        return names


def _transcripts(teams: dict[Team, tuple[Codemaster, Guesser]]) -> dict[str, list] | None:
    out = {}
    for team, pair in teams.items():
        for role, agent in zip(("codemaster", "guesser"), pair):
            transcript = getattr(agent, "transcript", None)
            if transcript is not None:
                out[f"{team.value}_{role}"] = list(transcript.messages)
    return out or None


def play_match(spec: TournamentSpec, seed: int) -> MatchRecord:
    board = game.generate_board(spec.wordlist, seed)
    started = time.perf_counter()
    teams: dict[Team, tuple[Codemaster, Guesser]] = {}
    state = game.new_game(board, spec.mode)
    error = error_kind = None
    result = None
    try:
        sides = [(Team.RED, spec.red)]
        if spec.mode is Mode.TWO:
            sides.append((Team.BLUE, spec.blue))
        for team, (cm, gs) in sides:
            teams[team] = (cm.factory(team, seed), gs.factory(team, seed))
        rng = SplitMix64.for_stream(seed, FALLBACK_STREAM)
        state = play_game(state, teams, rng, max_attempts=spec.max_attempts)
        result = game.game_result(state)
    except Exception as exc:  # one failed trial must not abort the batch
        state = getattr(exc, "partial_state", state)
        error = f"{type(exc).__name__}: {exc}"
        error_kind = "transport" if isinstance(exc, AgentTransportError) else "error"
        log.warning("seed %d failed: %s", seed, error)
    duration = time.perf_counter() - started if spec.record_timing else None
    return MatchRecord(
        seed=seed,
        mode=spec.mode,
        agents=spec.agent_names(),
        board=board,
        events=list(state.history),
        result=result,
        duration_s=duration,
        error=error,
        error_kind=error_kind,
        transcripts=_transcripts(teams),
    )


class _OrderedAppender:
    """Writes records in seed order as soon as the next one is available."""

    def __init__(self, seeds: Sequence[int], sink: Callable[[MatchRecord], None]) -> None:
        self.pending: dict[int, MatchRecord] = {}
        self.order = list(seeds)
        self.pos = 0
        self.sink = sink
        self.lock = threading.Lock()

    def add(self, index: int, record: MatchRecord) -> None:
        with self.lock:
            self.pending[index] = record
            while self.pos in self.pending:
                self.sink(self.pending.pop(self.pos))
                self.pos += 1


def run_trials(
    spec: TournamentSpec, on_record: Callable[[MatchRecord], None] | None = None
) -> list[MatchRecord]:
    """Play one game per seed; results (and ``on_record`` calls) follow seed order."""
    seeds = list(spec.seeds)
    results: list[MatchRecord | None] = [None] * len(seeds)
    appender = _OrderedAppender(seeds, on_record) if on_record else None

    def work(i: int) -> None:
        results[i] = play_match(spec, seeds[i])
        if appender:
            appender.add(i, results[i])

    if spec.workers <= 1:
        for i in range(len(seeds)):
            work(i)
    else:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            list(pool.map(work, range(len(seeds))))
    return [r for r in results if r is not None]


# --- metrics ------------------------------------------------------------------


@dataclass(frozen=True)
class TurnStats:
    team: Team
    count: int
    guesses: int
    stopped: bool


def turn_stats(events: Iterable[game.Event]) -> list[TurnStats]:
    turns: list[TurnStats] = []
    current: dict[str, Any] | None = None

    def close() -> None:
        if current is not None:
            turns.append(TurnStats(**current))

    for e in events:
        if isinstance(e, ClueEvent):
            close()
            current = {"team": e.team, "count": e.count, "guesses": 0, "stopped": False}
        elif isinstance(e, GuessEvent) and current is not None:
            current["guesses"] += 1
        elif isinstance(e, StopEvent) and current is not None:
            current["stopped"] = True
    close()
    return turns


def _mean_std(values: Sequence[float]) -> tuple[float, float]:
    if not values:
        return 0.0, 0.0
    return statistics.fmean(values), statistics.pstdev(values)


def _completed(records: Sequence[MatchRecord], mode: Mode) -> list[MatchRecord]:
    if not records:
        raise EmptyInput("no records to summarise")
    if any(r.mode is not mode for r in records):
        raise ModeMismatch(f"all records must be {mode.value}-team games")
    done = [r for r in records if r.result is not None]
    if not done:
        raise EmptyInput("no completed games")
    return done


@dataclass(frozen=True)
class MetricsSummary:
    trials: int
    failed: int
    mean: float
    median: float
    min: float
    std: float
    loss_pct: float
    all_blue_loss_pct: float
    blue_avg: float
    blue_std: float
    civilian_avg: float
    civilian_std: float
    clues_avg: float
    clues_std: float
    guesses_avg: float
    guesses_std: float
    stop_early_pct: float
    stop_late_pct: float


def summarize_single(records: Sequence[MatchRecord]) -> MetricsSummary:
    done = _completed(records, Mode.SINGLE)
    scores = sorted(r.result.single_team_score for r in done)
    n = len(done)
    blue, civ, counts, guesses = [], [], [], []
    early = late = scored_turns = 0
    for r in done:
        picks = [e.identity for e in r.events if isinstance(e, GuessEvent)]
        blue.append(picks.count(Identity.BLUE))
        civ.append(picks.count(Identity.CIVILIAN))
        for t in turn_stats(r.events):
            counts.append(t.count)
            guesses.append(t.guesses)
            if t.count == 0:
                continue
            scored_turns += 1
            early += t.stopped and t.guesses < t.count
            late += t.guesses == t.count + 1
    mean, std = _mean_std(scores)
    blue_avg, blue_std = _mean_std(blue)
    civ_avg, civ_std = _mean_std(civ)
    clues_avg, clues_std = _mean_std(counts)
    g_avg, g_std = _mean_std(guesses)
    pct = lambda k, d: 100.0 * k / d if d else 0.0
    reasons = [r.result.reason for r in done]
    return MetricsSummary(
        trials=n,
        failed=len(records) - n,
        mean=mean,
        median=float(scores[(n - 1) // 2]),
        min=float(scores[0]),
        std=std,
        loss_pct=pct(reasons.count(EndReason.ASSASSIN_SELECTED), n),
        all_blue_loss_pct=pct(reasons.count(EndReason.ALL_OPPONENT_WORDS_FOUND), n),
        blue_avg=blue_avg,
        blue_std=blue_std,
        civilian_avg=civ_avg,
        civilian_std=civ_std,
        clues_avg=clues_avg,
        clues_std=clues_std,
        guesses_avg=g_avg,
        guesses_std=g_std,
        stop_early_pct=pct(early, scored_turns),
        stop_late_pct=pct(late, scored_turns),
    )


@dataclass(frozen=True)
class TwoTeamSummary:
    trials: int
    failed: int
    red_win_pct: float
    blue_win_pct: float
    red_assassin_loss_pct: float
    blue_assassin_loss_pct: float


def summarize_two(records: Sequence[MatchRecord]) -> TwoTeamSummary:
    done = _completed(records, Mode.TWO)
    n = len(done)
    winners = [r.result.winner for r in done]
    assassins = [r.result.assassin_team for r in done]
    return TwoTeamSummary(
        trials=n,
        failed=len(records) - n,
        red_win_pct=100.0 * winners.count(Team.RED) / n,
        blue_win_pct=100.0 * winners.count(Team.BLUE) / n,
        red_assassin_loss_pct=100.0 * assassins.count(Team.RED) / n,
        blue_assassin_loss_pct=100.0 * assassins.count(Team.BLUE) / n,
    )


@dataclass(frozen=True)
class CurvePoint:
    codemaster: str
    turn: int
    mean_count: float
    n_games: int


def clue_curve(records: Sequence[MatchRecord]) -> list[CurvePoint]:
    """Mean clue number at each of a codemaster's own turns, over games still running."""
    if not records:
        raise EmptyInput("no records")
    series: dict[str, dict[int, list[int]]] = {}
    for r in records:
        per_team: dict[Team, int] = {}
        for e in r.events:
            if not isinstance(e, ClueEvent):
                continue
            k = per_team[e.team] = per_team.get(e.team, 0) + 1
            name = r.agents[f"{e.team.value}_codemaster"]
            series.setdefault(name, {}).setdefault(k, []).append(e.count)
    return [
        CurvePoint(name, t, statistics.fmean(v), len(v))
        for name in sorted(series)
        for t, v in sorted(series[name].items())
    ]


def group_by_pairing(records: Iterable[MatchRecord]) -> dict[tuple[Mode, str], list[MatchRecord]]:
    groups: dict[tuple[Mode, str], list[MatchRecord]] = {}
    for r in records:
        groups.setdefault((r.mode, r.pairing), []).append(r)
    return groups


# --- output -------------------------------------------------------------------

SINGLE_COLUMNS = [
    "Model Pair", "Mean", "Median", "Min", "Std Dev", "Loss",
    "Blue avg(stdev)", "Civilian avg(stdev)", "Clues avg(stdev)",
    "Guesses avg(stdev)", "Stop Early", "Stop Late",
]
TWO_COLUMNS = ["Model Pair", "Win-rate (red/blue)", "Assassin losses (red/blue)"]


def single_row(label: str, s: MetricsSummary) -> list[str]:
    return [
        label, f"{s.mean:.2f}", f"{s.median:g}", f"{s.min:g}", f"{s.std:.2f}",
        f"{s.loss_pct:.0f}%", f"{s.blue_avg:.2f} ({s.blue_std:.2f})",
        f"{s.civilian_avg:.2f} ({s.civilian_std:.2f})",
        f"{s.clues_avg:.2f} ({s.clues_std:.2f})",
        f"{s.guesses_avg:.2f} ({s.guesses_std:.2f})",
        f"{s.stop_early_pct:.1f}%", f"{s.stop_late_pct:.1f}%",
    ]


def two_row(label: str, s: TwoTeamSummary) -> list[str]:
    return [
        label,
        f"{s.red_win_pct:.0f}% / {s.blue_win_pct:.0f}%",
        f"{s.red_assassin_loss_pct:.1f}% / {s.blue_assassin_loss_pct:.1f}%",
    ]


def format_table(columns: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    widths = [max(len(str(x)) for x in col) for col in zip(columns, *rows)]
    lines = [" | ".join(str(c).ljust(w) for c, w in zip(columns, widths))]
    lines.append("-+-".join("-" * w for w in widths))
    for row in rows:
        lines.append(" | ".join(str(c).ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines)


def summary_csv(summaries: Sequence[tuple[str, MetricsSummary | TwoTeamSummary]]) -> str:
    buf = io.StringIO()
    if not summaries:
        return ""
    fields = list(summaries[0][1].__dataclass_fields__)
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["pairing", *fields])
    for label, s in summaries:
        writer.writerow([label, *(getattr(s, f) for f in fields)])
    return buf.getvalue()


def curve_csv(points: Sequence[CurvePoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["codemaster", "turn_index", "mean_count", "n_games"])
    for p in points:
        writer.writerow([p.codemaster, p.turn, repr(p.mean_count), p.n_games])
    return buf.getvalue()
