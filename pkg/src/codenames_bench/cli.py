"""``codenames-bench`` command-line entry point."""

from __future__ import annotations

import argparse
import logging
import re
import sys
from pathlib import Path
from typing import Sequence

from pydantic import ValidationError

from . import game, tournament
from .agents import AgentTransportError, TransportFailure
from .config import RunConfig, build_spec, load_config
from .embeddings import BoardWordsAllOutOfVocabulary, EmptyCandidatePool, MalformedVectorFile
from .game import ClueEvent, ContinueDecision, GuessEvent, InvalidAttempt, Mode, StopEvent
from .tournament import (
    ConfigError,
    CorruptLine,
    EmptyInput,
    MatchRecord,
    ModeMismatch,
    SchemaVersionMismatch,
)

log = logging.getLogger("codenames_bench")

EXIT_OK, EXIT_CONFIG, EXIT_TRANSPORT, EXIT_DATA = 0, 2, 3, 4

DATA_ERRORS = (
    MalformedVectorFile, BoardWordsAllOutOfVocabulary, EmptyCandidatePool,
    game.WordlistTooSmall, SchemaVersionMismatch, CorruptLine, EmptyInput, ModeMismatch, OSError,
)


class CliError(Exception):
    def __init__(self, message: str, code: int) -> None:
        super().__init__(message)
        self.code = code


def parse_seeds(text: str) -> list[int]:
    """``"7"``, ``"0-99"`` (inclusive) or ``"1,4,9"``."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        m = re.fullmatch(r"(\d+)-(\d+)", part)
        if m:
            lo, hi = int(m[1]), int(m[2])
            if hi < lo:
                raise argparse.ArgumentTypeError(f"empty seed range {part!r}")
            seeds.extend(range(lo, hi + 1))
        elif part.isdigit():
            seeds.append(int(part))
        else:
            raise argparse.ArgumentTypeError(f"bad seed spec {part!r}")
    return seeds


def _load_run(args) -> RunConfig:
    run = load_config(args.config)
    if getattr(args, "mode", None):
        try:
            run = RunConfig.model_validate({**run.model_dump(), "mode": args.mode,
                                            "base_dir": run.base_dir})
        except ValidationError as exc:
            raise ConfigError(str(exc)) from exc
    if getattr(args, "workers", None):
        run.workers = args.workers
    return run


# --- board --------------------------------------------------------------------

_TAGS = {"red": "R", "blue": "B", "civilian": "C", "assassin": "A"}


def render_board(board: game.Board, spoil: bool = False) -> str:
    cells = [
        f"{c.word} [{_TAGS[c.identity.value]}]" if spoil else c.word for c in board.cards
    ]
    width = max(len(c) for c in cells)
    rows = [
        "  ".join(cell.ljust(width) for cell in cells[i : i + 5]).rstrip()
        for i in range(0, len(cells), 5)
    ]
    if spoil:
        counts = {i.value: sum(c.identity is i for c in board.cards) for i in game.Identity}
        rows.append("")
        rows.append(" ".join(f"{k}={v}" for k, v in counts.items()))
    return "\n".join(rows)


def cmd_board(args) -> int:
    words = game.load_wordlist(args.wordlist)
    print(render_board(game.generate_board(words, args.seed), args.spoil))
    return EXIT_OK


# --- play ---------------------------------------------------------------------


def describe_events(events: Sequence[game.Event]) -> list[str]:
    lines = []
    turn = None
    for e in events:
        if e.turn != turn:
            turn = e.turn
            lines.append(f"turn {e.turn} ({e.team.value})")
        fallback = " (fallback)" if getattr(e, "fallback", False) else ""
        if isinstance(e, ClueEvent):
            lines.append(f"  clue {e.word!r} {e.count}{fallback}")
        elif isinstance(e, GuessEvent):
            lines.append(f"  guess {e.word} -> {e.identity.value}{fallback}")
        elif isinstance(e, InvalidAttempt):
            lines.append(f"  invalid {e.slot}: {e.response!r} ({e.reason})")
        elif isinstance(e, ContinueDecision):
            lines.append(f"  keep guessing? {'yes' if e.keep_going else 'no'}{fallback}")
        elif isinstance(e, StopEvent):
            lines.append(f"  stop after {e.guesses}")
    return lines


def _describe_result(record: MatchRecord) -> str:
    r = record.result
    if r is None:
        return f"game aborted: {record.error}"
    if r.mode is Mode.SINGLE:
        return f"result: {r.reason.value}, score {r.single_team_score}"
    return f"result: {r.winner.value} wins ({r.reason.value})"


def cmd_play(args) -> int:
    run = _load_run(args)
    spec = build_spec(run, [args.seed])
    print(render_board(game.generate_board(spec.wordlist, args.seed), spoil=True))
    print()
    record = tournament.play_match(spec, args.seed)
    for line in describe_events(record.events):
        print(line)
    print(_describe_result(record))
    out = run.output_path("records", args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    tournament.persist([record], out)
    print(f"record written to {out}")
    if record.error:
        return EXIT_TRANSPORT if record.error_kind == "transport" else EXIT_DATA
    return EXIT_OK


# --- tournament / report ------------------------------------------------------


def _slug(text: str) -> str:
    return re.sub(r"[^a-z0-9]+", "_", text.lower()).strip("_")


def summarize_groups(records: Sequence[MatchRecord]) -> dict[Mode, list[tuple[str, object]]]:
    out: dict[Mode, list[tuple[str, object]]] = {}
    for (mode, label), group in sorted(tournament.group_by_pairing(records).items()):
        try:
            s = (tournament.summarize_single if mode is Mode.SINGLE else tournament.summarize_two)(group)
        except EmptyInput:
            log.warning("%s: no completed games", label)
            continue
        out.setdefault(mode, []).append((label, s))
    return out


def render_summaries(summaries: dict[Mode, list[tuple[str, object]]]) -> str:
    parts = []
    for mode in (Mode.SINGLE, Mode.TWO):
        if mode not in summaries:
            continue
        rows = summaries[mode]
        if mode is Mode.SINGLE:
            table = tournament.format_table(
                tournament.SINGLE_COLUMNS, [tournament.single_row(l, s) for l, s in rows])
            title = "single-team results"
        else:
            table = tournament.format_table(
                tournament.TWO_COLUMNS, [tournament.two_row(l, s) for l, s in rows])
            title = "two-team results"
        trials = ", ".join(f"{l}: {s.trials} games" + (f", {s.failed} failed" if s.failed else "")
                           for l, s in rows)
        parts.append(f"{title}\n{table}\n({trials})")
    return "\n\n".join(parts)


def write_reports(records: Sequence[MatchRecord], out_dir: Path, run: RunConfig | None = None) -> str:
    summaries = summarize_groups(records)
    text = render_summaries(summaries)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = run.output if run else None
    (out_dir / (names.table if names else "summary.txt")).write_text(text + "\n", encoding="utf-8")
    for mode, rows in summaries.items():
        name = names.summary_csv if names else "summary.csv"
        if len(summaries) > 1:
            name = f"{mode.value}_{name}"
        (out_dir / name).write_text(tournament.summary_csv(rows), encoding="utf-8")
    for (mode, label), group in tournament.group_by_pairing(records).items():
        curve = tournament.curve_csv(tournament.clue_curve(group))
        name = names.curve_csv if names and len(summaries) == 1 and len(summaries.get(mode, ())) == 1 \
            else f"curve_{mode.value}_{_slug(label)}.csv"
        (out_dir / name).write_text(curve, encoding="utf-8")
    return text


def cmd_tournament(args) -> int:
    run = _load_run(args)
    seeds = args.seeds if args.seeds is not None else run.seed_list()
    out_dir = Path(args.out) if args.out else run.resolve(run.output.dir)
    records_path = out_dir / run.output.records
    out_dir.mkdir(parents=True, exist_ok=True)

    existing: list[MatchRecord] = []
    if args.resume and records_path.exists():
        existing = tournament.load(records_path)
        done = {r.seed for r in existing if r.result is not None}
        # failed seeds are retried; drop their old lines
        existing = [r for r in existing if r.seed in done]
        tournament.persist(existing, records_path)
        seeds = [s for s in seeds if s not in done]
        log.info("resuming: %d seeds already complete", len(done))
    elif records_path.exists():
        records_path.unlink()

    spec = build_spec(run, seeds)
    with open(records_path, "a", encoding="utf-8") as fh:
        def append(record: MatchRecord) -> None:
            fh.write(record.to_json() + "\n")
            fh.flush()

        new = tournament.run_trials(spec, on_record=append)

    records = existing + new
    failed = [r for r in new if r.error]
    if records:
        print(write_reports(records, out_dir, run))
    print(f"{len(new)} games played, records in {records_path}")
    if failed:
        print("failed seeds: " + ", ".join(str(r.seed) for r in failed), file=sys.stderr)
        for r in failed:
            print(f"  seed {r.seed}: {r.error}", file=sys.stderr)
        return EXIT_TRANSPORT if any(r.error_kind == "transport" for r in failed) else EXIT_DATA
    return EXIT_OK


def cmd_report(args) -> int:
    records: list[MatchRecord] = []
    for path in args.logs:
        try:
            records.extend(tournament.load(path))
        except (SchemaVersionMismatch, CorruptLine) as exc:
            raise CliError(str(exc), EXIT_DATA) from exc
        except OSError as exc:
            raise CliError(f"{path}: {exc.strerror}", EXIT_DATA) from exc
    if not records:
        raise CliError("no records in the given logs", EXIT_DATA)
    if args.out:
        print(write_reports(records, Path(args.out)))
    else:
        print(render_summaries(summarize_groups(records)))
    return EXIT_OK


# --- entry --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="codenames-bench",
                                     description="Codenames agent benchmark harness")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("board", help="show the board for a seed")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--wordlist", type=Path, default=None, help="default: bundled word pool")
    p.add_argument("--spoil", action="store_true", help="show card identities")
    p.set_defaults(func=cmd_board)

    p = sub.add_parser("play", help="play one game verbosely")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--out", type=Path, help="output directory")
    p.set_defaults(func=cmd_play)

    p = sub.add_parser("tournament", help="play one game per seed and summarise")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--seeds", type=parse_seeds, help="e.g. 0-99 or 1,5,9")
    p.add_argument("--mode", choices=[m.value for m in Mode])
    p.add_argument("--workers", type=int)
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--resume", action="store_true", help="skip seeds already in the log")
    p.set_defaults(func=cmd_tournament)

    p = sub.add_parser("report", help="summarise existing match logs")
    p.add_argument("logs", nargs="+", type=Path)
    p.add_argument("--out", type=Path, help="write CSV/table files here")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TransportFailure, AgentTransportError) as exc:
        print(f"transport error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except DATA_ERRORS as exc:
        print(f"data error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
