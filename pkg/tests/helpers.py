"""Builders for hand-constructed match logs."""

from __future__ import annotations

from codenames_bench import game
from codenames_bench.game import Clue, Identity, Mode
from codenames_bench.tournament import MatchRecord


def words_of(board, identity):
    return [c.word for c in board.cards if c.identity is identity]


def play_turns(board, mode, turns):
    """``turns``: (count, [guess words], stop?) per turn, applied in order."""
    state = game.new_game(board, mode)
    for count, guesses, stop in turns:
        state = game.apply_clue(state, Clue("zzz", count))
        for w in guesses:
            state, _ = game.apply_guess(state, w)
        if stop:
            state = game.apply_stop(state)
        if state.finished:
            break
    return state


def record(board, turns, *, seed=0, mode=Mode.SINGLE, cm="cm", guesser="g", blue=("bcm", "bg")):
    state = play_turns(board, mode, turns)
    agents_ = {"red_codemaster": cm, "red_guesser": guesser}
    if mode is Mode.TWO:
        agents_ |= {"blue_codemaster": blue[0], "blue_guesser": blue[1]}
    return MatchRecord(
        seed=seed, mode=mode, agents=agents_, board=board, events=list(state.history),
        result=game.game_result(state) if state.finished else None, duration_s=None,
    )


def three_game_fixture(board):
    """Three single-team games exercising every table column."""
    r, b, c = (words_of(board, i) for i in (Identity.RED, Identity.BLUE, Identity.CIVILIAN))
    a = words_of(board, Identity.ASSASSIN)[0]
    g1 = [  # win in 4 turns: a bonus guess, an early stop, a civilian, a count-0 turn
        (2, r[0:3], False),
        (3, r[3:4], True),
        (1, [r[4], c[0]], False),
        (0, r[5:9], False),
    ]
    g2 = [  # assassin loss on turn 2
        (1, [b[0]], False),
        (2, [r[0], a], False),
    ]
    g3 = [  # win in 5 with several wrong picks
        (3, r[0:3], True),
        (2, [r[3], b[0]], False),
        (1, [c[0]], False),
        (2, r[4:7], False),
        (2, [r[7], r[8]], False),
    ]
    return [record(board, g, seed=i) for i, g in enumerate((g1, g2, g3))]
