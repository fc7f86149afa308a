from __future__ import annotations

import pytest

from codenames_bench import agents, game
from codenames_bench.agents import (
    AgentTransportError,
    Codemaster,
    Guesser,
    RandomCodemaster,
    RandomGuesser,
    Script,
    ScriptedCodemaster,
    ScriptedGuesser,
    TransportFailure,
)
from codenames_bench.game import (
    Clue,
    ClueEvent,
    ContinueDecision,
    GuessEvent,
    Identity,
    InvalidAttempt,
    Mode,
    StopEvent,
    Team,
)
from codenames_bench.rng import SplitMix64


def match_rng(seed: int = 0) -> SplitMix64:
    return SplitMix64.for_stream(seed, agents.FALLBACK_STREAM)


def test_rng_reference_values():
    # published SplitMix64 outputs for state 0
    r = SplitMix64(0)
    assert [r.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F,
    ]


def test_rng_below_is_in_range_and_covers():
    r = SplitMix64(42)
    seen = {r.below(7) for _ in range(500)}
    assert seen == set(range(7))


def test_prefix_shuffle_matches_full_shuffle_prefix():
    full, part = list(range(50)), list(range(50))
    SplitMix64(9).shuffle(full)
    SplitMix64(9).shuffle(part, prefix=10)
    assert full[:10] == part[:10]


def test_views_hide_identities(seed0_board):
    state = game.new_game(seed0_board, Mode.TWO)
    gv = agents.build_guesser_view(state, Team.RED)
    assert len(gv.unrevealed) == 25 and gv.revealed == ()
    assert "identity" not in str(gv.to_dict()["unrevealed"])
    cv = agents.build_codemaster_view(state, Team.BLUE)
    assert len(cv.own_words) == 8 and len(cv.non_team_words) == 17


def test_view_history_omits_annotations(seed0_board):
    state = game.new_game(seed0_board, Mode.TWO)
    state = game.annotate(state, InvalidAttempt(1, Team.RED, "clue", "?", "unparseable"))
    assert agents.build_codemaster_view(state, Team.RED).history == ()


def test_view_of_finished_game_unavailable(seed0_board):
    state = game.apply_clue(game.new_game(seed0_board, Mode.TWO), Clue("zzz", 1))
    state, _ = game.apply_guess(state, "alien")
    with pytest.raises(agents.ViewUnavailable):
        agents.build_guesser_view(state, Team.RED)


def red_words(board):
    return [c.word for c in board.cards if c.identity is Identity.RED]


def test_scripted_turn_with_bonus_guess(seed0_board):
    reds = red_words(seed0_board)
    cm = ScriptedCodemaster(["CLUE: zzz, 1"])
    g = ScriptedGuesser(reds[:2], ["yes"])
    state = agents.run_turn(game.new_game(seed0_board, Mode.SINGLE), cm, g, match_rng())
    kinds = [e.kind for e in state.history]
    assert kinds == ["clue", "guess", "continue", "guess"]
    assert state.turn_index == 2


def test_scripted_turn_with_voluntary_stop(seed0_board):
    reds = red_words(seed0_board)
    state = agents.run_turn(
        game.new_game(seed0_board, Mode.SINGLE),
        ScriptedCodemaster(["zzz, 3"]), ScriptedGuesser(reds[:1], ["no"]), match_rng(),
    )
    assert isinstance(state.history[-1], StopEvent)
    assert state.history[-2] == ContinueDecision(1, Team.RED, False)


def test_invalid_clues_fall_back_to_empty_clue(seed0_board):
    cm = ScriptedCodemaster(["bonfire, 2"] * 10)
    g = ScriptedGuesser(red_words(seed0_board)[:1], ["no"])
    state = agents.run_turn(game.new_game(seed0_board, Mode.SINGLE), cm, g, match_rng())
    invalid = [e for e in state.history if isinstance(e, InvalidAttempt)]
    assert len(invalid) == 10 and all(e.reason == "substring" for e in invalid)
    clue = next(e for e in state.history if isinstance(e, ClueEvent))
    assert (clue.word, clue.count, clue.fallback, clue.attempts) == ("", 1, True, 10)


def test_clue_retry_recovers(seed0_board):
    cm = ScriptedCodemaster(["I am not sure", "firefly, 1", "CLUE: zzz, 1"])
    g = ScriptedGuesser(red_words(seed0_board)[:1], ["no"])
    state = agents.run_turn(game.new_game(seed0_board, Mode.SINGLE), cm, g, match_rng())
    clue = next(e for e in state.history if isinstance(e, ClueEvent))
    assert (clue.word, clue.attempts, clue.fallback) == ("zzz", 3, False)
    reasons = [e.reason for e in state.history if isinstance(e, InvalidAttempt)]
    assert reasons == ["unparseable", "substring"]


def test_invalid_guesses_fall_back_to_seeded_random(seed0_board):
    def run():
        cm = ScriptedCodemaster(["zzz, 1"])
        g = ScriptedGuesser(["mars"] * 10, ["no"])
        return agents.run_turn(game.new_game(seed0_board, Mode.SINGLE), cm, g, match_rng(7))

    a, b = run(), run()
    guess = next(e for e in a.history if isinstance(e, GuessEvent))
    assert guess.fallback and guess.attempts == 10
    expected = match_rng(7).choice(seed0_board.unrevealed())
    assert guess.word == expected
    assert a.history == b.history


def test_continue_slot_exhaustion_stops(seed0_board):
    reds = red_words(seed0_board)
    cm = ScriptedCodemaster(["zzz, 2"])
    g = ScriptedGuesser(reds[:1], ["maybe"] * 10)
    state = agents.run_turn(game.new_game(seed0_board, Mode.SINGLE), cm, g, match_rng())
    decision = next(e for e in state.history if isinstance(e, ContinueDecision))
    assert decision.fallback and not decision.keep_going
    assert isinstance(state.history[-1], StopEvent)


class Broken(Codemaster):
    def give_clue(self, view, feedback=None):
        raise TransportFailure("connection reset")


def test_transport_failure_is_annotated_with_partial_state(seed0_board):
    state = game.new_game(seed0_board, Mode.TWO)
    with pytest.raises(AgentTransportError) as info:
        agents.run_turn(state, Broken(), ScriptedGuesser([]), match_rng())
    err = info.value
    assert (err.role, err.team, err.turn) == ("codemaster", Team.RED, 1)
    assert err.partial_state.history == ()


def test_script_file_with_seed_override(tmp_path):
    path = tmp_path / "s.json"
    path.write_text('{"clues": ["a, 1"], "guesses": ["x"], "seeds": {"3": {"clues": ["b, 2"]}}}')
    assert Script.load(path).clues == ["a, 1"]
    s3 = Script.load(path, seed=3)
    assert s3.clues == ["b, 2"] and s3.guesses == ["x"]
    with pytest.raises(ValueError):
        Script.from_dict({"clue": []})


def test_script_exhaustion_is_an_invalid_response(seed0_board):
    state = agents.run_turn(
        game.new_game(seed0_board, Mode.SINGLE), ScriptedCodemaster([]),
        ScriptedGuesser([], []), match_rng(),
    )
    clue = next(e for e in state.history if isinstance(e, ClueEvent))
    assert clue.fallback


def play_random(board, seed):
    teams = {
        Team.RED: (RandomCodemaster(seed * 4), RandomGuesser(seed * 4 + 1)),
        Team.BLUE: (RandomCodemaster(seed * 4 + 2), RandomGuesser(seed * 4 + 3)),
    }
    mode = Mode.TWO if seed % 2 else Mode.SINGLE
    return agents.play_game(game.new_game(board, mode), teams, match_rng(seed))


def test_random_games_terminate_and_replay(wordlist):
    for seed in range(20):
        state = play_random(game.generate_board(wordlist, seed), seed)
        assert state.finished
        again = game.replay(state.board, state.mode, state.history)
        assert game.game_result(again) == game.game_result(state)


class AlwaysContinue(Guesser):
    """Tries to keep guessing forever; the engine must cut it off."""

    def __init__(self, words):
        self.words = words

    def guess(self, view, feedback=None):
        return next(w for w in self.words if w in view.unrevealed)

    def keep_guessing(self, view, feedback=None):
        return True


def test_guesser_cannot_exceed_count_plus_one(seed0_board):
    state = agents.run_turn(
        game.new_game(seed0_board, Mode.SINGLE), ScriptedCodemaster(["zzz, 2"]),
        AlwaysContinue(red_words(seed0_board)), match_rng(),
    )
    assert sum(isinstance(e, GuessEvent) for e in state.history) == 3
