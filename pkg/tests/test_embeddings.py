from __future__ import annotations

import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codenames_bench import agents, game
from codenames_bench.embeddings import (
    BoardWordsAllOutOfVocabulary,
    ClueOutOfVocabulary,
    DimensionMismatch,
    EmbeddingModel,
    EmptyIntersection,
    MalformedVectorFile,
    VvParams,
    WordVectorCodemaster,
    WordVectorGuesser,
    ZeroVector,
    combine_models,
    cosine_similarity,
    default_candidate_pool,
    load_embeddings,
    save_binary,
    save_text,
    vv_clue,
    vv_guess,
)
from codenames_bench.game import Board, Clue, Mode, Team
from oracles import brute_clue, brute_guess

# --- loading ------------------------------------------------------------------


def test_text_loader(tmp_path):
    p = tmp_path / "v.txt"
    p.write_text("cat 0.1 0.2\ndog 0.3 0.4\n")
    m = load_embeddings(p)
    assert (m.dim, len(m)) == (2, 2)
    assert "CAT" in m


def test_text_loader_with_header_and_duplicates(tmp_path):
    p = tmp_path / "v.txt"
    p.write_text("3 2\nCat 1 0\ncat 0 1\ndog 0 2\n")
    m = load_embeddings(p)
    assert m.words == ["cat", "dog"]
    assert np.allclose(m.vector("cat"), [1, 0])


def test_dimension_mismatch(tmp_path):
    p = tmp_path / "v.txt"
    p.write_text("cat 0.1 0.2\ndog 0.3 0.4 0.5\n")
    with pytest.raises(DimensionMismatch, match=":2:"):
        load_embeddings(p)


def test_malformed_text(tmp_path):
    p = tmp_path / "v.txt"
    p.write_text("cat 0.1 abc\n")
    with pytest.raises(MalformedVectorFile):
        load_embeddings(p)


def test_missing_file_names_path(tmp_path):
    with pytest.raises(MalformedVectorFile, match="nope.bin"):
        load_embeddings(tmp_path / "nope.bin")


def test_binary_loader_reads_standard_layout(tmp_path):
    p = tmp_path / "v.bin"
    rows = {"king": [1.0, 2.0, 2.0], "queen": [0.0, 3.0, 4.0]}
    with open(p, "wb") as fh:
        fh.write(b"2 3\n")
        for w, v in rows.items():
            fh.write(w.encode() + b" " + struct.pack("<3f", *v) + b"\n")
    m = load_embeddings(p)
    assert m.dim == 3 and m.words == ["king", "queen"]
    assert np.allclose(m.vector("queen"), [0, 0.6, 0.8])


def test_binary_truncated(tmp_path):
    p = tmp_path / "v.bin"
    p.write_bytes(b"2 3\nking " + struct.pack("<3f", 1, 2, 3))
    with pytest.raises(MalformedVectorFile, match="truncated"):
        load_embeddings(p)


def test_save_round_trips(tmp_path):
    rng = np.random.default_rng(0)
    m = EmbeddingModel([f"w{i}" for i in range(20)], rng.normal(size=(20, 7)))
    save_binary(m, tmp_path / "a.bin")
    save_text(m, tmp_path / "a.txt")
    for path in (tmp_path / "a.bin", tmp_path / "a.txt"):
        back = load_embeddings(path)
        assert back.words == m.words
        assert np.allclose(back.vectors, m.vectors, atol=1e-6)


# --- similarity ---------------------------------------------------------------


def test_cosine_basics():
    assert cosine_similarity([3, 4], [3, 4]) == pytest.approx(1.0)
    assert cosine_similarity([3, 4], [-3, -4]) == pytest.approx(-1.0)
    assert cosine_similarity([1, 0], [0, 1]) == 0.0
    with pytest.raises(ZeroVector):
        cosine_similarity([0, 0], [1, 0])
    with pytest.raises(ValueError):
        cosine_similarity([1, 0], [1, 0, 0])


@settings(max_examples=50)
@given(st.lists(st.floats(-10, 10), min_size=3, max_size=3),
       st.lists(st.floats(-10, 10), min_size=3, max_size=3))
def test_cosine_symmetric_and_bounded(u, v):
    if np.linalg.norm(u) < 1e-3 or np.linalg.norm(v) < 1e-3:
        return
    c = cosine_similarity(u, v)
    assert -1.0 <= c <= 1.0
    assert c == pytest.approx(cosine_similarity(v, u))


def test_combined_model():
    a = EmbeddingModel(["x", "y", "only_a"], np.array([[1, 0], [1, 1], [0, 1]]))
    b = EmbeddingModel(["y", "x"], np.array([[1, 2, 3], [3, 0, 1]]))
    c = combine_models(a, b)
    assert c.dim == 5 and c.words == ["x", "y"]
    direct = cosine_similarity(c.vector("x"), c.vector("y"))
    blend = (cosine_similarity([1, 0], [1, 1]) + cosine_similarity([3, 0, 1], [1, 2, 3])) / 2
    assert direct == pytest.approx(blend, abs=1e-6)
    with pytest.raises(EmptyIntersection):
        combine_models(a, EmbeddingModel(["z"], np.ones((1, 2))))


# --- agents -------------------------------------------------------------------


def random_model(words, dim=6, seed=0):
    rng = np.random.default_rng(seed)
    return EmbeddingModel(list(words), rng.normal(size=(len(words), dim)))


def guesser_view(board: Board, clue: Clue):
    state = game.apply_clue(game.new_game(board, Mode.TWO), clue)
    return agents.build_guesser_view(state, Team.RED)


def test_deer_picks_nearest_of_three():
    vecs = {"deer": [1.0, 0.2, 0.0], "buck": [0.9, 0.3, 0.0], "bear": [0.5, 0.5, 0.5],
            "robin": [0.0, 1.0, 0.2], "zzz": [0.0, 0.0, 1.0]}
    model = EmbeddingModel(list(vecs), np.array(list(vecs.values())))
    board = Board.from_pairs([("buck", "red"), ("bear", "red"), ("robin", "red"), ("zzz", "assassin")])
    view = guesser_view(board, Clue("deer", 3))
    assert vv_guess(view, model, Clue("deer", 3)) == "buck"


def test_out_of_vocabulary_clue():
    model = random_model(["fire", "school", "lion", "spell"])
    board = Board.from_pairs([("fire", "red"), ("school", "red"), ("lion", "blue"), ("spell", "assassin")])
    with pytest.raises(ClueOutOfVocabulary) as info:
        vv_guess(guesser_view(board, Clue("hogwarts", 2)), model, Clue("hogwarts", 2))
    assert isinstance(info.value, agents.InvalidResponse)


def test_board_all_out_of_vocabulary():
    model = random_model(["water"])
    board = Board.from_pairs([("fire", "red"), ("lion", "assassin")])
    with pytest.raises(BoardWordsAllOutOfVocabulary):
        vv_guess(guesser_view(board, Clue("water", 1)), model, Clue("water", 1))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_vv_guess_matches_brute_force(seed):
    words = ["ant", "bee", "cow", "dog", "eel", "clue"]
    model = random_model(words, seed=seed)
    board = Board.from_pairs([("ant", "red"), ("bee", "blue"), ("cow", "civilian"),
                              ("dog", "red"), ("eel", "assassin")])
    vecs = {w: model.vector(w).astype(float).tolist() for w in words}
    got = vv_guess(guesser_view(board, Clue("clue", 1)), model, Clue("clue", 1))
    assert got == brute_guess(vecs, board.words, "clue")


def test_vv_guess_tie_breaks_lexicographically():
    model = EmbeddingModel(["clue", "zeta", "alpha", "x"], np.array([[1, 0], [1, 0], [1, 0], [0, 1]]))
    board = Board.from_pairs([("zeta", "red"), ("alpha", "red"), ("x", "assassin")])
    assert vv_guess(guesser_view(board, Clue("clue", 1)), model, Clue("clue", 1)) == "alpha"


POOL = ["kiwi", "lamp", "mist", "note", "opal", "pear", "quay", "rust", "silk", "tide"]
BOARD4 = Board.from_pairs([("ant", "red"), ("bee", "red"), ("cow", "blue"), ("dog", "assassin")])


@pytest.mark.parametrize("threshold", [None, 0.0, 0.3, 0.99])
@pytest.mark.parametrize("seed", range(25))
def test_vv_clue_matches_exhaustive_search(seed, threshold):
    model = random_model(BOARD4.words + POOL, dim=4, seed=seed)
    vecs = {w: model.vector(w).astype(float).tolist() for w in model.words}
    view = agents.build_codemaster_view(game.new_game(BOARD4, Mode.TWO), Team.RED)
    clue = vv_clue(view, model, VvParams(threshold, tuple(POOL)))
    expected = brute_clue(vecs, view.own_words, view.non_team_words, POOL, threshold, 9, view.unrevealed)
    if expected is None:
        # nothing qualifies: best single margin over the non-team words
        def margin(c):
            worst = max(np.dot(vecs[c], vecs[o]) for o in view.non_team_words)
            return max(np.dot(vecs[c], vecs[t]) for t in view.own_words) - worst
        best = max(POOL, key=lambda c: (margin(c), [-ord(ch) for ch in c]))
        assert (clue.word, clue.count) == (best, 1)
    else:
        assert (clue.word, clue.count) == expected


def test_vv_clue_single_target_synonym():
    vecs = {"ant": [1, 0, 0], "cow": [0, 1, 0], "dog": [0, 0, 1], "insect": [0.95, 0.05, 0.0],
            "meadow": [0.1, 0.9, 0]}
    model = EmbeddingModel(list(vecs), np.array(list(vecs.values()), dtype=float))
    board = Board.from_pairs([("ant", "red"), ("cow", "blue"), ("dog", "assassin")])
    view = agents.build_codemaster_view(game.new_game(board, Mode.TWO), Team.RED)
    assert vv_clue(view, model, VvParams(0.7, ("insect", "meadow"))) == Clue("insect", 1)


def test_vv_clue_respects_max_targets():
    model = random_model(BOARD4.words + POOL, dim=2, seed=3)
    view = agents.build_codemaster_view(game.new_game(BOARD4, Mode.TWO), Team.RED)
    assert vv_clue(view, model, VvParams(None, tuple(POOL), max_targets=1)).count == 1


def test_vv_clue_never_collides_with_board():
    words = ["fire", "bonfire", "fir", "water", "lion", "school"]
    model = EmbeddingModel(words, np.array([[1, 0], [1, 0.01], [1, 0.02], [0.3, 1], [0, 1], [-1, 0]]))
    board = Board.from_pairs([("fire", "red"), ("lion", "blue"), ("school", "assassin")])
    view = agents.build_codemaster_view(game.new_game(board, Mode.TWO), Team.RED)
    clue = vv_clue(view, model, VvParams(None, ("bonfire", "fir", "water")))
    assert clue.word == "water"
    assert game.validate_clue(game.new_game(board, Mode.TWO), clue).ok


def test_default_pool_keeps_alphabetic_in_order():
    model = random_model(["the", "3d", "new-york", "cat", "dog"])
    assert default_candidate_pool(model, 2) == ("the", "cat")
    assert default_candidate_pool(model, None) == ("the", "cat", "dog")


def test_word_vector_guesser_never_stops_early_or_late():
    model = random_model(["a", "b"], seed=1)
    g = WordVectorGuesser(model)
    base = dict(team=Team.RED, mode=Mode.SINGLE, turn_index=1, unrevealed=("a",), revealed=(),
                remaining_guesses=1, history=())
    for count, made, expected in [(2, 1, True), (2, 2, False), (1, 1, False)]:
        view = agents.GuesserView(clue=Clue("x", count), guesses_this_turn=made, **base)
        assert g.keep_guessing(view) is expected


def test_codemaster_without_own_vocab_falls_back(seed0_board):
    model = random_model(["zzz", "qqq"])
    cm = WordVectorCodemaster(model, VvParams(None))
    state = agents.run_turn(
        game.new_game(seed0_board, Mode.SINGLE), cm, agents.RandomGuesser(0),
        agents.SplitMix64.for_stream(0, agents.FALLBACK_STREAM),
    )
    clue = state.history[10]
    assert isinstance(clue, game.ClueEvent) and clue.fallback
