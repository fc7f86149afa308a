"""Word-vector codemaster and guesser agents."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .agents import Codemaster, CodemasterView, Guesser, GuesserView, InvalidResponse
from .game import Clue, substring_conflict

log = logging.getLogger(__name__)

DEFAULT_POOL_SIZE = 20_000


class MalformedVectorFile(ValueError):
    pass


class DimensionMismatch(MalformedVectorFile):
    pass


class ZeroVector(ValueError):
    pass


class EmptyIntersection(ValueError):
    pass


class EmptyCandidatePool(ValueError):
    pass


class BoardWordsAllOutOfVocabulary(ValueError):
    pass


class ClueOutOfVocabulary(InvalidResponse):
    def __init__(self, word: str) -> None:
        super().__init__(word, "clue_out_of_vocabulary")


class NothingToSay(InvalidResponse):
    """The agent cannot see any usable board word; the turn protocol falls back."""

    def __init__(self, detail: str) -> None:
        super().__init__("", detail)


class EmbeddingModel:
    """Immutable token -> unit vector table; lookups are lowercased.

    Rows keep file order, which for published vector sets is frequency order.
    """

    def __init__(self, words: Sequence[str], vectors: np.ndarray) -> None:
        vectors = np.asarray(vectors, dtype=np.float32)
        if vectors.ndim != 2 or len(words) != vectors.shape[0]:
            raise ValueError("need one row per word")
        keep: list[int] = []
        index: dict[str, int] = {}
        norms = np.linalg.norm(vectors, axis=1)
        for i, w in enumerate(words):
            w = w.lower()
            if w in index or norms[i] == 0.0:
                continue
            index[w] = len(keep)
            keep.append(i)
        self.words = list(index)
        self.index = index
        self.vectors = vectors[keep] / norms[keep, None]
        self.vectors.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.index

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.index[word.lower()]]

    def matrix(self, words: Iterable[str]) -> np.ndarray:
        return self.vectors[[self.index[w.lower()] for w in words]]


# --- file formats -------------------------------------------------------------


def _is_header(parts: list[str]) -> bool:
    return len(parts) == 2 and all(p.isdigit() for p in parts)


def _load_text(path: Path) -> EmbeddingModel:
    words: list[str] = []
    rows: list[np.ndarray] = []
    dim = None
    with path.open(encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            if lineno == 1 and _is_header(parts):
                dim = int(parts[1])
                continue
            if dim is None:
                dim = len(parts) - 1
            if len(parts) - 1 != dim:
                raise DimensionMismatch(
                    f"{path}:{lineno}: expected {dim} values, got {len(parts) - 1}"
                )
            try:
                rows.append(np.array(parts[1:], dtype=np.float32))
            except ValueError as exc:
                raise MalformedVectorFile(f"{path}:{lineno}: {exc}") from exc
            words.append(parts[0])
    if not rows:
        raise MalformedVectorFile(f"{path}: no vectors")
    return EmbeddingModel(words, np.vstack(rows))


def _load_binary(path: Path) -> EmbeddingModel:
    data = path.read_bytes()
    nl = data.find(b"\n")
    header = data[:nl].split() if nl > 0 else []
    if len(header) != 2 or not all(h.isdigit() for h in header):
        raise MalformedVectorFile(f"{path}: missing 'count dim' header")
    count, dim = int(header[0]), int(header[1])
    width = 4 * dim
    vectors = np.empty((count, dim), dtype=np.float32)
    words = []
    pos = nl + 1
    for i in range(count):
        while pos < len(data) and data[pos : pos + 1] in (b"\n", b" "):
            pos += 1
        space = data.find(b" ", pos)
        if space < 0 or space + 1 + width > len(data):
            raise MalformedVectorFile(f"{path}: truncated at entry {i}")
        words.append(data[pos:space].decode("utf-8", errors="replace"))
        vectors[i] = np.frombuffer(data, dtype="<f4", count=dim, offset=space + 1)
        pos = space + 1 + width
    return EmbeddingModel(words, vectors)


def load_embeddings(path: str | Path, format: str = "auto") -> EmbeddingModel:
    """Load whitespace text ("token f1 .. fD", optional header) or binary vectors."""
    path = Path(path)
    if not path.is_file():
        raise MalformedVectorFile(f"{path}: vector file not found")
    if format == "auto":
        format = "binary" if path.suffix == ".bin" else "text"
    if format == "text":
        return _load_text(path)
    if format == "binary":
        return _load_binary(path)
    raise ValueError(f"unknown vector format {format!r}")


def save_binary(model: EmbeddingModel, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(f"{len(model)} {model.dim}\n".encode())
        for w, row in zip(model.words, model.vectors):
            fh.write(w.encode("utf-8") + b" " + row.astype("<f4").tobytes() + b"\n")


def save_text(model: EmbeddingModel, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(model)} {model.dim}\n")
        for w, row in zip(model.words, model.vectors):
            fh.write(w + " " + " ".join(repr(float(x)) for x in row) + "\n")


# --- similarity ---------------------------------------------------------------


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def combine_models(a: EmbeddingModel, b: EmbeddingModel) -> EmbeddingModel:
    """Concatenate unit vectors over the shared vocabulary (in ``a``'s order)."""
    shared = [w for w in a.words if w in b.index]
    if not shared:
        raise EmptyIntersection("the two models share no tokens")
    return EmbeddingModel(shared, np.hstack([a.matrix(shared), b.matrix(shared)]))


def default_candidate_pool(model: EmbeddingModel, size: int | None = DEFAULT_POOL_SIZE) -> tuple[str, ...]:
    """The first ``size`` purely alphabetic tokens; ``None`` keeps them all."""
    pool = [w for w in model.words if w.isalpha()]
    return tuple(pool if size is None else pool[:size])


# --- agents -------------------------------------------------------------------


@dataclass(frozen=True)
class VvParams:
    """Clue search settings.

    With ``threshold`` set, a target qualifies when its similarity to the clue
    is at least the threshold and beats every non-team word. With
    ``threshold=None`` only the ranking test applies, with ``margin`` slack.
    """

    threshold: float | None = 0.7
    candidate_pool: tuple[str, ...] | None = None
    max_targets: int = 9
    margin: float = 0.0


def vv_guess(view: GuesserView, model: EmbeddingModel, clue: Clue) -> str:
    if not clue.word or clue.word not in model:
        raise ClueOutOfVocabulary(clue.word)
    board = [w for w in view.unrevealed if w in model]
    if not board:
        raise BoardWordsAllOutOfVocabulary("no remaining board word is in the vocabulary")
    sims = model.matrix(board) @ model.vector(clue.word)
    best = sims.max()
    return min(w for w, s in zip(board, sims) if s == best)


def vv_clue(view: CodemasterView, model: EmbeddingModel, params: VvParams) -> Clue:
    own = [w for w in view.own_words if w in model]
    if not own:
        raise BoardWordsAllOutOfVocabulary("none of the team's words are in the vocabulary")
    others = [w for w in view.non_team_words if w in model]
    pool = params.candidate_pool or default_candidate_pool(model)
    cands = [c for c in pool if c in model.index]
    if not cands:
        raise EmptyCandidatePool("no candidate clue is in the vocabulary")

    cand_vecs = model.matrix(cands)
    own_sims = cand_vecs @ model.matrix(own).T
    if others:
        worst = (cand_vecs @ model.matrix(others).T).max(axis=1)
    else:
        worst = np.full(len(cands), -np.inf, dtype=np.float32)

    qualifies = own_sims > (worst + params.margin)[:, None]
    if params.threshold is not None:
        qualifies &= own_sims >= params.threshold
    # Keep the strongest max_targets qualifying targets per candidate.
    masked = np.where(qualifies, own_sims, -np.inf)
    top = -np.sort(-masked, axis=1)[:, : params.max_targets]
    finite = np.isfinite(top)
    counts = finite.sum(axis=1)
    totals = np.where(finite, top, 0.0).sum(axis=1, dtype=np.float64)

    unrevealed = view.unrevealed
    names = np.array(cands)
    # lexsort: last key is primary
    order = np.lexsort((names, -totals, -counts))
    for i in order:
        if counts[i] == 0:
            break
        if substring_conflict(cands[i], unrevealed) is None:
            return Clue(cands[i], int(counts[i]))

    # Nothing qualifies: single most distinctive own-team association.
    margins = (own_sims - worst[:, None]).max(axis=1)
    order = np.lexsort((names, -margins))
    for i in order:
        if substring_conflict(cands[i], unrevealed) is None:
            return Clue(cands[i], 1)
    raise EmptyCandidatePool("every candidate clue collides with a board word")


class WordVectorCodemaster(Codemaster):
    def __init__(self, model: EmbeddingModel, params: VvParams | None = None, name: str = "word-vector") -> None:
        self.model = model
        self.params = params or VvParams()
        if self.params.candidate_pool is None:
            self.params = VvParams(
                self.params.threshold, default_candidate_pool(model),
                self.params.max_targets, self.params.margin,
            )
        self.name = name

    def give_clue(self, view: CodemasterView, feedback: str | None = None) -> Clue:
        try:
            return vv_clue(view, self.model, self.params)
        except BoardWordsAllOutOfVocabulary as exc:
            raise NothingToSay("own_words_out_of_vocabulary") from exc


class WordVectorGuesser(Guesser):
    """Guesses by nearest board word; always stops at exactly the clue count."""

    def __init__(self, model: EmbeddingModel, name: str = "word-vector") -> None:
        self.model = model
        self.name = name

    def guess(self, view: GuesserView, feedback: str | None = None) -> str:
        assert view.clue is not None
        try:
            return vv_guess(view, self.model, view.clue)
        except BoardWordsAllOutOfVocabulary as exc:
            raise NothingToSay("board_words_out_of_vocabulary") from exc

    def keep_guessing(self, view: GuesserView, feedback: str | None = None) -> bool:
        assert view.clue is not None
        return view.guesses_this_turn < view.clue.count
