"""Build the desk-scale vector files used by the word-vector tournaments.

Two independently trained public embedding sets are cut down to a shared
vocabulary (the most frequent alphabetic GloVe tokens plus the board pool):

* ``glove100_desk.bin`` - GloVe 6B 100d, from the npm package
  ``wink-embeddings-sg-100d`` (PDDL). Fetch with ``npm pack wink-embeddings-sg-100d``.
* ``wordllama256_desk.bin`` - WordLlama ``l2_supercat`` 256d static token
  embeddings (``pip install wordllama``), mean-pooled per word.

Usage::

    python scripts/prepare_desk_vectors.py --glove-tgz wink-embeddings-sg-100d-1.1.0.tgz
"""

from __future__ import annotations

import argparse
import json
import tarfile
from pathlib import Path

import numpy as np

from codenames_bench.embeddings import EmbeddingModel, save_binary
from codenames_bench.game import load_wordlist


def read_wink_glove(tgz: Path) -> tuple[list[str], dict[str, list[float]], int]:
    with tarfile.open(tgz) as tar:
        member = tar.getmember("package/wink-embeddings-sg-100d.json")
        data = json.load(tar.extractfile(member))
    dim = int(data["dimensions"])
    return data["words"], data["vectors"], dim


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--glove-tgz", type=Path, required=True)
    parser.add_argument("--vocab-size", type=int, default=10_000)
    parser.add_argument("--out-dir", type=Path, default=Path("data/vectors"))
    args = parser.parse_args()

    words, table, dim = read_wink_glove(args.glove_tgz)
    pool = load_wordlist()
    vocab: list[str] = []
    seen: set[str] = set()
    for w in words:
        if len(vocab) >= args.vocab_size:
            break
        if len(w) >= 3 and w.isascii() and w.isalpha() and w.islower() and w not in seen:
            vocab.append(w)
            seen.add(w)
    vocab += [w for w in pool if w not in seen and w in table]
    missing = [w for w in pool if w not in table]
    if missing:
        print(f"pool words absent from GloVe: {missing}")

    glove = np.array([table[w][:dim] for w in vocab], dtype=np.float32)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    save_binary(EmbeddingModel(vocab, glove), args.out_dir / "glove100_desk.bin")

    import wordllama
    from wordllama import WordLlama

    wl = WordLlama.load(dim=256, cache_dir=Path(wordllama.__file__).parent, disable_download=True)
    llama = np.asarray(wl.embed(vocab, norm=False), dtype=np.float32)
    save_binary(EmbeddingModel(vocab, llama), args.out_dir / "wordllama256_desk.bin")
    print(f"wrote {len(vocab)} words to {args.out_dir}")


if __name__ == "__main__":
    main()
