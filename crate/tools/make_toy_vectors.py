"""Builds docs/sample/toy.vec: 64-d PPMI+SVD vectors over the sample texts.

The vocabulary is every non-stop word of the three samples, minus a few
deliberately left out (to exercise out-of-vocabulary handling), padded with
filler words to exactly 500 rows. Output is deterministic.
"""
import collections
import pathlib

import numpy as np

ROOT = pathlib.Path(__file__).resolve().parent.parent
SAMPLES = ["beer", "plum", "florida"]
EXCLUDED = {"india", "okeechobee", "canaveral"}
DIM, ROWS, WINDOW = 64, 500, 4
FILLER = """
apple table window river mountain paper pencil garden engine music science market
village bridge castle forest desert island valley meadow harbor school teacher student
doctor bicycle train airport letter number planet silver copper marble cotton leather
violin guitar piano kitchen bottle basket ladder hammer needle button mirror candle
blanket pillow carpet curtain painting statue temple museum library theater stadium
""".split()


def tokens(text, stop):
    out, cur = [], []
    for ch in text.lower() + " ":
        if ch.isalpha() or ch == "-":
            cur.append(ch)
        else:
            w = "".join(cur).strip("-")
            cur = []
            if w and w not in stop and any(c.isalpha() for c in w):
                out.append(w)
    return out


def main():
    stop = {
        l.strip()
        for l in (ROOT / "crates/core/data/stopwords/english.txt").read_text().splitlines()
        if l.strip() and not l.startswith("#")
    }
    docs = [tokens((ROOT / f"docs/sample/{s}.txt").read_text(), stop) for s in SAMPLES]
    counts = collections.Counter(w for d in docs for w in d)
    vocab = sorted(w for w in counts if w not in EXCLUDED)
    for f in FILLER:
        if len(vocab) >= ROWS:
            break
        if f not in counts:
            vocab.append(f)
    rng = np.random.default_rng(7)
    while len(vocab) < ROWS:
        vocab.append("filler" + "".join(chr(97 + c) for c in rng.integers(0, 26, 6)))
    vocab = vocab[:ROWS]
    index = {w: i for i, w in enumerate(vocab)}

    n = len(vocab)
    co = np.zeros((n, n))
    for doc_id, d in enumerate(docs):
        ids = [index[w] for w in d if w in index]
        for a, i in enumerate(ids):
            for b in range(max(0, a - WINDOW), min(len(ids), a + WINDOW + 1)):
                if a != b:
                    co[i, ids[b]] += 1.0 / abs(a - b)
    total = co.sum()
    row = co.sum(axis=1, keepdims=True)
    col = co.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        pmi = np.log(co * total / (row @ col))
    ppmi = np.where(np.isfinite(pmi) & (pmi > 0), pmi, 0.0)

    u, s, _ = np.linalg.svd(ppmi)
    vec = u[:, :DIM] * np.sqrt(s[:DIM])
    vec += 1e-3 * rng.standard_normal(vec.shape)
    vec /= np.linalg.norm(vec, axis=1, keepdims=True)

    lines = [f"{n} {DIM}"]
    lines += [w + " " + " ".join(f"{x:.6f}" for x in v) for w, v in zip(vocab, vec)]
    (ROOT / "docs/sample/toy.vec").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
