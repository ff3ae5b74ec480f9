#!/usr/bin/env python3
# Copyright 2026 The Exp4Fuse Authors
# SPDX-License-Identifier: Apache-2.0
"""Generates the bundled synthetic retrieval dataset used by the end-to-end tests.

Each of the 20 topics has a short query whose words overlap weakly with the
relevant passages (which use topical vocabulary) and strongly with a few
distractor passages. The mock LLM fixtures answer every expansion prompt
with text drawn from the topical vocabulary, so expanded routes can close
the vocabulary gap.

Usage: make_synthetic.py OUTPUT_DIR
"""
import json
import random
import sys
from pathlib import Path

N_TOPICS = 20
N_DOCS = 200
SEED = 20240611

ONSETS = ["b", "c", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "pl", "gr", "tr"]
VOWELS = ["a", "e", "i", "o", "u", "ai", "ou", "ea"]
CODAS = ["", "n", "r", "s", "l", "m", "x", "th"]

HYDE_TEMPLATE = "Please write a passage to answer the question. [question_text]"
MULTI_TEMPLATE = "Your task is to generate five different versions of the given question. [query]"
STEPBACK_TEMPLATE = "What are the principles or mechanisms behind this question? [query]"


def make_words(rng, count, taken):
    words = []
    while len(words) < count:
        w = "".join(rng.choice(ONSETS) + rng.choice(VOWELS) + rng.choice(CODAS) for _ in range(rng.choice([2, 3])))
        if w not in taken:
            taken.add(w)
            words.append(w)
    return words


def main(out_dir):
    rng = random.Random(SEED)
    taken = set()
    common = make_words(rng, 80, taken)
    query_words = [make_words(rng, 3, taken) for _ in range(N_TOPICS)]
    topic_words = [make_words(rng, 12, taken) for _ in range(N_TOPICS)]

    def filler(n):
        return [rng.choice(common) for _ in range(n)]

    docs, qrels = [], []

    def add_doc(tokens, topic=None, grade=0):
        doc_id = f"D{len(docs):04d}"
        rng.shuffle(tokens)
        docs.append((doc_id, " ".join(tokens)))
        if topic is not None and grade > 0:
            qrels.append((f"Q{topic:02d}", doc_id, grade))

    for t in range(N_TOPICS):
        qw, tw = query_words[t], topic_words[t]
        add_doc([qw[0]] + rng.sample(tw, 8) + filler(14), t, 3)
        add_doc(rng.sample(tw, 8) + filler(14), t, 2)
        add_doc([qw[1]] + rng.sample(tw, 4) + filler(18), t, 1)
        add_doc([qw[2]] + rng.sample(tw, 4) + filler(18), t, 1)
        for _ in range(3):
            other = topic_words[(t + 1 + rng.randrange(N_TOPICS - 1)) % N_TOPICS]
            add_doc(rng.sample(qw, 2) + rng.sample(other, 3) + filler(16))
    while len(docs) < N_DOCS:
        add_doc(filler(22))

    queries = [(f"Q{t:02d}", " ".join(query_words[t])) for t in range(N_TOPICS)]

    fixtures = []
    for t, (qid, text) in enumerate(queries):
        tw = topic_words[t]
        hypo = " ".join(rng.sample(tw, 10) + [query_words[t][0]] + filler(8))
        variants = "\n".join(
            f"{i + 1}. {' '.join(rng.sample(query_words[t], 2) + rng.sample(tw, 2))}" for i in range(5))
        stepback = " ".join(rng.sample(tw, 6) + filler(10))
        fixtures.append({"prompt": HYDE_TEMPLATE.replace("[question_text]", text), "response": hypo})
        fixtures.append({"prompt": MULTI_TEMPLATE.replace("[query]", text), "response": variants})
        fixtures.append({"prompt": STEPBACK_TEMPLATE.replace("[query]", text), "response": stepback})

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "corpus.tsv", "w", newline="\n") as f:
        for doc_id, text in docs:
            f.write(f"{doc_id}\t{text}\n")
    with open(out / "queries.tsv", "w", newline="\n") as f:
        for qid, text in queries:
            f.write(f"{qid}\t{text}\n")
    with open(out / "qrels.txt", "w", newline="\n") as f:
        for qid, doc_id, grade in qrels:
            f.write(f"{qid} 0 {doc_id} {grade}\n")
    with open(out / "mock_fixtures.jsonl", "w", newline="\n") as f:
        for fx in fixtures:
            f.write(json.dumps(fx) + "\n")


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    main(sys.argv[1])
