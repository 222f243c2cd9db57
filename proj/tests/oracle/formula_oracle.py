#!/usr/bin/env python3
"""Independent evaluation of the readability and diversity formulas.

Written separately from the C++ sources: its own regex tokenizer, sentence
splitter, syllable counter and inflection handling. The corpus avoids the
abbreviation/decimal cases so a plain splitter is enough. Output is frozen
into tests/fixtures/formula_oracle.json and compared by test_lingfeat.

usage: formula_oracle.py CORPUS_DIR FAMILIAR_WORDS OUT_JSON
"""
import json
import math
import re
import sys
from collections import Counter
from pathlib import Path

WORD = re.compile(r"[A-Za-z0-9]+(?:['\-][A-Za-z0-9]+)*")
TOKEN = re.compile(r"[A-Za-z0-9]+(?:['\-][A-Za-z0-9]+)*|\S")
CLOSERS = {'"', "'", ")", "]", "}"}


def tokens_with_gaps(text):
    out, last = [], 0
    for m in TOKEN.finditer(text):
        gap = text[last:m.start()]
        out.append((m.group(), gap.count("\n"), m.start() == 0 or gap != ""))
        last = m.end()
    return out


def sentences(text):
    toks = tokens_with_gaps(text)
    result, current, i = [], [], 0
    while i < len(toks):
        surface, newlines, spaced = toks[i]
        if current and newlines >= 2:
            result.append(current)
            current = []
        current.append(surface)
        i += 1
        if surface in ".!?":
            while i < len(toks) and toks[i][0] in ".!?" and not toks[i][2]:
                current.append(toks[i][0])
                i += 1
            while i < len(toks) and toks[i][0] in CLOSERS and not toks[i][2]:
                current.append(toks[i][0])
                i += 1
            result.append(current)
            current = []
    if current:
        result.append(current)
    return [[t for t in s if WORD.fullmatch(t)] for s in result]


def syllables(word):
    total = 0
    for part in word.split("-"):
        letters = "".join(c for c in part.lower() if c.isalpha())
        groups = len(re.findall(r"[aeiouy]+", letters))
        if len(letters) >= 2 and letters[-1] == "e" and letters[-2] not in "aeiouyl" and groups:
            groups -= 1
        total += max(groups, 1)
    return total


def alnum(word):
    return sum(1 for c in word if c.isalnum())


def familiar(word, easy):
    w = word[:-2] if word.endswith("'s") and len(word) > 2 else word
    if w in easy:
        return True
    bases = []
    for suffix, repl in (("ies", "y"), ("ied", "y"), ("ier", "y"), ("iest", "y"),
                         ("es", ""), ("s", "")):
        if w.endswith(suffix) and len(w) > len(suffix) + 1:
            bases.append(w[: -len(suffix)] + repl)
    for suffix in ("ed", "ing", "er", "est"):
        if w.endswith(suffix) and len(w) > len(suffix) + 1:
            stem = w[: -len(suffix)]
            bases += [stem, stem + "e"]
            if len(stem) >= 2 and stem[-1] == stem[-2]:
                bases.append(stem[:-1])
    return any(b in easy for b in bases)


def evaluate(text, easy):
    sents = [s for s in sentences(text) if s]
    words = [w for s in sents for w in s]
    N, S = len(words), len(sents)
    lower = [w.lower() for w in words]
    freq = Counter(lower)
    V = len(freq)
    V1 = sum(1 for f in freq.values() if f == 1)
    chars = sum(alnum(w) for w in words)
    syl = sum(syllables(w) for w in words)
    long_words = sum(1 for w in words if alnum(w) > 6)
    poly = sum(1 for w in words if syllables(w) >= 3)
    difficult = sum(1 for w in lower if any(c.isalpha() for c in w) and not familiar(w, easy))

    # Yule's K from the raw frequency list: sum f^2 equals sum m^2 V_m.
    yule = 1e4 * (sum(f * f for f in freq.values()) - N) / (N * N)
    simpson = sum(f * (f - 1) for f in freq.values()) / (N * (N - 1)) if N >= 2 else 0.0
    herdan = math.log(N) / math.log(V) if V > 1 else 0.0
    brunet = N ** (V ** -0.165)
    honore = 100 * math.log(N) / (1 - V1 / V) if V1 != V else 0.0

    wps, spw = N / S, syl / N
    return {
        "operands": {"words": N, "sentences": S, "unique": V, "hapax": V1, "characters": chars,
                     "syllables": syl, "long": long_words, "polysyllables": poly,
                     "difficult": difficult},
        "diversity": {"ttr": V / N, "yule_k": yule, "simpson_d": simpson, "herdan_c": herdan,
                      "brunet_w": brunet, "honore_r": honore},
        "readability": {
            "kincaid": 0.39 * wps + 11.8 * spw - 15.59,
            "ari": 4.71 * chars / N + 0.5 * wps - 21.43,
            "coleman_liau": 0.0588 * (100 * chars / N) - 0.296 * (100 * S / N) - 15.8,
            "flesch": 206.835 - 1.015 * wps - 84.6 * spw,
            "gunning_fog": 0.4 * (wps + 100 * poly / N),
            "lix": wps + 100 * long_words / N,
            "smog": 1.0430 * math.sqrt(poly * 30 / S) + 3.1291,
            "rix": long_words / S,
            "dale_chall": 0.1579 * (100 * difficult / N) + 0.0496 * wps,
        },
    }


def main():
    corpus, easy_path, out = Path(sys.argv[1]), Path(sys.argv[2]), Path(sys.argv[3])
    easy = {l.strip().lower() for l in easy_path.read_text(encoding="utf-8").splitlines()
            if l.strip() and not l.startswith("#")}
    result = {p.name: evaluate(p.read_text(encoding="utf-8"), easy)
              for p in sorted(corpus.glob("*.txt"))}
    out.write_text(json.dumps(result, indent=1, sort_keys=True) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
