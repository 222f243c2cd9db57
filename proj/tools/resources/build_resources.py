#!/usr/bin/env python3
"""Regenerates the derived files under resources/ from textblob's English
data directory (PDDL) and the hand-authored seeds next to this script.

usage: build_resources.py TEXTBLOB_EN_DIR RESOURCES_DIR
"""
import collections
import re
import sys
import xml.etree.ElementTree as ET
from pathlib import Path

HERE = Path(__file__).resolve().parent

FUNCTION_WORDS = set("""
a an the this that these those each every some any no all both either neither another such
i me my mine myself you your yours yourself yourselves he him his himself she her hers herself
it its itself we us our ours ourselves they them their theirs themselves
about above across after against along among around at before behind below beneath beside
between beyond by despite down during except for from in inside into near of off on onto out
outside over past per round through throughout till to toward towards under until up upon with
within without and but or nor yet so although because though unless whereas while if since
what which who whom whose when where why how can could will would shall should may might must
be am is are was were been being have has had having do does did not than there as too very
just then also only even here
""".split())

# Everyday words that a frequency cut over literary text misses.
EASY_SUPPLEMENT = """
cat sat dog mat hat bat rat pig hen cow fox sun run fun bus bed red box toy ball doll book tree
mum dad baby milk cake egg jam tea cup pen bag kite frog duck fish bird ant bee bug ship boat
car van hop jump skip swim sing play walk talk look see yes no hello bye
""".split()

TARGET_EASY = 3000
TARGET_OXFORD = 3000


def read_frequencies(en_dir):
    freq = {}
    for line in (en_dir / "en-spelling.txt").read_text(encoding="utf-8").splitlines():
        if line.startswith(";;;") or not line.strip():
            continue
        word, count = line.split()
        freq[word] = int(count)
    return freq


def read_lexicon(en_dir):
    tags = collections.defaultdict(set)
    for line in (en_dir / "en-lexicon.txt").read_text(encoding="utf-8").splitlines():
        if line.startswith(";;;") or not line.strip():
            continue
        parts = line.split()
        if len(parts) >= 2:
            tags[parts[0]].add(parts[1])
    return tags


def ranked_words(freq, tags):
    alpha = re.compile(r"^[a-z]+$")
    words = [w for w in freq if alpha.match(w) and w in tags]
    words.sort(key=lambda w: (-freq[w], w))
    return words


def write_list(path, header, words):
    path.write_text(header + "\n".join(sorted(set(words))) + "\n", encoding="utf-8")


def build_affect(en_dir, out_path):
    root = ET.parse(en_dir / "en-sentiment.xml").getroot()
    senses = collections.defaultdict(list)
    for w in root.iter("word"):
        form = w.get("form", "").lower()
        if not re.match(r"^[a-z][a-z'-]*$", form):
            continue
        senses[form].append((float(w.get("polarity")), float(w.get("subjectivity"))))
    emotions = collections.defaultdict(set)
    for line in (HERE / "emotions.txt").read_text(encoding="utf-8").splitlines():
        if line.startswith("#") or ":" not in line:
            continue
        name, words = line.split(":", 1)
        for word in words.split():
            emotions[word].add(name.strip())
    order = ["fear", "anger", "anticipation", "trust", "surprise", "sadness", "disgust", "joy"]
    rows = []
    for word in sorted(set(senses) | set(emotions)):
        vals = senses.get(word, [])
        pol = sum(p for p, _ in vals) / len(vals) if vals else 0.0
        sub = sum(s for _, s in vals) / len(vals) if vals else 0.0
        emo = ",".join(e for e in order if e in emotions[word])
        rows.append(f"{word}\t{pol:.4f}\t{sub:.4f}\t{emo}")
    header = ("# word<TAB>polarity<TAB>subjectivity<TAB>emotions\n"
              "# polarity/subjectivity: textblob en-sentiment.xml (PDDL), mean over senses\n"
              "# emotions: hand-authored seed lists\n")
    out_path.write_text(header + "\n".join(rows) + "\n", encoding="utf-8")


def build_families(awl_path, out_path, known):
    lines = []
    heads = [line.strip() for line in awl_path.read_text(encoding="utf-8").splitlines()
             if line.strip() and not line.startswith("#")]
    for head in heads:
        forms = {head}
        stem = head[:-1] if head.endswith("e") else head
        for cand in (head + "s", head + "d", stem + "ed", stem + "ing", head + "es",
                     stem + "ation", stem + "ive", stem + "ment", head + "ment", stem + "ity",
                     head + "ly", head + "al", stem + "ion", stem + "er", stem + "or"):
            if cand in known:
                forms.add(cand)
        if head.endswith("ise"):
            forms.add(head[:-3] + "ize")
            for suffix in ("ised", "ises", "ising", "isation"):
                forms.add(head[:-3] + suffix)
                forms.add(head[:-3] + suffix.replace("is", "iz", 1))
        if head.endswith("yse"):
            base = head[:-3]
            forms |= {base + "yze", base + "ysed", base + "yzed", base + "ysis", base + "ytic",
                      base + "yses", base + "yzes", base + "ysing", base + "yzing"}
        lines.append(head + ": " + " ".join(sorted(forms - {head})))
    out_path.write_text("# head: family members (regular derivations and spelling variants)\n"
                        + "\n".join(lines) + "\n", encoding="utf-8")


def main():
    en_dir, res = Path(sys.argv[1]), Path(sys.argv[2])
    freq = read_frequencies(en_dir)
    tags = read_lexicon(en_dir)
    ranked = ranked_words(freq, tags)

    easy = ranked[:TARGET_EASY - len(EASY_SUPPLEMENT)] + EASY_SUPPLEMENT
    write_list(res / "wordlists" / "dale_chall.txt",
               "# Familiar-word list: frequency-ranked stand-in, see resources/README.md\n", easy)

    content = [w for w in ranked if w not in FUNCTION_WORDS and len(w) > 1]
    write_list(res / "wordlists" / "oxford3000.txt",
               "# Core learner vocabulary: frequency-ranked stand-in, see resources/README.md\n",
               content[:TARGET_OXFORD])

    awl_src = HERE / "awl_headwords.txt"
    heads = [w for line in awl_src.read_text(encoding="utf-8").splitlines()
             if not line.startswith("#") for w in line.split()]
    assert len(heads) == 570, len(heads)
    write_list(res / "wordlists" / "awl.txt", "# Academic Word List headwords (570)\n", heads)
    build_families(res / "wordlists" / "awl.txt", res / "wordlists" / "awl_families.txt",
                   set(freq) | set(tags))
    build_affect(en_dir, res / "affect.tsv")


if __name__ == "__main__":
    main()
