#!/usr/bin/env python3
"""Checks the stored /classify golden reply against independent recomputation.

Per-chunk probabilities come from a numpy forward pass of the fixture model
over the stored feature vectors; distribution, overall score, difficulty,
reading age and extremes are recomputed from those probabilities; the reply is
validated against the response schema the engine publishes.

usage: golden_oracle.py FIXTURES_DIR KEYSTAGE_BINARY
"""
import json
import math
import subprocess
import sys
from pathlib import Path

import jsonschema
import numpy as np

STAGES = ["KS2", "KS3", "KS4", "KS5"]
AGES = {2: (7, 11), 3: (11, 14), 4: (14, 16), 5: (16, 18)}


def forward(model, x):
    a = (x - np.array(model["scaler"]["mean"])) / np.array(model["scaler"]["std"])
    for layer in model["layers"][:-1]:
        a = np.maximum(a @ np.array(layer["w"]).T + np.array(layer["b"]), 0.0)
    out = model["layers"][-1]
    logits = a @ np.array(out["w"]).T + np.array(out["b"])
    logits -= logits.max(axis=1, keepdims=True)
    e = np.exp(logits)
    return e / e.sum(axis=1, keepdims=True)


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(1.0, abs(b))


def main():
    fixtures, binary = Path(sys.argv[1]), sys.argv[2]
    model = json.loads((fixtures / "engine_model.json").read_text())
    feats = json.loads((fixtures / "service_golden_features.json").read_text())
    golden = json.loads((fixtures / "service_golden.json").read_text())
    failures = []

    def check(ok, what):
        if not ok:
            failures.append(what)

    schema = json.loads(subprocess.run([binary, "schema"], check=True,
                                       capture_output=True, text=True).stdout)
    jsonschema.validate(golden, schema)

    chunks = golden["chunks"]
    check(len(chunks) == len(feats["chunks"]), "chunk count")
    x = np.array([c["features"] for c in feats["chunks"]], dtype=float)
    probs = forward(model, x)
    labels, confs = [], []
    for i, (c, f, p) in enumerate(zip(chunks, feats["chunks"], probs)):
        check(c["chunk_id"] == f["chunk_id"], f"chunk {i} id")
        for k, s in enumerate(STAGES):
            check(close(c["probabilities"][s], p[k], 1e-12), f"chunk {i} p[{s}]")
        label = int(np.argmax(p))
        labels.append(label + 2)
        confs.append(float(p[label]))
        check(c["label"] == STAGES[label], f"chunk {i} label")
        check(close(c["confidence"], p[label], 1e-12), f"chunk {i} confidence")
        check(close(c["difficulty"], float(np.dot(p, [2, 3, 4, 5]))), f"chunk {i} difficulty")
        check(close(golden["difficulty_series"][i]["score"], c["difficulty"], 0),
              f"series {i}")

    n = len(labels)
    for k, s in enumerate(STAGES):
        check(close(golden["distribution"][s], labels.count(k + 2) / n, 1e-15), f"distribution {s}")
    score = sum(l * c for l, c in zip(labels, confs)) / sum(confs)
    check(close(golden["overall_score"], score), "overall score")
    stage = min(5, max(2, math.floor(score + 0.5)))
    rec = golden["recommendation"]
    check(rec["stage"] == f"KS{stage}", "recommended stage")
    check((rec["min_age"], rec["max_age"]) == AGES[stage], "age band")

    diffs = [c["difficulty"] for c in chunks]
    check(golden["most_complex"]["chunk"] == diffs.index(max(diffs)), "most complex")
    check(golden["least_complex"]["chunk"] == diffs.index(min(diffs)), "least complex")

    for f in failures:
        print("FAIL:", f)
    print(f"{len(chunks)} chunks checked, {len(failures)} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
