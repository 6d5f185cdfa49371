#!/usr/bin/env python3
"""Line-delimited JSON tagger fixture: {"text": ...} -> {"tokens": [...]}."""
import json
import re
import sys

NOUNS = {"people", "carriage", "horses", "horse", "cat", "dog", "tree", "man",
         "men", "stream", "hat", "children", "floor", "table", "drinks"}
VERBS = {"riding", "pulled", "walks", "ride", "pull", "nap", "wearing",
         "resting", "having"}

for line in sys.stdin:
    req = json.loads(line)
    text = req["text"]
    tokens = []
    for m in re.finditer(r"[A-Za-z0-9-]+", text):
        w = m.group(0).lower()
        pos = "NOUN" if w in NOUNS else "VERB" if w in VERBS else "OTHER"
        tokens.append({"surface": m.group(0), "pos": pos,
                       "char_offset": m.start()})
    print(json.dumps({"tokens": tokens}), flush=True)
