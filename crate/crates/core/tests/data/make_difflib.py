"""Freezes difflib.SequenceMatcher ratios (no junk, autojunk off) for the
gestalt tests. Run from this directory: python3 make_difflib.py"""
import difflib
import json
import random

rng = random.Random(20240917)


def ratio(a, b):
    return difflib.SequenceMatcher(None, a, b, autojunk=False).ratio()


pairs = []
for _ in range(400):
    alphabet = rng.choice(["ab", "abc", "abcd", "xyz "])
    a = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 14)))
    b = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 14)))
    pairs.append([a, b])
pairs += [
    ["abcd", "bcde"],
    ["Software Engineer", "software engineer"],
    ["2024", "Engineer"],
    ["abc", "xyz"],
    ["abbcbcbcab", "cbb"],
    ["cbb", "abbcbcbcab"],
    ["services and hardware", "servicesand hardware"],
    ["café ünïcödé", "cafe unicode"],
    ["$18.50 per hour", "$22.75 per hour"],
]
# long enough that difflib's autojunk heuristic would matter if it were on
long_a = "".join(rng.choice("ab ") for _ in range(260))
long_b = "".join(rng.choice("ab ") for _ in range(240))
pairs.append([long_a, long_b])

with open("difflib_ratios.json", "w") as fh:
    json.dump([{"a": a, "b": b, "ratio": ratio(a, b)} for a, b in pairs], fh, ensure_ascii=False, indent=0)
