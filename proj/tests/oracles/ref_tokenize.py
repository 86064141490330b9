#!/usr/bin/env python3
"""Reference tokenizer: ASCII-lowercase, every byte outside [a-z0-9]
becomes a separator, whitespace split, stop words dropped.

Usage: ref_tokenize.py SAMPLE STOPWORDS OUT
OUT gets one "line<TAB>count" row per input line, then "word<TAB>count"
totals sorted by word after a "#words" marker."""
import collections
import re
import sys


def tokenize(raw: bytes, stop):
    cleaned = re.sub(rb"[^a-z0-9]", b" ", raw.lower())
    return [t.decode() for t in cleaned.split() if t.decode() not in stop]


def main(sample, stopwords, out_path):
    with open(stopwords, encoding="utf-8") as f:
        stop = {w.strip() for w in f if w.strip()}
    totals = collections.Counter()
    lengths = []
    with open(sample, "rb") as f:
        for raw in f.read().split(b"\n")[:-1]:
            toks = tokenize(raw, stop)
            lengths.append(len(toks))
            totals.update(toks)
    with open(out_path, "w", encoding="utf-8", newline="\n") as out:
        for i, n in enumerate(lengths):
            out.write(f"{i}\t{n}\n")
        out.write("#words\n")
        for w in sorted(totals):
            out.write(f"{w}\t{totals[w]}\n")


if __name__ == "__main__":
    main(*sys.argv[1:4])
