#!/usr/bin/env python3
"""Regenerate verbs.txt and verb_embeddings.tsv from verb_tags.tsv.

Each verb gets a 50-d vector: one coordinate per semantic axis (the tagged
weights) followed by low-amplitude noise seeded by the lemma, so distinct
verbs never collide and the output is reproducible.
"""
import argparse
import random
from pathlib import Path

DIM = 50
NOISE = 0.06


def regular_forms(lemma):
    if lemma.endswith(("s", "sh", "ch", "x", "o")):
        third = lemma + "es"
    elif lemma.endswith("y") and lemma[-2] not in "aeiou":
        third = lemma[:-1] + "ies"
    else:
        third = lemma + "s"
    if lemma.endswith("e"):
        past, ing = lemma + "d", lemma[:-1] + "ing"
    elif lemma.endswith("y") and lemma[-2] not in "aeiou":
        past, ing = lemma[:-1] + "ied", lemma + "ing"
    else:
        past, ing = lemma + "ed", lemma + "ing"
    return [third, past, ing]


def parse(path):
    entries = {}
    for raw in Path(path).read_text().splitlines():
        if not raw.strip() or raw.startswith("#"):
            continue
        lemma, tags, forms, drop = (raw.split("\t") + ["-", "-"])[:4]
        if lemma in entries:
            continue
        axes = {}
        for item in tags.split():
            name, weight = item.split(":")
            axes[name] = float(weight)
        inflected = regular_forms(lemma) if forms == "-" else forms.split(",")
        all_forms = [lemma] + [f for f in inflected if f != lemma]
        dropped = set() if drop == "-" else set(drop.split(","))
        entries[lemma] = (axes, [f for f in all_forms if f not in dropped])
    return entries


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--lexicon-dir", default=Path(__file__).resolve().parent.parent / "data" / "lexicon")
    args = ap.parse_args()
    root = Path(args.lexicon_dir)
    entries = parse(root / "verb_tags.tsv")
    axes = sorted({a for tags, _ in entries.values() for a in tags})
    if len(axes) > DIM:
        raise SystemExit(f"{len(axes)} axes exceed {DIM} dimensions")

    with open(root / "verbs.txt", "w") as out:
        out.write("# lemma <TAB> space-separated surface forms that map to it\n")
        for lemma, (_, forms) in entries.items():
            out.write(lemma + "\t" + " ".join(forms) + "\n")

    with open(root / "verb_embeddings.tsv", "w") as out:
        for lemma, (tags, _) in entries.items():
            rng = random.Random("verb:" + lemma)
            vec = [rng.uniform(-NOISE, NOISE) for _ in range(DIM)]
            for i, axis in enumerate(axes):
                vec[i] += tags.get(axis, 0.0)
            out.write(lemma + "\t" + " ".join(f"{v:.5f}" for v in vec) + "\n")


if __name__ == "__main__":
    main()
