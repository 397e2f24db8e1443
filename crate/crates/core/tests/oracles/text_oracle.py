"""Independent reference computations for the text pipeline fixtures.

Word segmentation comes from `uniseg` (a pure-Python UAX #29
implementation) and grapheme clusters from the `regex` module's `\X`.
Both follow the Unicode segmentation rules the library implements, but
through unrelated implementations. The `regex` module's own `\b` is not
used: it keeps a leading apostrophe attached to the following word
("'em"), which UAX #29 does not.

Outputs:
  fixtures/oracle/eng.tokens    one "token<TAB>grapheme count" line per token
  fixtures/mini/golden_morph.json
"""
import json
import math
import unicodedata
from pathlib import Path

import regex
from uniseg.wordbreak import words

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def lexical(seg):
    return any(unicodedata.category(ch)[0] in "LM" or unicodedata.category(ch) == "Nd" for ch in seg)


def tokenize(text):
    text = unicodedata.normalize("NFC", text)
    return [seg for seg in words(text) if lexical(seg)]


def graphemes(tok):
    return len(regex.findall(r"\X", tok))


def mwl(tokens):
    return sum(graphemes(t) for t in tokens) / len(tokens)


def h2(p):
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def bins(values):
    out = {}
    for v in values:
        k = math.floor(v / 1.0)
        out[k] = out.get(k, 0.0) + 1.0
    return out


def ti(values):
    b = bins(values)
    n = len(values)
    return sum(h2(c / n) for c in b.values()) / len(b)


def profiles(directory):
    return {p.stem: mwl(tokenize(p.read_text(encoding="utf-8"))) for p in sorted(directory.glob("*.txt"))}


def main():
    eng = tokenize((FIXTURES / "corpora" / "eng.txt").read_text(encoding="utf-8"))
    with open(FIXTURES / "oracle" / "eng.tokens", "w", encoding="utf-8") as f:
        for t in eng:
            f.write(f"{t}\t{graphemes(t)}\n")

    ref = profiles(FIXTURES / "mini" / "reference")
    data = profiles(FIXTURES / "mini" / "dataset")
    rb, db = bins(ref.values()), bins(data.values())
    na, nb = len(data), len(ref)
    c = max(na, nb) / min(na, nb)
    if na < nb:
        db = {k: v * c for k, v in db.items()}
    elif nb < na:
        rb = {k: v * c for k, v in rb.items()}
    rows = []
    for k in sorted(set(rb) | set(db)):
        r, d = rb.get(k, 0.0), db.get(k, 0.0)
        rows.append({"bin": f"[{k},{k + 1})", "reference": r, "dataset": d, "min": min(r, d), "max": max(r, d)})
    jmm = sum(r["min"] for r in rows) / sum(r["max"] for r in rows)
    members = {}
    for iso, v in ref.items():
        members.setdefault(f"[{math.floor(v)},{math.floor(v) + 1})", []).append(iso)
    surplus = [{"bin": r["bin"], "excess": r["dataset"] - r["reference"]} for r in rows if r["dataset"] > r["reference"]]
    deficit = [
        {"bin": r["bin"], "shortfall": r["reference"] - r["dataset"], "examples": sorted(members.get(r["bin"], []))[:5]}
        for r in rows if r["dataset"] < r["reference"]
    ]
    golden = {
        "reference_mwl": ref,
        "dataset_mwl": data,
        "normalization_c": c,
        "jmm_morph": jmm,
        "ti_morph_dataset": ti(list(data.values())),
        "ti_morph_reference": ti(list(ref.values())),
        "per_bin": rows,
        "gap": {"surplus_bins": surplus, "deficit_bins": deficit},
    }
    (FIXTURES / "mini" / "golden_morph.json").write_text(json.dumps(golden, indent=2, ensure_ascii=False) + "\n")
    print(json.dumps({k: golden[k] for k in ("normalization_c", "jmm_morph", "ti_morph_dataset")}))
    print(ref, data)


if __name__ == "__main__":
    main()
