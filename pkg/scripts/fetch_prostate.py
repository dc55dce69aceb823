"""Download the prostate cancer data and write it as a plain CSV.

    python scripts/fetch_prostate.py [--out data/prostate.csv]

The tab-separated file distributed with The Elements of Statistical Learning
carries a T/F ``train`` column; it is kept as ``train``. When that host is
unreachable the same 97 measurements are taken from the ``faraway`` package
(``pip install faraway``), which has no train/test flag.
"""

import argparse
import csv
import io
import sys
import urllib.request
from pathlib import Path

URL = "https://hastie.su.domains/ElemStatLearn/datasets/prostate.data"
COLUMNS = ["lcavol", "lweight", "age", "lbph", "svi", "lcp", "gleason", "pgg45", "lpsa"]


def from_esl(timeout=20):
    with urllib.request.urlopen(URL, timeout=timeout) as resp:
        text = resp.read().decode("utf-8")
    rows = list(csv.reader(io.StringIO(text), delimiter="\t"))
    header = rows[0]
    # the first header cell is empty: the file's first column is a row number
    if header[0].strip():
        header = [""] + header
    keep = COLUMNS + ["train"]
    idx = [header.index(c) for c in keep]
    return keep, [[r[i].strip() for i in idx] for r in rows[1:] if r]


def from_faraway():
    from faraway.datasets import prostate

    df = prostate.load()
    return COLUMNS, [[repr(float(v)) if isinstance(v, float) else str(v) for v in row]
                     for row in df[COLUMNS].itertuples(index=False)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=Path(__file__).resolve().parent.parent / "data" / "prostate.csv")
    args = ap.parse_args(argv)
    try:
        header, rows = from_esl()
        source = URL
    except OSError as exc:
        print(f"download failed ({exc}); trying the faraway package", file=sys.stderr)
        try:
            header, rows = from_faraway()
        except ImportError:
            print("faraway is not installed; run `pip install faraway` and retry",
                  file=sys.stderr)
            return 1
        source = "faraway.datasets.prostate"
    if len(rows) != 97:
        print(f"expected 97 rows, got {len(rows)}", file=sys.stderr)
        return 1
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(f"wrote {len(rows)} rows from {source} to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
