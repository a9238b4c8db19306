#!/usr/bin/env python3
"""Verify the local UCI benchmark files the acceptance suite wants.

The six tables are looked up in $SEMISOM_UCI_DIR (default ./data/uci) as
<name>.arff or <name>.csv. For each one the script reports whether it is
present, loads, and matches the expected shape and class count. Exit code 0
when everything checks out, 1 otherwise.

These are classic UCI benchmarks, easiest to grab in ARFF form from a Weka
dataset mirror, for example:
  https://github.com/renatopp/arff-datasets  (datasets/classification/*.arff)
Download, rename to the short names below, and drop them in the data
directory. Files are normalized and label-encoded on load, so the exact
attribute order inside each file does not matter.
"""

import os
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from semisom import SemisomError, load_dataset

EXPECTED = {
    # name: (rows, feature columns, classes)
    "breast": (198, 33, 2),
    "diabetes": (768, 8, 2),
    "glass": (214, 9, 6),
    "liver": (345, 6, 2),
    "shape": (160, 17, 9),
    "vowel": (990, 10, 11),
}


def find_file(root: Path, name: str) -> Path | None:
    for suffix in (".arff", ".csv"):
        p = root / f"{name}{suffix}"
        if p.exists():
            return p
    return None


def main() -> int:
    root = Path(os.environ.get("SEMISOM_UCI_DIR", "data/uci"))
    print(f"looking in {root.resolve()}")
    ok = True
    for name, (rows, dim, classes) in EXPECTED.items():
        path = find_file(root, name)
        if path is None:
            print(f"  {name:9s} MISSING  (want {name}.arff or {name}.csv)")
            ok = False
            continue
        try:
            ds = load_dataset(path)
        except SemisomError as exc:
            print(f"  {name:9s} BROKEN   {exc}")
            ok = False
            continue
        got = (ds.n_samples, ds.dim, ds.class_count)
        if got == (rows, dim, classes):
            print(f"  {name:9s} ok       {rows} x {dim}, {classes} classes")
        else:
            print(
                f"  {name:9s} MISMATCH have {got[0]} x {got[1]} with {got[2]} classes, "
                f"want {rows} x {dim} with {classes}"
            )
            ok = False
    if not ok:
        print("\nsome files are missing or wrong; the acceptance test for the"
              " benchmark targets will skip until this passes")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
