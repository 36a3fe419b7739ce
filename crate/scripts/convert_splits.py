#!/usr/bin/env python3
"""Converts split_<i>.npz mask files to the text split format.

    convert_splits.py <dir with split_0.npz..split_9.npz> <output splits dir>

Each output file holds three lines, `train <ids>`, `val <ids>`, `test <ids>`.
"""
import sys
from pathlib import Path

import numpy as np


def main(src: Path, dst: Path) -> None:
    dst.mkdir(parents=True, exist_ok=True)
    for i in range(10):
        masks = np.load(src / f"split_{i}.npz")
        lines = []
        for part in ("train", "val", "test"):
            ids = np.flatnonzero(masks[f"{part}_mask"])
            lines.append(" ".join([part, *map(str, ids)]))
        (dst / f"split_{i}.txt").write_text("\n".join(lines) + "\n")


if __name__ == "__main__":
    if len(sys.argv) != 3:
        sys.exit(__doc__)
    main(Path(sys.argv[1]), Path(sys.argv[2]))
