#!/usr/bin/env python3
"""Re-encodes the pickled citation-graph release as plain text.

    convert_planetoid.py <raw dir> <cora|citeseer|pubmed> <output dir>

Writes features.txt (`nodes N dim d`, then sparse `index:value` rows),
labels.txt (one class id per line) and edges.txt (`u v` per line). Test
nodes are put back in their original positions; CiteSeer's isolated test
ids with no features get all-zero rows and class 0.
"""
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse as sp


def load(raw: Path, name: str, part: str):
    with open(raw / f"ind.{name}.{part}", "rb") as f:
        return pickle.load(f, encoding="latin1")


def main(raw: Path, name: str, out: Path) -> None:
    x, y, tx, ty, allx, ally, graph = (
        load(raw, name, p) for p in ("x", "y", "tx", "ty", "allx", "ally", "graph")
    )
    test_index = np.loadtxt(raw / f"ind.{name}.test.index", dtype=np.int64)
    test_sorted = np.sort(test_index)

    if name == "citeseer":
        full = np.arange(test_sorted.min(), test_sorted.max() + 1)
        tx_ext = sp.lil_matrix((len(full), tx.shape[1]))
        tx_ext[test_sorted - test_sorted.min(), :] = tx
        tx = tx_ext
        ty_ext = np.zeros((len(full), ty.shape[1]))
        ty_ext[test_sorted - test_sorted.min(), :] = ty
        ty = ty_ext

    features = sp.vstack((allx, tx)).tolil()
    features[test_index, :] = features[test_sorted, :]
    labels = np.vstack((ally, ty))
    labels[test_index, :] = labels[test_sorted, :]
    labels = labels.argmax(axis=1)

    features = features.tocsr()
    n, d = features.shape
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "features.txt", "w") as f:
        f.write(f"nodes {n} dim {d}\n")
        for r in range(n):
            row = features.getrow(r)
            f.write(" ".join(f"{c}:{float(v)!r}" for c, v in zip(row.indices, row.data)) + "\n")
    (out / "labels.txt").write_text("".join(f"{c}\n" for c in labels))
    with open(out / "edges.txt", "w") as f:
        for u, nbrs in sorted(graph.items()):
            for v in nbrs:
                if u < n and v < n:
                    f.write(f"{u} {v}\n")


if __name__ == "__main__":
    if len(sys.argv) != 4:
        sys.exit(__doc__)
    main(Path(sys.argv[1]), sys.argv[2], Path(sys.argv[3]))
