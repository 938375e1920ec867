#!/usr/bin/env python3
"""Convert the Planetoid citation graphs (Cora, CiteSeer, PubMed) into the
manifest layout read by `bandana`.

Either point --raw at a directory holding the original ind.<name>.* files or
let the script download them. Output goes to <out>/<name>/
(default $BANDANA_DATA_DIR, else data/).

    python3 tools/fetch_planetoid.py cora citeseer pubmed
    python3 tools/fetch_planetoid.py cora --raw ~/planetoid/data --out data
"""

import argparse
import json
import os
import pickle
import sys
import urllib.request
from pathlib import Path

import numpy as np
import scipy.sparse as sp

BASE_URL = "https://github.com/kimiyoung/planetoid/raw/master/data"
PARTS = ["x", "y", "tx", "ty", "allx", "ally", "graph", "test.index"]


def fetch(name, raw_dir):
    raw_dir.mkdir(parents=True, exist_ok=True)
    for part in PARTS:
        path = raw_dir / f"ind.{name}.{part}"
        if path.exists():
            continue
        url = f"{BASE_URL}/ind.{name}.{part}"
        print(f"downloading {url}", file=sys.stderr)
        urllib.request.urlretrieve(url, path)


def load_pickle(path):
    with open(path, "rb") as f:
        return pickle.load(f, encoding="latin1")


def to_dense(m):
    return m.toarray() if sp.issparse(m) else np.asarray(m)


def convert(name, raw_dir, out_dir):
    x, y, tx, ty, allx, ally, graph = (load_pickle(raw_dir / f"ind.{name}.{p}") for p in PARTS[:-1])
    test_index = [int(line) for line in open(raw_dir / f"ind.{name}.test.index")]
    test_sorted = np.sort(test_index)

    tx, ty = to_dense(tx), np.asarray(ty)
    if name == "citeseer":
        # some test ids have no node: pad with zero rows, as the usual loaders do
        full = range(test_sorted.min(), test_sorted.max() + 1)
        tx_ext = np.zeros((len(full), tx.shape[1]))
        ty_ext = np.zeros((len(full), ty.shape[1]))
        tx_ext[test_sorted - test_sorted.min()] = tx
        ty_ext[test_sorted - test_sorted.min()] = ty
        tx, ty = tx_ext, ty_ext

    features = np.vstack([to_dense(allx), tx])
    labels = np.vstack([np.asarray(ally), ty])
    features[test_index] = features[test_sorted]
    labels[test_index] = labels[test_sorted]
    n = features.shape[0]

    edges = set()
    for u, nbrs in graph.items():
        for v in nbrs:
            if u != v and u < n and v < n:
                edges.add((min(u, v), max(u, v)))

    dest = out_dir / name
    dest.mkdir(parents=True, exist_ok=True)
    with open(dest / "edges.txt", "w") as f:
        f.write(f"# {name}: {n} nodes, {len(edges)} undirected edges\n")
        for u, v in sorted(edges):
            f.write(f"{u} {v}\n")
    with open(dest / "features.csv", "w") as f:
        for row in features:
            f.write(",".join(f"{v:.10g}" for v in row) + "\n")
    with open(dest / "labels.txt", "w") as f:
        for row in labels:
            f.write(f"{int(np.argmax(row))}\n")
    manifest = {"name": name, "num_nodes": n, "edges": "edges.txt", "features": "features.csv", "labels": "labels.txt"}
    with open(dest / "manifest.json", "w") as f:
        json.dump(manifest, f, indent=2)
    print(f"{name}: {n} nodes, {len(edges)} edges, {features.shape[1]} features -> {dest}")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("names", nargs="+", choices=["cora", "citeseer", "pubmed"])
    ap.add_argument("--raw", type=Path, help="directory with ind.<name>.* files (skips the download)")
    ap.add_argument("--out", type=Path, default=Path(os.environ.get("BANDANA_DATA_DIR") or "data"))
    args = ap.parse_args()
    for name in args.names:
        raw = args.raw or (args.out / "raw")
        if args.raw is None:
            fetch(name, raw)
        convert(name, raw, args.out)


if __name__ == "__main__":
    main()
