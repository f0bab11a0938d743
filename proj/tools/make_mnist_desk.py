#!/usr/bin/env python3
"""Builds the desk-scale MNIST IDX files under data/mnist-desk/.

Source: the 5000-image MNIST subset shipped with mlxtend
(mlxtend/data/data/mnist_5k.csv.gz, BSD-3-Clause). Each class contributes
400 training and 100 test images; both splits are shuffled with a fixed seed.

    pip download mlxtend --no-deps -d /tmp/pkgs
    python3 -m zipfile -e /tmp/pkgs/mlxtend-*.whl /tmp/mlx
    python3 tools/make_mnist_desk.py /tmp/mlx/mlxtend/data/data/mnist_5k.csv.gz data/mnist-desk
"""
import gzip
import struct
import sys
from pathlib import Path

import numpy as np


def write_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        f.write(images.astype(np.uint8).tobytes())


def write_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    src, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    table = np.loadtxt(gzip.open(src), delimiter=",")
    pixels, labels = table[:, :-1], table[:, -1].astype(int)
    rng = np.random.default_rng(20140827)
    train_idx, test_idx = [], []
    for c in range(10):
        idx = rng.permutation(np.flatnonzero(labels == c))
        train_idx.extend(idx[:400])
        test_idx.extend(idx[400:500])
    train_idx = rng.permutation(train_idx)
    test_idx = rng.permutation(test_idx)
    write_images(out / "train-images-idx3-ubyte", pixels[train_idx])
    write_labels(out / "train-labels-idx1-ubyte", labels[train_idx])
    write_images(out / "test-images-idx3-ubyte", pixels[test_idx])
    write_labels(out / "test-labels-idx1-ubyte", labels[test_idx])


if __name__ == "__main__":
    main()
