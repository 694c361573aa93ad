"""Build the FMNIST subset shipped under crates/core/data/fmnist.

Source: the `fashion-mnist` npm package (per-class JSON files of 28x28
uint8 images). Usage:

    npm pack fashion-mnist && tar xzf fashion-mnist-*.tgz
    python3 scripts/fmnist_subset.py package/src/clothes crates/core/data/fmnist

Rows that are not 784 pixels long are dropped. Writes IDX files: 1000 training and 200 test images per class, shuffled
with a fixed seed.
"""
import json
import struct
import sys
from pathlib import Path

import numpy as np

TRAIN_PER_CLASS = 1000
TEST_PER_CLASS = 200
TEST_OFFSET = 6000


def write_idx(out: Path, stem: str, images: np.ndarray, labels: np.ndarray) -> None:
    with open(out / f"{stem}-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        f.write(images.astype(np.uint8).tobytes())
    with open(out / f"{stem}-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main() -> None:
    src, out = Path(sys.argv[1]), Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)
    train_x, train_y, test_x, test_y = [], [], [], []
    for c in range(10):
        rows = [r for r in json.load(open(src / f"{c}.json"))["data"] if len(r) == 784]
        data = np.asarray(rows, dtype=np.uint8)
        train_x.append(data[:TRAIN_PER_CLASS])
        train_y.append(np.full(TRAIN_PER_CLASS, c))
        test_x.append(data[TEST_OFFSET:TEST_OFFSET + TEST_PER_CLASS])
        test_y.append(np.full(TEST_PER_CLASS, c))
    rng = np.random.default_rng(0)
    for stem, xs, ys in (("train", train_x, train_y), ("t10k", test_x, test_y)):
        x, y = np.concatenate(xs), np.concatenate(ys)
        order = rng.permutation(len(y))
        write_idx(out, stem, x[order], y[order])


if __name__ == "__main__":
    main()
