#!/usr/bin/env python3
"""Build the small MNIST IDX fixture used by the acceptance suite.

Source: the 5000-example MNIST sample shipped inside the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz, 784 pixel columns then the digit).
Takes the first PER_CLASS examples of every digit and writes an IDX3
image file and an IDX1 label file, interleaving classes so any prefix
is roughly balanced.

    pip download mlxtend --no-deps -d /tmp/mlx
    python3 tools/make_mnist_fixture.py /tmp/mlx/mlxtend-*.whl tests/data/mnist
"""
import gzip
import struct
import sys
import zipfile
from pathlib import Path

PER_CLASS = 60


def main(wheel: str, out_dir: str) -> None:
    with zipfile.ZipFile(wheel) as z:
        text = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz")).decode()
    by_class = {d: [] for d in range(10)}
    for line in text.splitlines():
        fields = line.split(",")
        digit = int(float(fields[-1]))
        if len(by_class[digit]) < PER_CLASS:
            by_class[digit].append(bytes(int(float(v)) for v in fields[:-1]))
    images, labels = [], []
    for i in range(PER_CLASS):
        for d in range(10):
            images.append(by_class[d][i])
            labels.append(d)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = len(images)
    with open(out / "images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, n, 28, 28))
        for img in images:
            f.write(img)
    with open(out / "labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, n))
        f.write(bytes(labels))


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
