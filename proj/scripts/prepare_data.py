#!/usr/bin/env python3
"""Prepare local dataset files in the formats the gramqubo loaders read.

  digits  -> data/digits.csv (64 integer pixels in [0,16] then the label, no header),
             taken from the copy bundled with scikit-learn.
  mnist   -> data/mnist/pool-images-idx3-ubyte + pool-labels-idx1-ubyte, converted
             from the JSON digits shipped in the npm `mnist` package
             (`npm pack mnist && tar xzf mnist-*.tgz`, then pass --npm-mnist package/).

Nothing is downloaded by this script.
"""
import argparse
import gzip
import json
import os
import struct


def prepare_digits(out_dir):
    import sklearn

    src = os.path.join(os.path.dirname(sklearn.__file__), "datasets", "data", "digits.csv.gz")
    rows = 0
    with gzip.open(src, "rt") as fin, open(os.path.join(out_dir, "digits.csv"), "w") as fout:
        for line in fin:
            line = line.strip()
            if not line:
                continue
            vals = [int(float(v)) for v in line.split(",")]
            assert len(vals) == 65
            fout.write(",".join(str(v) for v in vals) + "\n")
            rows += 1
    print(f"digits: {rows} rows")


def prepare_npm_mnist(pkg_dir, out_dir):
    digits_dir = os.path.join(pkg_dir, "src", "digits")
    images = bytearray()
    labels = bytearray()
    count = 0
    for label in range(10):
        with open(os.path.join(digits_dir, f"{label}.json")) as f:
            flat = json.load(f)["data"]
        assert len(flat) % 784 == 0
        for v in flat:
            images.append(max(0, min(255, int(round(v * 255.0)))))
        n = len(flat) // 784
        labels.extend([label] * n)
        count += n
    mnist_dir = os.path.join(out_dir, "mnist")
    os.makedirs(mnist_dir, exist_ok=True)
    with open(os.path.join(mnist_dir, "pool-images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, count, 28, 28))
        f.write(images)
    with open(os.path.join(mnist_dir, "pool-labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x00000801, count))
        f.write(labels)
    print(f"mnist: {count} images")


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--npm-mnist", help="unpacked npm `mnist` package directory")
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    prepare_digits(args.out)
    if args.npm_mnist:
        prepare_npm_mnist(args.npm_mnist, args.out)


if __name__ == "__main__":
    main()
