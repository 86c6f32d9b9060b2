#!/usr/bin/env python3
"""Assemble an MNIST digits-1-and-5 subset in IDX format from offline copies.

Sources (both are redistributions of the original MNIST digits):
  * the npm package `mnist` (src/digits/<d>.json, 784 floats per image, /255)
  * the mlxtend wheel (mlxtend/data/data/mnist_5k.csv.gz, 784 ints + label)

Images are taken from the npm copy first and topped up from mlxtend until
`--per-class` images of each digit are collected.
"""
import argparse
import gzip
import json
import struct
import zipfile
from pathlib import Path


def npm_digits(pkg_dir, digit):
    flat = json.loads((Path(pkg_dir) / "src" / "digits" / f"{digit}.json").read_text())["data"]
    for off in range(0, len(flat), 784):
        yield bytes(min(255, max(0, round(v * 255))) for v in flat[off:off + 784])


def mlxtend_digits(wheel, digit):
    with zipfile.ZipFile(wheel) as z:
        text = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz")).decode()
    for line in text.splitlines():
        row = [int(float(v)) for v in line.split(",")]
        if row[-1] == digit:
            yield bytes(row[:-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--npm-package", required=True)
    ap.add_argument("--mlxtend-wheel", required=True)
    ap.add_argument("--digits", type=int, nargs="+", default=[1, 5])
    ap.add_argument("--per-class", type=int, default=1000)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    images, labels = [], []
    for d in args.digits:
        got = 0
        for source in (npm_digits(args.npm_package, d), mlxtend_digits(args.mlxtend_wheel, d)):
            for img in source:
                if got == args.per_class:
                    break
                images.append(img)
                labels.append(d)
                got += 1
        if got < args.per_class:
            raise SystemExit(f"only {got} images of digit {d} available")

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n = len(images)
    with gzip.GzipFile(out / "images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 2051, n, 28, 28))
        f.write(b"".join(images))
    with gzip.GzipFile(out / "labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 2049, n))
        f.write(bytes(labels))
    print(f"wrote {n} images to {out}")


if __name__ == "__main__":
    main()
