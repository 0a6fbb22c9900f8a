#!/usr/bin/env python3
# Copyright 2026 The ckernel Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Convert the digits bundled with the npm `mnist` package into IDX files.

The package ships 10,000 MNIST digits as per-class JSON arrays of 784
floats quantized to [0, 1].  This script writes them back out as a standard
IDX image/label pair (bytes = round(value * 255)), interleaving classes with
a fixed shuffle so that contiguous ranges are not single-class.

Usage: mnist_from_npm.py <package-dir> <out-dir>
"""
import json
import random
import struct
import sys
from pathlib import Path


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    pkg = Path(sys.argv[1])
    out = Path(sys.argv[2])
    out.mkdir(parents=True, exist_ok=True)

    samples = []
    for digit in range(10):
        data = json.loads((pkg / "src" / "digits" / f"{digit}.json").read_text())["data"]
        count = len(data) // 784
        for i in range(count):
            pixels = bytes(min(255, max(0, round(v * 255))) for v in data[i * 784:(i + 1) * 784])
            samples.append((digit, pixels))

    random.Random(20200101).shuffle(samples)

    with open(out / "images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(samples), 28, 28))
        for _, pixels in samples:
            f.write(pixels)
    with open(out / "labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(samples)))
        f.write(bytes(label for label, _ in samples))
    print(f"wrote {len(samples)} digits to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
