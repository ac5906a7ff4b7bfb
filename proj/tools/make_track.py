#!/usr/bin/env python3
# Copyright 2026 The overtake Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Generates the default track file (centerline, widths, raceline offset).

The raceline minimizes the summed squared second difference of the offset
path, a discrete curvature proxy, inside the boundaries minus a margin.
"""

import argparse

import numpy as np
from scipy.optimize import lsq_linear


def centerline(n):
    phi = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    x = 12.0 * np.cos(phi)
    y = 7.0 * np.sin(phi) + 1.2 * np.sin(3.0 * phi)
    half = 1.5 + 0.1 * np.cos(2.0 * phi)
    return x, y, half


def raceline(x, y, half, margin):
    n = len(x)
    tx = np.roll(x, -1) - np.roll(x, 1)
    ty = np.roll(y, -1) - np.roll(y, 1)
    norm = np.hypot(tx, ty)
    nx, ny = -ty / norm, tx / norm
    # Second difference of p_i = c_i + d_i n_i, linear in d.
    rows = 2 * n
    a = np.zeros((rows, n))
    b = np.zeros(rows)
    for i in range(n):
        im, ip = (i - 1) % n, (i + 1) % n
        for axis, (c, nn) in enumerate(((x, nx), (y, ny))):
            r = 2 * i + axis
            a[r, im] += nn[im]
            a[r, i] -= 2.0 * nn[i]
            a[r, ip] += nn[ip]
            b[r] = -(c[im] - 2.0 * c[i] + c[ip])
    lim = half - margin
    sol = lsq_linear(a, b, bounds=(-lim, lim), tol=1e-12, max_iter=10000)
    return sol.x


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=240)
    parser.add_argument("--margin", type=float, default=0.45)
    parser.add_argument("output")
    args = parser.parse_args()
    x, y, half = centerline(args.points)
    d = raceline(x, y, half, args.margin)
    with open(args.output, "w") as f:
        f.write("x,y,w_left,w_right,d_rl\n")
        for i in range(args.points):
            f.write(f"{x[i]:.6f},{y[i]:.6f},{half[i]:.6f},{half[i]:.6f},{d[i]:.6f}\n")


if __name__ == "__main__":
    main()
