#!/usr/bin/env python3
"""Independent Canny reference used to produce the committed golden edge map.

Implements the documented pipeline (separable Gaussian of radius ceil(3*sigma)
with reflect-101 padding, 3x3 Sobel, 4-bin non-maximum suppression, relative
double-threshold hysteresis) in pure float64 with the same operation order as
the production code, so the two implementations make identical IEEE decisions.

Usage: canny_reference.py <input.pgm> <output.pgm> [sigma low high]
"""

import math
import sys


def read_pgm(path):
    with open(path, "rb") as f:
        data = f.read()
    assert data[:2] == b"P5", "P5 input expected"
    fields = []
    pos = 2
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while data[pos : pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while not data[pos : pos + 1].isspace():
            pos += 1
        fields.append(int(data[start:pos]))
    pos += 1  # single whitespace byte before the body
    w, h, maxval = fields
    assert maxval == 255
    body = data[pos : pos + w * h]
    return h, w, [v / 255.0 for v in body]


def write_pgm(path, h, w, binary):
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode())
        f.write(bytes(255 if v else 0 for v in binary))


def reflect(idx, n):
    if n == 1:
        return 0
    while idx < 0 or idx >= n:
        if idx < 0:
            idx = -idx
        if idx >= n:
            idx = 2 * n - 2 - idx
    return idx


def gaussian_kernel(sigma):
    radius = int(math.ceil(3.0 * sigma))
    k = [math.exp(-(float(i) * i) / (2.0 * sigma * sigma)) for i in range(-radius, radius + 1)]
    s = 0.0
    for v in k:
        s += v
    return [v / s for v in k], radius


def blur(src, h, w, sigma):
    k, radius = gaussian_kernel(sigma)
    tmp = [0.0] * (h * w)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for i in range(-radius, radius + 1):
                acc += k[i + radius] * src[y * w + reflect(x + i, w)]
            tmp[y * w + x] = acc
    dst = [0.0] * (h * w)
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for i in range(-radius, radius + 1):
                acc += k[i + radius] * tmp[reflect(y + i, h) * w + x]
            dst[y * w + x] = acc
    return dst


SOBEL_X = [(-1, -1, -1.0), (-1, 1, 1.0), (0, -1, -2.0), (0, 1, 2.0), (1, -1, -1.0), (1, 1, 1.0)]
SOBEL_Y = [(-1, -1, -1.0), (-1, 0, -2.0), (-1, 1, -1.0), (1, -1, 1.0), (1, 0, 2.0), (1, 1, 1.0)]


def sobel(src, h, w):
    gx = [0.0] * (h * w)
    gy = [0.0] * (h * w)
    for y in range(h):
        for x in range(w):
            ax = 0.0
            for dy, dx, c in SOBEL_X:
                ax += c * src[reflect(y + dy, h) * w + reflect(x + dx, w)]
            ay = 0.0
            for dy, dx, c in SOBEL_Y:
                ay += c * src[reflect(y + dy, h) * w + reflect(x + dx, w)]
            gx[y * w + x] = ax
            gy[y * w + x] = ay
    return gx, gy


TAN22 = 0.41421356237309503
TAN67 = 2.414213562373095


def quantize_bin(gx, gy):
    ax = abs(gx)
    ay = abs(gy)
    if ay <= ax * TAN22:
        return 0
    if ay > ax * TAN67:
        return 90
    return 45 if gx * gy >= 0.0 else 135


def canny(src, h, w, sigma, low_frac, high_frac):
    blurred = blur(src, h, w, sigma)
    gx, gy = sobel(blurred, h, w)
    mag = [math.sqrt(gx[i] * gx[i] + gy[i] * gy[i]) for i in range(h * w)]
    max_mag = 0.0
    for v in mag:
        max_mag = max(max_mag, v)
    if max_mag == 0.0:
        return [0] * (h * w)

    def mag_at(y, x):
        if y < 0 or y >= h or x < 0 or x >= w:
            return 0.0
        return mag[y * w + x]

    nms = [0.0] * (h * w)
    for y in range(h):
        for x in range(w):
            i = y * w + x
            b = quantize_bin(gx[i], gy[i])
            if b == 0:
                before, after = mag_at(y, x - 1), mag_at(y, x + 1)
            elif b == 45:
                before, after = mag_at(y - 1, x - 1), mag_at(y + 1, x + 1)
            elif b == 90:
                before, after = mag_at(y - 1, x), mag_at(y + 1, x)
            else:
                before, after = mag_at(y - 1, x + 1), mag_at(y + 1, x - 1)
            if mag[i] > before and mag[i] >= after:
                nms[i] = mag[i]

    high = high_frac * max_mag
    low = low_frac * max_mag
    mark = [0] * (h * w)
    stack = []
    for i in range(h * w):
        if nms[i] >= high:
            mark[i] = 2
            stack.append(i)
        elif nms[i] >= low:
            mark[i] = 1
    while stack:
        i = stack.pop()
        y, x = divmod(i, w)
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                ny, nx = y + dy, x + dx
                if 0 <= ny < h and 0 <= nx < w and mark[ny * w + nx] == 1:
                    mark[ny * w + nx] = 2
                    stack.append(ny * w + nx)
    return [1 if m == 2 else 0 for m in mark]


def main():
    inp, outp = sys.argv[1], sys.argv[2]
    sigma = float(sys.argv[3]) if len(sys.argv) > 3 else 1.0
    low = float(sys.argv[4]) if len(sys.argv) > 4 else 0.1
    high = float(sys.argv[5]) if len(sys.argv) > 5 else 0.3
    h, w, src = read_pgm(inp)
    edges = canny(src, h, w, sigma, low, high)
    write_pgm(outp, h, w, edges)


if __name__ == "__main__":
    main()
