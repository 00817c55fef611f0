#!/usr/bin/env python3
# Independent reference values for the C++ tests, computed with mpmath.
# Writes tests/data/frozen_values.json, or with --check compares against it.
import argparse
import json
import pathlib
import sys

import mpmath as mp

mp.mp.dps = 50

OUT = pathlib.Path(__file__).resolve().parent.parent / "data" / "frozen_values.json"


def h(a, p):
    a, p = mp.mpf(a), mp.mpf(p)
    return (mp.sqrt(p * (1 - a)) - mp.sqrt(a * (1 - p))) ** 2


def g1(p):
    p = mp.mpf(p)
    return 4 * p * (1 - p)


def t(m, M, z, p):
    return (1 - (1 - h(z, p)) ** m) ** M


def f_wedge(p):
    p = mp.mpf(p)
    return 2 * min(p, 1 - p)


def a_poly(ext, p):
    p = mp.mpf(p)
    v = p * (1 - p)
    for x in ext:
        hv = h(x, p)
        v *= hv * (1 - hv)
    return v


def bell(p):
    p = mp.mpf(p)
    return [mp.mpf(1) / 2, (2 * p - 1) ** 2 / 2, 2 * p * (1 - p), mp.mpf(0)]


def qk(k):
    return mp.binomial(2 * k, k) / ((2 * k - 1) * mp.mpf(4) ** k)


def bernstein(values, mode, p):
    n = len(values) - 1
    p = mp.mpf(p)
    s = mp.mpf(0)
    for j, v in enumerate(values):
        th = mp.mpf(2) / 3 * v if mode == "A" else mp.mpf(1) / 3 + mp.mpf(2) / 3 * v
        s += mp.binomial(n, j) * p**j * (1 - p) ** (n - j) * th
    return s


M32 = 0xFFFFFFFF


def philox4x32(ctr, key, rounds=10):
    c = list(ctr)
    k = list(key)
    for r in range(rounds):
        p0 = 0xD2511F53 * c[0]
        p1 = 0xCD9E8D57 * c[2]
        c = [((p1 >> 32) ^ c[1] ^ k[0]) & M32, p1 & M32, ((p0 >> 32) ^ c[3] ^ k[1]) & M32, p0 & M32]
        if r + 1 < rounds:
            k = [(k[0] + 0x9E3779B9) & M32, (k[1] + 0xBB67AE85) & M32]
    return c


def f(x):
    return float(x)


def derive():
    d = {}
    d["t_coin_2_1_0"] = {"p": [0.25, 0.5], "value": [f(t(2, 1, 0, 0.25)), f(t(2, 1, 0, 0.5))]}
    d["g1_0.3"] = f(g1(0.3))
    d["h_quarter_at_three_quarters"] = f(h(0.25, 0.75))
    d["h_half_at_0.3"] = f(h(0.5, 0.3))
    d["a_half_at_0.3"] = f(a_poly([0.5], 0.3))
    d["f_wedge"] = {"p": [0.1, 0.25, 0.4, 0.5, 0.9], "value": [f(f_wedge(x)) for x in (0.1, 0.25, 0.4, 0.5, 0.9)]}
    d["ladder_closed_form"] = {"p": [0.1, 0.25, 0.4], "value": [f(1 - mp.sqrt(1 - g1(x))) for x in (0.1, 0.25, 0.4)]}
    d["bell"] = {str(x): [f(v) for v in bell(x)] for x in (0.0, 0.3, 0.5, 1.0)}
    d["qk"] = [f(qk(k)) for k in range(1, 9)]
    d["qk_tail"] = [f(mp.binomial(2 * k, k) / mp.mpf(4) ** k) for k in range(0, 9)]
    d["f_alpha_0.99_at_0.75"] = f(mp.mpf("0.99") * h(0.25, 0.75))
    d["const_half_bounds"] = {"L": f(bernstein([0.5] * 5, "A", 0.3)), "U": f(bernstein([0.5] * 5, "B", 0.3)), "g": 0.5}
    d["bernstein_identity_n4_at_0.3"] = {
        "A": f(bernstein([j / 4 for j in range(5)], "A", 0.3)),
        "B": f(bernstein([j / 4 for j in range(5)], "B", 0.3)),
    }
    d["square_target"] = {"p": [0.2, 0.5, 0.8], "value": [f((2 * mp.mpf(x) - 1) ** 2) for x in (0.2, 0.5, 0.8)]}
    d["chain_identity_bound"] = f(mp.mpf(3) / 4) ** 19
    d["step_a1"] = {"p": [0.3, 0.7], "value": [f(a_poly([0.5], x)) for x in (0.3, 0.7)]}
    d["philox_kat"] = [
        {"ctr": c, "key": k, "out": philox4x32(c, k)}
        for c, k in (
            ([0, 0, 0, 0], [0, 0]),
            ([M32, M32, M32, M32], [M32, M32]),
            ([0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344], [0xA4093822, 0x299F31D0]),
        )
    ]
    return d


def close(a, b):
    if isinstance(a, dict):
        return isinstance(b, dict) and a.keys() == b.keys() and all(close(a[k], b[k]) for k in a)
    if isinstance(a, list):
        return isinstance(b, list) and len(a) == len(b) and all(close(x, y) for x, y in zip(a, b))
    if isinstance(a, float) or isinstance(b, float):
        return abs(a - b) <= 1e-15 * max(1.0, abs(a))
    return a == b


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", action="store_true")
    ap.add_argument("--file", default=str(OUT))
    args = ap.parse_args()
    d = derive()
    if args.check:
        stored = json.loads(pathlib.Path(args.file).read_text())
        if not close(d, stored):
            print("frozen values differ from the mpmath derivation", file=sys.stderr)
            return 1
        print("frozen values match")
        return 0
    pathlib.Path(args.file).write_text(json.dumps(d, indent=2, sort_keys=True) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
