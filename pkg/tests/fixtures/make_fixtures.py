"""Regenerate the bundled level > 1 newform fixtures from eta products.

    3.6.a.a   eta(z)^6 eta(3z)^6
    5.4.a.a   eta(z)^4 eta(5z)^4
    3.12.a.a  new eigenvector of T_2 on span{Delta(z), Delta(3z), eta(z)^12 eta(3z)^12}

Run:  python tests/fixtures/make_fixtures.py
"""

import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np
from sympy import Matrix, primerange

from jztrace.specside import _crt_moduli, _mulmod

BOUND = 3000
HERE = Path(__file__).parent


def _euler_mod(n, m):
    e = np.zeros(n, dtype=np.int64)
    k = 0
    while True:
        done = True
        for kk in (k, -k) if k else (0,):
            g = kk * (3 * kk - 1) // 2
            if g < n:
                e[g] = (-1) ** (kk % 2) % m
                done = False
        if done and k:
            break
        k += 1
    return e


def _stretch(a, N, n):
    out = np.zeros(n, dtype=np.int64)
    idx = np.arange(0, n, N)
    out[idx] = a[: len(idx)]
    return out


def eta_product(a, b, N, n):
    """Exact coefficients 0..n-1 of eta(z)^a eta(Nz)^b (a, b >= 0)."""
    shift = (a + N * b) // 24
    assert (a + N * b) % 24 == 0
    bits = int((a + b) / 2 * math.log2(n)) + 8
    mods = _crt_moduli(bits)
    res = []
    for m in mods:
        e = _euler_mod(n, m)
        f = np.zeros(n, dtype=np.int64)
        f[0] = 1
        eN = _stretch(e, N, n)
        for _ in range(a):
            f = _mulmod(f, e, m, n)
        for _ in range(b):
            f = _mulmod(f, eN, m, n)
        g = np.zeros(n, dtype=np.int64)
        g[shift:] = f[: n - shift]
        res.append(g)
    M = math.prod(mods)
    out = []
    for i in range(n):
        x = sum(int(r[i]) * (M // m) * pow(M // m, -1, m) for m, r in zip(mods, res)) % M
        out.append(x - M if x > M // 2 else x)
    return out


def t2(coeffs, k, n):
    return [coeffs[2 * j] + (2 ** (k - 1) * coeffs[j // 2] if j % 2 == 0 else 0) for j in range(n)]


def level3_weight12(n):
    f1 = eta_product(24, 0, 1, 2 * n)
    f2 = eta_product(0, 24, 3, 2 * n)
    f3 = eta_product(12, 12, 3, 2 * n)
    basis = [f1, f2, f3]
    pos = [1, 2, 3]
    B = Matrix([[f[i] for i in pos] for f in basis]).T          # columns = basis vectors
    T = Matrix([[t2(f, 12, 4)[i] for i in pos] for f in basis]).T
    A = B.inv() * T                                             # T_2 in the basis
    for val, mult, vecs in A.eigenvects():
        if val != -24:
            v = vecs[0]
            break
    coeffs = [sum(Fraction(int(v[j].p), int(v[j].q)) * basis[j][i] for j in range(3)) for i in range(n)]
    lead = coeffs[1]
    coeffs = [c / lead for c in coeffs]
    assert all(c.denominator == 1 for c in coeffs)
    return [int(c) for c in coeffs]


def write(label, level, weight, coeffs):
    ap = [[int(p), int(coeffs[p])] for p in primerange(2, len(coeffs))]
    obj = {"field": "Q", "level": level, "weight": weight, "label": label,
           "expected_form_count": 1, "coeff_bound": len(coeffs) - 1, "ap": ap}
    (HERE / f"{label}.json").write_text(json.dumps(obj, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    n = BOUND + 1
    write("3.6.a.a", 3, 6, eta_product(6, 6, 3, n))
    write("5.4.a.a", 5, 4, eta_product(4, 4, 5, n))
    write("3.12.a.a", 3, 12, level3_weight12(n))
