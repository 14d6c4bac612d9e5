"""Spectral side: Hecke data, old-form weights, adjoint L-values, the cusp average.

Level one eigenforms come from exact q-expansions (the weights where
S_k is one-dimensional).  Everything else arrives as JSON fixtures.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from sympy import divisors, factorint, isprime, primerange

from .errors import DomainError, IncompleteDataError, InputError
from .localfactors import SymLaurentPoly
from .specfun import PI, gamma_c, gamma_r, kronecker

# ------------------------------------------------------- q-expansions

LEVEL1_WEIGHTS = (12, 16, 18, 20, 22, 26)
# weight -> (power of E4, power of E6) in f = Delta * E4^a * E6^b
_MONOMIAL = {12: (0, 0), 16: (1, 0), 18: (0, 1), 20: (2, 0), 22: (1, 1), 26: (2, 1)}


def _crt_moduli(bits: int) -> list[int]:
    out, prod, p = [], 1, (1 << 20) - 1
    while prod.bit_length() <= bits + 2:
        while not isprime(p):
            p -= 2
        out.append(p)
        prod *= p
        p -= 2
    return out


def _mulmod(a: np.ndarray, b: np.ndarray, m: int, n: int) -> np.ndarray:
    # entries < 2^20 so each product < 2^40; n <= 2^22 terms keeps sums in int64
    return np.convolve(a, b)[:n] % m


def _divisor_power_sums(n: int, k: int, m: int) -> np.ndarray:
    out = np.zeros(n, dtype=np.int64)
    for d in range(1, n):
        out[d::d] = (out[d::d] + pow(d, k, m)) % m
    return out


def _cusp_form_mod(weight: int, n: int, m: int) -> np.ndarray:
    """Coefficients 0..n-1 of the level one eigenform, reduced mod m."""
    eta3 = np.zeros(n, dtype=np.int64)
    j = 0
    while j * (j + 1) // 2 < n:
        eta3[j * (j + 1) // 2] = ((-1) ** j * (2 * j + 1)) % m
        j += 1
    # prod (1 - q^k)^24 = (eta^3 / q^{1/8})^8
    sq = _mulmod(eta3, eta3, m, n)
    sq = _mulmod(sq, sq, m, n)
    p24 = _mulmod(sq, sq, m, n)
    f = np.zeros(n, dtype=np.int64)
    f[1:] = p24[: n - 1]
    a, b = _MONOMIAL[weight]
    if a or b:
        e4 = 240 * _divisor_power_sums(n, 3, m) % m
        e4[0] = 1
        e6 = (-504 * _divisor_power_sums(n, 5, m)) % m
        e6[0] = 1
        for _ in range(a):
            f = _mulmod(f, e4, m, n)
        for _ in range(b):
            f = _mulmod(f, e6, m, n)
    return f


def level1_coefficients(weight: int, bound: int) -> list[int]:
    """Exact Fourier coefficients a(0..bound) of the normalized eigenform."""
    if weight not in _MONOMIAL:
        raise InputError(f"S_{weight}(1) is not one-dimensional; supported {LEVEL1_WEIGHTS}")
    n = bound + 1
    # |a(m)| <= d(m) m^{(k-1)/2} < 2 sqrt(m) m^{(k-1)/2}
    bits = int(math.ceil((weight / 2) * math.log2(max(n, 2)))) + 2
    mods = _crt_moduli(bits)
    res = [_cusp_form_mod(weight, n, m) for m in mods]
    M = math.prod(mods)
    out = []
    for i in range(n):
        x = 0
        for m, r in zip(mods, res):
            Mi = M // m
            x += int(r[i]) * Mi * pow(Mi, -1, m)
        x %= M
        out.append(x - M if x > M // 2 else x)
    return out


# --------------------------------------------------------- newform data

@dataclass
class NewformData:
    level: int
    weight: int
    label: str
    ap: dict[int, int]
    coeff_bound: int
    expected_form_count: int | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.weight < 4 or self.weight % 2:
            raise InputError(f"{self.label}: weight must be even and >= 4")
        if self.level < 1 or any(e > 1 for e in factorint(self.level).values()):
            raise InputError(f"{self.label}: level must be squarefree")
        k = self.weight
        for p, a in self.ap.items():
            if not isprime(p):
                raise InputError(f"{self.label}: key {p} is not prime")
            if self.level % p == 0:
                if a * a != p ** (k - 2):
                    raise InputError(f"{self.label}: a_{p} must satisfy a_p^2 = p^(k-2) at p | N")
            elif a * a > 4 * p ** (k - 1):
                raise InputError(f"{self.label}: a_{p} = {a} violates the Ramanujan bound")
        for p in factorint(self.level):
            if p not in self.ap:
                raise InputError(f"{self.label}: a_{p} missing at a prime of the level")

    def a(self, p: int) -> int:
        try:
            return self.ap[p]
        except KeyError:
            raise IncompleteDataError(f"{self.label}: a_{p} not available "
                                      f"(coefficient bound {self.coeff_bound})") from None

    def to_json(self) -> dict:
        return {"field": "Q", "level": self.level, "weight": self.weight, "label": self.label,
                "expected_form_count": self.expected_form_count,
                "coeff_bound": self.coeff_bound,
                "ap": [[p, self.ap[p]] for p in sorted(self.ap)]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "NewformData":
        try:
            if obj.get("field", "Q") != "Q":
                raise InputError("only field Q is supported")
            ap = {}
            for p, a in obj["ap"]:
                if int(p) in ap:
                    raise InputError(f"duplicate a_{p}")
                ap[int(p)] = int(a)
            bound = int(obj.get("coeff_bound", max(ap) if ap else 0))
            return cls(level=int(obj["level"]), weight=int(obj["weight"]),
                       label=str(obj["label"]), ap=ap, coeff_bound=bound,
                       expected_form_count=obj.get("expected_form_count"))
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InputError):
                raise
            raise InputError(f"malformed newform record: {exc}") from exc


def load_newform(path: str | Path) -> NewformData:
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected a JSON object")
    return NewformData.from_json(obj)


def load_newforms(directory: str | Path, weight: int | None = None) -> list[NewformData]:
    out = []
    for p in sorted(Path(directory).glob("*.json")):
        f = load_newform(p)
        if weight is None or f.weight == weight:
            out.append(f)
    return out


_FORM_CACHE: dict[tuple[int, int], NewformData] = {}


def level1_newform(weight: int, bound: int = 2000) -> NewformData:
    key = (weight, bound)
    if key not in _FORM_CACHE:
        c = level1_coefficients(weight, bound)
        ap = {int(p): c[p] for p in primerange(2, bound + 1)}
        _FORM_CACHE[key] = NewformData(1, weight, f"1.{weight}.a.a", ap, bound, 1)
    return _FORM_CACHE[key]


# ------------------------------------------------ dimensions / completeness

def dim_cusp_forms(N: int, k: int) -> int:
    """dim S_k(Gamma_0(N)) for squarefree N and even k >= 4."""
    f = factorint(N)
    mu, nu2, nu3 = N, 1, 1
    for p in f:
        mu = mu * (p + 1) // p
        nu2 *= 1 + (kronecker(-4, p) if p != 2 else 0)
        nu3 *= 1 + (kronecker(-3, p) if p != 3 else 0)
    cusps = 2 ** len(f)
    d = (Fraction(k - 1, 12) * mu + (k // 4 - Fraction(k - 1, 4)) * nu2
         + (k // 3 - Fraction(k - 1, 3)) * nu3 - Fraction(cusps, 2))
    if d.denominator != 1:
        raise DomainError("dimension formula produced a non-integer")
    return int(d)


def dim_newforms(N: int, k: int) -> int:
    tot = 0
    for d in divisors(N):
        m = N // d
        beta = 1
        for _ in factorint(m):
            beta *= -2
        tot += beta * dim_cusp_forms(d, k)
    return tot


def check_complete(forms: Iterable[NewformData], N: int, k: int) -> list[NewformData]:
    forms = [f for f in forms if f.weight == k and N % f.level == 0]
    for d in divisors(N):
        have = [f for f in forms if f.level == d]
        want = dim_newforms(d, k)
        for f in have:
            if f.expected_form_count is not None and f.expected_form_count != want:
                raise IncompleteDataError(
                    f"{f.label}: expected_form_count {f.expected_form_count} but dim S_{k}^new({d}) = {want}")
        if len(have) != want:
            raise IncompleteDataError(f"level {d}, weight {k}: {len(have)} newforms supplied, {want} expected")
    return sorted(forms, key=lambda f: (f.level, f.label))


# ---------------------------------------------------------------- Satake

@dataclass(frozen=True)
class SatakeDatum:
    p: int
    x: float
    Q: float
    nu: complex


def satake(f: NewformData, p: int) -> SatakeDatum:
    if f.level % p == 0:
        raise DomainError(f"p = {p} divides the level of {f.label}")
    x = f.a(p) / p ** ((f.weight - 1) / 2)
    Q = x / (math.sqrt(p) + 1 / math.sqrt(p))
    lp = math.log(p)
    if abs(x) <= 2:
        # x = 2 cos(theta), p^{nu/2} = e^{i theta}
        nu = complex(0, 2 * math.acos(max(-1.0, min(1.0, x / 2))) / lp)
    else:
        r = (abs(x) + math.sqrt(x * x - 4)) / 2
        nu = complex(2 * math.log(r) / lp, 0 if x > 0 else 2 * PI / lp)
    return SatakeDatum(p, x, Q, nu)


def q_unramified(p: int, nu) -> complex:
    """Q of the unramified principal series with parameter nu."""
    nu = complex(nu)
    return (p ** (nu / 2) + p ** (-nu / 2)) / (math.sqrt(p) + 1 / math.sqrt(p))


def oldform_weight(f: NewformData, N: int, z) -> complex:
    if N % f.level:
        raise DomainError(f"conductor {f.level} does not divide {N}")
    z = complex(z)
    M = N // f.level
    w = complex(M) ** ((1 - z) / 2)
    for p in factorint(M):
        Q = satake(f, p).Q
        w *= 1 + (q_unramified(p, z) - Q * Q) / (1 - Q * Q)
    return w


# ------------------------------------------------------ adjoint L-function

def _local_sym2(x: float, jmax: int) -> list[float]:
    # complete homogeneous sums in {alpha^2, 1, alpha^-2}; e1 = e2 = x^2 - 1, e3 = 1
    e = x * x - 1
    h = [1.0, e, e * e - e]
    while len(h) <= jmax:
        h.append(e * h[-1] - e * h[-2] + h[-3])
    return h[: jmax + 1]


def sym2_dirichlet_coeffs(f: NewformData, M: int) -> np.ndarray:
    """c[0..M] of the finite part of L(s, pi; Ad); c[0] is unused (0)."""
    c = np.zeros(M + 1)
    if M < 1:
        return c
    c[1] = 1.0
    spf = np.zeros(M + 1, dtype=np.int64)
    local: dict[int, list[float]] = {}
    for p in primerange(2, M + 1):
        p = int(p)
        jmax = int(math.log(M) / math.log(p) + 1e-9)
        if f.level % p == 0:
            local[p] = [float(p) ** (-j) for j in range(jmax + 1)]
        else:
            local[p] = _local_sym2(f.a(p) / p ** ((f.weight - 1) / 2), jmax)
        sl = spf[p::p]
        sl[sl == 0] = p
    for n in range(2, M + 1):
        p = int(spf[n])
        m, j = n, 0
        while m % p == 0:
            m //= p
            j += 1
        c[n] = c[m] * local[p][j]
    return c


def sym2_gamma(s, k: int) -> complex:
    s = complex(s)
    return gamma_r(s + 1) * gamma_c(s + k - 1)


# contour w = c + iy, |y| <= Y, trapezoid step h; smoothing G(w) = exp(w^2 / B).
# The integrand is analytic for -c < Re w < c + 2 + Re s, so the trapezoid
# error is ~ exp(-2 pi c / h).
AFE_C, AFE_Y, AFE_H, AFE_B = 1.5, 40.0, 0.1, 30.0


def _afe_line(s: complex) -> float:
    # both Dirichlet expansions need Re(s + w) > 1 and Re(1 - s + w) > 1
    return max(AFE_C, abs(s.real - 0.5) + 1.0)


def _afe_kernel(s: complex, c: float, k: int, N: int, B: float) -> tuple[np.ndarray, np.ndarray]:
    y = np.arange(-AFE_Y, AFE_Y + AFE_H / 2, AFE_H)
    w = c + 1j * y
    u = s + w
    g = np.array([complex(N) ** ui * sym2_gamma(ui, k) for ui in u])
    wt = g * np.exp(w * w / B) / w * (AFE_H / (2 * PI))
    return u, wt


def afe_weights(s, k: int, N: int, M: int, B: float = AFE_B) -> np.ndarray:
    """W(s, n) + W(1 - s, n) for n = 1..M."""
    s = complex(s)
    logn = np.log(np.arange(1, M + 1, dtype=float))
    out = np.zeros(M, dtype=complex)
    c = _afe_line(s)
    for sv in (s, 1 - s):
        u, wt = _afe_kernel(sv, c, k, N, B)
        for i in range(0, M, 4096):
            out[i:i + 4096] += np.exp(-np.outer(logn[i:i + 4096], u)) @ wt
    return out


def afe_cutoff(k: int, N: int, s, B: float = AFE_B, rel: float = 1e-14,
               safety: float = 3.0) -> int:
    """Terms needed before n |W(s, n) + W(1 - s, n)| drops below rel * |W(s, 1) + W(1 - s, 1)|.

    The scan is done once on a generous range; the returned cutoff is the
    first negligible index times the safety factor.
    """
    M = 256
    while True:
        ab = np.abs(afe_weights(s, k, N, M, B)) * np.arange(1, M + 1)
        small = np.nonzero(ab < rel * ab[0])[0]
        if len(small):
            return int(math.ceil(safety * (small[0] + 1)))
        M *= 4
        if M > 1 << 20:
            raise DomainError("AFE weights do not decay; s too far from the critical strip")


_L_CACHE: dict[tuple, complex] = {}


def sym2_l_value(f: NewformData, s, M: int | None = None, B: float = AFE_B) -> complex:
    """Completed L(s, pi; Ad) = Gamma_R(s+1) Gamma_C(s+k-1) L_fin(s).

    Smoothed approximate functional equation, sign +1, conductor N^2:
    N^s L(s) = sum_n c_n (W(s, n) + W(1 - s, n)) with
    W(s, x) = (2 pi i)^{-1} int_(c) N^{s+w} gamma(s+w) x^{-s-w} G(w) dw / w.
    Changing B only leaves the value unchanged if the functional equation holds.
    """
    s = complex(s)
    k, N = f.weight, f.level
    if M is None:
        M = afe_cutoff(k, N, s, B)
    key = (f.label, N, k, s, M, B, f.coeff_bound)
    if key in _L_CACHE:
        return _L_CACHE[key]
    if M > f.coeff_bound:
        raise IncompleteDataError(f"{f.label}: AFE needs a_p up to {M}, have {f.coeff_bound}")
    c = sym2_dirichlet_coeffs(f, M)
    val = complex(c[1:] @ afe_weights(s, k, N, M, B)) * complex(N) ** (-s)
    if s.imag == 0:
        val = complex(val.real, 0.0)
    _L_CACHE[key] = val
    return val


def sym2_l_finite(f: NewformData, s, M: int | None = None) -> complex:
    s = complex(s)
    return sym2_l_value(f, s, M) / sym2_gamma(s, f.weight)


def sym2_finite_euler(f: NewformData, s, pmax: int) -> complex:
    """Truncated Euler product of the finite part (oracle for Re s > 1)."""
    s = complex(s)
    tot = 1 + 0j
    for p in primerange(2, pmax + 1):
        X = p ** (-s)
        if f.level % p == 0:
            tot /= 1 - X / p
        else:
            x = f.a(p) / p ** ((f.weight - 1) / 2)
            e = x * x - 1
            tot /= 1 - e * X + e * X * X - X ** 3
    return tot


# ------------------------------------------------------------ spectral side

def spectral_constant(k: int, N: int) -> float:
    c = 4 * PI / (k - 1)
    for p in factorint(N):
        c /= 1 + p
    return c


@dataclass
class SpectralTerm:
    label: str
    level: int
    weight_W: complex
    l_ratio: complex
    test: complex

    @property
    def value(self) -> complex:
        return self.weight_W * self.l_ratio * self.test


def _test_value(f: NewformData, test: Mapping[int, object], raw: bool) -> complex:
    val = 1 + 0j
    for p, t in test.items():
        sd = satake(f, p)
        if raw:
            sv = complex(t)
            rq = math.sqrt(p)
            val /= rq * sd.x - (p ** ((1 + sv) / 2) + p ** ((1 - sv) / 2))
        else:
            val *= t.at_x(sd.x)
    return val


def spectral_terms(N: int, k: int, test: Mapping[int, object], z, forms: Iterable[NewformData],
                   raw: bool = False, M: int | None = None, B: float = AFE_B) -> list[SpectralTerm]:
    z = complex(z)
    forms = check_complete(forms, N, k)
    out = []
    for f in forms:
        W = oldform_weight(f, N, z)
        ratio = sym2_l_value(f, (z + 1) / 2, M, B) / sym2_l_value(f, 1.0, M, B)
        out.append(SpectralTerm(f.label, f.level, W, ratio, _test_value(f, test, raw)))
    return out


def spectral_side(N: int, k: int, test: Mapping[int, object], z, forms: Iterable[NewformData],
                  raw: bool = False, M: int | None = None, B: float = AFE_B) -> complex:
    """I^0_cusp(N | alpha, z) in alpha mode; the resolvent sum including C(l, N) in raw mode.

    test maps each prime of S to a SymLaurentPoly (alpha mode) or to s_p (raw mode).
    """
    z = complex(z)
    for p in test:
        if N % p == 0 or p == 2:
            raise InputError(f"prime {p} of S must be odd and prime to the level")
        if not raw and not isinstance(test[p], SymLaurentPoly):
            raise InputError("alpha mode expects SymLaurentPoly test functions")
    terms = spectral_terms(N, k, test, z, forms, raw, M, B)
    tot = math.fsum(t.value.real for t in terms) + 1j * math.fsum(t.value.imag for t in terms)
    tot *= 0.5 * complex(N) ** ((z - 1) / 2)
    if raw:
        tot *= spectral_constant(k, N)
    return tot


AFE_B_CHECK = 18.0


def afe_error(N: int, k: int, test: Mapping[int, object], z, forms: Iterable[NewformData],
              raw: bool = False) -> float:
    """Spread of the spectral side under a change of the AFE smoothing width."""
    forms = list(forms)
    return abs(spectral_side(N, k, test, z, forms, raw) - spectral_side(N, k, test, z, forms, raw,
                                                                          B=AFE_B_CHECK))
