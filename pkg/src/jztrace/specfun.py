"""Complex special functions used by every closed form.

Gamma comes from scipy (complex loggamma), zeta and the analytic
continuation of 2F1 outside the disc from mpmath.  The Legendre reduction,
the Gauss series and the Dirichlet L approximate functional equation are
written out here.
"""

from __future__ import annotations

import cmath
import math
from functools import lru_cache

import mpmath
import numpy as np
from scipy import special as sp

from .errors import BranchCutError, DomainError, PoleError

PI = math.pi
SQRT_PI = math.sqrt(math.pi)


def _c(s) -> complex:
    s = complex(s)
    if s.real != s.real or s.imag != s.imag:
        raise DomainError("NaN argument")
    return s


def _is_nonpos_int(s: complex) -> bool:
    return s.imag == 0 and s.real <= 0 and s.real == math.floor(s.real)


# ----------------------------------------------------------------- Gamma

def cgamma(s) -> complex:
    s = _c(s)
    if _is_nonpos_int(s):
        raise PoleError(f"Gamma pole at {s.real:g}")
    if s.imag == 0:
        return complex(sp.gamma(s.real))
    return complex(np.exp(sp.loggamma(s)))


def rgamma(s) -> complex:
    """1/Gamma(s), entire."""
    s = _c(s)
    if _is_nonpos_int(s):
        return 0j
    if s.imag == 0:
        return complex(sp.rgamma(s.real))
    return complex(np.exp(-sp.loggamma(s)))


def gamma_r(s) -> complex:
    s = _c(s)
    return PI ** (-s / 2) * cgamma(s / 2)


def gamma_c(s) -> complex:
    s = _c(s)
    return 2 * (2 * PI) ** (-s) * cgamma(s)


def rgamma_r(s) -> complex:
    """1/Gamma_R(s), entire (vanishes at s = 0, -2, -4, ...)."""
    s = _c(s)
    return PI ** (s / 2) * rgamma(s / 2)


# ---------------------------------------------------------- hypergeometric

_SERIES_RADIUS = 0.75


def _f21_series(a, b, c, x, maxterms=4000):
    term = 1 + 0j
    total = 1 + 0j
    for k in range(maxterms):
        term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * x
        total += term
        if term == 0 or (abs(term) < 1e-17 * abs(total) and k > 4):
            return total
    raise DomainError("2F1 series did not converge")


def gauss_2f1(a, b, c, x) -> complex:
    a, b, c, x = _c(a), _c(b), _c(c), _c(x)
    if _is_nonpos_int(c):
        raise PoleError("2F1 with c a nonpositive integer")
    if x == 0:
        return 1 + 0j
    if abs(x) <= _SERIES_RADIUS or _is_nonpos_int(a) or _is_nonpos_int(b):
        return _f21_series(a, b, c, x)
    # Pfaff when it pulls the argument into the disc
    y = x / (x - 1)
    if abs(y) <= _SERIES_RADIUS:
        return (1 - x) ** (-a) * _f21_series(a, c - b, c, y)
    if x == 1 and (c - a - b).real > 0:
        # Gauss summation
        return cgamma(c) * cgamma(c - a - b) * rgamma(c - a) * rgamma(c - b)
    if x.imag == 0 and x.real >= 1:
        raise DomainError("2F1 evaluated on its cut [1, inf)")
    with mpmath.workdps(20):
        return complex(mpmath.hyp2f1(a, b, c, x))


# --------------------------------------------------------------- Legendre

def legendre_p(mu: int, nu, x) -> complex:
    """Legendre function of the first kind, principal branch off (-inf, 1].

    P^mu_nu(x) = ((x+1)/(x-1))^{mu/2} 2F1(-nu, nu+1; 1-mu; (1-x)/2) / Gamma(1-mu)
    """
    if int(mu) != mu or mu > 0:
        raise DomainError("legendre_p expects an integer order mu <= 0")
    nu, x = _c(nu), _c(x)
    if x.imag == 0 and x.real <= 1:
        raise BranchCutError(f"argument {x.real:g} lies on the cut")
    ratio = (x + 1) / (x - 1)
    pref = cmath.exp(mu / 2 * cmath.log(ratio))
    f = gauss_2f1(-nu, nu + 1, 1 - mu, (1 - x) / 2)
    return pref * f * rgamma(1 - mu)


# ------------------------------------------------------------------ zeta

def zeta(s) -> complex:
    s = _c(s)
    if s == 1:
        raise PoleError("zeta pole at 1")
    if s.imag == 0:
        return complex(float(mpmath.zeta(s.real)))
    return complex(mpmath.zeta(s))


def completed_zeta(s) -> complex:
    s = _c(s)
    if s == 0 or s == 1:
        raise PoleError("completed zeta pole")
    if _is_nonpos_int(s):
        # Gamma_R pole cancels the trivial zero; use the functional equation
        return completed_zeta(1 - s)
    return gamma_r(s) * zeta(s)


def zeta_times_sm1(s) -> complex:
    """(s-1)zeta(s), finite at s = 1."""
    s = _c(s)
    if abs(s - 1) < 1e-6:
        # Laurent expansion: 1 + gamma_E (s-1) - gamma_1 (s-1)^2
        h = s - 1
        return 1 + 0.5772156649015329 * h + 0.0728158454836767 * h * h
    return (s - 1) * zeta(s)


# ------------------------------------------------- fundamental discriminants

def is_fundamental(D: int) -> bool:
    D = int(D)
    if D == 1:
        return True
    if D == 0:
        return False
    r = D % 4
    if r == 1:
        return _squarefree(abs(D))
    if r == 0:
        m = D // 4
        return m % 4 in (2, 3) and _squarefree(abs(m))
    return False


def _squarefree(n: int) -> bool:
    if n == 1:
        return True
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


def kronecker(D: int, n: int) -> int:
    """Kronecker symbol (D/n) for integers, n >= 1."""
    D, n = int(D), int(n)
    if n <= 0:
        raise DomainError("kronecker expects n >= 1")
    res = 1
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5):
            res = -res
    # Jacobi symbol (D/n), n odd
    a = D % n
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                res = -res
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            res = -res
        a %= n
    return res if n == 1 else 0


@lru_cache(maxsize=4096)
def _char_table(D: int, N: int) -> np.ndarray:
    """chi_D(1..N), filled multiplicatively from the primes."""
    spf = np.zeros(N + 1, dtype=np.int64)
    chi = np.zeros(N + 1)
    if N >= 1:
        chi[1] = 1
    for p in range(2, N + 1):
        if spf[p]:
            continue
        spf[p::p] = np.where(spf[p::p] == 0, p, spf[p::p])
        chi[p] = kronecker(D, p)
    # n // spf(n) <= n/2, so each dyadic block only needs earlier blocks
    lo = 2
    while lo <= N:
        hi = min(2 * lo, N + 1)
        n = np.arange(lo, hi)
        chi[n] = chi[spf[n]] * chi[n // spf[n]]
        lo = hi
    return chi[1:]


# ------------------------------------------------------- Dirichlet L

def _upper_gamma(w: float, x: np.ndarray) -> np.ndarray:
    """Gamma(w, x) for real w and positive x, vectorised."""
    if w > 0:
        return sp.gammaincc(w, x) * sp.gamma(w)
    if w == math.floor(w):
        u, steps = 0.0, int(-w)
        val = sp.exp1(x)
    else:
        steps = math.ceil(-w)
        u = w + steps
        val = sp.gammaincc(u, x) * sp.gamma(u)
    # Gamma(u-1, x) = (Gamma(u, x) - x^{u-1} e^{-x}) / (u-1)
    for _ in range(steps):
        val = (val - x ** (u - 1) * np.exp(-x)) / (u - 1)
        u -= 1
    return val


def _upper_gamma_c(w: complex, x: np.ndarray) -> np.ndarray:
    """Gamma(w, x) for complex w (not a pole) and positive x, vectorised.

    Large x: Lentz continued fraction.  Small x: lower-gamma series at
    u = w + m with Re u >= 1/2, then Gamma(u-1, x) = (Gamma(u, x) - x^{u-1} e^{-x})/(u-1)
    down to w (the series alone cancels badly for Re w < 0).
    """
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape, dtype=complex)
    cut = abs(w) + 1.5
    sm, lg = x < cut, x >= cut
    if sm.any():
        xs = x[sm]
        m = max(0, math.ceil(0.5 - w.real))
        u = w + m
        # x below the cut: every term after k ~ cut is smaller, a fixed count suffices
        term = np.full(xs.shape, 1 / u, dtype=complex)
        tot = term.copy()
        for k in range(1, int(4 * cut) + 60):
            term = term * xs / (u + k)
            tot += term
        lx = np.log(xs)
        val = complex(cgamma(u)) - np.exp(u * lx - xs) * tot
        for _ in range(m):
            val = (val - np.exp((u - 1) * lx - xs)) / (u - 1)
            u -= 1
        out[sm] = val
    if lg.any():
        xl = x[lg]
        tiny = 1e-300
        b = xl + 1 - w
        c = np.full(xl.shape, 1 / tiny, dtype=complex)
        d = 1 / b
        h = d.copy()
        idx = np.arange(len(xl))
        res = np.empty(len(xl), dtype=complex)
        for i in range(1, 4000):
            an = -i * (i - w)
            b = b + 2
            d = an * d + b
            d = np.where(np.abs(d) < tiny, tiny, d)
            c = b + an / c
            c = np.where(np.abs(c) < tiny, tiny, c)
            d = 1 / d
            delta = d * c
            h = h * delta
            done = np.abs(delta - 1) <= 4e-16
            if done.any():
                res[idx[done]] = h[done]
                keep = ~done
                idx, b, c, d, h = idx[keep], b[keep], c[keep], d[keep], h[keep]
                if not len(idx):
                    break
        if len(idx):
            res[idx] = h
        out[lg] = np.exp(w * np.log(xl) - xl) * res
    return out


def _afe_terms(D: int, im: float) -> int:
    q = abs(D)
    return int(math.ceil(math.sqrt(q * (42.0 + PI * abs(im)) / PI))) + 2


def _dirichlet_completed_real(s: float, D: int) -> float:
    q = abs(D)
    a = 0 if D > 0 else 1
    N = _afe_terms(D, 0.0)
    chi = _char_table(D, N)
    n = np.arange(1, N + 1, dtype=float)
    x = PI * n * n / q
    w1, w2 = (s + a) / 2, (1 - s + a) / 2
    t1 = (PI / q) ** (-w1) * n ** (-s) * _upper_gamma(w1, x)
    t2 = (PI / q) ** (-w2) * n ** (s - 1) * _upper_gamma(w2, x)
    tot = math.fsum(chi * t1) + math.fsum(chi * t2)
    return tot * q ** (-a / 2)


def _dirichlet_completed_complex(s: complex, D: int) -> complex:
    q = abs(D)
    a = 0 if D > 0 else 1
    N = _afe_terms(D, s.imag)
    chi = _char_table(D, N)
    n = np.arange(1, N + 1, dtype=float)
    x = PI * n * n / q
    w1, w2 = (s + a) / 2, (1 - s + a) / 2
    t1 = (PI / q) ** (-w1) * np.exp(-s * np.log(n)) * _upper_gamma_c(w1, x)
    t2 = (PI / q) ** (-w2) * np.exp((s - 1) * np.log(n)) * _upper_gamma_c(w2, x)
    return complex(np.sum(chi * (t1 + t2)) * q ** (-a / 2))


def _dirichlet_completed_mp(s: complex, D: int) -> complex:
    q = abs(D)
    a = 0 if D > 0 else 1
    N = _afe_terms(D, s.imag)
    chi = _char_table(D, N)
    extra = int(PI * abs(s.imag) / 4 / math.log(10)) + 8
    with mpmath.workdps(15 + extra):
        sm = mpmath.mpc(s)
        w1, w2 = (sm + a) / 2, (1 - sm + a) / 2
        c1 = (mpmath.pi / q) ** (-w1)
        c2 = (mpmath.pi / q) ** (-w2)
        tot = mpmath.mpf(0)
        for k in range(1, N + 1):
            ch = chi[k - 1]
            if ch == 0:
                continue
            x = mpmath.pi * k * k / q
            tot += ch * (c1 * mpmath.power(k, -sm) * mpmath.gammainc(w1, x)
                         + c2 * mpmath.power(k, sm - 1) * mpmath.gammainc(w2, x))
        return complex(tot * mpmath.power(q, -mpmath.mpf(a) / 2))


def dirichlet_l(s, D: int, completed: bool = False) -> complex:
    """L(s, chi_D) for the real primitive character of discriminant D.

    completed=True returns |D|^{s/2} Gamma_R(s + a) L(s, chi_D), a = (1 - sgn D)/2,
    which is invariant under s -> 1 - s.
    """
    s = _c(s)
    D = int(D)
    if not is_fundamental(D):
        raise DomainError(f"{D} is not a fundamental discriminant")
    if D == 1:
        return completed_zeta(s) if completed else zeta(s)
    if s.imag == 0:
        lam = complex(_dirichlet_completed_real(s.real, D))
    else:
        lam = _dirichlet_completed_complex(s, D)
    if completed:
        return lam
    a = 0 if D > 0 else 1
    return lam * abs(D) ** (-s / 2) * rgamma_r(s + a)


def completed_class_l(s, D: int) -> complex:
    """Completed class-field L-value N(d)^{s/2} Gamma_R(s+a) L(s, eps) (D != 1)."""
    return dirichlet_l(s, D, completed=True)
