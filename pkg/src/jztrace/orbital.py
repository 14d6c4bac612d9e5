"""Hyperbolic and elliptic local orbital integrals.

Closed forms are case tables over the place type.  The oracles integrate
the defining integrals directly:

* p-adic: the x-line is cut into balls c + p^r Z_p, refined until the
  integrand is provably constant on the ball (every matrix entry varies by
  less than p^{-1} times the largest entry).  The integrand then depends only
  on the reduction of the normalised matrix, which is what ch_{ZK},
  the K-average of ch_{ZK_0(p)} and the Green function see.  The torus
  variable runs over shells |t| = p^{-k}, each of d^x t volume 1.  Tails in
  |x| and |t| are followed shell by shell until the contributions decay
  geometrically; the remainder is bounded by the geometric majorant.
* archimedean: scipy quad on the defining line integrals.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import integrate
from sympy import factorint
from sympy.ntheory import sqrt_mod

from . import specfun as sf
from .config import DEFAULT
from .errors import BudgetExhaustedError, DomainError, InsufficientDepthError, PoleError
from .localfactors import (_sph_finite_recurrence, green_value, ocal_arch_minus, ocal_arch_plus,
                           ocal_ord, phi0_arch_single, scal_ord, sph_A_arch, zeta_v)
from .qfield import (SQUARE, UNIFORMIZER, EllipticClassRep, LocalDeltaForm, absp, ordp,
                     unit_part)

KINDS = ("generic", "level", "S")
INF = 10 ** 9


@dataclass(frozen=True)
class OracleResult:
    value: complex
    tail_bound: float
    unresolved: float = 0.0
    balls: int = 0

    @property
    def error_bound(self) -> float:
        return self.tail_bound + self.unresolved


def _ord(x: Fraction, p: int) -> int:
    return INF if x == 0 else ordp(x, p)


# ------------------------------------------------------------ K-averages

def _fixed_lines(m, p: int) -> int:
    (a, b), (c, d) = m
    if b % p == 0 and c % p == 0 and (a - d) % p == 0:
        return p + 1
    disc = ((a + d) ** 2 - 4 * (a * d - b * c)) % p
    if disc == 0:
        return 1
    return 2 if pow(disc, (p - 1) // 2, p) == 1 else 0


def _reduce(entries, mu: int, p: int):
    """Reduction mod p of entries / p^mu (entries are Fractions)."""
    out = []
    for e in entries:
        if e == 0 or _ord(e, p) > mu:
            out.append(0)
            continue
        u = e / Fraction(p) ** mu
        out.append(u.numerator * pow(u.denominator, -1, p) % p)
    return out


def k_average(kind: str, entries, p: int, s=None) -> complex:
    """int_K Phi(k^{-1} g k) dk for the three finite test-function types."""
    a, b, c, d = entries
    det = a * d - b * c
    if det == 0:
        raise DomainError("singular matrix")
    mu = min(_ord(e, p) for e in entries)
    if kind == "S":
        return green_value(s, ((a, b), (c, d)), p)
    if 2 * mu != _ord(det, p):
        return 0j
    if kind == "generic":
        return 1 + 0j
    if kind == "level":
        r = _reduce(entries, mu, p)
        return complex(_fixed_lines(((r[0], r[1]), (r[2], r[3])), p) / (p + 1))
    raise DomainError(f"unknown place type {kind!r}")


# --------------------------------------------------------- ball machinery

def _poly_eval(P, x):
    return P[0] + P[1] * x + P[2] * x * x


def _constant_on_ball(polys, c: Fraction, r: int, p: int) -> bool:
    vals = [_poly_eval(P, c) for P in polys]
    mu = min(_ord(v, p) for v in vals)
    for P in polys:
        d1 = P[1] + 2 * P[2] * c
        var = min(_ord(d1, p) + r, _ord(P[2], p) + 2 * r)
        if var < mu + 1:
            return False
    return True


class _BallIntegrator:
    """Adaptive exact integration of a locally constant function over F_p."""

    def __init__(self, p, polys, value_fn, weight_const, depth):
        self.p = p
        self.polys = polys          # matrix entries as quadratics in x
        self.value_fn = value_fn    # x -> complex (integrand at a point)
        self.weight_const = weight_const  # (c, r) -> bool for the extra weight
        self.depth = depth
        self.unresolved = 0.0
        self.balls = 0

    def ball(self, c: Fraction, r: int, r0: int) -> complex:
        p = self.p
        stack = [(c, r)]
        tot = 0j
        while stack:
            c, r = stack.pop()
            self.balls += 1
            vol = float(p) ** (-r)
            if _constant_on_ball(self.polys, c, r, p) and self.weight_const(c, r):
                tot += self.value_fn(c) * vol
                continue
            if r - r0 >= self.depth:
                v = self.value_fn(c)
                tot += v * vol
                self.unresolved += 2 * abs(v) * vol
                continue
            step = Fraction(p) ** r
            for j in range(p):
                stack.append((c + j * step, r + 1))
        return tot

    def shell(self, j: int) -> complex:
        """Integral over |x| = p^j, j >= 1."""
        p = self.p
        base = Fraction(p) ** (-j)
        return sum(self.ball(u * base, -j + 1, -j + 1) for u in range(1, p))

    def line(self, eps: float, j_min: int, j_max: int = 400):
        core = self.ball(Fraction(0), 0, 0)
        tot, tail = _outward(self.shell, eps, j_min, j_max, start=1)
        return core + tot, tail


def _outward(term, eps: float, j_min: int, j_max: int, start: int):
    """Sum term(j) for j = start, start+1, ... until a certified geometric tail."""
    tot = 0j
    prev = None
    zeros = 0
    for j in range(start, start + j_max):
        c = term(j)
        tot += c
        idx = j - start
        if idx + 1 < j_min:
            prev = c
            continue
        if c == 0:
            zeros += 1
            if zeros >= 3 and (prev == 0):
                return tot, 0.0
        else:
            zeros = 0
        if prev not in (None, 0) and c != 0:
            ratio = abs(c) / abs(prev)
            if ratio < 0.9:
                # eventually an exact power law: add the geometric remainder
                rest = c * ratio / (1 - ratio)
                bound = abs(rest)
                if bound <= eps * max(1.0, abs(tot)):
                    return tot + rest, bound
        prev = c
    raise InsufficientDepthError("tail did not settle within the shell budget")


# ---------------------------------------------------------- hyperbolic

def hyp_closed(kind: str, z, a, *, p: int = 0, l: int = 0, s=None) -> complex:
    """F_v^{(z)}(a).  kind: 'arch' (weight l), 'generic', 'level', 'S' (prime p)."""
    z = complex(z)
    if kind == "arch":
        a = float(a)
        if a == 1:
            raise DomainError("a = 1 excluded")
        if not abs(z.real) < 2 * l - 1:
            raise DomainError("|Re z| < 2l - 1 required")
        if a <= 0:
            return 0j
        pre = (4 * math.pi * sf.rgamma(l) * sf.cgamma(l + (z - 1) / 2) * sf.cgamma(l + (-z - 1) / 2)
               * sf.rgamma_r((1 + z) / 2) * sf.rgamma_r((1 - z) / 2))
        lam = ((a - 1) / (a + 1)) ** 2
        return pre * math.sqrt(a) / abs(a - 1) * sf.legendre_p(1 - l, (z - 1) / 2, lam ** -0.5)
    a = Fraction(a)
    if a == 1 or a == 0:
        raise DomainError("a must lie in F^x - {1}")
    e = ordp(a / (a - 1) ** 2, p)
    if kind == "S":
        return scal_ord(p, 1, z, s, e)
    if ordp(a, p) != 0:
        return 0j
    return ocal_ord(p, 1, z, e, 1 if kind == "level" else 0)


def _phi_finite_table(p: int, z, m_max: int):
    return [_sph_finite_recurrence(p, 0, z, m) for m in range(m_max + 1)]


def hyp_oracle_padic(p: int, kind: str, z, a, s=None, depth: int = 8,
                     eps: float | None = None) -> OracleResult:
    a = Fraction(a)
    if a == 1 or a == 0:
        raise DomainError("a must lie in F^x - {1}")
    if depth < 1:
        raise DomainError("depth >= 1")
    eps = DEFAULT.policy.eps if eps is None else eps
    z = complex(z)
    cache: dict[int, complex] = {}

    def phi(x: Fraction) -> complex:
        m = 0 if x == 0 else max(0, -ordp(x, p))
        if m not in cache:
            cache[m] = _sph_finite_recurrence(p, 0, z, m)
        return cache[m]

    polys = [(a, 0, 0), (0, a - 1, 0), (Fraction(0), 0, 0), (Fraction(1), 0, 0)]
    polys = [tuple(Fraction(c) for c in P) for P in polys]

    def value(x):
        return k_average(kind, [a, (a - 1) * x, Fraction(0), Fraction(1)], p, s) * phi(x)

    def wconst(c, r):
        return r >= 0 and _ord(c, p) >= 0 or _ord(c, p) < r

    I = _BallIntegrator(p, polys, value, wconst, depth)
    j_min = max(3, 3 - _ord(a - 1, p) + abs(ordp(a, p)))
    val, tail = I.line(eps, j_min)
    return OracleResult(val, tail, I.unresolved, I.balls)


def _phi0_arch(z: complex, x: float) -> complex:
    zr = z / 2
    near_int = abs(zr.imag) < 1e-12 and abs(zr.real - round(zr.real)) < 1e-3
    if x * x <= 1 / 3 or near_int:
        return phi0_arch_single(z, x)
    X = 1 / (1 + x * x)

    def h(zz):
        return X ** ((zz + 1) / 4) * sf._f21_series((zz + 1) / 4, (zz + 1) / 4, (zz + 2) / 2, X)

    return sph_A_arch(0, z) * h(z) + sph_A_arch(0, -z) * h(-z)


def _quad_c(f, lo, hi, budget, tol):
    limit = max(50, budget // 21)
    with warnings.catch_warnings():
        # roundoff warnings are expected when tol sits at machine precision; e1, e2 carry the estimate
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re, e1 = integrate.quad(lambda x: f(x).real, lo, hi, limit=limit, epsabs=0, epsrel=tol)
        im, e2 = integrate.quad(lambda x: f(x).imag, lo, hi, limit=limit, epsabs=0, epsrel=tol)
    return complex(re, im), e1 + e2


def hyp_oracle_arch(l: int, z, a: float, budget: int | None = None,
                    tol: float = 1e-10) -> OracleResult:
    z = complex(z)
    a = float(a)
    if a == 1:
        raise DomainError("a = 1 excluded")
    if not abs(z.real) < 2 * l - 1:
        raise DomainError("|Re z| < 2l - 1 required")
    if a <= 0:
        return OracleResult(0j, 0.0)
    budget = budget or DEFAULT.policy.quad_budget
    pre = 2.0 ** l * a ** (l / 2)

    def f(x):
        w = ((a + 1) - 1j * (a - 1) * x) ** (-l) + ((a + 1) + 1j * (a - 1) * x) ** (-l)
        return pre * w * _phi0_arch(z, x)

    L = max(2.0, 4.0 / abs(a - 1))
    tot, err = 0j, 0.0
    for lo, hi in ((0, 1), (1, L), (L, np.inf)):
        v, e = _quad_c(f, lo, hi, budget, tol)
        tot += v
        err += e
    if err > 1e-3 * tol ** 0.5 * max(1.0, abs(tot)):
        raise BudgetExhaustedError(f"quadrature error estimate {err:.2e} too large")
    return OracleResult(tot, err)


# ------------------------------------------------------------- elliptic

def _padic_sqrt(u: Fraction, p: int, prec: int) -> Fraction:
    """A square root of the unit square u, correct modulo p^prec."""
    mod = p ** prec
    val = u.numerator * pow(u.denominator, -1, mod) % mod
    r = sqrt_mod(val, mod)
    if r is None:
        raise DomainError("not a square")
    return Fraction(r)


def local_m(rep: EllipticClassRep, p: int, prec: int = 48) -> Fraction:
    """m_p with Delta/4 = delta0 m_p^2, as a rational accurate to p^{prec}."""
    form = rep.local(p)
    x = Fraction(rep.Delta, 4) / form.delta0
    e = ordp(x, p)
    return Fraction(p) ** (e // 2) * _padic_sqrt(unit_part(x, p), p, prec)


def phi0_one(form: LocalDeltaForm, z) -> complex:
    """phi_{0,v}(1_2) |m_v| at a finite place with delta0 != 1."""
    z = complex(z)
    if form.cls == UNIFORMIZER:
        return 1 + form.p ** ((z + 1) / 2)
    if form.dyadic:
        if form.delta0 == 5:
            return 2 / 3 * (1 + 2 ** (-z))
        return 1 + 2 ** (-(z + 1) / 2)
    return 1 + 0j


def ell_closed(kind: str, z, rep: EllipticClassRep, *, p: int = 0, l: int = 0,
               s=None) -> complex:
    """E_v^{(z)} at the class (t:n) with the local normal form at v."""
    z = complex(z)
    t, n = rep.t, rep.n
    if kind == "arch":
        m = math.sqrt(abs(rep.Delta)) / 2
        a = float(t) / (2 * m)
        if rep.Delta > 0:
            return 2 * m * ocal_arch_plus(z, l, a)
        return 2 * m * ocal_arch_minus(z, l, a)
    form = rep.local(p)
    m_abs = float(form.m_norm)
    two = 0.5 if p == 2 else 1.0
    eps = form.eps
    ord_a = _ord(Fraction(t), p) - (1 if p == 2 else 0) - form.m_ord   # ord t/(2m)
    e_nm2 = ordp(Fraction(n), p) - 2 * form.m_ord                        # ord n/m^2
    if kind == "S":
        return m_abs * scal_ord(p, eps, z, s, e_nm2)
    if kind == "level":
        if form.cls == SQUARE:
            gate = ord_a != 0 or e_nm2 <= 0
        elif form.cls == UNIFORMIZER:
            gate = e_nm2 <= 0
        else:
            gate = e_nm2 < 0
        return m_abs * ocal_ord(p, eps, z, e_nm2, 1) if gate else 0j
    if kind != "generic":
        raise DomainError(f"unknown place type {kind!r}")
    if form.cls == SQUARE:
        e4 = e_nm2 - (2 if p == 2 else 0)
        gate = ord_a != 0 or e4 <= 0
        return two * m_abs * ocal_ord(p, 1, z, e4, 0) if gate else 0j
    if form.dyadic and form.delta0 == 5:
        e4 = e_nm2 - 2
        return (two * m_abs * 2 ** ((-z - 1) / 2) * 3 / (1 + 2 ** (-z))
                * ocal_ord(p, eps, z, e4, 0))
    if form.cls == UNIFORMIZER:
        gate = ord_a <= 0
    elif form.dyadic:
        gate = ord_a != 0
    else:
        gate = True
    return m_abs * ocal_ord(p, eps, z, e_nm2, 0) if gate else 0j


def ell_oracle_padic(p: int, kind: str, z, rep: EllipticClassRep, s=None, depth: int = 8,
                     eps: float | None = None) -> OracleResult:
    eps = DEFAULT.policy.eps if eps is None else eps
    z = complex(z)
    form = rep.local(p)
    m = local_m(rep, p)
    a = Fraction(rep.t) / (2 * m)
    if form.cls == SQUARE:
        b = (a + 1) / (a - 1)
        r = hyp_oracle_padic(p, kind, z, b, s, depth, eps)
        f = float(absp(2 * m, p))
        return OracleResult(f * r.value, f * r.tail_bound, f * r.unresolved, r.balls)
    tau = Fraction(form.delta0)
    oa = abs(_ord(a, p)) if a else 0      # t = 0 gives a = 0, no scale from a
    balls = 0
    unresolved = 0.0

    def t_term(k: int) -> complex:
        nonlocal balls, unresolved
        tt = Fraction(p) ** k
        polys = [(a, -tau, Fraction(0)), (1 / tt, Fraction(0), -tau / tt),
                 (tau * tt, Fraction(0), Fraction(0)), (a, tau, Fraction(0))]

        def value(x):
            ent = [a - tau * x, (1 - tau * x * x) / tt, tau * tt, a + tau * x]
            return k_average(kind, ent, p, s)

        I = _BallIntegrator(p, polys, value, lambda c, r: True, depth)
        j_min = 3 + abs(k) + oa
        v, tail = I.line(eps * 1e-2, j_min)
        balls += I.balls
        unresolved += I.unresolved + tail
        return v * float(p) ** (-k * (z.real - 1) / 2) * cmath.exp(-1j * k * z.imag / 2 * math.log(p))

    k_min = 3 + oa + abs(_ord(tau, p))
    up, t1 = _outward(t_term, eps, k_min, 400, start=0)
    down, t2 = _outward(lambda j: t_term(-j), eps, k_min, 400, start=1)
    norm = phi0_one(form, z) / float(form.m_norm)
    val = (up + down) / norm
    return OracleResult(val, (t1 + t2) / abs(norm), unresolved / abs(norm), balls)


def ell_oracle_arch(l: int, z, a: float, m_abs: float = 1.0, budget: int | None = None,
                    tol: float = 1e-10) -> OracleResult:
    """Elliptic archimedean integral for delta0 = -1 at a = t/(2m)."""
    z = complex(z)
    a = float(a)
    if not abs(z.real) < 2 * l - 1:
        raise DomainError("|Re z| < 2l - 1 required")
    budget = budget or DEFAULT.policy.quad_budget
    c0 = 2.0 ** l * (1 + a * a) ** (l / 2) * sf.cgamma(l - 0.5) * sf.SQRT_PI * sf.rgamma(l)

    def B(t: float) -> complex:
        c = 2 * a - 1j * (t + 1 / t)
        Z = -1j / (t * c)
        return c0 * c ** (-l) / cmath.sqrt(Z)

    def f(u: float) -> complex:
        t = math.exp(u)
        w = cmath.exp(u * (z - 1) / 2)
        return (B(t) + B(-t)) * w

    # |integrand| decays like exp(-rate |u|) on both sides
    rate = min(l + (z.real - 1) / 2, l - 1 - (z.real - 1) / 2 - 1)
    U = 2 + 50 / rate
    tot, err = 0j, 0.0
    for lo, hi in ((-U, -2), (-2, 0), (0, 2), (2, U)):
        v, e = _quad_c(f, lo, hi, budget, tol)
        tot += v
        err += e
    if err > 1e-3 * tol ** 0.5 * max(1.0, abs(tot)):
        raise BudgetExhaustedError(f"quadrature error estimate {err:.2e} too large")
    return OracleResult(m_abs * tot, m_abs * err)


# ------------------------------------------------------- Eisenstein period

def _delta_primes(rep: EllipticClassRep) -> list[int]:
    return sorted(set(factorint(abs(rep.Delta))) | {2})


def eis_period(rep: EllipticClassRep, z) -> complex:
    """E^Delta(z; 1_2) in the closed (Hecke) form."""
    z = complex(z)
    if z == 1 or z == -1:
        raise PoleError("Eisenstein period pole at z = +-1")
    d, _ = rep.d_Delta, rep.f_Delta
    sres = (z + 1) / 2
    val = complex(abs(rep.Delta) ** 0.5 / 2) ** -1       # archimedean |m|^{-1}
    for p in _delta_primes(rep):
        val *= float(rep.local(p).m_norm) ** -1
    if rep.Delta > 0:
        val *= 0.5
    else:
        val *= 0.5                                       # archimedean delta0 = -1
    f2 = rep.local(2)
    if f2.cls == SQUARE:
        val *= 2
    if f2.delta0 == 5 and f2.cls != SQUARE:
        val *= 2 ** (sres + 1) / 3 * (1 + 2 ** (-z))
    L = sf.completed_zeta(sres) * sf.dirichlet_l(sres, d, completed=True)
    return val * L / sf.completed_zeta(z + 1)


def eis_local_factor(rep: EllipticClassRep, z, p: int | None) -> complex:
    """Y_v(z) divided by its generic value zeta_{E_v}((z+1)/2)/zeta_{F_v}(z+1)."""
    z = complex(z)
    if p is None:
        m = abs(rep.Delta) ** 0.5 / 2
        return m ** -1 * m ** (-(z + 1) / 2) * 2 ** ((z - 1) / 2)
    form = rep.local(p)
    mn = float(form.m_norm)
    d0 = float(absp(Fraction(form.delta0), p))
    val = mn ** -1 * (d0 * mn) ** (-(z + 1) / 2)
    if form.cls == SQUARE:
        val *= float(absp(Fraction(2), p)) ** ((z - 1) / 2)
    elif p == 2 and form.delta0 == 5:
        val *= 2 / 3 * (1 + 2 ** (-z))
    return val


def eis_period_assembly(rep: EllipticClassRep, z) -> complex:
    """Product of the local factors, with the Euler product in global form."""
    z = complex(z)
    if z == 1 or z == -1:
        raise PoleError("Eisenstein period pole at z = +-1")
    sres = (z + 1) / 2
    d = rep.d_Delta
    val = eis_local_factor(rep, z, None)
    for p in _delta_primes(rep):
        val *= eis_local_factor(rep, z, p)
    # zeta_E completed = zeta_F completed * Gamma_R(s + a) L_fin(s)
    if d > 0:
        gE = sf.gamma_r(sres) ** 2
    else:
        gE = sf.gamma_c(sres)
    LE = sf.zeta(sres) * sf.dirichlet_l(sres, d) if d != 1 else sf.zeta(sres) ** 2
    return val * gE * LE / (sf.gamma_r(z + 1) * sf.zeta(z + 1))
