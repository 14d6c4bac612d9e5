"""Arithmetic of Q and its completions.

Valuations, local square classes of Delta = t^2 - 4n, the fundamental
discriminant / conductor split, and the elliptic class enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator

from sympy import factorint, isprime

from .errors import DomainError, InputError
from .specfun import kronecker as _kron

Number = int | Fraction


def kronecker(D: int, p: int) -> int:
    if D == 0:
        raise DomainError("kronecker(0, p) undefined")
    return _kron(D, p)


def ordp(x: Number, p: int) -> int:
    x = Fraction(x)
    if x == 0:
        raise DomainError("valuation of 0")
    k, num, den = 0, x.numerator, x.denominator
    while num % p == 0:
        num //= p
        k += 1
    while den % p == 0:
        den //= p
        k -= 1
    return k


def unit_part(x: Number, p: int) -> Fraction:
    x = Fraction(x)
    return x / Fraction(p) ** ordp(x, p)


def absp(x: Number, p: int) -> Fraction:
    if x == 0:
        return Fraction(0)
    return Fraction(p) ** (-ordp(x, p))


@dataclass(frozen=True)
class Place:
    kind: str              # "arch" or "finite"
    weight: int = 0        # arch only
    p: int = 0             # finite only
    d: int = 0             # local different exponent, 0 over Q

    def __post_init__(self):
        if self.kind == "arch":
            if self.weight < 4 or self.weight % 2:
                raise DomainError("archimedean weight must be even and >= 4")
        elif self.kind == "finite":
            if not isprime(self.p):
                raise DomainError(f"{self.p} is not prime")
        else:
            raise DomainError(f"unknown place kind {self.kind!r}")

    @property
    def q(self) -> int:
        return self.p

    @classmethod
    def arch(cls, l: int) -> "Place":
        return cls("arch", weight=l)

    @classmethod
    def finite(cls, p: int) -> "Place":
        return cls("finite", p=p)


# --------------------------------------------------------- local classes

SQUARE = "square"
UNIT_NONSQUARE = "unit_nonsquare"
UNIFORMIZER = "uniformizer"


def least_nonresidue(p: int) -> int:
    for u in range(2, p):
        if pow(u, (p - 1) // 2, p) == p - 1:
            return u
    raise DomainError("no nonresidue")


def _is_local_square_unit(u: Fraction, p: int) -> bool:
    num, den = u.numerator, u.denominator
    if p == 2:
        return (num * den) % 8 == 1
    return pow((num * den) % p, (p - 1) // 2, p) == 1


@dataclass(frozen=True)
class LocalDeltaForm:
    """4^{-1} Delta = delta0 * m^2 with delta0 a fixed class representative."""

    p: int
    delta0: int
    cls: str
    m_ord: int

    @property
    def m_norm(self) -> Fraction:
        return Fraction(self.p) ** (-self.m_ord)

    @property
    def eps(self) -> int:
        """Local character of Q_p(sqrt delta0): +1 split, -1 inert, 0 ramified."""
        if self.cls == SQUARE:
            return 1
        if self.cls == UNIFORMIZER:
            return 0
        if self.p == 2:
            return -1 if self.delta0 == 5 else 0
        return -1

    @property
    def dyadic(self) -> bool:
        return self.p == 2


def local_delta_form(delta_quarter: Number, p: int) -> LocalDeltaForm:
    """Normal form of an element x = Delta/4 of Q_p^x modulo squares."""
    x = Fraction(delta_quarter)
    if x == 0:
        raise DomainError("zero discriminant")
    e = ordp(x, p)
    u = unit_part(x, p)
    if p == 2:
        r = (u.numerator * u.denominator) % 8
        rep = {1: 1, 5: 5, 7: -1, 3: -5}[r]
        if e % 2 == 0:
            cls = SQUARE if rep == 1 else UNIT_NONSQUARE
            return LocalDeltaForm(2, rep, cls, e // 2)
        return LocalDeltaForm(2, 2 * rep, UNIFORMIZER, (e - 1) // 2)
    sq = _is_local_square_unit(u, p)
    rep = 1 if sq else least_nonresidue(p)
    if e % 2 == 0:
        return LocalDeltaForm(p, rep, SQUARE if sq else UNIT_NONSQUARE, e // 2)
    return LocalDeltaForm(p, p * rep, UNIFORMIZER, (e - 1) // 2)


def local_delta_decomposition(t: Number, n: Number, p: int) -> LocalDeltaForm:
    D = Fraction(t) ** 2 - 4 * Fraction(n)
    if D == 0:
        raise DomainError("zero discriminant")
    return local_delta_form(D / 4, p)


# ------------------------------------------------ fundamental discriminants

def _signed_core(M: int) -> tuple[int, int]:
    """M = c * g^2 with c squarefree (signed), g > 0."""
    sgn = -1 if M < 0 else 1
    c, g = 1, 1
    for q, k in factorint(abs(M)).items():
        c *= q ** (k % 2)
        g *= q ** (k // 2)
    return sgn * c, g


def is_square(x: Number) -> bool:
    x = Fraction(x)
    if x < 0:
        return False
    a, b = x.numerator, x.denominator
    return math.isqrt(a) ** 2 == a and math.isqrt(b) ** 2 == b


def fundamental_data(t: Number, n: Number) -> tuple[int, Fraction]:
    D = Fraction(t) ** 2 - 4 * Fraction(n)
    return fundamental_of(D)


def fundamental_of(D: Number) -> tuple[int, Fraction]:
    D = Fraction(D)
    if D == 0 or is_square(D):
        raise DomainError(f"Delta = {D} is a square")
    M = D.numerator * D.denominator
    c, g = _signed_core(M)
    if c % 4 == 1:
        return c, Fraction(g, D.denominator)
    return 4 * c, Fraction(g, 2 * D.denominator)


# ------------------------------------------------------- class records

@dataclass
class EllipticClassRep:
    t: int
    n: int
    Delta: int = field(init=False)
    d_Delta: int = field(init=False)
    f_Delta: Fraction = field(init=False)
    _local: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.Delta = self.t * self.t - 4 * self.n
        self.d_Delta, self.f_Delta = fundamental_data(self.t, self.n)

    def local(self, p: int) -> LocalDeltaForm:
        if p not in self._local:
            self._local[p] = local_delta_form(Fraction(self.Delta, 4), p)
        return self._local[p]

    @property
    def local_forms(self) -> dict[int, LocalDeltaForm]:
        ps = set(factorint(abs(self.Delta))) | set(factorint(abs(self.n))) | {2}
        return {p: self.local(p) for p in sorted(ps)}

    def a_ideal_ord(self, p: int) -> int:
        """ord_p of n f_Delta^{-2}."""
        return ordp(self.n, p) - 2 * ordp(self.f_Delta, p)

    def bad_primes(self) -> list[int]:
        """Primes where n f^{-2} is not a unit."""
        ps = set(factorint(abs(self.n))) | set(factorint(self.f_Delta.numerator))
        ps |= set(factorint(self.f_Delta.denominator))
        return sorted(p for p in ps if p > 1 and self.a_ideal_ord(p) != 0)


def n_local_norm(t: Number, n: Number, p: int, form: LocalDeltaForm | None = None) -> Fraction:
    """|n/m_p^2|_p from the trace/norm case table."""
    t, n = Fraction(t), Fraction(n)
    if form is None:
        form = local_delta_decomposition(t, n, p)
    P = Fraction(p)
    D = t * t - 4 * n
    o4n = ordp(4 * n, p)
    ot = ordp(t, p) if t != 0 else None
    lt = ot is None or 2 * ot > o4n         # |t|^2 < |4n|
    gt = ot is not None and 2 * ot < o4n    # |t|^2 > |4n|
    ratio = (4 * n / (t * t)) if t != 0 else None   # 4n/t^2

    def in_U(x, k):
        return ordp(x, p) == 0 and (x == 1 or ordp(x - 1, p) >= k)

    big = absp(4 * n / D, p)   # |4n/(t^2-4n)|
    if form.cls == SQUARE:
        if lt:
            return Fraction(1)
        if gt:
            return P ** (2 * ot - o4n)
        if in_U(ratio, 1):
            return big
        return Fraction(1)
    if form.cls == UNIT_NONSQUARE:
        if p != 2:
            if ratio is not None and in_U(ratio, 1):
                return big
            return Fraction(1)
        if form.delta0 == 5:
            # the n/t^2-unit branch follows |(t/2m)^2 - delta0| (value |4n/Delta|)
            if lt:
                return Fraction(1)
            return big
        # delta0 in {-1, -5}
        if lt:
            return Fraction(1)
        if ordp(2 * n / (t * t), p) == 0:
            return Fraction(1, 2)
        return big
    # uniformizer class
    if lt:
        return 1 / P
    if in_U(ratio, 2):
        return big / P
    return Fraction(1)


def n_local_norm_direct(t: Number, n: Number, p: int) -> Fraction:
    form = local_delta_decomposition(t, n, p)
    return absp(n, p) * Fraction(p) ** (2 * form.m_ord)


# ----------------------------------------------------------- enumeration

def check_coprime(S: Iterable[int], N: int) -> None:
    S = list(S)
    for p in S:
        if not isprime(p) or p == 2:
            raise InputError(f"S must consist of odd primes, got {p}")
        if N % p == 0:
            raise InputError(f"prime {p} lies in both S and the level")
    if N % 2 == 0:
        raise InputError("level must be odd")
    f = factorint(N)
    if any(k > 1 for k in f.values()):
        raise InputError("level must be squarefree")


def _n_values(S: list[int], nu_max: dict[int, int]) -> list[tuple[int, dict[int, int]]]:
    out = [(1, {})]
    for p in S:
        nxt = []
        for base, nus in out:
            for nu in range(nu_max[p] + 1):
                nxt.append((base * p ** nu, {**nus, p: nu}))
        out = nxt
    return out


def enumerate_elliptic_classes(S: Iterable[int], N: int, height: float,
                               nu_max: dict[int, int] | int = 0,
                               arch_support_only: bool = True,
                               t_min: float | None = None) -> Iterator[EllipticClassRep]:
    """Canonical representatives (t >= 0, n = +-prod p^nu) of the classes.

    Order is by (|n|, sign, t).  With arch_support_only the classes whose
    archimedean factor vanishes identically (Delta > 0 with |t| < sqrt(Delta))
    are dropped; these are exactly the n < 0 classes.
    t_min restricts to t/sqrt|n| > t_min (used for tail estimates).
    """
    S = sorted(set(S))
    check_coprime(S, N)
    if isinstance(nu_max, int):
        nu_max = {p: nu_max for p in S}
    Nprimes = sorted(factorint(N))
    signs = (1,) if arch_support_only else (1, -1)
    for absn, nus in sorted(_n_values(S, nu_max), key=lambda x: x[0]):
        for sgn in signs:
            n = sgn * absn
            tmax = int(math.floor(height * math.sqrt(absn)))
            for t in range(0, tmax + 1):
                if t_min is not None and t <= t_min * math.sqrt(absn):
                    continue
                ok = True
                for p, nu in nus.items():
                    ot = ordp(t, p) if t else 10 ** 6
                    if min(2 * ot, nu) not in (0, 1):
                        ok = False
                        break
                if not ok:
                    continue
                D = t * t - 4 * n
                if D == 0 or is_square(D):
                    continue
                rep = EllipticClassRep(t, n)
                if _level_gate_fails(rep, Nprimes):
                    continue
                yield rep


def _level_gate_fails(rep: EllipticClassRep, Nprimes: list[int]) -> bool:
    for p in Nprimes:
        if kronecker(rep.d_Delta, p) == -1 and rep.a_ideal_ord(p) >= 0:
            return True
    return False


def canonical_class(t: Number, n: Number, S: Iterable[int]) -> tuple[Fraction, Fraction]:
    """Canonical representative of the coset {(ct, c^2 n)} (used for dedup checks).

    Scale so that n = +-prod_{p in S} p^nu with min(2 ord_p t, nu) in {0,1}
    and ord_p t >= 0 at S, then fix the sign of t.
    """
    t, n = Fraction(t), Fraction(n)
    S = sorted(set(S))
    # remove primes outside S from n: need n a square-times-unit outside S
    c = Fraction(1)
    for p in set(factorint(n.numerator)) | set(factorint(n.denominator)):
        if p in S:
            continue
        e = ordp(n, p)
        if e % 2:
            raise DomainError("n is not a unit times a square outside S")
        c *= Fraction(p) ** (-(e // 2))
    t, n = c * t, c * c * n
    for p in S:
        # shift so that min(2 ord t, ord n) in {0, 1}
        ot = ordp(t, p) if t else 10 ** 6
        on = ordp(n, p)
        k = min(2 * ot, on) // 2
        t, n = t / Fraction(p) ** k, n / Fraction(p) ** (2 * k)
    if t != 0 and any(q not in S for q in factorint(t.denominator)):
        raise DomainError("t not integral outside S after scaling")
    return abs(t), n
