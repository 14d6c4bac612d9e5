"""Closed-form local building blocks.

Finite places carry q = p and d = 0.  Throughout, v = q^{z/4} is the
natural variable: every z-dependent factor is a Laurent polynomial in v,
and the apparent poles at q^{z/2} = 1 cancel between the two terms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from . import specfun as sf
from .config import DEFAULT
from .errors import DomainError, PoleError
from .qfield import absp, ordp

# ------------------------------------------------------------------ test functions


@dataclass(frozen=True)
class SymLaurentPoly:
    """alpha = sum_n c_n sigma_n with sigma_n(zeta) = zeta^n + zeta^{-n}.

    Convention: sigma_0 = 2 (so alpha = c_0 is stored as coeffs {0: c_0/2}).
    """

    coeffs: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        for n in self.coeffs:
            if int(n) != n or n < 0:
                raise DomainError("SymLaurentPoly indices must be >= 0")

    @classmethod
    def sigma(cls, n: int, c: complex = 1.0) -> "SymLaurentPoly":
        return cls({n: c})

    @property
    def degree(self) -> int:
        nz = [n for n, c in self.coeffs.items() if c != 0]
        return max(nz) if nz else 0

    def __add__(self, other: "SymLaurentPoly") -> "SymLaurentPoly":
        out = dict(self.coeffs)
        for n, c in other.coeffs.items():
            out[n] = out.get(n, 0) + c
        return SymLaurentPoly(out)

    def scale(self, c: complex) -> "SymLaurentPoly":
        return SymLaurentPoly({n: c * v for n, v in self.coeffs.items()})

    def __call__(self, zeta: complex) -> complex:
        zeta = complex(zeta)
        return sum(c * (zeta ** n + zeta ** (-n)) for n, c in self.coeffs.items())

    def at_x(self, x: complex) -> complex:
        """Value when zeta + 1/zeta = x (Chebyshev recursion)."""
        if not self.coeffs:
            return 0j
        N = max(self.coeffs)
        sig = [2 + 0j, complex(x)]
        for _ in range(2, N + 1):
            sig.append(x * sig[-1] - sig[-2])
        return sum(c * sig[n] for n, c in self.coeffs.items())

    def at_nu(self, nu: complex, q: int) -> complex:
        return self(q ** (-complex(nu) / 2))

    def to_json(self) -> dict:
        return {str(n): [complex(c).real, complex(c).imag] for n, c in sorted(self.coeffs.items())}


# ------------------------------------------------------------- local zeta

def zeta_v(q: int, s) -> complex:
    s = complex(s)
    den = 1 - q ** (-s)
    if den == 0:
        raise PoleError("local zeta pole")
    return 1 / den


def linv_v(q: int, s, eps: int) -> complex:
    """1 / L_v(s, eps) = 1 - eps q^{-s}."""
    return 1 - eps * q ** (-complex(s))


def _vvar(q: int, z) -> complex:
    return cmath.exp(complex(z) * math.log(q) / 4)


def _laurent_eval(poly: Mapping[int, complex], v: complex) -> complex:
    return sum(c * v ** k for k, c in poly.items())


def _laurent_mul(a: Mapping[int, complex], b: Mapping[int, complex]) -> dict[int, complex]:
    out: dict[int, complex] = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, 0) + x * y
    return out


def _antisym_ratio(N: Mapping[int, complex], v: complex, switch: float) -> complex:
    """[N(v) - v^4 N(1/v)] / (1 - v^4), removable at v^2 = 1."""
    v2 = v * v
    if abs(v2 - 1) >= switch:
        num = _laurent_eval(N, v) - v ** 4 * _laurent_eval(N, 1 / v)
        return num / (1 - v ** 4)
    # H(v) = sum_k c_k (v^k - v^{4-k}); divide by (1 - v^2) exactly
    H: dict[int, complex] = {}
    for k, c in N.items():
        H[k] = H.get(k, 0) + c
        H[4 - k] = H.get(4 - k, 0) - c
    kmin = min(H)
    deg = max(H) - kmin
    P = [0j] * (deg + 1)
    for k, c in H.items():
        P[k - kmin] += c
    # P(v) = (1 - v^2) Q(v): Q_j = P_j + Q_{j-2}
    Q = [0j] * max(deg - 1, 1)
    for j in range(len(Q)):
        Q[j] = P[j] + (Q[j - 2] if j >= 2 else 0)
    val = sum(c * v ** j for j, c in enumerate(Q))
    return v ** kmin * val / (1 + v2)


def _ocal_numerator(q: int, eps: int, level: int, e: int, extra: Mapping[int, complex] | None = None):
    """Laurent polynomial N(v) of the first term (the second is N(1/v))."""
    N = {e: 1.0 + 0j, e + 2: -eps * q ** -0.5}
    if level:
        N = _laurent_mul(N, {0: 1 / (1 + q), 2: q ** 0.5 / (1 + q)})
    if extra:
        N = _laurent_mul(N, extra)
    return N


def ocal_ord(q: int, eps: int, z, e: int, level: int = 0) -> complex:
    """O_{v,level}(a) for |a| = q^{-e} with local character value eps."""
    if eps not in (-1, 0, 1):
        raise DomainError("eps must be -1, 0 or 1")
    if e == 0:
        # unit values are exact rationals
        return complex(1 if not level else (1 + eps) / (1 + q))
    v = _vvar(q, z)
    N = _ocal_numerator(q, eps, level, e)
    return q ** (-e / 4) * _antisym_ratio(N, v, DEFAULT.tol.removable_switch)


def ocal0(q: int, eps: int, z, a) -> complex:
    return ocal_ord(q, eps, z, ordp(a, q), 0)


def ocal1(q: int, eps: int, z, a) -> complex:
    return ocal_ord(q, eps, z, ordp(a, q), 1)


def ocal0_naive(q: int, eps: int, z, e: int, level: int = 0) -> complex:
    """The literal two-term display (no rearrangement)."""
    z = complex(z)
    A = float(q) ** (-e)
    t1 = zeta_v(q, -z) * linv_v(q, (1 - z) / 2, eps) * A ** ((1 - z) / 4)
    t2 = zeta_v(q, z) * linv_v(q, (1 + z) / 2, eps) * A ** ((1 + z) / 4)
    if level:
        t1 *= (1 + q ** ((z + 1) / 2)) / (1 + q)
        t2 *= (1 + q ** ((1 - z) / 2)) / (1 + q)
    return t1 + t2


# ------------------------------------------------------------------- Scal

def _check_s(z, s):
    if not complex(s).real > (abs(complex(z).real) - 1) / 2:
        raise DomainError("Scal requires Re s > (|Re z| - 1)/2")


def scal_ord(q: int, eps: int, z, s, e: int) -> complex:
    """S_v(s; a) for |a| = q^{-e}."""
    _check_s(z, s)
    z, s = complex(z), complex(s)
    pre = -q ** (-(s + 1) / 2)
    if e >= 0:
        return (pre * zeta_v(q, s + (z + 1) / 2) * zeta_v(q, s + (1 - z) / 2)
                * linv_v(q, s + 1, eps) * q ** (-e * (s + 1) / 2))
    c = q ** (-s - 0.5)
    v = _vvar(q, z)
    N = _ocal_numerator(q, eps, 0, e, extra={0: 1.0, 2: -c})
    den = (1 - c / (v * v)) * (1 - c * v * v)
    return pre * q ** (-e / 4) * _antisym_ratio(N, v, DEFAULT.tol.removable_switch) / den


def scal(q: int, eps: int, z, s, a) -> complex:
    return scal_ord(q, eps, z, s, ordp(a, q))


def _h_complete(A: complex, B: complex, k: int) -> complex:
    """Complete homogeneous sum_{j<=k} A^j B^{k-j}."""
    return sum(A ** j * B ** (k - j) for j in range(k + 1))


def _ab(q: int, z) -> tuple[complex, complex]:
    z = complex(z)
    return q ** (-(z + 1) / 2), q ** ((z - 1) / 2)


def scal_taylor(q: int, eps: int, z, e: int, n: int) -> complex:
    """Coefficient of zeta^n in g = S(zeta) q^{1/2}(zeta^{-1} - zeta), zeta = q^{-s/2}."""
    if n < 0:
        return 0j
    A, B = _ab(q, z)
    if e >= 0:
        if n < e or (n - e) % 2:
            return 0j
        k = (n - e) // 2
        # P(w) = (1 - eps w/q)(1 - w) = 1 + p1 w + p2 w^2
        p1, p2 = -(1 + eps / q), eps / q
        tot = _h_complete(A, B, k)
        if k >= 1:
            tot += p1 * _h_complete(A, B, k - 1)
        if k >= 2:
            tot += p2 * _h_complete(A, B, k - 2)
        return -q ** (-e / 2) * tot
    if n % 2:
        return 0j
    k = n // 2
    v = _vvar(q, z)
    sw = DEFAULT.tol.removable_switch
    base = _ocal_numerator(q, eps, 0, e)

    def comb(j: int) -> complex:
        # K1 A^j + K2 B^j, with A = q^{-1/2} v^{-2}, B = q^{-1/2} v^{2}
        Nj = {kk - 2 * j: c for kk, c in base.items()}
        return q ** (-j / 2) * q ** (-e / 4) * _antisym_ratio(Nj, v, sw)

    if k == 0:
        return -comb(0)
    return -(comb(k) - comb(k - 1))


def scal_hat(q: int, eps: int, z, alpha: SymLaurentPoly, e: int) -> complex:
    """(1/2 pi i) int S(s; a) alpha(s) dmu(s) as an exact residue sum."""
    tot = 0j
    for n, c in alpha.coeffs.items():
        if c == 0:
            continue
        g = scal_taylor(q, eps, z, e, n)
        tot += c * (2 * g if n == 0 else g)
    return tot


def scal_hat_quadrature(q: int, eps: int, z, alpha: SymLaurentPoly, e: int,
                        s_real: float | None = None, npts: int = 256) -> complex:
    """Trapezoid rule on the contour Re s = s_real (a circle in zeta).

    Far right contours lose digits to cancellation (alpha grows like q^{n Re s/2}),
    so the default hugs the convergence line.
    """
    if s_real is None:
        s_real = max(1.2, (abs(complex(z).real) + 1) / 2 + 0.2)
    tot = 0j
    L = math.log(q)
    for j in range(npts):
        y = -2 * math.pi / L + 4 * math.pi / L * (j + 0.5) / npts
        s = complex(s_real, y)
        dmu = 0.5 * L * (q ** ((1 + s) / 2) - q ** ((1 - s) / 2))
        zeta = q ** (-s / 2)
        tot += scal_ord(q, eps, z, s, e) * alpha(zeta) * dmu
    # ds = i dy, length 4 pi / log q
    return tot * (4 * math.pi / L / npts) * 1j / (2j * math.pi)


def upsilon_local(q: int, z, alpha: SymLaurentPoly) -> complex:
    """Residue value of the unipotent S-factor against alpha."""
    A, _ = _ab(q, z)
    tot = 0j
    for n, c in alpha.coeffs.items():
        if c == 0 or n % 2:
            continue
        k = n // 2
        g = -1.0 if k == 0 else -(A ** k - A ** (k - 1))
        tot += c * (2 * g if n == 0 else g)
    return tot


def upsilon_raw(q: int, z, s) -> complex:
    z, s = complex(z), complex(s)
    return -q ** (-(s + 1) / 2) / (1 - q ** (-s - (z + 1) / 2))


# ------------------------------------------------------------ archimedean

def _gamma_pair(l: int, z) -> complex:
    z = complex(z)
    return sf.cgamma(l + (z - 1) / 2) * sf.cgamma(l + (-z - 1) / 2)


def _check_arch(z, l):
    if l < 4 or l % 2:
        raise DomainError("weight must be even and >= 4")
    if not abs(complex(z).real) < 2 * l - 1:
        raise DomainError("|Re z| < 2l - 1 required")


def ocal_arch_plus(z, l: int, a: float, drop_gamma_r: bool = False) -> complex:
    """O^{+}(a).  With drop_gamma_r the factor 1/Gamma_R((1-z)/2) is omitted
    (the caller multiplies by the finite zeta instead of the completed one)."""
    _check_arch(z, l)
    a = float(a)
    if abs(a) <= 1:
        return 0j
    z = complex(z)
    pre = 2 * math.pi * sf.rgamma(l) * _gamma_pair(l, z) * sf.rgamma_r((1 + z) / 2)
    if not drop_gamma_r:
        pre *= sf.rgamma_r((1 - z) / 2)
    return pre * math.sqrt(a * a - 1) * sf.legendre_p(1 - l, (z - 1) / 2, abs(a))


def ocal_arch_minus(z, l: int, a: float) -> complex:
    _check_arch(z, l)
    a = float(a)
    z = complex(z)
    if a == 0:
        return (2 ** (l - 1) * (-1) ** (l // 2) * sf.SQRT_PI
                * sf.cgamma(l / 2 + (z - 1) / 4) * sf.cgamma(l / 2 + (-z - 1) / 4) * sf.rgamma(l))
    nu = (z - 1) / 2
    diff = sf.legendre_p(1 - l, nu, 1j * a) - sf.legendre_p(1 - l, nu, -1j * a)
    sgn = 1 if a > 0 else -1
    return math.pi * 1j * sf.rgamma(l) * _gamma_pair(l, z) * sgn * math.sqrt(1 + a * a) * diff


# --------------------------------------------------------------- unipotent

def unip_local(w, kind: str, *, l: int = 0, q: int = 0, s=None) -> complex:
    """Local unipotent integral U_v(w).

    kind: "arch" (needs l), "S" (needs q, s), "level" (q), "generic" (q).
    """
    w = complex(w)
    if kind == "arch":
        if not (1 - l < w.real < 1):
            raise DomainError("arch U_v needs 1 - l < Re w < 1")
        return (sf.gamma_r(1 - w) * 2 ** (2 - 2 * w) * math.pi ** (1 - w / 2)
                * sf.cgamma(l + w - 1) * sf.rgamma(w / 2) * sf.rgamma(l))
    if kind == "S":
        s = complex(s)
        if not (s.real > 1 and -s.real < w.real < 1):
            raise DomainError("S-type U_v needs Re s > 1, -Re s < Re w < 1")
        return -q ** (-(s + 1) / 2) / ((1 - q ** (w - 1)) * (1 - q ** (-s - w)))
    if not w.real < 1:
        raise DomainError("finite U_v needs Re w < 1")
    if kind == "level":
        return (1 + q ** w) / ((1 + q) * (1 - q ** (w - 1)))
    if kind == "generic":
        return 1 / (1 - q ** (w - 1))
    raise DomainError(f"unknown place type {kind!r}")


# ------------------------------------------------------------------ Green

def green_value(s, g, p: int) -> complex:
    """Non-archimedean Green function at a 2x2 rational matrix."""
    (a, b), (c, d) = [[Fraction(x) for x in row] for row in g]
    det = a * d - b * c
    if det == 0:
        raise DomainError("singular matrix")
    s = complex(s)
    m = max(absp(x, p) for x in (a, b, c, d))
    r = m * m / absp(det, p)
    den = p ** (-(s + 1) / 2) - p ** ((s + 1) / 2)
    if den == 0:
        raise PoleError("Green function normalisation vanishes")
    # r is an integral power of p
    k = ordp(r, p) if r != 1 else 0
    # r = p^k, value r^{-(s+1)/2}
    return cmath.exp(-k * (s + 1) / 2 * math.log(p)) / den


def matcoef(l: int, g) -> complex:
    (a, b), (c, d) = [[float(x) for x in row] for row in g]
    det = a * d - b * c
    if det == 0:
        raise DomainError("singular matrix")
    if det < 0:
        return 0j
    return (4 * det) ** (l / 2) * ((a + d) - 1j * (b - c)) ** (-l)


# -------------------------------------------------------------- spherical

def sph_A_finite(q: int, w, z) -> complex:
    w, z = complex(w), complex(z)
    return (zeta_v(q, 1) * zeta_v(q, -z)
            / (zeta_v(q, (-z + 2 * w + 1) / 2) * zeta_v(q, (-z - 2 * w + 1) / 2)))


def sph_A_arch(w, z) -> complex:
    w, z = complex(w), complex(z)
    return (sf.gamma_r(1) * sf.gamma_r(-z) * sf.rgamma_r((-z + 2 * w + 1) / 2)
            * sf.rgamma_r((-z - 2 * w + 1) / 2))


def _sph_finite_recurrence(q: int, w, z, m: int) -> complex:
    """a(m) from the Hecke recursion (entire in z)."""
    w, z = complex(w), complex(z)
    lam = q ** 0.5 * (q ** (z / 2) + q ** (-z / 2))
    a0 = 1 + 0j
    if m == 0:
        return a0
    a1 = (lam - q ** w - q ** (-w)) * a0 / ((q - 1) * q ** w)
    prev, cur = a0, a1
    for _ in range(1, m):
        prev, cur = cur, (lam * cur - q ** (-w) * prev) / q ** (1 + w)
    return cur


def spherical_phi(w, z, x, place) -> complex:
    """phi^{(w,z)} at [[1, x], [0, 1]]."""
    w, z = complex(w), complex(z)
    if place.kind == "finite":
        q = place.p
        m = max(0, -ordp(x, q)) if x != 0 else 0
        if abs(q ** (z / 2) - 1) < DEFAULT.tol.removable_switch or abs(q ** (z / 2) + 1) < 1e-8:
            return _sph_finite_recurrence(q, w, z, m)

        def h(zz):
            return float(q) ** (-m * (zz + 2 * w + 1) / 2)

        return sph_A_finite(q, w, z) * h(z) + sph_A_finite(q, w, -z) * h(-z)
    x = float(x)
    X = 1 / (1 + x * x)
    if X > 0.75 or abs(z) < 1e-6 or (z.imag == 0 and z.real == round(z.real)):
        if w == 0:
            return phi0_arch_single(z, x)
        raise DomainError("archimedean spherical function near its removable set needs w = 0")

    def h(zz):
        return X ** ((zz + 2 * w + 1) / 4) * sf.gauss_2f1((zz + 2 * w + 1) / 4, (zz - 2 * w + 1) / 4, (zz + 2) / 2, X)

    return sph_A_arch(w, z) * h(z) + sph_A_arch(w, -z) * h(-z)


def phi0_arch_single(z, x: float) -> complex:
    """phi^{(0,z)}(x) through the single hypergeometric in tanh^2."""
    z = complex(z)
    X = x * x / (1 + x * x)
    return (1 + x * x) ** (-(z + 1) / 4) * sf.gauss_2f1((z + 1) / 4, (z + 1) / 4, 0.5, X)
