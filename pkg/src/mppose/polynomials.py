"""Dense polynomials, closed-form low-degree roots and the two eliminations.

Coefficients are stored in ascending degree order: ``c[i]`` multiplies
``x**i`` and, for bivariate polynomials, ``c[i, j]`` multiplies ``x**i y**j``.
"""

from __future__ import annotations

import math
from typing import List, Tuple

import numpy as np

from .errors import DegenerateSystem, InvalidPolynomial, ShapeError

MAX_DEGREE_1 = 16
MAX_DEGREE_2 = 8
TRIM_TOL = 1e-13


class Poly1:
    """Univariate polynomial with real coefficients."""

    __slots__ = ("c",)

    def __init__(self, coefficients):
        c = np.atleast_1d(np.asarray(coefficients, dtype=float)).copy()
        if c.ndim != 1:
            raise ShapeError("Poly1 coefficients must be one-dimensional")
        if c.size == 0:
            c = np.zeros(1)
        if c.size - 1 > MAX_DEGREE_1:
            c = _trim(c)
            if c.size - 1 > MAX_DEGREE_1:
                raise ShapeError(f"degree above {MAX_DEGREE_1}")
        self.c = c

    def __repr__(self):
        return f"Poly1({self.c.tolist()})"

    @property
    def degree(self) -> int:
        """Degree after trimming negligible leading coefficients (-1 for zero)."""
        t = _trim(self.c)
        if t.size == 1 and t[0] == 0.0:
            return -1
        return t.size - 1

    def trimmed(self) -> "Poly1":
        return Poly1(_trim(self.c))

    def is_zero(self) -> bool:
        return not np.any(self.c)

    def __call__(self, x):
        c = self.c
        acc = np.zeros_like(np.asarray(x, dtype=float)) + c[-1]
        for k in range(c.size - 2, -1, -1):
            acc = acc * x + c[k]
        return acc

    def _coerce(self, other) -> "Poly1":
        return other if isinstance(other, Poly1) else Poly1([float(other)])

    def __add__(self, other):
        o = self._coerce(other)
        n = max(self.c.size, o.c.size)
        out = np.zeros(n)
        out[: self.c.size] += self.c
        out[: o.c.size] += o.c
        return Poly1(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly1(-self.c)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly1):
            return Poly1(self.c * float(other))
        return Poly1(np.convolve(self.c, other.c))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = Poly1([1.0])
        for _ in range(k):
            out = out * self
        return out

    def deriv(self) -> "Poly1":
        if self.c.size == 1:
            return Poly1([0.0])
        return Poly1(self.c[1:] * np.arange(1, self.c.size))

    def scale(self) -> float:
        return float(np.max(np.abs(self.c)))


def _trim(c: np.ndarray, tol: float = TRIM_TOL) -> np.ndarray:
    """Drop leading coefficients below ``tol * max|c|``."""
    m = np.max(np.abs(c)) if c.size else 0.0
    if m == 0.0:
        return np.zeros(1)
    k = c.size
    while k > 1 and abs(c[k - 1]) <= tol * m:
        k -= 1
    return c[:k].copy()


class Poly2:
    """Bivariate polynomial ``sum c[i, j] x**i y**j``."""

    __slots__ = ("c",)

    def __init__(self, coefficients):
        c = np.asarray(coefficients, dtype=float)
        if c.ndim == 0:
            c = c.reshape(1, 1)
        if c.ndim != 2:
            raise ShapeError("Poly2 coefficients must be two-dimensional")
        self.c = c.copy()

    def __repr__(self):
        return f"Poly2({self.c.tolist()})"

    @classmethod
    def const(cls, v: float) -> "Poly2":
        return cls([[float(v)]])

    @classmethod
    def x(cls) -> "Poly2":
        return cls([[0.0], [1.0]])

    @classmethod
    def y(cls) -> "Poly2":
        return cls([[0.0, 1.0]])

    @classmethod
    def linear(cls, c0: float, cx: float, cy: float) -> "Poly2":
        return cls([[c0, cy], [cx, 0.0]])

    def degrees(self) -> Tuple[int, int]:
        """(degree in x, degree in y) ignoring exact-zero rows/columns."""
        nz = np.nonzero(self.c)
        if nz[0].size == 0:
            return (-1, -1)
        return int(nz[0].max()), int(nz[1].max())

    def total_degree(self) -> int:
        nz = np.nonzero(self.c)
        if nz[0].size == 0:
            return -1
        return int((nz[0] + nz[1]).max())

    def __call__(self, x, y):
        c = self.c
        xs = x ** np.arange(c.shape[0])
        ys = y ** np.arange(c.shape[1])
        return float(xs @ c @ ys)

    def term_scale(self, x, y) -> float:
        """Sum of absolute monomial contributions at ``(x, y)``; a natural error scale."""
        xs = np.abs(x) ** np.arange(self.c.shape[0])
        ys = np.abs(y) ** np.arange(self.c.shape[1])
        return float(xs @ np.abs(self.c) @ ys)

    def gradient(self, x, y) -> Tuple[float, float]:
        """Partial derivatives ``(d/dx, d/dy)`` at ``(x, y)``."""
        c = self.c
        i, j = np.arange(c.shape[0]), np.arange(c.shape[1])
        xs, ys = x ** i, y ** j
        dxs = np.where(i > 0, i * x ** np.maximum(i - 1, 0), 0.0)
        dys = np.where(j > 0, j * y ** np.maximum(j - 1, 0), 0.0)
        return float(dxs @ c @ ys), float(xs @ c @ dys)

    def _coerce(self, other) -> "Poly2":
        return other if isinstance(other, Poly2) else Poly2.const(other)

    def __add__(self, other):
        o = self._coerce(other)
        shape = (max(self.c.shape[0], o.c.shape[0]), max(self.c.shape[1], o.c.shape[1]))
        out = np.zeros(shape)
        out[: self.c.shape[0], : self.c.shape[1]] += self.c
        out[: o.c.shape[0], : o.c.shape[1]] += o.c
        return Poly2(out)

    __radd__ = __add__

    def __neg__(self):
        return Poly2(-self.c)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, Poly2):
            return Poly2(self.c * float(other))
        a, b = self.c, other.c
        out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1))
        for i, j in zip(*np.nonzero(a)):
            out[i : i + b.shape[0], j : j + b.shape[1]] += a[i, j] * b
        if max(out.shape) - 1 > 2 * MAX_DEGREE_2:
            raise ShapeError("Poly2 degree overflow")
        return Poly2(out)

    __rmul__ = __mul__

    def scale(self) -> float:
        return float(np.max(np.abs(self.c))) if self.c.size else 0.0

    def even_odd_in_x(self) -> Tuple["Poly2", "Poly2"]:
        """Split as ``even(x, y) + x * odd(x, y)`` with both even in ``x``."""
        even = self.c.copy()
        even[1::2, :] = 0.0
        odd = np.zeros_like(self.c)
        odd[: self.c.shape[0] - 1, :] = self.c[1:, :]
        odd[1::2, :] = 0.0
        return Poly2(even), Poly2(odd)

    def substitute_x2(self, p: Poly1) -> Poly1:
        """Replace ``x**2`` by ``p(y)``; every power of ``x`` must be even."""
        if np.any(self.c[1::2, :]):
            raise ShapeError("substitute_x2 needs a polynomial even in x")
        out = Poly1([0.0])
        pk = Poly1([1.0])
        for i in range(0, self.c.shape[0], 2):
            row = Poly1(self.c[i, :])
            out = out + row * pk
            pk = pk * p
        return out


# --------------------------------------------------------------------------
# root finding


def _newton(c: np.ndarray, x: float, steps: int = 3) -> float:
    """Polish a real root of ascending coefficients ``c``; keeps the best iterate."""
    dc = c[1:] * np.arange(1, c.size)
    best = x
    best_val = abs(np.polynomial.polynomial.polyval(x, c))
    for _ in range(steps):
        f = np.polynomial.polynomial.polyval(x, c)
        df = np.polynomial.polynomial.polyval(x, dc)
        if df == 0.0 or not np.isfinite(f):
            break
        x = x - f / df
        v = abs(np.polynomial.polynomial.polyval(x, c))
        if v < best_val:
            best, best_val = x, v
        if v == 0.0:
            break
    return best


def _solve_quadratic(c0: float, c1: float, c2: float, tol: float = 0.0) -> List[float]:
    """Real roots of ``c2 x^2 + c1 x + c0``; discriminants above ``-tol`` count as zero."""
    if c2 == 0.0:
        return [] if c1 == 0.0 else [-c0 / c1]
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc < 0.0:
        if disc < -tol:
            return []
        disc = 0.0
    sq = math.sqrt(disc)
    if sq == 0.0:
        return [-c1 / (2.0 * c2)] * 2
    q = -0.5 * (c1 + math.copysign(sq, c1))
    return [q / c2, c0 / q] if q != 0.0 else [0.0, 0.0]


def _solve_cubic_monic(a: float, b: float, c: float) -> List[float]:
    """Real roots of ``x^3 + a x^2 + b x + c`` via the trigonometric / Cardano forms."""
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    shift = -a / 3.0
    half_q = q / 2.0
    third_p = p / 3.0
    disc = half_q * half_q + third_p ** 3
    if disc > 0.0:
        sq = math.sqrt(disc)
        u = -half_q + math.copysign(sq, -half_q)
        u = math.copysign(abs(u) ** (1.0 / 3.0), u)
        z = u - third_p / u if u != 0.0 else 0.0
        roots = [z + shift]
    elif third_p == 0.0:
        roots = [shift]
    else:
        r = math.sqrt(-third_p)
        arg = max(-1.0, min(1.0, -half_q / (r ** 3)))
        phi = math.acos(arg)
        roots = [2.0 * r * math.cos((phi - 2.0 * math.pi * k) / 3.0) + shift for k in range(3)]
    coeffs = np.array([c, b, a, 1.0])
    return [_newton(coeffs, x, 2) for x in roots]


def _as_coefficients(p, tol: float = TRIM_TOL) -> np.ndarray:
    c = p.c if isinstance(p, Poly1) else np.asarray(p, dtype=float)
    if not np.all(np.isfinite(c)):
        raise InvalidPolynomial("non-finite coefficient")
    m = np.max(np.abs(c)) if c.size else 0.0
    if m == 0.0:
        raise InvalidPolynomial("zero polynomial has no isolated roots")
    return _trim(c / m, tol)


def solve_quartic(p) -> np.ndarray:
    """All real roots of a polynomial of degree <= 4, ascending.

    Degree 4 uses Ferrari's resolvent-cubic construction; lower degrees fall
    through to the quadratic/cubic formulas. Every root gets up to three
    Newton steps on the normalized polynomial.
    """
    c = _as_coefficients(p)
    deg = c.size - 1
    if deg > 4:
        raise ShapeError("solve_quartic takes degree <= 4")
    if deg == 0:
        return np.empty(0)
    if deg == 1:
        return np.array([-c[0] / c[1]])
    if deg == 2:
        roots = _solve_quadratic(c[0], c[1], c[2], tol=1e-14 * max(c[1] ** 2, abs(c[2] * c[0])))
    elif deg == 3:
        roots = _solve_cubic_monic(c[2] / c[3], c[1] / c[3], c[0] / c[3])
    else:
        roots = _ferrari(c[3] / c[4], c[2] / c[4], c[1] / c[4], c[0] / c[4])
    polished = sorted(_newton(c, r, 3) for r in roots)
    return np.array(polished)


def _ferrari(a: float, b: float, c: float, d: float) -> List[float]:
    """Real roots of ``x^4 + a x^3 + b x^2 + c x + d``."""
    a2 = a * a
    p = b - 3.0 * a2 / 8.0
    q = c - a * b / 2.0 + a2 * a / 8.0
    r = d - a * c / 4.0 + a2 * b / 16.0 - 3.0 * a2 * a2 / 256.0
    shift = -a / 4.0
    size = max(1.0, abs(p), math.sqrt(abs(r)))
    if abs(q) <= 1e-14 * size ** 1.5:
        # biquadratic in y^2
        ys = []
        for z in _solve_quadratic(r, p, 1.0, tol=1e-14 * size * size):
            if z >= 0.0:
                s = math.sqrt(z)
                ys.extend([s, -s])
            elif z > -1e-12 * size:
                ys.append(0.0)
        return [y + shift for y in ys]
    # resolvent: 8 m^3 + 8 p m^2 + (2 p^2 - 8 r) m - q^2 = 0, largest root is > 0
    m = max(_solve_cubic_monic(p, p * p / 4.0 - r, -q * q / 8.0))
    if m <= 0.0:
        m = 1e-300
    s = math.sqrt(2.0 * m)
    tol = 1e-12 * size
    ys = _solve_quadratic(p / 2.0 + m - q / (2.0 * s), s, 1.0, tol) + _solve_quadratic(
        p / 2.0 + m + q / (2.0 * s), -s, 1.0, tol
    )
    return [y + shift for y in ys]


def companion_matrix(c: np.ndarray) -> np.ndarray:
    """Frobenius companion matrix of ascending coefficients (leading term nonzero)."""
    n = c.size - 1
    C = np.zeros((n, n))
    if n > 1:
        C[1:, :-1] = np.eye(n - 1)
    C[:, -1] = -c[:-1] / c[-1]
    return C


def solve_octic(p, imag_tol: float = 1e-7) -> np.ndarray:
    """All real roots of a polynomial of degree <= 8, ascending.

    Eigenvalues of the companion matrix (LAPACK balances it before the QR
    iteration); eigenvalues whose imaginary part is below
    ``imag_tol * max(1, |eigenvalue|)`` are taken as real and Newton-polished.
    Only exactly-zero leading coefficients are dropped: a tiny leading term
    still moves moderate roots when other roots are large.
    """
    c = _as_coefficients(p, 0.0)
    deg = c.size - 1
    if deg > 8:
        raise ShapeError("solve_octic takes degree <= 8")
    if deg == 0:
        return np.empty(0)
    if deg == 1:
        return np.array([-c[0] / c[1]])
    ev = np.linalg.eigvals(companion_matrix(c))
    real = ev.real[np.abs(ev.imag) <= imag_tol * np.maximum(1.0, np.abs(ev))]
    return np.sort(np.array([_newton(c, float(x), 3) for x in real]))


# --------------------------------------------------------------------------
# eliminations


def _quadric_parts(q: Poly2):
    """Write a total-degree-2 Poly2 in (x, y) as ``a y^2 + L(x) y + C(x)``."""
    c = np.zeros((3, 3))
    sh = q.c.shape
    if q.total_degree() > 2:
        raise ShapeError("intersect_quadrics needs total degree <= 2")
    c[: min(3, sh[0]), : min(3, sh[1])] = q.c[:3, :3]
    a = c[0, 2]
    L = Poly1([c[0, 1], c[1, 1]])
    C = Poly1([c[0, 0], c[1, 0], c[2, 0]])
    return a, L, C


def _cluster(roots: np.ndarray, tol: float = 1e-9):
    """Group nearly equal sorted roots into (value, multiplicity)."""
    out = []
    for r in roots:
        if out and abs(r - out[-1][0]) <= tol * (1.0 + abs(r)):
            v, k = out[-1]
            out[-1] = ((v * k + r) / (k + 1), k + 1)
        else:
            out.append((float(r), 1))
    return out


def intersect_quadrics(q1: Poly2, q2: Poly2, tol: float = 1e-7) -> List[Tuple[float, float]]:
    """Real intersections of two conics in ``(x, y)`` (here ``(delta2, delta3)``).

    ``q1`` is solved for ``y`` with the quadratic formula, the result is put
    into ``q2``, and the radical is cleared by multiplying the two conjugate
    branches, leaving a quartic in ``x``. For each real ``x`` the branch of
    ``y`` with the smaller ``|q2|`` is kept. Returned pairs satisfy
    ``|q_k| <= tol * term_scale`` for both conics.
    """
    s1, s2 = q1.scale(), q2.scale()
    if s1 == 0.0 or s2 == 0.0:
        raise DegenerateSystem("zero conic")
    q1 = q1 * (1.0 / s1)
    q2 = q2 * (1.0 / s2)
    a1, L1, C1 = _quadric_parts(q1)
    a2, L2, C2 = _quadric_parts(q2)
    if abs(a1) <= 1e-12 and L1.scale() <= 1e-12:
        if abs(a2) <= 1e-12 and L2.scale() <= 1e-12:
            raise DegenerateSystem("neither conic depends on the second variable")
        q1, q2 = q2, q1
        a1, L1, C1, a2, L2, C2 = a2, L2, C2, a1, L1, C1

    if abs(a1) > 1e-12:
        B = -L1
        D = B * B - 4.0 * a1 * C1
        E = 2.0 * a1
        k40 = a2 * (B * B + D) + L2 * B * E + C2 * (E * E)
        k41 = 2.0 * a2 * B + L2 * E
        quartic = k40 * k40 - k41 * k41 * D

        def branches(x):
            dv = D(x)
            if dv < -1e-12 * max(1.0, (B * B)(x)):
                return []
            sq = math.sqrt(max(dv, 0.0))
            b = B(x)
            return [(b + sq) / E, (b - sq) / E]
    else:
        # q1 linear in y: y = -C1 / L1
        quartic = a2 * C1 * C1 - L2 * C1 * L1 + C2 * L1 * L1

        def branches(x):
            l = L1(x)
            if abs(l) <= 1e-12:
                return []
            return [-C1(x) / l]

    if quartic.scale() == 0.0 or quartic.degree < 1:
        raise DegenerateSystem("conics share a component")
    xs = solve_quartic(quartic)
    pairs = []
    for x, mult in _cluster(xs):
        cands = []
        for y in branches(x):
            r1 = abs(q1(x, y)) / max(q1.term_scale(x, y), 1e-300)
            r2 = abs(q2(x, y)) / max(q2.term_scale(x, y), 1e-300)
            cands.append((r2, r1, y))
        cands.sort()
        taken = 0
        for r2, r1, y in cands:
            if taken >= mult:
                break
            if r1 <= tol and r2 <= tol:
                if not any(abs(x - px) <= 1e-12 * (1 + abs(x)) and abs(y - py) <= 1e-9 * (1 + abs(y))
                           for px, py in pairs):
                    pairs.append((x, y))
                taken += 1
    return pairs


def eliminate_to_octic(poly: Poly2, s_squared: Poly1) -> Poly1:
    """Remove ``s`` from ``poly(s, y) = 0`` using ``s^2 = s_squared(y)``.

    ``poly`` is split as ``E(s^2, y) + s O(s^2, y)``. When the odd part is
    present, ``E = -s O`` is squared to ``E^2 - s^2 O^2 = 0`` (introducing
    the roots of the opposite sign of ``s``); then every ``s^2`` becomes
    ``s_squared``. The result has degree <= 8 when ``poly`` has total degree 4.
    """
    if not isinstance(poly, Poly2):
        raise ShapeError("poly must be a Poly2 in (s, y)")
    if poly.degrees()[0] > 4:
        raise ShapeError("poly must have degree <= 4 in s")
    scale = poly.scale()
    if scale == 0.0:
        raise DegenerateSystem("poly is identically zero")
    even, odd = (poly * (1.0 / scale)).even_odd_in_x()
    if odd.scale() <= 1e-14:
        target = even
    else:
        s2 = Poly2([[0.0], [0.0], [1.0]])
        target = even * even - s2 * odd * odd
    out = target.substitute_x2(s_squared)
    # size of the substituted terms, so the zero test is scale-free
    k = s_squared.scale()
    ref = max(float(np.max(np.abs(target.c[i, :]))) * k ** (i // 2) for i in range(0, target.c.shape[0], 2))
    if ref == 0.0 or out.scale() <= 1e-12 * ref:
        raise DegenerateSystem("elimination is identically satisfied")
    return Poly1(_trim(out.c, 0.0))
