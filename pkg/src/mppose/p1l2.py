"""Pose from one point and two line correspondences.

Working in the canonical frames, ``cos(theta)`` is linear in the point depth
``delta2`` and ``sin(theta)**2`` is quadratic in it. The second line must lie
on its interpretation plane, which gives four equations linear in
``(cos(alpha), sin(alpha))``. Two of them are solved by Cramer's rule, the
unit-circle constraint on alpha leaves one polynomial in ``(sin(theta),
delta2)``, and removing ``sin(theta)`` gives an octic in ``delta2``.

All coefficients are built at solve time with :class:`Poly2` arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .canonical import CANON_CAMERA, CANON_WORLD, CanonicalInstance, canonicalize
from .errors import DegenerateConfiguration, DegenerateSystem, InvalidPolynomial
from .geometry import RigidTransform
from .p2l1 import rotation_from_angles
from .polynomials import Poly1, Poly2, eliminate_to_octic, solve_octic
from .solution import P1L2Problem, PoseSolution, make_solution

MIN_CANONICAL = 1e-10
NEG_SIN2_TOL = 1e-10
SIGN_TOL = 1e-6
DENOM_TOL = 1e-10
POLISH_STEPS = 4
CONVERGED_TOL = 1e-9  # row-normalized residual of a polished candidate
DUPLICATE_TOL = 1e-9

# (sin(theta), delta2 / |p2_z|) probes used to rank equation pairs
_PROBE_S = (-0.8, -0.3, 0.4, 0.9)
_PROBE_D = (0.3, 1.1, 2.7)


@dataclass
class P1L2Stats:
    """Per-call counters; pass one to :func:`solve_p1l2` to collect them."""

    octic_roots: int = 0
    negative_sin2: int = 0
    degenerate_roots: int = 0
    sign_rejected: int = 0
    unconverged: int = 0
    duplicates: int = 0


# An expression linear in (cos(alpha), sin(alpha)): (A, B, C) with value
# A ca + B sa + C, each coefficient a Poly2 in (s, delta2), s = sin(theta).
Linear = Tuple[Poly2, Poly2, Poly2]


def _lin_add(a: Linear, b: Linear) -> Linear:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def _lin_scale(a: Linear, k) -> Linear:
    return (a[0] * k, a[1] * k, a[2] * k)


def coplanarity_equations(ci: CanonicalInstance) -> Tuple[List[Linear], Poly1, Poly2]:
    """The four incidence equations of the second line, plus ``cos(theta)``.

    Returns ``(equations, sin2, cos_theta)`` where ``sin2(delta2)`` is
    ``1 - cos(theta)**2`` and ``cos_theta`` is a Poly2 in ``(s, delta2)``.
    """
    P2 = ci.points[0]
    L3 = ci.lines[1]
    p23 = P2.world[2]
    c23, d23 = P2.center[2], P2.bearing[2]
    ct = Poly2.linear(c23 / p23, 0.0, d23 / p23)
    st = Poly2.x()
    zero, one = Poly2.const(0.0), Poly2.const(1.0)
    n1, n2, n3 = L3.normal

    # plane normal rotated into the canonical world: R_y(theta) R_z(alpha) n
    rz1 = (one * n1, one * n2, zero)
    rz2 = (one * n2, one * -n1, zero)
    rz3 = (zero, zero, one * n3)
    nw = [
        _lin_add(_lin_scale(rz1, ct), _lin_scale(rz3, -st)),
        rz2,
        _lin_add(_lin_scale(rz1, st), _lin_scale(rz3, ct)),
    ]
    # plane offset in the canonical world, with t = p2 - R v
    nv = Poly2.linear(L3.normal @ P2.center, 0.0, L3.normal @ P2.bearing)
    ow = _lin_add((zero, zero, nv + L3.offset), _lin_scale(nw[2], -p23))

    m = L3.world.moment
    d = L3.world.direction
    eqs = []
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        row = _lin_add(_lin_scale(nw[j], m[i]), _lin_scale(nw[i], -m[j]))
        eqs.append(_lin_add(row, _lin_scale(ow, d[k])))
    eqs.append(_lin_add(_lin_add(_lin_scale(nw[0], d[0]), _lin_scale(nw[1], d[1])), _lin_scale(nw[2], d[2])))

    sin2 = Poly1([1.0]) - Poly1([c23 / p23, d23 / p23]) ** 2
    return eqs, sin2, ct


def select_pair(eqs: List[Linear], p23: float) -> Tuple[int, int]:
    """Pick the two equations whose Cramer determinant is best conditioned."""
    best, best_score = (0, 1), -1.0
    scale = abs(p23)
    for i, j in itertools.combinations(range(len(eqs)), 2):
        scores = []
        for s in _PROBE_S:
            for t in _PROBE_D:
                y = t * scale
                ai, bi, ci_ = (e(s, y) for e in eqs[i])
                aj, bj, cj = (e(s, y) for e in eqs[j])
                ni = math.hypot(math.hypot(ai, bi), ci_)
                nj = math.hypot(math.hypot(aj, bj), cj)
                if ni == 0.0 or nj == 0.0:
                    scores.append(0.0)
                    continue
                scores.append(abs(ai * bj - aj * bi) / (ni * nj))
        score = float(np.median(scores))
        if score > best_score:
            best, best_score = (i, j), score
    return best


def alpha_system(eqs: List[Linear], pair: Tuple[int, int]) -> Tuple[Poly2, Poly2, Poly2]:
    """Cramer numerators and determinant: ``ca = Nc/det``, ``sa = Ns/det``."""
    (Ai, Bi, Ci), (Aj, Bj, Cj) = eqs[pair[0]], eqs[pair[1]]
    det = Ai * Bj - Aj * Bi
    Nc = Cj * Bi - Ci * Bj
    Ns = Aj * Ci - Ai * Cj
    return Nc, Ns, det


def canonical_instance(problem: P1L2Problem) -> CanonicalInstance:
    ci = canonicalize(problem.rig, problem.line1, problem.point2, lines=[problem.line3])
    if abs(ci.points[0].world[2]) < MIN_CANONICAL:
        raise DegenerateConfiguration("point too close to the first line")
    return ci


def stack_equations(eqs: List[Linear]) -> np.ndarray:
    """Coefficients of every (A, B, C) as one zero-padded ``(n_eq, 3, nx, ny)`` array."""
    polys = [p for e in eqs for p in e]
    nx = max(p.c.shape[0] for p in polys)
    ny = max(p.c.shape[1] for p in polys)
    out = np.zeros((len(polys), nx, ny))
    for k, p in enumerate(polys):
        out[k, : p.c.shape[0], : p.c.shape[1]] = p.c
    return out.reshape(len(eqs), 3, nx, ny)


def polish(coef: np.ndarray, ct_poly: Poly2, d2, ct, st, ca, sa):
    """Gauss-Newton on the unsquared system in ``(theta, alpha, delta2)``.

    The elimination squares the equations, so octic roots can lose a few
    digits; a couple of steps on the original equations restore them. A step
    is kept only if it lowers the row-normalized residual. ``coef`` comes
    from :func:`stack_equations`. Returns the refined
    ``(delta2, cos_theta, sin_theta, cos_alpha, sin_alpha)`` and the final
    normalized residual.
    """
    a0 = ct_poly.c[0, 0]
    b0 = ct_poly.c[0, 1] if ct_poly.c.shape[1] > 1 else 0.0
    i = np.arange(coef.shape[2])
    j = np.arange(coef.shape[3])
    absc = np.abs(coef).sum(axis=1)

    def system(th, al, d2, scales=None):
        s, c = math.sin(th), math.cos(th)
        xs, ys = s ** i, d2 ** j
        dxs = i * s ** np.maximum(i - 1, 0)
        dys = j * d2 ** np.maximum(j - 1, 0)
        val = np.einsum("i,ekij,j->ek", xs, coef, ys)
        dval_s = np.einsum("i,ekij,j->ek", dxs, coef, ys)
        dval_y = np.einsum("i,ekij,j->ek", xs, coef, dys)
        trig = np.array([math.cos(al), math.sin(al), 1.0])
        dtrig = np.array([-trig[1], trig[0], 0.0])
        r = np.concatenate([[c - (a0 + b0 * d2)], val @ trig])
        J = np.vstack([[-s, 0.0, -b0], np.column_stack([(dval_s @ trig) * c, val @ dtrig, dval_y @ trig])])
        if scales is None:
            scales = np.concatenate([[1.0], np.einsum("i,eij,j->e", np.abs(xs), absc, np.abs(ys))])
        inv = 1.0 / np.maximum(scales, 1e-300)
        return r * inv, J * inv[:, None], scales

    th, al = math.atan2(st, ct), math.atan2(sa, ca)
    r, J, w = system(th, al, d2)
    err = float(np.linalg.norm(r))
    for _ in range(POLISH_STEPS):
        if err <= 1e-15:
            break
        step = np.linalg.lstsq(J, -r, rcond=None)[0]
        cand = (th + step[0], al + step[1], d2 + step[2])
        r2, J2, _ = system(*cand, scales=w)
        e2 = float(np.linalg.norm(r2))
        if not e2 < err:
            break
        (th, al, d2), r, J, err = cand, r2, J2, e2
    return (d2, math.cos(th), math.sin(th), math.cos(al), math.sin(al)), err


def _same(a, b) -> bool:
    """Two polished candidates describing the same pose (angles compared on the circle)."""
    if abs(a[0] - b[0]) > DUPLICATE_TOL * (1.0 + abs(a[0])):
        return False
    return all(abs(x - y) <= DUPLICATE_TOL for x, y in zip(a[1:], b[1:]))


def _roots(ci: CanonicalInstance, stats: P1L2Stats):
    """Yield ``(delta2, cos_theta, sin_theta, cos_alpha, sin_alpha)`` candidates."""
    P2 = ci.points[0]
    eqs, sin2, ct_poly = coplanarity_equations(ci)
    pair = select_pair(eqs, P2.world[2])
    Nc, Ns, det = alpha_system(eqs, pair)
    coef = stack_equations(eqs)
    circle = Nc * Nc + Ns * Ns - det * det
    try:
        octic = eliminate_to_octic(circle, sin2)
        deltas = solve_octic(octic)
    except InvalidPolynomial as exc:
        raise DegenerateSystem("coplanarity system has no isolated solutions") from exc
    stats.octic_roots += len(deltas)

    seen = []
    for d2 in deltas:
        s2 = sin2(d2)
        if s2 < -NEG_SIN2_TOL:
            stats.negative_sin2 += 1
            continue
        s_abs = math.sqrt(max(s2, 0.0))
        signs = (1.0,) if s_abs == 0.0 else (1.0, -1.0)
        kept = False
        for sign in signs:
            st = sign * s_abs
            if abs(circle(st, d2)) > SIGN_TOL * max(circle.term_scale(st, d2), 1e-300):
                continue
            dv = det(st, d2)
            if abs(dv) < DENOM_TOL * max(det.term_scale(st, d2), 1e-300) or dv == 0.0:
                stats.degenerate_roots += 1
                continue
            ca, sa = Nc(st, d2) / dv, Ns(st, d2) / dv
            kept = True
            # near-equal octic roots pass the sign test for both signs; only
            # candidates that converge on the unsquared system are real
            cand, err = polish(coef, ct_poly, d2, ct_poly(st, d2), st, ca, sa)
            if not err <= CONVERGED_TOL:
                stats.unconverged += 1
                continue
            if any(_same(cand, c) for c in seen):
                stats.duplicates += 1
                continue
            seen.append(cand)
            yield cand
        if not kept:
            stats.sign_rejected += 1


def _pose(ci: CanonicalInstance, d2, ct, st, ca, sa) -> Optional[RigidTransform]:
    nt, na = math.hypot(ct, st), math.hypot(ca, sa)
    if nt == 0.0 or na == 0.0:
        return None
    R = rotation_from_angles(ct / nt, st / nt, ca / na, sa / na)
    P2 = ci.points[0]
    v = d2 * P2.bearing + P2.center
    return RigidTransform(R, P2.world - R @ v, CANON_CAMERA, CANON_WORLD)


def solve_p1l2(problem: P1L2Problem, stats: Optional[P1L2Stats] = None) -> List[PoseSolution]:
    """All real poses (at most eight) consistent with a 1-point/2-line problem.

    Solutions carry cheirality flags and are sorted by residual norm.
    """
    stats = stats if stats is not None else P1L2Stats()
    ci = canonical_instance(problem)
    out = []
    for d2, ct, st, ca, sa in _roots(ci, stats):
        T_hat = _pose(ci, d2, ct, st, ca, sa)
        if T_hat is None:
            stats.degenerate_roots += 1
            continue
        out.append(make_solution(ci.decanonicalize(T_hat), problem, (d2,)))
    out.sort(key=lambda s: s.residual_norm)
    return out
