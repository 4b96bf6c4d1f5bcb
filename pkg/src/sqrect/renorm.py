"""Renormalization of the exchange map: the parameter map S, similitudes,
induction zones, first-return maps, substitutions, incidence matrices and
depth-l covers of the aperiodic set."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import Degenerate, NotInZone, OnDiscontinuity, Terminal
from .exactnum import Number, format_number, is_exact, nfloor
from .pet import Param, Point, Rect, step
from .words import Substitution, Word


@dataclass(frozen=True)
class Mat2:
    """Integer 2x2 matrix."""

    m11: int
    m12: int
    m21: int
    m22: int

    @staticmethod
    def identity() -> "Mat2":
        return Mat2(1, 0, 0, 1)

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )

    def apply(self, v: tuple[int, int]) -> tuple[int, int]:
        return (
            self.m11 * v[0] + self.m12 * v[1],
            self.m21 * v[0] + self.m22 * v[1],
        )

    def det(self) -> int:
        return self.m11 * self.m22 - self.m12 * self.m21

    def column_sums(self) -> tuple[int, int]:
        return self.m11 + self.m21, self.m12 + self.m22

    def norm1_of(self, v: tuple[int, int]) -> int:
        a, b = self.apply(v)
        return abs(a) + abs(b)

    def __pow__(self, k: int) -> "Mat2":
        result, base = Mat2.identity(), self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def rows(self) -> list[list[int]]:
        return [[self.m11, self.m12], [self.m21, self.m22]]

    def mobius(self, x: Number) -> Number:
        """Action (m11*x + m12)/(m21*x + m22)."""
        return (self.m11 * x + self.m12) / (self.m21 * x + self.m22)


# -- parameter map -------------------------------------------------------


def n_omega(p: Param) -> int:
    f = p.f(p.theta)
    if f == 0:
        raise Degenerate("f(theta) = 0")
    return nfloor(1 / f)


def renorm_step(p: Param) -> Param:
    if p.theta == 0:
        raise Terminal("renormalization undefined at theta = 0")
    n = n_omega(p)
    theta1 = 1 / p.f(p.theta) - n
    return Param(theta1, -1 if n % 2 == 0 else 1)


def ratio(p: Param) -> Number:
    """Expansion ratio of the similitude, 1/f(theta) > 1."""
    f = p.f(p.theta)
    if f == 0:
        raise Degenerate("f(theta) = 0")
    return 1 / f


def similitude_apply(p: Param, z: Point, direction: str = "fwd") -> Point:
    th = p.theta
    if direction == "fwd":
        if p.eps == -1:
            return Point(z.y / th, z.x / th)
        s = 1 - th
        return Point(z.x / s, (z.y - th) / s)
    if direction == "inv":
        if p.eps == -1:
            return Point(th * z.y, th * z.x)
        s = 1 - th
        return Point(s * z.x, th + s * z.y)
    raise ValueError("direction must be 'fwd' or 'inv'")


def psi_inverse_rect(p: Param, r: Rect) -> Rect:
    from .pet import _psi_inverse_rect

    return _psi_inverse_rect(p, r)


def induction_zone(p: Param) -> tuple[Rect, Rect]:
    q = renorm_step(p)  # raises Terminal -> report as Degenerate
    th1 = q.theta
    c_ind = psi_inverse_rect(p, Rect(0, 0, 1, 1))
    r_ind = psi_inverse_rect(p, Rect(1, 0, th1, 1))
    return c_ind, r_ind


def return_times(p: Param) -> tuple[int, int]:
    """(return time on C^ind, return time on R^ind)."""
    n = n_omega(p)
    if p.eps == -1:
        return 3 * (n - 1) + 2, 3
    return 3 * (n - 1) + 1, 3


def first_return(p: Param, z: Point) -> tuple[Point, int]:
    c_ind, r_ind = induction_zone(p)
    if c_ind.contains(z):
        k = return_times(p)[0]
    elif r_ind.contains(z):
        k = return_times(p)[1]
    else:
        raise NotInZone(f"({z.x}, {z.y}) not in the induction zone")
    w = z
    for _ in range(k):
        w = step(p, w)
    return w, k


@dataclass(frozen=True)
class VerifyReport:
    samples: int
    resampled: int
    max_error: float
    exact: bool

    def passed(self, tol: float) -> bool:
        return self.max_error <= (0.0 if self.exact else tol)


def _random_domain_point(q: Param, rng: random.Random, exact: bool) -> Point:
    """Random point of X_{theta(q)}, rational coordinates in exact mode."""
    width = float(1 + q.theta)
    while True:
        if exact:
            den = 1 << 24
            x = Fraction(rng.randrange(1, int(width * den)), den)
            y = Fraction(rng.randrange(1, den), den)
        else:
            x = rng.uniform(0, width)
            y = rng.random()
        if 0 < y < 1 and 0 < x < width and x != 1:
            return Point(x, y)


def induction_verify(
    p: Param, samples: int = 10_000, tol: float = 1e-9, seed: int = 0
) -> VerifyReport:
    """Check that the similitude conjugates the first-return map to the
    renormalized map: psi(T_ind(psi^inv(z))) = T_{S(omega)}(z)."""
    q = renorm_step(p)
    exact = is_exact(p.theta)
    rng = random.Random(seed)
    resampled = 0
    max_err = 0.0
    done = 0
    while done < samples:
        z1 = _random_domain_point(q, rng, exact)
        try:
            z = similitude_apply(p, z1, "inv")
            w, _ = first_return(p, z)
            lhs = similitude_apply(p, w, "fwd")
            rhs = step(q, z1)
        except OnDiscontinuity:
            resampled += 1
            continue
        if exact:
            if lhs != rhs:
                max_err = max(max_err, lhs.dist_max(rhs))
        else:
            max_err = max(max_err, lhs.dist_max(rhs))
        done += 1
    return VerifyReport(samples, resampled, max_err, exact)


# -- substitutions and matrices ------------------------------------------


def substitution(p: Param) -> Substitution:
    n = n_omega(p)
    block = "aab" * (n - 1)
    if p.eps == -1:
        return Substitution(Word("ab" + block), Word("aab"))
    return Substitution(Word("a" + block), Word("aab"))


def incidence_matrix(p: Param) -> Mat2:
    n = n_omega(p)
    if p.eps == -1:
        return Mat2(2 * n - 1, 2, n, 1)
    return Mat2(2 * n - 1, 2, n - 1, 1)


def period_sequence(p: Param, k: int) -> list[int]:
    """Periods of the depth-i island orbits: ||M_1...M_{i-1} k_i||_1."""
    out = []
    M = Mat2.identity()
    q = p
    for i in range(k):
        seed = (1, 0) if q.eps == -1 else (1, 1)
        out.append(M.norm1_of(seed))
        if i < k - 1:
            M = M @ incidence_matrix(q)
            q = renorm_step(q)  # Terminal propagates
    return out


# -- covers --------------------------------------------------------------


@dataclass(frozen=True)
class CoverPiece:
    rect: Rect
    shape: str  # 'C' or 'R'
    ratio: Number  # linear contraction applied to the model shape
    orbit_index: int

    def serialize(self) -> str:
        return (
            f"PIECE shape={self.shape} {format_number(self.ratio)} "
            f"{format_number(self.rect.x)} {format_number(self.rect.y)} "
            f"{self.orbit_index}"
        )


def step_rect(p: Param, r: Rect) -> Rect:
    """Image of an axis-parallel rectangle lying inside one branch."""
    th = p.theta
    x1, y1 = r.x + r.w, r.y + r.h
    if x1 <= 1:
        if p.eps == -1:
            return Rect(1 + th - y1, r.x, r.h, r.w)
        return Rect(1 + th - y1, 1 - x1, r.h, r.w)
    if r.x >= 1:
        return Rect(r.x - 1, 1 - y1, r.w, r.h)
    raise OnDiscontinuity("rectangle straddles the branch boundary")


def cover(p: Param, l: int) -> list[CoverPiece]:
    """Depth-l cover of the aperiodic set by similitude images of the
    square and of the renormalized rectangle.

    Depth 0 is [C, R_theta]; each level pulls the previous cover back
    through the similitude and spreads it along the return orbit.
    """
    params = [p]
    for _ in range(l):
        params.append(renorm_step(params[-1]))
    deepest = params[-1]
    pieces = [
        CoverPiece(Rect(0, 0, 1, 1), "C", 1, 0),
        CoverPiece(Rect(1, 0, deepest.theta, 1), "R", 1, 0),
    ]
    if deepest.theta == 0:
        pieces = pieces[:1]
    for q in reversed(params[:-1]):
        k_c, k_r = return_times(q)
        nxt = []
        for piece in pieces:
            # the return time depends on which induction zone the pulled
            # back piece sits in: under the square if the piece was left
            # of x=1, under the rectangle otherwise
            r = psi_inverse_rect(q, piece.rect)
            k = k_c if piece.rect.x + piece.rect.w <= 1 else k_r
            contraction = piece.ratio / ratio(q)
            for i in range(k):
                nxt.append(CoverPiece(r, piece.shape, contraction, i))
                if i < k - 1:
                    r = step_rect(q, r)
        pieces = nxt
    return pieces
