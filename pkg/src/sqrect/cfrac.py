"""Interval form of the renormalization on (0,2): expansions, the folded
map, the accelerated map with its matrices, invariant densities, a sampler
for the finite invariant measure, transfer-operator residuals and the
natural extension."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from fractions import Fraction
from typing import Callable, Optional

from scipy.special import digamma

from .errors import Terminal
from .exactnum import Number, is_exact, nfloor
from .pet import Param
from .renorm import Mat2
from .words import Substitution, Word

LN6 = math.log(6)


def param_to_x(p: Param) -> Number:
    return p.theta + (0 if p.eps == -1 else 1)


def x_to_param(x: Number) -> Param:
    if not 0 <= x < 2:
        raise ValueError("x must lie in [0,2)")
    if x < 1:
        return Param(x, -1)
    return Param(x - 1, 1)


def _terminal(x: Number) -> bool:
    return x == 0 or x == 1 or x == 2


def branch_data(x: Number) -> tuple[int, int, Mat2]:
    """(branch index n, side sign, Moebius matrix A with S(x) = A.x)."""
    if _terminal(x):
        raise Terminal(f"no branch at x = {x}")
    if x < 1:
        n = nfloor(1 / x)
        np_ = n % 2
        return n, -1, Mat2(np_ - n, 1, 1, 0)
    # right branches are left-closed in x: x = 2 - 1/n starts branch n,
    # mirroring the right-closed left branches through the fold x -> 2-x
    n = nfloor(1 / (2 - x))
    np_ = n % 2
    return n, 1, Mat2(n - np_, 1 + 2 * (np_ - n), -1, 2)


def s_interval(x: Number) -> Number:
    """One step of the parameter map in interval coordinates."""
    if _terminal(x):
        raise Terminal(f"map undefined at x = {x}")
    if x < 1:
        inv = 1 / x
        n = nfloor(inv)
        return inv - n + (n % 2)
    inv = 1 / (2 - x)
    n = nfloor(inv)
    return inv - n + (n % 2)


@dataclass(frozen=True)
class Digit:
    n: int
    eps: int
    matrix: Mat2


@dataclass(frozen=True)
class Expansion:
    steps: list[Digit]
    status: str  # finite | periodic | truncated
    preperiod: int = 0
    period: int = 0

    def to_json(self) -> str:
        return json.dumps(
            {
                "digits": [{"n": d.n, "eps": d.eps} for d in self.steps],
                "status": self.status,
                "preperiod": self.preperiod,
                "period": self.period,
            }
        )


def expand(x: Number, max_steps: int = 1000) -> Expansion:
    exact = is_exact(x)
    seen: dict = {}
    steps: list[Digit] = []
    for k in range(max_steps):
        if _terminal(x):
            return Expansion(steps, "finite")
        if exact:
            if x in seen:
                i = seen[x]
                return Expansion(steps, "periodic", i, k - i)
            seen[x] = k
        n, eps, A = branch_data(x)
        steps.append(Digit(n, eps, A))
        x = s_interval(x)
    return Expansion(steps, "truncated")


# -- folded map ----------------------------------------------------------


def fold(x: Number) -> Number:
    return x if x <= 1 else 2 - x


def q_map(x: Number) -> Number:
    if x == 0:
        raise Terminal("map undefined at 0")
    inv = 1 / x
    n = nfloor(inv)
    frac = inv - n
    return frac if n % 2 == 0 else 1 - frac


# -- acceleration --------------------------------------------------------


@dataclass(frozen=True)
class AccelStep:
    m: int
    y: Number
    A_bold: Mat2
    r_bold: Number
    sigma_factory: Callable[[], Substitution] = field(compare=False, repr=False)
    M_bold: Mat2 = field(default=None)

    @cached_property
    def sigma_bold(self) -> Substitution:
        # built on demand: the letter images have length ~ branch index,
        # which can be astronomical for orbits close to the interval ends
        return self.sigma_factory()


def _sub_minus(n: int) -> Substitution:
    return Substitution(Word("ab" + "aab" * (n - 1)), Word("aab"))


def _sub_plus(n: int) -> Substitution:
    return Substitution(Word("a" + "aab" * (n - 1)), Word("aab"))


def _sub_middle(n: int) -> Substitution:
    return Substitution(Word("a"), Word("a" * (2 * (n - 1)) + "b"))


def accel(x: Number) -> AccelStep:
    """One step of the accelerated map: first exit from (1, 3/2)."""
    if _terminal(x):
        raise Terminal(f"map undefined at x = {x}")
    if x < 1:
        n, _, A = branch_data(x)
        return AccelStep(
            1, s_interval(x), A, 1 / x, lambda n=n: _sub_minus(n), Mat2(2 * n - 1, 2, n, 1)
        )
    if x > 1 and x < Fraction(3, 2):
        n = nfloor(1 / (x - 1))
        if is_exact(x) and 1 / (x - 1) == n:
            # x = 1 + 1/n is the right end of the branch indexed n
            pass
        m = n - 1
        y = x
        for _ in range(m):
            y = s_interval(y)
        A = Mat2(2 - n, n - 1, 1 - n, n)
        return AccelStep(
            m, y, A, 1 / (n - (n - 1) * x), lambda n=n: _sub_middle(n), Mat2(1, 2 * (n - 1), 0, 1)
        )
    n, _, A = branch_data(x)
    return AccelStep(
        1, s_interval(x), A, 1 / (2 - x), lambda n=n: _sub_plus(n), Mat2(2 * n - 1, 2, n - 1, 1)
    )


def accel_orbit(x: Number, l: int) -> list[AccelStep]:
    out = []
    for _ in range(l):
        st = accel(x)
        out.append(st)
        x = st.y
    return out


# -- invariant densities -------------------------------------------------


def density(which: str, x) -> float:
    """Closed-form invariant densities: 'nu' for the slow map (infinite
    mass), 'bold_nu' for the accelerated map (total mass ln 6)."""
    if not 0 < x < 2:
        raise ValueError("x must lie in (0,2)")
    if which == "nu":
        # the transfer operator fixes 1/(x-1) on (1,2), as the pointwise
        # branch sums confirm to machine precision
        return 1 / (x + 1) if x <= 1 else 1 / (x - 1)
    if which == "bold_nu":
        if x <= 1:
            return 1 / (1 + x)
        if x <= 1.5:
            return 1 / x
        return 1 / (x - 1)
    raise ValueError("which must be 'nu' or 'bold_nu'")


def sample_bold_nu(rng: random.Random) -> float:
    """Draw from the normalized accelerated invariant measure by exact
    piecewise inverse CDF."""
    u = rng.random() * LN6
    ln2 = math.log(2)
    if u < ln2:
        return 2 ** (u / ln2) - 1
    u -= ln2
    ln32 = math.log(1.5)
    if u < ln32:
        return 1.5 ** (u / ln32)
    u -= ln32
    return 1 + 0.5 * 2 ** (u / ln2)


# -- transfer operator residuals -----------------------------------------


def _pair_sum(alpha: float, beta: float, n_min: int, parity: int, cutoff: int) -> float:
    """Sum of 1/(n+alpha) - 1/(n+beta) over n >= n_min with n % 2 == parity.

    Enumerates up to `cutoff` terms and closes the remainder with digamma
    values, so the result is exact up to rounding.
    """
    n = n_min if n_min % 2 == parity else n_min + 1
    total = 0.0
    direct_end = n + 2 * min(cutoff, 20_000)
    while n < direct_end:
        total += 1.0 / (n + alpha) - 1.0 / (n + beta)
        n += 2
    m0 = (n - parity) // 2  # tail starts at n = 2*m0 + parity
    total += 0.5 * (
        digamma(m0 + (parity + beta) / 2) - digamma(m0 + (parity + alpha) / 2)
    )
    return total


def transfer_residual(which: str, y: float, branch_cutoff: int = 10**6,
                      test_density=None) -> float:
    """|sum over inverse branches of density/|map'| - density(y)|.

    `test_density` substitutes an alternative density (negative controls);
    the default closed-form densities use certified digamma tails.
    """
    dens = test_density or (lambda t: density(which, t))
    parity = 0 if y < 1 else 1
    t = y if y < 1 else y - 1
    if which == "nu":
        if test_density is None:
            # left branches x=1/(t+n): weight 1/((t+n)(t+n+1));
            # right branches x=2-1/(t+n): weight 1/((t+n-1)(t+n))
            total = _pair_sum(t, t + 1, 1, parity, branch_cutoff)
            total += _pair_sum(t - 1, t, 1, parity, branch_cutoff)
        else:
            total = _generic_branch_sum("nu", dens, y)
        return abs(total - dens(y))
    if which == "bold_nu":
        if test_density is None:
            total = _pair_sum(t, t + 1, 1, parity, branch_cutoff)
            # right branches: weight 1/((t+n-1)(t+n)), n >= 2
            total += _pair_sum(t - 1, t, 2, parity, branch_cutoff)
            if y > 1.5:
                # middle branches telescope: sum_{n>=2} of
                # 1/((n(y-1)+1)(n(y-1)-y+2)) = 1/(y(y-1))
                total += 1.0 / (y * (y - 1))
        else:
            total = _generic_branch_sum("bold_nu", dens, y)
        return abs(total - dens(y))
    raise ValueError("which must be 'nu' or 'bold_nu'")


def _generic_branch_sum(which: str, dens, y: float, n_terms: int = 20_000) -> float:
    """Direct branch enumeration for an arbitrary candidate density."""
    parity = 0 if y < 1 else 1
    t = y if y < 1 else y - 1
    total = 0.0
    n = 2 if parity == 0 else 1
    while n < n_terms:
        x = 1.0 / (t + n)
        total += x * x * dens(x)
        if which == "nu" or n >= 2:
            x = 2.0 - 1.0 / (t + n)
            total += (2.0 - x) ** 2 * dens(x)
        n += 2
    if which == "bold_nu" and y > 1.5:
        for n in range(2, n_terms):
            d = y * (n - 1) - n + 2
            x = (y * n - n + 1) / d
            total += dens(x) / (d * d)
    return total


# -- natural extension ---------------------------------------------------


def _mobius_y(A: Mat2, y: float) -> float:
    """-1 / (A . (-1/y)) computed projectively."""
    # -1/y = (-1 : y) as (p : q)
    p, q = -1.0, y
    p, q = A.m11 * p + A.m12 * q, A.m21 * p + A.m22 * q
    # -1/(p/q) = -q/p
    return -q / p


def natext_step(x: float, y: float) -> tuple[float, float]:
    st = accel(x)
    return float(st.A_bold.mobius(x)), _mobius_y(st.A_bold, y)


def in_theta_domain(x: float, y: float) -> bool:
    """Invariant domain of the two-sided accelerated map.

    The past coordinate lives on [0,1] over the unit interval, on [0,oo)
    over (1,3/2), and on (-oo,-1] u [0,oo) over (3/2,2); the last fiber is
    forced by the images of the accelerated middle branches and is exactly
    what makes dx dy/(1+xy)^2 integrate to the marginal 1/(x-1) there.
    """
    if 0 <= x <= 1:
        return 0 <= y <= 1
    if 1 <= x <= 1.5:
        return y >= 0
    if 1.5 <= x <= 2:
        return y >= 0 or y <= -1
    return False


@dataclass(frozen=True)
class NatExtReport:
    samples: int
    stayed: int
    fiber_square_ok: bool
    fiber_middle_ok: bool
    disjoint_checked: int
    disjoint_ok: int


def _sample_theta_domain(rng: random.Random) -> tuple[float, float]:
    """Point of the invariant domain, fiber drawn by inverse CDF of the
    conditional density proportional to 1/(1+xy)^2."""
    piece = rng.randrange(3)
    u = min(max(rng.random(), 1e-12), 1 - 1e-12)
    if piece == 0:
        x = rng.random()
        return x, u / (1 + x - u * x)
    if piece == 1:
        x = 1 + rng.random() / 2
        return x, u / (x * (1 - u))
    x = 1.5 + rng.random() / 2
    if rng.random() < (x - 1) / x:  # mass of the positive half-fiber
        return x, u / (x * (1 - u))
    return x, (-(x - 1) / u - 1) / x


def fiber_integral_square(x: Fraction) -> Fraction:
    """Exact integral of 1/(1+x y)^2 dy over [0,1]; equals 1/(1+x)."""
    # antiderivative -1/(x (1+x y))
    return -1 / (x * (1 + x)) + 1 / x


def fiber_integral_halfline(x: Fraction) -> Fraction:
    """Exact integral of 1/(1+x y)^2 dy over [0, oo); equals 1/x."""
    return Fraction(1, 1) / x


def fiber_integral_right(x: Fraction) -> Fraction:
    """Exact integral of 1/(1+x y)^2 dy over (-oo,-1] u [0,oo).

    The antiderivative -1/(x(1+xy)) gives 1/(x(x-1)) on the negative ray
    and 1/x on the positive one; the sum is the marginal 1/(x-1)."""
    return 1 / (x * (x - 1)) + 1 / x


def natural_extension_check(samples: int = 100_000, seed: int = 0) -> NatExtReport:
    rng = random.Random(seed)
    stayed = 0
    done = 0
    while done < samples:
        x, y = _sample_theta_domain(rng)
        if _terminal(x) or not (0 < x < 2):
            continue
        try:
            x1, y1 = natext_step(x, y)
        except (Terminal, ZeroDivisionError):
            continue
        done += 1
        if in_theta_domain(x1, y1):
            stayed += 1
    sq = all(
        fiber_integral_square(Fraction(k, 10)) == Fraction(1, 1) / (1 + Fraction(k, 10))
        for k in range(1, 10)
    )
    mid = all(
        fiber_integral_halfline(x) == 1 / x
        and fiber_integral_right(x + Fraction(1, 2)) == 1 / (x - Fraction(1, 2))
        for x in (Fraction(11, 10), Fraction(5, 4), Fraction(7, 5))
    )
    dch, dok = _disjointness_check(rng, 1000)
    return NatExtReport(done, stayed, sq, mid, dch, dok)


def _disjointness_check(rng: random.Random, count: int) -> tuple[int, int]:
    """Image points should have exactly one inverse-branch preimage in the
    domain: the branch images partition it."""
    checked = ok = 0
    for _ in range(count):
        x, y = _sample_theta_domain(rng)
        if _terminal(x):
            continue
        try:
            x1, y1 = natext_step(x, y)
        except (Terminal, ZeroDivisionError):
            continue
        if not in_theta_domain(x1, y1):
            continue
        checked += 1
        hits = 0
        # the branch index of the unique preimage grows like 1/|y1| (and,
        # for the middle family, like y1/(y1+1) as y1 approaches -1)
        n_need = 80
        if y1 != 0:
            n_need = max(n_need, int(1 / abs(y1)) + 3)
        if y1 < -1:
            n_need = max(n_need, int(-y1 / (-y1 - 1)) + 3)
        for A, lo, hi in _inverse_branches(n_need):
            det = A.det()
            inv = Mat2(A.m22 * det, -A.m12 * det, -A.m21 * det, A.m11 * det)
            denom = inv.m21 * x1 + inv.m22
            if denom == 0:
                continue
            x0 = (inv.m11 * x1 + inv.m12) / denom
            if not (lo < x0 <= hi):
                continue
            y0 = _mobius_y(inv, y1)
            if in_theta_domain(x0, y0):
                hits += 1
        if hits == 1:
            ok += 1
    return checked, ok


def _inverse_branches(n_max: int = 80):
    """Branch matrices of the accelerated map with their domains."""
    out = []
    for n in range(1, n_max):
        np_ = n % 2
        out.append((Mat2(np_ - n, 1, 1, 0), 1.0 / (n + 1), 1.0 / n))
    for n in range(2, n_max):
        out.append(
            (Mat2(2 - n, n - 1, 1 - n, n), 1 + 1.0 / (n + 1), 1 + 1.0 / n)
        )
    for n in range(2, n_max):
        np_ = n % 2
        out.append(
            (Mat2(n - np_, 1 + 2 * (np_ - n), -1, 2), 2 - 1.0 / n, 2 - 1.0 / (n + 1))
        )
    return out
