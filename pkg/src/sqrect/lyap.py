"""Cocycle products along the accelerated expansion, Monte-Carlo Lyapunov
estimates, certified series values of the associated integrals, Birkhoff
contraction coefficients and limit directions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cfrac import LN6, accel, param_to_x
from .pet import Param
from .renorm import Mat2

MASTER_SEED = 0x5EED


@dataclass(frozen=True)
class CocycleEstimate:
    lambda_hat: float
    lnR_hat: float
    s_hat: float
    l: int
    trials: int
    seed: int
    stderr_lambda: float
    stderr_lnR: float
    stderr_s: float

    def csv_rows(self) -> list[str]:
        return [
            f"lambda,{self.lambda_hat!r},{self.stderr_lambda!r},"
            f"{self.l},{self.trials},{self.seed}",
            f"lnR,{self.lnR_hat!r},{self.stderr_lnR!r},"
            f"{self.l},{self.trials},{self.seed}",
            f"s,{self.s_hat!r},{self.stderr_s!r},"
            f"{self.l},{self.trials},{self.seed}",
        ]


@dataclass(frozen=True)
class SeriesValue:
    value: float
    tail_bound: float
    terms: int

    def csv_row(self) -> str:
        return f"{self.value!r},{self.tail_bound!r},{self.terms}"


# -- cocycle products ----------------------------------------------------


def cocycle_product(p: Param, l: int) -> tuple[Mat2, float]:
    """Product of the first l+1 accelerated matrices along the orbit.

    Returns the exact integer product and ln of the l1-norm of the product
    applied to (1,1), accumulated with per-step renormalization of a float
    row vector so the log stays finite for any depth.
    """
    return cocycle_product_x(param_to_x(p), l)


def cocycle_product_x(x, l: int) -> tuple[Mat2, float]:
    M = Mat2.identity()
    u1 = u2 = 1.0
    log_norm = 0.0
    for _ in range(l + 1):
        st = accel(x)  # Terminal propagates
        F = st.M_bold
        M = M @ F
        u1, u2 = u1 * F.m11 + u2 * F.m21, u1 * F.m12 + u2 * F.m22
        s = u1 + u2
        log_norm += math.log(s)
        u1 /= s
        u2 /= s
        x = st.y
    return M, log_norm


def contraction(M: Mat2) -> float:
    """Birkhoff contraction coefficient of a nonnegative matrix in the
    Hilbert projective metric: tanh of a quarter of |ln| of the
    cross-ratio of the entries; 1 when some entry vanishes."""
    if min(M.m11, M.m12, M.m21, M.m22) <= 0:
        return 1.0
    return math.tanh(0.25 * abs(math.log(M.m11 * M.m22 / (M.m12 * M.m21))))


def limit_direction(p: Param, l: int) -> tuple[float, float]:
    """Direction of the depth-l product applied to (1,1), summing to 1."""
    M, _ = cocycle_product(p, l)
    a, b = M.apply((1, 1))
    return a / (a + b), b / (a + b)


# -- Monte-Carlo estimation ----------------------------------------------


def _sample_x(rng: np.random.Generator, trials: int) -> np.ndarray:
    """Draws from the accelerated invariant density, normalized by ln 6."""
    u = rng.random(trials)
    v = rng.random(trials)
    p0 = math.log(2) / LN6
    p1 = math.log(1.5) / LN6
    return np.where(
        v < p0,
        np.exp2(u) - 1,
        np.where(v < p0 + p1, 1.5**u, 1 + 0.5 * np.exp2(u)),
    )


def _sanitize(x: np.ndarray) -> np.ndarray:
    """Keep lanes strictly inside the branch intervals; float round-off can
    park an iterate exactly on an endpoint where the next digit blows up."""
    np.clip(x, 1e-12, 2 - 1e-12, out=x)
    x[np.abs(x - 1.0) < 1e-12] = 1.0 + 1e-12
    x[np.abs(x - 1.5) < 1e-15] = 1.5 + 1e-14
    return x


def _vector_step(x, u1, u2, log_norm, lnR):
    """One accelerated step applied to every lane, updating the
    renormalized row vectors and both log accumulators in place."""
    left = x < 1.0
    midd = (x >= 1.0) & (x < 1.5)
    right = x >= 1.5

    m11 = np.ones_like(x)
    m12 = np.ones_like(x)
    m21 = np.zeros_like(x)
    m22 = np.ones_like(x)
    lnr = np.zeros_like(x)
    x1 = x.copy()

    xl = x[left]
    n = np.floor(1.0 / xl)
    m11[left] = 2 * n - 1
    m12[left] = 2.0
    m21[left] = n
    m22[left] = 1.0
    lnr[left] = -np.log(xl)
    x1[left] = 1.0 / xl - n + (n % 2)

    e = x[midd] - 1.0
    k = np.floor(1.0 / e)
    # k - (k-1)x and (2-k)x + k-1 cancel catastrophically for large k;
    # the forms below are stable in e = x - 1
    den = np.maximum(1.0 - (k - 1) * e, 1e-300)
    m11[midd] = 1.0
    m12[midd] = 2 * (k - 1)
    m21[midd] = 0.0
    m22[midd] = 1.0
    lnr[midd] = -np.log(den)
    x1[midd] = (1.0 - (k - 2) * e) / den

    xr = x[right]
    n = np.floor(1.0 / (2.0 - xr))
    m11[right] = 2 * n - 1
    m12[right] = 2.0
    m21[right] = n - 1
    m22[right] = 1.0
    lnr[right] = -np.log(2.0 - xr)
    x1[right] = 1.0 / (2.0 - xr) - n + (n % 2)

    v1 = u1 * m11 + u2 * m21
    v2 = u1 * m12 + u2 * m22
    s = v1 + v2
    log_norm += np.log(s)
    lnR += lnr
    return _sanitize(x1), v1 / s, v2 / s


def birkhoff_estimate(
    seed: int = MASTER_SEED, trials: int = 1000, l: int = 10_000
) -> CocycleEstimate:
    """Time averages of the matrix growth and the expansion ratio along
    `trials` independent orbits of depth `l`, scaled by the invariant mass
    ln 6 so they estimate the un-normalized integrals."""
    if trials < 1 or l < 1:
        raise ValueError("trials and l must be positive")
    rng = np.random.default_rng(seed)
    x = _sanitize(_sample_x(rng, trials))
    u1 = np.ones(trials)
    u2 = np.ones(trials)
    log_norm = np.zeros(trials)
    lnR = np.zeros(trials)
    for _ in range(l):
        x, u1, u2 = _vector_step(x, u1, u2, log_norm, lnR)
    lam = LN6 * log_norm / l
    lnr = LN6 * lnR / l
    lambda_hat = float(lam.mean())
    lnR_hat = float(lnr.mean())
    s_hat = lambda_hat / lnR_hat
    se_l = float(lam.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    se_r = float(lnr.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    if trials > 1:
        cov = float(np.cov(lam, lnr)[0, 1]) / trials
        var_s = (
            (se_l / lnR_hat) ** 2
            + (lambda_hat * se_r / lnR_hat**2) ** 2
            - 2 * lambda_hat * cov / lnR_hat**3
        )
        se_s = math.sqrt(max(var_s, 0.0))
    else:
        se_s = 0.0
    return CocycleEstimate(
        lambda_hat, lnR_hat, s_hat, l, trials, seed, se_l, se_r, se_s
    )


# -- series values of the integrals --------------------------------------


def _log_tail(c: float, n_over: int) -> float:
    """Certified bound for sum over n > N of ln(c n)/n^2."""
    return (math.log(c * n_over) + 1.0) / n_over


def _mass_unit(n: np.ndarray) -> np.ndarray:
    """Invariant mass of the n-th branch interval inside (0,1)."""
    return np.log((n + 1) ** 2 / (n * (n + 2)))


def _mass_right(n: np.ndarray) -> np.ndarray:
    """Invariant mass of the n-th branch interval inside (3/2,2)."""
    return np.log(n * n / ((n - 1.0) * (n + 1.0)))


def integral_ln_M(terms: int) -> SeriesValue:
    """Integral of ln of the max row sum of the accelerated matrix against
    the un-normalized invariant density, as three branch series."""
    if terms < 10:
        raise ValueError("terms must be at least 10")
    n = np.arange(1.0, terms + 1)
    s1 = float(np.sum(np.log(2 * n + 1) * _mass_unit(n)))
    k = np.arange(2.0, terms + 1)
    s2 = float(np.sum(np.log(2 * k - 1) * _mass_unit(k)))
    s3 = float(np.sum(np.log(2 * k + 1) * _mass_right(k)))
    tail = 3 * _log_tail(3.0, terms)
    return SeriesValue(s1 + s2 + s3, tail, terms)


def _middle_lnr_branch_sum(terms: int) -> tuple[float, float]:
    """Sum over middle branches of the integral of ln of the expansion
    ratio, each branch integrated exactly via the geometric expansion of
    1/(k - t) in t/k with a certified truncation error."""
    k = np.arange(2.0, terms + 1)
    a = 1.0 / k  # branch image of the ratio variable: t in [a, b]
    b = 2.0 / (k + 1.0)
    total = 0.0
    jmax = 60

    def prim(t, j):
        # integral of -t^j ln t
        return t ** (j + 1) * (-(j + 1) * np.log(t) + 1) / (j + 1) ** 2

    acc = np.zeros_like(k)
    scale = 1.0 / k
    for j in range(jmax):
        acc += scale * (prim(b, j) - prim(a, j))
        scale /= k
    total = float(np.sum(acc))
    # truncation: remaining terms bounded by a geometric series in b/k
    q = b / k
    per_branch = (1.0 / k) * (q**jmax / (1 - q)) * (-np.log(a)) * (b - a)
    trunc = float(np.sum(per_branch))
    # tail over k > terms: ln r <= ln k on the branch, mass <= 1/k^2
    tail = _log_tail(1.0, terms) + trunc
    return total, tail


def integral_ln_r(terms: int) -> SeriesValue:
    """Integral of ln of the expansion ratio against the un-normalized
    invariant density: pi^2/12 from the unit interval, a certified branch
    series from the middle, and (ln 2)^2/2 + pi^2/12 from the right piece."""
    if terms < 10:
        raise ValueError("terms must be at least 10")
    first = math.pi**2 / 12
    third = math.log(2) ** 2 / 2 + math.pi**2 / 12
    mid, tail = _middle_lnr_branch_sum(terms)
    return SeriesValue(first + mid + third, tail, terms)


def lower_bound_f(terms: int, depth: int = 2) -> SeriesValue:
    """Lower bound for the top Lyapunov integral via the super-
    multiplicative function f(M) = sqrt(m11 m22) + sqrt(m12 m21).

    depth=1 evaluates f on the single-step matrices: the middle branches
    have an off-diagonal zero there and contribute ln 1 = 0, which makes
    the bound weak.  depth=2 evaluates (1/2) ln f on two-step products,
    which are strictly positive; truncation only drops nonnegative terms,
    so the partial sum stays a certified lower bound.
    """
    if terms < 10:
        raise ValueError("terms must be at least 10")
    if depth == 1:
        n = np.arange(1.0, terms + 1)
        s1 = float(
            np.sum(np.log(np.sqrt(2 * n - 1) + np.sqrt(2 * n)) * _mass_unit(n))
        )
        k = np.arange(2.0, terms + 1)
        s3 = float(
            np.sum(
                np.log(np.sqrt(2 * k - 1) + np.sqrt(2 * k - 2)) * _mass_right(k)
            )
        )
        tail = 2 * _log_tail(3.0, terms)
        return SeriesValue(s1 + s3, tail, terms)
    if depth != 2:
        raise ValueError("depth must be 1 or 2")
    return _lower_bound_f_pairs(max(int(math.isqrt(terms)), 10))


# branch tables for the pair series: (family, index range) with the branch
# matrix entries, domain endpoints, and inverse Moebius coefficients


def _succ_table(which: str, N: int):
    """Successor data on one piece: domain endpoints and matrix entries."""
    if which == "unit":
        n = np.arange(1.0, N + 1)
        lo, hi = 1 / (n + 1), 1 / n
        return lo, hi, (2 * n - 1, 2 * n**0, n, n**0)
    if which == "mid":
        k = np.arange(2.0, N + 1)
        lo, hi = 1 + 1 / (k + 1), 1 + 1 / k
        return lo, hi, (k**0, 2 * (k - 1), 0 * k, k**0)
    k = np.arange(2.0, N + 1)
    lo, hi = 2 - 1 / k, 2 - 1 / (k + 1)
    return lo, hi, (2 * k - 1, 2 * k**0, k - 1, k**0)


def _pair_block(pred_inv, F, M1, succ) -> float:
    """Sum of ln f(M1 M2) weighted by the invariant mass of the two-step
    cylinder, for one predecessor family against one successor table."""
    lo2, hi2, M2 = succ
    x0a = pred_inv(lo2[None, :])
    x0b = pred_inv(hi2[None, :])
    w = np.abs(F(x0b) - F(x0a))
    a11, a12, a21, a22 = (m[:, None] for m in M1)
    b11, b12, b21, b22 = (m[None, :] for m in M2)
    c11 = a11 * b11 + a12 * b21
    c12 = a11 * b12 + a12 * b22
    c21 = a21 * b11 + a22 * b21
    c22 = a21 * b12 + a22 * b22
    f = np.sqrt(c11 * c22) + np.sqrt(c12 * c21)
    return float(np.sum(np.log(f) * w))


def _lower_bound_f_pairs(N: int) -> SeriesValue:
    F_unit = np.log1p
    F_mid = np.log
    F_right = lambda x: np.log(x - 1)  # noqa: E731

    succ_u = _succ_table("unit", N)
    succ_m = _succ_table("mid", N)
    succ_r = _succ_table("right", N)

    total = 0.0
    # left predecessors: even digits return to the unit piece, odd ones
    # land anywhere in (1,2)
    n = np.arange(1.0, N + 1)
    npar = n % 2
    M1 = (2 * n - 1, 2 * n**0, n, n**0)
    even, odd = npar == 0, npar == 1

    def sub(M, mask):
        return tuple(m[mask] for m in M)

    shift = (n - npar)[even]
    total += _pair_block(
        lambda x1: 1 / (x1 + shift[:, None]), F_unit, sub(M1, even), succ_u
    )
    shift = (n - npar)[odd]
    for succ in (succ_m, succ_r):
        total += _pair_block(
            lambda x1: 1 / (x1 + shift[:, None]), F_unit, sub(M1, odd), succ
        )

    # middle predecessors always exit into (3/2,2)
    k = np.arange(2.0, N + 1)[:, None]
    M1 = (k[:, 0] ** 0, 2 * (k[:, 0] - 1), 0 * k[:, 0], k[:, 0] ** 0)
    total += _pair_block(
        lambda x1: (k * x1 + 1 - k) / ((k - 1) * x1 + 2 - k), F_mid, M1, succ_r
    )

    # right predecessors mirror the left ones
    m = np.arange(2.0, N + 1)
    mpar = m % 2
    M1 = (2 * m - 1, 2 * m**0, m - 1, m**0)
    even, odd = mpar == 0, mpar == 1
    shift = (m - mpar)[even]
    total += _pair_block(
        lambda x1: (2 * x1 + 2 * shift[:, None] - 1) / (x1 + shift[:, None]),
        F_right,
        sub(M1, even),
        succ_u,
    )
    shift = (m - mpar)[odd]
    for succ in (succ_m, succ_r):
        total += _pair_block(
            lambda x1: (2 * x1 + 2 * shift[:, None] - 1) / (x1 + shift[:, None]),
            F_right,
            sub(M1, odd),
            succ,
        )

    # one-sided truncation: omitted cylinders contribute >= 0, and at most
    # (ln 4 + ln|M1| + ln|M2|) x their mass; both factors give a series
    # tail of the usual ln(cN)/N shape
    tail = 3 * _log_tail(3.0, N) + 2 * LN6 * math.log(4.0) / N
    return SeriesValue(total / 2, tail, N * N)


# -- non-integrability of the slow cocycle -------------------------------


def slow_norm_integral(delta: float) -> float:
    """Integral of ln of the l1 matrix norm of the slow-step matrix against
    the slow invariant density over (1+delta, 3/2).

    The slow matrix there is constant with column sums 1 and 3, and the
    density is 1/(x-1), so the value is ln 3 * ln(1/(2 delta)): it diverges
    as delta -> 0, which is why the acceleration is needed."""
    if not 0 < delta <= 0.5:
        raise ValueError("delta must lie in (0, 1/2]")
    return math.log(3) * math.log(1 / (2 * delta))


def divergence_profile(k_max: int = 30) -> list[float]:
    """Truncated integrals at delta = 2^-k, k = 1..k_max: strictly
    increasing and unbounded."""
    return [slow_norm_integral(2.0**-k) for k in range(1, k_max + 1)]
