"""Descriptive statistics, t-tests and ordinary least squares.

The Student-t tail is evaluated through the regularized incomplete beta
function,

    P(|T_df| >= |t|) = I_x(df/2, 1/2),   x = df / (df + t^2),

with I_x computed by a modified-Lentz continued fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.optimize import brentq
from scipy.special import betaln

from .errors import DegenerateVariance, EmptyInput, NonPositiveDf, RankDeficient, TooFewRows

_CF_TOL = 1e-12
_CF_MAX_ITER = 20_000
_TINY = 1e-300
RANK_TOL = 1e-9


def mean_sd(xs: Sequence[float]) -> tuple[float, float]:
    """Arithmetic mean and sample (n-1) standard deviation.

    The standard deviation is NaN when only one value is given.
    """
    a = np.asarray(xs, dtype=float)
    if a.size == 0:
        raise EmptyInput("mean of an empty sample")
    mean = math.fsum(a) / a.size
    if a.size < 2:
        return mean, math.nan
    ss = math.fsum((a - mean) ** 2)
    return mean, math.sqrt(ss / (a.size - 1))


# -- incomplete beta / t tail -----------------------------------------------


def _beta_cf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc_regularized(a: float, b: float, x: float, complement: float | None = None) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and 0 <= x <= 1.

    ``complement`` may supply 1 - x when the caller can form it without
    cancellation (x close to 1).
    """
    if not (a > 0 and b > 0):
        raise ValueError("a and b must be positive")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    y = 1.0 - x if complement is None else complement
    # betaln avoids the cancellation of lgamma differences at large df
    log_front = a * math.log(x) + b * math.log(y) - float(betaln(a, b))
    front = math.exp(log_front)
    # the fraction converges fast only left of the distribution's mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(a, b, x) / a
    return 1.0 - front * _beta_cf(b, a, y) / b


def t_tail_two_sided(t: float, df: float) -> float:
    """P(|T| >= |t|) for Student's t with ``df`` degrees of freedom."""
    if not df > 0:
        raise NonPositiveDf(f"degrees of freedom must be positive, got {df}")
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 0.0
    if t == 0.0:
        return 1.0
    t2 = t * t
    p = betainc_regularized(df / 2.0, 0.5, df / (df + t2), t2 / (df + t2))
    return min(1.0, max(0.0, p))


# -- t-tests -----------------------------------------------------------------


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # keep pytest from collecting it

    statistic: float
    df: float
    p_two_sided: float
    mean_diff: float
    n: tuple[int, ...]


def two_sample_t(xs: Sequence[float], ys: Sequence[float], variant: str = "welch") -> TestResult:
    """Two-sided two-sample t-test of mean(xs) - mean(ys)."""
    if variant not in ("welch", "pooled"):
        raise ValueError(f"variant must be welch or pooled, got {variant!r}")
    n1, n2 = len(xs), len(ys)
    if n1 < 2 or n2 < 2:
        raise EmptyInput("two-sample t-test needs at least two values per group")
    m1, s1 = mean_sd(xs)
    m2, s2 = mean_sd(ys)
    v1, v2 = s1 * s1, s2 * s2
    diff = m1 - m2
    if variant == "pooled":
        df = float(n1 + n2 - 2)
        sp2 = ((n1 - 1) * v1 + (n2 - 1) * v2) / df
        se = math.sqrt(sp2 * (1.0 / n1 + 1.0 / n2))
    else:
        a, b = v1 / n1, v2 / n2
        se = math.sqrt(a + b)
        denom = a * a / (n1 - 1) + b * b / (n2 - 1)
        df = (a + b) ** 2 / denom if denom > 0 else float(n1 + n2 - 2)
    if se == 0.0:
        if diff == 0.0:
            raise DegenerateVariance("both samples are constant and equal")
        t = math.copysign(math.inf, diff)
    else:
        t = diff / se
    return TestResult(t, df, t_tail_two_sided(t, df), diff, (n1, n2))


def paired_t(diffs: Sequence[float]) -> TestResult:
    n = len(diffs)
    if n < 2:
        raise EmptyInput("paired t-test needs at least two differences")
    m, s = mean_sd(diffs)
    if s == 0.0:
        raise DegenerateVariance("paired differences have zero spread")
    t = m / (s / math.sqrt(n))
    df = float(n - 1)
    return TestResult(t, df, t_tail_two_sided(t, df), m, (n,))


# -- OLS ---------------------------------------------------------------------


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray
    standard_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    r_squared: float
    adj_r_squared: float
    n: int
    k: int
    residuals: np.ndarray
    sigma2: float
    vcov: np.ndarray
    names: tuple[str, ...] = field(default=())

    @property
    def df_resid(self) -> int:
        return self.n - self.k

    def coef(self, name: str) -> float:
        return float(self.coefficients[self.names.index(name)])

    def se(self, name: str) -> float:
        return float(self.standard_errors[self.names.index(name)])

    def pvalue(self, name: str) -> float:
        return float(self.p_values[self.names.index(name)])


def _has_intercept(X: np.ndarray) -> bool:
    return bool(np.any(np.all(X == X[0:1, :], axis=0) & (X[0] != 0)))


def ols_fit(X, y, names: Sequence[str] | None = None) -> OlsFit:
    """Least squares via Householder QR with classical standard errors.

    Raises RankDeficient naming the first column that lies (numerically) in
    the span of the columns before it; columns are never dropped silently.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2:
        raise ValueError("design matrix must be two-dimensional")
    n, k = X.shape
    if y.shape[0] != n:
        raise ValueError(f"outcome has {y.shape[0]} rows, design has {n}")
    if n <= k:
        raise TooFewRows(f"need more rows than regressors (n={n}, k={k})")
    names = tuple(names) if names is not None else tuple(f"x{j}" for j in range(k))

    Q, R = np.linalg.qr(X, mode="reduced")
    col_norms = np.linalg.norm(X, axis=0)
    diag = np.abs(np.diag(R))
    for j in range(k):
        if col_norms[j] == 0.0 or diag[j] <= RANK_TOL * col_norms[j]:
            raise RankDeficient(j, names[j] if j < len(names) else None)

    beta = solve_triangular(R, Q.T @ y, lower=False)
    resid = y - X @ beta
    rss = float(resid @ resid)
    dof = n - k
    sigma2 = rss / dof
    Rinv = solve_triangular(R, np.eye(k), lower=False)
    vcov = sigma2 * (Rinv @ Rinv.T)
    se = np.sqrt(np.diag(vcov))

    with np.errstate(divide="ignore", invalid="ignore"):
        tvals = np.where(se > 0, beta / np.where(se > 0, se, 1.0),
                         np.where(beta != 0, np.copysign(np.inf, beta), np.nan))
    pvals = np.array([t_tail_two_sided(float(t), dof) for t in tvals])

    if _has_intercept(X):
        tss = float(np.sum((y - y.mean()) ** 2))
    else:
        tss = float(y @ y)
    r2 = 1.0 - rss / tss if tss > 0 else 0.0
    adj = 1.0 - (1.0 - r2) * (n - 1) / dof
    return OlsFit(beta, se, tvals, pvals, r2, adj, n, k, resid, sigma2, vcov, names)


def t_critical(alpha: float, df: float) -> float:
    """Two-sided critical value c with P(|T_df| >= c) = alpha."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if not df > 0:
        raise NonPositiveDf(f"degrees of freedom must be positive, got {df}")
    hi = 1.0
    while t_tail_two_sided(hi, df) > alpha:
        hi *= 2.0
    return brentq(lambda c: t_tail_two_sided(c, df) - alpha, 0.0, hi, xtol=1e-12, rtol=1e-14)
