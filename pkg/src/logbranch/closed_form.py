"""Time-t law of the branching process, in closed form.

Everything here is a pure function of (ModelParams, TimePoint).  Writing
M = M(t) for the mean and A = -log(1 - alpha), the generating function of
the population size X(t) started from a single particle is

    F(t, s) = (1/alpha) * (1 - (1 - alpha) * R(s)^M),
    R(s) = (1 - alpha s) / (1 - alpha),

from which the pmf, factorial moments, the law conditioned on survival, and
the long-time conditional limit (a logarithmic series law) all follow.  All
spectrum-spanning products are assembled in log space and carried as
sign/log-magnitude pairs so that nothing overflows before the caller asks
for an ordinary float.
"""

import math
from dataclasses import dataclass

from .errors import DomainError
from .model import ModelParams, TimePoint


@dataclass(frozen=True)
class SignedLog:
    """A real number stored as (sign, log|value|).

    Survives magnitudes far outside float range; ``value()`` converts back
    and raises OverflowError when the magnitude genuinely cannot be
    represented.
    """

    sign: int
    log_magnitude: float

    @classmethod
    def of(cls, x: float) -> "SignedLog":
        if x == 0.0:
            return cls(0, float("-inf"))
        return cls(1 if x > 0.0 else -1, math.log(abs(x)))

    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)

    def __mul__(self, other: "SignedLog") -> "SignedLog":
        if self.sign == 0 or other.sign == 0:
            return SignedLog(0, float("-inf"))
        return SignedLog(self.sign * other.sign, self.log_magnitude + other.log_magnitude)


def falling_factorial(x: float, n: int) -> SignedLog:
    """[x]_n = x (x-1) ... (x-n+1) as a signed log-magnitude pair; [x]_0 = 1."""
    if n < 0:
        raise DomainError(f"falling factorial order must be nonnegative, got {n!r}")
    sign = 1
    log_mag = 0.0
    for k in range(n):
        term = x - k
        if term == 0.0:
            return SignedLog(0, float("-inf"))
        if term < 0.0:
            sign = -sign
        log_mag += math.log(abs(term))
    return SignedLog(sign, log_mag)


def _log_ratio(params: ModelParams, s: float) -> float:
    # log R(s) = log((1 - alpha s)/(1 - alpha)), stable for s in [-1, 1]
    return math.log1p(params.alpha * (1.0 - s) / (1.0 - params.alpha))


def pgf_complement(params: ModelParams, tp: TimePoint, s: float) -> float:
    """1 - F(t, s) = ((1 - alpha)/alpha) * (R(s)^M - 1), the survival-side form.

    expm1 keeps full relative precision as M -> 0 or s -> 1, where the
    direct difference would cancel.
    """
    if not abs(s) <= 1.0:
        raise DomainError(f"pgf argument must satisfy |s| <= 1, got {s!r}")
    a = params.alpha
    return ((1.0 - a) / a) * math.expm1(tp.mean * _log_ratio(params, s))


def pgf_at(params: ModelParams, tp: TimePoint, s: float) -> float:
    """F(t, s) = E[s^X(t)]; exact 1 at s = 1 and exact s at t = 0 up to rounding."""
    return 1.0 - pgf_complement(params, tp, s)


def survival_prob(params: ModelParams, tp: TimePoint) -> float:
    """P(X(t) > 0) = ((1 - alpha)/alpha) * (exp(M A) - 1), via expm1."""
    return pgf_complement(params, tp, 0.0)


def extinction_prob(params: ModelParams, tp: TimePoint) -> float:
    """P(X(t) = 0); complements survival_prob bit for bit."""
    return 1.0 - survival_prob(params, tp)


def pgf_dt(params: ModelParams, tp: TimePoint, s: float) -> float:
    """Exact time derivative of F(t, s).

    d/dt F = -((1-alpha)/alpha) R^M * M' log R with M' = malthusian_rate * M,
    so the result is rate*(alpha/A)*(1-alpha) * M * R^M * log R >= 0.
    """
    if not abs(s) <= 1.0:
        raise DomainError(f"pgf argument must satisfy |s| <= 1, got {s!r}")
    a = params.alpha
    log_r = _log_ratio(params, s)
    power = math.exp(tp.mean * log_r)
    return (params.rate * a / params.log_norm) * (1.0 - a) * tp.mean * power * log_r


def pgf_ds(params: ModelParams, tp: TimePoint, s: float) -> float:
    """Exact s-derivative of F(t, s): M * R(s)^(M-1)."""
    if not abs(s) <= 1.0:
        raise DomainError(f"pgf argument must satisfy |s| <= 1, got {s!r}")
    return tp.mean * math.exp((tp.mean - 1.0) * _log_ratio(params, s))


def pmf(params: ModelParams, tp: TimePoint, n: int) -> float:
    """P(X(t) = n).

    For n >= 1 and t > 0 this is
    ((1-alpha)^(1-M)/alpha) alpha^n |[M]_n| / n!, assembled in log space.
    t = 0 short-circuits to the unit atom at 1 because [1]_n vanishes for
    n >= 2 and the general assembly would degrade to 0/0 bookkeeping.
    """
    if n < 0:
        raise DomainError(f"population size must be nonnegative, got {n!r}")
    if tp.t == 0.0:
        return 1.0 if n == 1 else 0.0
    if n == 0:
        return extinction_prob(params, tp)
    ff = falling_factorial(tp.mean, n)
    if ff.sign == 0:
        return 0.0
    a = params.alpha
    log_p = (
        math.log1p(-a)
        - math.log(a)
        + n * math.log(a)
        + tp.mean * params.log_norm
        + ff.log_magnitude
        - math.lgamma(n + 1.0)
    )
    return math.exp(log_p)


def factorial_moment(params: ModelParams, tp: TimePoint, n: int) -> float:
    """E[X(t) (X(t)-1) ... (X(t)-n+1)] = ((1-alpha)/alpha) (alpha/(1-alpha))^n |[M]_n|."""
    if n < 1:
        raise DomainError(f"moment order must be positive, got {n!r}")
    ff = falling_factorial(tp.mean, n)
    if ff.sign == 0:
        return 0.0
    a = params.alpha
    log_odds = math.log(a) - math.log1p(-a)
    return math.exp(math.log1p(-a) - math.log(a) + n * log_odds + ff.log_magnitude)


def _log_survival_factor(params: ModelParams, tp: TimePoint) -> float:
    # log(1 - (1 - alpha)^M) = log(-expm1(-M A)), the conditional normalizer
    return math.log(-math.expm1(-tp.mean * params.log_norm))


def _require_positive_time(tp: TimePoint) -> None:
    if not tp.t > 0.0:
        raise DomainError("conditioning on survival requires t > 0")


def conditional_pmf(params: ModelParams, tp: TimePoint, n: int) -> float:
    """P(X(t) = n | X(t) > 0) = alpha^n |[M]_n| / (n! (1 - (1-alpha)^M))."""
    _require_positive_time(tp)
    if n < 1:
        raise DomainError(f"conditional support starts at 1, got {n!r}")
    ff = falling_factorial(tp.mean, n)
    if ff.sign == 0:
        return 0.0
    log_p = (
        n * math.log(params.alpha)
        + ff.log_magnitude
        - math.lgamma(n + 1.0)
        - _log_survival_factor(params, tp)
    )
    return math.exp(log_p)


def conditional_factorial_moment(params: ModelParams, tp: TimePoint, n: int) -> float:
    """E[[X(t)]_n | X(t) > 0] = (alpha/(1-alpha))^n (1-alpha)^M |[M]_n| / (1 - (1-alpha)^M)."""
    _require_positive_time(tp)
    if n < 1:
        raise DomainError(f"moment order must be positive, got {n!r}")
    ff = falling_factorial(tp.mean, n)
    if ff.sign == 0:
        return 0.0
    a = params.alpha
    log_odds = math.log(a) - math.log1p(-a)
    log_m = (
        n * log_odds
        + tp.mean * math.log1p(-a)
        + ff.log_magnitude
        - _log_survival_factor(params, tp)
    )
    return math.exp(log_m)


def conditional_pgf(params: ModelParams, tp: TimePoint, s: float) -> float:
    """E[s^X(t) | X(t) > 0] = (1 - (1 - alpha s)^M) / (1 - (1 - alpha)^M).

    Both numerator and denominator go through expm1, so the ratio keeps full
    precision however small M gets; s = 1 returns exactly 1.
    """
    _require_positive_time(tp)
    if not abs(s) <= 1.0:
        raise DomainError(f"pgf argument must satisfy |s| <= 1, got {s!r}")
    num = math.expm1(tp.mean * math.log1p(-params.alpha * s))
    den = math.expm1(tp.mean * math.log1p(-params.alpha))
    return num / den


def limit_law_pmf(params: ModelParams, n: int) -> float:
    """Long-time conditional limit: P(xi = n) = alpha^n / (A n), n >= 1."""
    if n < 1:
        raise DomainError(f"limit-law support starts at 1, got {n!r}")
    return params.alpha**n / (params.log_norm * n)


def limit_law_pgf(params: ModelParams, s: float) -> float:
    """Generating function of the limit law: -log(1 - alpha s) / A."""
    if not abs(s) <= 1.0:
        raise DomainError(f"pgf argument must satisfy |s| <= 1, got {s!r}")
    return math.log1p(-params.alpha * s) / math.log1p(-params.alpha)


def limit_law_factorial_moment_log(params: ModelParams, n: int) -> SignedLog:
    """E[[xi]_n] = ((n-1)!/A) (alpha/(1-alpha))^n as a signed log pair."""
    if n < 1:
        raise DomainError(f"moment order must be positive, got {n!r}")
    a = params.alpha
    log_odds = math.log(a) - math.log1p(-a)
    log_m = math.lgamma(n) - math.log(params.log_norm) + n * log_odds
    return SignedLog(1, log_m)


def limit_law_factorial_moment(params: ModelParams, n: int) -> float:
    """Float value of the limit-law factorial moment; OverflowError when it
    exceeds float range (the moments grow like (n-1)!)."""
    return limit_law_factorial_moment_log(params, n).value()


@dataclass(frozen=True)
class DiscreteLaw:
    """A finite pmf table plus a certified bound on the truncated tail mass.

    ``probs[i]`` is the probability of ``support_offset + i``; everything past
    the table carries at most ``tail_mass``.
    """

    support_offset: int
    probs: tuple
    tail_mass: float

    def prob(self, n: int) -> float:
        i = n - self.support_offset
        if 0 <= i < len(self.probs):
            return self.probs[i]
        return 0.0

    def support_end(self) -> int:
        return self.support_offset + len(self.probs) - 1

    def total_mass(self) -> float:
        return math.fsum(self.probs) + self.tail_mass


def _build_law(pmf_at_n, support_offset: int, ratio_bound: float,
               tail_bound: float, max_terms: int = 100_000) -> DiscreteLaw:
    """Tabulate pmf_at_n from support_offset until the geometric tail bound
    pmf(n) * r / (1 - r) drops below tail_bound (valid once n >= 1)."""
    probs = []
    n = support_offset
    while True:
        p = pmf_at_n(n)
        probs.append(p)
        if n >= 1 and p * ratio_bound / (1.0 - ratio_bound) < tail_bound:
            break
        n += 1
        if n - support_offset >= max_terms:
            raise RuntimeError("law table did not converge")
    bound = probs[-1] * ratio_bound / (1.0 - ratio_bound)
    return DiscreteLaw(support_offset, tuple(probs), bound)


def law_at(params: ModelParams, tp: TimePoint, tail_bound: float = 1e-12) -> DiscreteLaw:
    """Table of P(X(t) = n) from n = 0, cut off by the certified alpha-ratio tail.

    The pmf ratio alpha (n - M)/(n + 1) stays below alpha for n >= 1, so the
    mass past the last entry is at most pmf(last) * alpha / (1 - alpha).
    """
    if tp.t == 0.0:
        return DiscreteLaw(0, (0.0, 1.0), 0.0)
    return _build_law(lambda n: pmf(params, tp, n), 0, params.alpha, tail_bound)


def conditional_law_at(params: ModelParams, tp: TimePoint,
                       tail_bound: float = 1e-12) -> DiscreteLaw:
    """Table of P(X(t) = n | X(t) > 0) from n = 1, same tail certificate."""
    _require_positive_time(tp)
    return _build_law(lambda n: conditional_pmf(params, tp, n), 1,
                      params.alpha, tail_bound)


def limit_law(params: ModelParams, tail_bound: float = 1e-12) -> DiscreteLaw:
    """Table of the logarithmic-series limit law from n = 1."""
    return _build_law(lambda n: limit_law_pmf(params, n), 1,
                      params.alpha, tail_bound)


def tv_distance(law_a: DiscreteLaw, law_b: DiscreteLaw) -> float:
    """Total-variation distance between two tabulated laws.

    Exact on the tabulated supports; the unseen tails contribute at most
    (tail_a + tail_b)/2, which is added so the result is an upper bound.
    """
    lo = min(law_a.support_offset, law_b.support_offset)
    hi = max(law_a.support_end(), law_b.support_end())
    diff = math.fsum(abs(law_a.prob(n) - law_b.prob(n)) for n in range(lo, hi + 1))
    return 0.5 * (diff + law_a.tail_mass + law_b.tail_mass)
