"""Branching mechanism: offspring law, reproduction p.g.f., and jump-rate function.

The offspring count of a dying particle mixes a unit atom, an atom at zero,
and a doubly-logarithmic tail::

    P(eta = 0) = alpha
    P(eta = 1) = 1 - alpha^2 (1 + 1/A)
    P(eta = n) = (alpha / A) alpha^n / (n (n - 1)),   n >= 2

with A = -log(1 - alpha).  The mean is m = 1 - alpha^2 / A < 1, so the
process is subcritical for every admissible weight.  Admissibility means
the unit atom keeps positive mass, i.e. alpha < ALPHA_CRITICAL, the unique
root of x^2 (1 + 1/A(x)) = 1 in (0, 1).

Each particle lives an exponential time with parameter ``rate``; on death it
is replaced by eta particles.  The generator of the induced p.g.f. semigroup
is f(s) = rate * (h(s) - s), which factors as
(rate * alpha / A) (1 - alpha s) (A + log(1 - alpha s)).
"""

import math
from dataclasses import dataclass, field

from .errors import DomainError


def _unit_atom_deficit(x: float) -> float:
    # x^2 (1 + 1/A(x)) - 1; negative iff P(eta = 1) > 0
    return x * x * (1.0 + 1.0 / (-math.log1p(-x))) - 1.0


def critical_alpha(tol: float = 1e-12) -> float:
    """Largest admissible mixture weight, located by bisection.

    The deficit x^2 (1 + 1/A(x)) - 1 is negative near 0 and positive near 1
    and crosses zero exactly once, so plain bisection converges to the root
    to within ``tol``.
    """
    lo, hi = 1e-6, 1.0 - 1e-9
    if not (_unit_atom_deficit(lo) < 0.0 < _unit_atom_deficit(hi)):
        raise RuntimeError("bisection bracket lost")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _unit_atom_deficit(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


ALPHA_CRITICAL = critical_alpha()


@dataclass(frozen=True)
class ModelParams:
    """Validated (alpha, rate) pair plus the derived constants used everywhere.

    ``log_norm`` is A = -log(1 - alpha), ``offspring_mean`` is
    m = 1 - alpha^2 / A, and ``malthusian_rate`` is the decay exponent
    f'(1) = -rate * alpha^2 / A of the expected population size.
    """

    alpha: float
    rate: float
    log_norm: float = field(init=False, repr=False, compare=False)
    offspring_mean: float = field(init=False, repr=False, compare=False)
    malthusian_rate: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < ALPHA_CRITICAL):
            raise DomainError(
                f"alpha must lie in (0, {ALPHA_CRITICAL:.6f}), got {self.alpha!r}"
            )
        if not self.rate > 0.0:
            raise DomainError(f"rate must be positive, got {self.rate!r}")
        a_const = -math.log1p(-self.alpha)
        object.__setattr__(self, "log_norm", a_const)
        object.__setattr__(self, "offspring_mean", 1.0 - self.alpha**2 / a_const)
        object.__setattr__(
            self, "malthusian_rate", -self.rate * self.alpha**2 / a_const
        )

    def at(self, t: float) -> "TimePoint":
        """Time point carrying the decayed mean E[X(t)] = exp(malthusian_rate * t)."""
        if not t >= 0.0:
            raise DomainError(f"time must be nonnegative, got {t!r}")
        return TimePoint(t, math.exp(self.malthusian_rate * t))


@dataclass(frozen=True)
class TimePoint:
    """A process time t >= 0 paired with the mean population size at t."""

    t: float
    mean: float

    def __post_init__(self) -> None:
        if not self.t >= 0.0:
            raise DomainError(f"time must be nonnegative, got {self.t!r}")
        if not 0.0 < self.mean <= 1.0:
            raise DomainError(f"mean must lie in (0, 1], got {self.mean!r}")


def offspring_pmf(params: ModelParams, n: int) -> float:
    """P(eta = n) for the logarithmic-mixture offspring law."""
    if n < 0:
        raise DomainError(f"offspring count must be nonnegative, got {n!r}")
    a = params.alpha
    if n == 0:
        return a
    if n == 1:
        return 1.0 - a * a * (1.0 + 1.0 / params.log_norm)
    return (a / params.log_norm) * a**n / (n * (n - 1.0))


def reproduction_pgf(params: ModelParams, s: float) -> float:
    """h(s) = s + alpha (1 - alpha s) (1 + log(1 - alpha s) / A) on |s| <= 1.

    The bracket is evaluated as log1p(alpha (1 - s) / (1 - alpha)) / A, which
    is exact at s = 1 and loses nothing for small alpha.
    """
    if not abs(s) <= 1.0:
        raise DomainError(f"pgf argument must satisfy |s| <= 1, got {s!r}")
    a = params.alpha
    bracket = math.log1p(a * (1.0 - s) / (1.0 - a)) / params.log_norm
    return s + a * (1.0 - a * s) * bracket


def infinitesimal_gen(params: ModelParams, s: float) -> float:
    """Jump-rate function f(s) = rate * (h(s) - s) in its factored form.

    Computed as (rate * alpha / A) (1 - alpha s) log1p(alpha(1-s)/(1-alpha));
    the log1p factor equals A + log(1 - alpha s) without cancellation, so
    f(1) = 0 holds exactly.
    """
    if not abs(s) <= 1.0:
        raise DomainError(f"pgf argument must satisfy |s| <= 1, got {s!r}")
    a = params.alpha
    stable_log = math.log1p(a * (1.0 - s) / (1.0 - a))
    return (params.rate * a / params.log_norm) * (1.0 - a * s) * stable_log


@dataclass(frozen=True)
class OffspringLaw:
    """The offspring distribution bundled with its generating function."""

    params: ModelParams

    def pmf(self, n: int) -> float:
        return offspring_pmf(self.params, n)

    def pgf(self, s: float) -> float:
        return reproduction_pgf(self.params, s)

    def mean(self) -> float:
        return self.params.offspring_mean

    def tail_bound(self, n: int) -> float:
        """Upper bound on P(eta > n) for n >= 2, from the geometric ratio alpha.

        For n >= 2 the pmf ratio alpha (n - 1) / (n + 1) stays below alpha, so
        the tail past n is at most pmf(n) * alpha / (1 - alpha).
        """
        if n < 2:
            raise DomainError("tail bound requires n >= 2")
        a = self.params.alpha
        return self.pmf(n) * a / (1.0 - a)
