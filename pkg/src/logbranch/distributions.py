"""Heavy-tailed discrete laws and exact inverse-CDF samplers.

Three standalone families live here: the Sibuya law (pgf 1 - (1-s)^gamma),
its extended two-parameter variant (pgf scaled to (1 - (1-bs)^gamma) /
(1 - (1-b)^gamma)), and the logarithmic series law.  The extended family
matters because the branching process conditioned on survival is exactly
extended-Sibuya with gamma = M(t) and b = alpha.

Sampling is exact: a prefix of the CDF is tabulated and inverted by bisection;
draws falling past the table either invert a closed-form survival function
(plain Sibuya, whose tail is heavier than every geometric) or run rejection
under a certified geometric envelope p(n+1) <= r p(n).
"""

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .model import ModelParams, offspring_pmf


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Independent counter-based RNG stream keyed by (seed, replicate index).

    Philox streams with distinct keys never overlap, so replicate i of run
    ``seed`` is reproducible in isolation regardless of scheduling.
    """
    if not 0 <= seed < 2**64:
        raise DomainError(f"seed must fit in 64 bits, got {seed!r}")
    if not 0 <= index < 2**64:
        raise DomainError(f"stream index must fit in 64 bits, got {index!r}")
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class Sibuya:
    """Sibuya law on {1, 2, ...}: P(N = 1) = gamma, P(N=n+1) = P(N=n)(n-gamma)/(n+1)."""

    gamma: float

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise DomainError(f"gamma must lie in (0, 1), got {self.gamma!r}")

    def pmf(self, n: int) -> float:
        if n < 1:
            raise DomainError(f"support starts at 1, got {n!r}")
        p = self.gamma
        for k in range(1, n):
            p *= (k - self.gamma) / (k + 1.0)
        return p

    def _pmf_iter(self):
        p = self.gamma
        n = 1
        while True:
            yield p
            p *= (n - self.gamma) / (n + 1.0)
            n += 1

    def survival(self, n: int) -> float:
        """P(N > n) = Gamma(n+1-gamma) / (Gamma(1-gamma) Gamma(n+1)), exact via lgamma."""
        if n < 0:
            raise DomainError(f"survival index must be nonnegative, got {n!r}")
        if n == 0:
            return 1.0
        return math.exp(
            math.lgamma(n + 1.0 - self.gamma)
            - math.lgamma(1.0 - self.gamma)
            - math.lgamma(n + 1.0)
        )

    def pgf(self, s: float) -> float:
        if not abs(s) <= 1.0:
            raise DomainError(f"pgf argument must satisfy |s| <= 1, got {s!r}")
        if s == 1.0:
            return 1.0
        return -math.expm1(self.gamma * math.log1p(-s))

    def sampler(self, **kwargs) -> "InverseCdfSampler":
        return InverseCdfSampler(
            self._pmf_iter, self.pmf, support_start=1,
            survival=self.survival, **kwargs,
        )


@dataclass(frozen=True)
class ExtendedSibuya:
    """Two-parameter Sibuya variant on {1, 2, ...} with pgf
    (1 - (1 - b s)^gamma) / (1 - (1 - b)^gamma), 0 < gamma < 1, 0 < b < 1."""

    gamma: float
    b: float

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise DomainError(f"gamma must lie in (0, 1), got {self.gamma!r}")
        if not 0.0 < self.b < 1.0:
            raise DomainError(f"b must lie in (0, 1), got {self.b!r}")

    def _norm(self) -> float:
        # 1 - (1 - b)^gamma without cancellation
        return -math.expm1(self.gamma * math.log1p(-self.b))

    def pmf(self, n: int) -> float:
        if n < 1:
            raise DomainError(f"support starts at 1, got {n!r}")
        p = self.gamma * self.b / self._norm()
        for k in range(1, n):
            p *= self.b * (k - self.gamma) / (k + 1.0)
        return p

    def _pmf_iter(self):
        p = self.gamma * self.b / self._norm()
        n = 1
        while True:
            yield p
            p *= self.b * (n - self.gamma) / (n + 1.0)
            n += 1

    def pgf(self, s: float) -> float:
        if not abs(s) <= 1.0:
            raise DomainError(f"pgf argument must satisfy |s| <= 1, got {s!r}")
        num = math.expm1(self.gamma * math.log1p(-self.b * s))
        return num / math.expm1(self.gamma * math.log1p(-self.b))

    def mean(self) -> float:
        """gamma b (1-b)^(gamma-1) / (1 - (1-b)^gamma)."""
        scale = math.exp((self.gamma - 1.0) * math.log1p(-self.b))
        return self.gamma * self.b * scale / self._norm()

    def sampler(self, **kwargs) -> "InverseCdfSampler":
        return InverseCdfSampler(
            self._pmf_iter, self.pmf, support_start=1,
            ratio_bound=self.b, **kwargs,
        )


@dataclass(frozen=True)
class LogSeries:
    """Logarithmic series law on {1, 2, ...}: P(N = n) = alpha^n / (A n)."""

    alpha: float
    log_norm: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        object.__setattr__(self, "log_norm", -math.log1p(-self.alpha))

    def pmf(self, n: int) -> float:
        if n < 1:
            raise DomainError(f"support starts at 1, got {n!r}")
        return self.alpha**n / (self.log_norm * n)

    def _pmf_iter(self):
        n = 1
        while True:
            yield self.alpha**n / (self.log_norm * n)
            n += 1

    def pgf(self, s: float) -> float:
        if not abs(s) <= 1.0:
            raise DomainError(f"pgf argument must satisfy |s| <= 1, got {s!r}")
        return math.log1p(-self.alpha * s) / math.log1p(-self.alpha)

    def mean(self) -> float:
        return self.alpha / (self.log_norm * (1.0 - self.alpha))

    def sampler(self, **kwargs) -> "InverseCdfSampler":
        return InverseCdfSampler(
            self._pmf_iter, self.pmf, support_start=1,
            ratio_bound=self.alpha, **kwargs,
        )


def _offspring_pmf_iter(params: ModelParams):
    yield offspring_pmf(params, 0)
    yield offspring_pmf(params, 1)
    p = offspring_pmf(params, 2)
    n = 2
    while True:
        yield p
        p *= params.alpha * (n - 1.0) / (n + 1.0)
        n += 1


def offspring_sampler(params: ModelParams, **kwargs) -> "InverseCdfSampler":
    """Exact sampler for the reproduction law; tail ratio alpha holds from n >= 2."""
    return InverseCdfSampler(
        lambda: _offspring_pmf_iter(params),
        lambda n: offspring_pmf(params, n),
        support_start=0,
        ratio_bound=params.alpha,
        **kwargs,
    )


class InverseCdfSampler:
    """Exact sampler: tabulated CDF prefix plus a certified tail strategy.

    The table is warmed to ``warm_mass`` cumulative probability (capped at
    ``max_table`` entries, floor of 3 so geometric ratio certificates apply).
    Uniform draws landing past the table are resolved exactly, either by
    inverting ``survival`` (doubling then integer bisection) or by rejection
    under the geometric envelope pmf(edge+1) * ratio_bound^(k - edge - 1).
    """

    def __init__(self, pmf_iter, pmf, support_start: int, ratio_bound: float = None,
                 survival=None, warm_mass: float = 0.99, max_table: int = 4096):
        if ratio_bound is None and survival is None:
            raise DomainError("a tail strategy (ratio_bound or survival) is required")
        if ratio_bound is not None and not 0.0 < ratio_bound < 1.0:
            raise DomainError(f"ratio bound must lie in (0, 1), got {ratio_bound!r}")
        if not 0.0 < warm_mass < 1.0:
            raise DomainError(f"warm mass must lie in (0, 1), got {warm_mass!r}")
        self._pmf = pmf
        self._support_start = support_start
        self._ratio_bound = ratio_bound
        self._survival = survival
        cum = []
        total = 0.0
        it = pmf_iter()
        while (total < warm_mass or len(cum) < 3) and len(cum) < max_table:
            total += next(it)
            cum.append(total)
        self._cum = cum
        self._cum_arr = np.array(cum)
        self._support_end = support_start + len(cum) - 1

    def draw(self, rng: np.random.Generator) -> int:
        u = rng.random()
        if u < self._cum[-1]:
            return self._support_start + bisect.bisect_right(self._cum, u)
        return self._draw_tail(rng, u)

    def draw_many(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        idx = np.searchsorted(self._cum_arr, u, side="right")
        out = self._support_start + idx
        for pos in np.flatnonzero(idx == len(self._cum)):
            out[pos] = self._draw_tail(rng, u[pos])
        return out

    def _draw_tail(self, rng: np.random.Generator, u: float) -> int:
        if self._survival is not None:
            return self._invert_survival(1.0 - u)
        return self._reject_geometric(rng)

    def _invert_survival(self, v: float) -> int:
        # smallest n with survival(n) < v; survival(support_end) >= v on entry
        lo = self._support_end
        span = 1
        while self._survival(lo + span) >= v:
            lo += span
            span *= 2
        hi = lo + span
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self._survival(mid) < v:
                hi = mid
            else:
                lo = mid
        return hi

    def _reject_geometric(self, rng: np.random.Generator) -> int:
        edge = self._support_end
        r = self._ratio_bound
        p_next = self._pmf(edge + 1)
        while True:
            k = edge + int(rng.geometric(1.0 - r))
            envelope = p_next * r ** (k - edge - 1)
            if rng.random() * envelope <= self._pmf(k):
                return k
