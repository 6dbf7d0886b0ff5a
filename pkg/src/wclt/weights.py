"""Nonnegative edge-weight laws with closed-form moments and quantile functions.

All sampling is inverse-transform: a weight is always quantile(u) of a
supplied uniform, which lets the graph sampler and the chaos kernels share
one coupling exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfigError, WeightModelError


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float
    fourth_central: float
    second_raw: float
    kurtosis: float  # math.inf for degenerate laws


class WeightModel:
    """Base class; concrete laws implement raw moments and the quantile."""

    label = "abstract"

    @property
    def mean(self) -> float:
        raise NotImplementedError

    @property
    def second_raw(self) -> float:
        raise NotImplementedError

    @property
    def third_raw(self) -> float:
        raise NotImplementedError

    @property
    def fourth_raw(self) -> float:
        raise NotImplementedError

    @property
    def variance(self) -> float:
        return self.second_raw - self.mean**2

    @property
    def fourth_central(self) -> float:
        m1 = self.mean
        return self.fourth_raw - 4 * m1 * self.third_raw + 6 * m1**2 * self.second_raw - 3 * m1**4

    def moments(self) -> Moments:
        var = self.variance
        c4 = self.fourth_central
        kurt = c4 / var**2 if var > 0 else math.inf
        return Moments(self.mean, var, c4, self.second_raw, kurt)

    def quantile(self, u: float) -> float:
        """Generalized inverse of the CDF, left-continuous convention."""
        if not (0.0 <= u < 1.0):
            raise WeightModelError(f"quantile argument must lie in [0, 1), got {u}")
        return self._quantile(u)

    def _quantile(self, u: float) -> float:
        raise NotImplementedError

    def quantile_array(self, u: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def quantile_mean(self, a: float, b: float) -> float:
        """Average of the quantile over u in (a, b), in closed form."""
        raise NotImplementedError

    def _tag(self) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self._tag()


def sample(model: WeightModel, u: float) -> float:
    """Inverse-transform sample: a pure function of the supplied uniform."""
    return model.quantile(u)


@dataclass(frozen=True)
class Constant(WeightModel):
    value: float

    label = "const"

    def __post_init__(self) -> None:
        if self.value <= 0:
            raise WeightModelError("constant weight must be positive (zero-mean laws are rejected)")

    @property
    def mean(self) -> float:
        return self.value

    @property
    def second_raw(self) -> float:
        return self.value**2

    @property
    def third_raw(self) -> float:
        return self.value**3

    @property
    def fourth_raw(self) -> float:
        return self.value**4

    def _quantile(self, u: float) -> float:
        return self.value

    def quantile_array(self, u: np.ndarray) -> np.ndarray:
        return np.full_like(np.asarray(u, dtype=float), self.value)

    def quantile_mean(self, a: float, b: float) -> float:
        return self.value

    def _tag(self) -> str:
        return f"const:{self.value!r}"


@dataclass(frozen=True)
class Uniform(WeightModel):
    """Uniform law on (0, high)."""

    high: float

    label = "unif"

    def __post_init__(self) -> None:
        if self.high <= 0:
            raise WeightModelError("uniform upper endpoint must be positive")

    @property
    def mean(self) -> float:
        return self.high / 2

    @property
    def second_raw(self) -> float:
        return self.high**2 / 3

    @property
    def third_raw(self) -> float:
        return self.high**3 / 4

    @property
    def fourth_raw(self) -> float:
        return self.high**4 / 5

    def _quantile(self, u: float) -> float:
        return self.high * u

    def quantile_array(self, u: np.ndarray) -> np.ndarray:
        return self.high * np.asarray(u, dtype=float)

    def quantile_mean(self, a: float, b: float) -> float:
        return self.high * (a + b) / 2

    def _tag(self) -> str:
        return f"unif:{self.high!r}"


@dataclass(frozen=True)
class Exponential(WeightModel):
    rate: float

    label = "exp"

    def __post_init__(self) -> None:
        if self.rate <= 0:
            raise WeightModelError("exponential rate must be positive")

    @property
    def mean(self) -> float:
        return 1 / self.rate

    @property
    def second_raw(self) -> float:
        return 2 / self.rate**2

    @property
    def third_raw(self) -> float:
        return 6 / self.rate**3

    @property
    def fourth_raw(self) -> float:
        return 24 / self.rate**4

    def _quantile(self, u: float) -> float:
        return -math.log1p(-u) / self.rate

    def quantile_array(self, u: np.ndarray) -> np.ndarray:
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate

    def quantile_mean(self, a: float, b: float) -> float:
        # antiderivative of -log(1-u) is (1-u) log(1-u) + u
        def anti(u: float) -> float:
            if u >= 1.0:
                return 1.0
            return (1 - u) * math.log1p(-u) + u

        return (anti(b) - anti(a)) / ((b - a) * self.rate)

    def _tag(self) -> str:
        return f"exp:{self.rate!r}"


@dataclass(frozen=True)
class TwoPoint(WeightModel):
    """Two-atom law: value ``low_value`` or ``high_value``, q = P(high_value)."""

    low_value: float
    high_value: float
    prob_high: float

    label = "twopoint"

    def __post_init__(self) -> None:
        if self.low_value < 0 or self.high_value < 0:
            raise WeightModelError("two-point atoms must be nonnegative")
        if not (0.0 < self.prob_high < 1.0):
            raise WeightModelError("two-point probability must lie in (0, 1)")
        if self.low_value > self.high_value:
            # normalize so the quantile is a nondecreasing step function
            lo, hi, q = self.high_value, self.low_value, 1.0 - self.prob_high
            object.__setattr__(self, "low_value", lo)
            object.__setattr__(self, "high_value", hi)
            object.__setattr__(self, "prob_high", q)
        if self.low_value == 0 and self.high_value == 0:
            raise WeightModelError("two-point law must have positive mean")

    @property
    def _prob_low(self) -> float:
        return 1.0 - self.prob_high

    @property
    def mean(self) -> float:
        return self._prob_low * self.low_value + self.prob_high * self.high_value

    @property
    def second_raw(self) -> float:
        return self._prob_low * self.low_value**2 + self.prob_high * self.high_value**2

    @property
    def third_raw(self) -> float:
        return self._prob_low * self.low_value**3 + self.prob_high * self.high_value**3

    @property
    def fourth_raw(self) -> float:
        return self._prob_low * self.low_value**4 + self.prob_high * self.high_value**4

    def _quantile(self, u: float) -> float:
        return self.low_value if u <= self._prob_low else self.high_value

    def quantile_array(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.where(u <= self._prob_low, self.low_value, self.high_value)

    def quantile_mean(self, a: float, b: float) -> float:
        split = self._prob_low
        low_len = max(0.0, min(b, split) - a)
        high_len = max(0.0, b - max(a, split))
        return (self.low_value * low_len + self.high_value * high_len) / (b - a)

    def _tag(self) -> str:
        return f"twopoint:{self.low_value!r},{self.high_value!r},{self.prob_high!r}"


def parse_weight_model(spec: str) -> WeightModel:
    """Parse the CLI syntax: const:c, unif:b, exp:lambda, twopoint:a,b,q."""
    spec = spec.strip().lower()
    kind, _, arg = spec.partition(":")
    if not arg:
        raise WeightModelError(f"missing parameters in weight model {spec!r}")
    try:
        params = [float(x) for x in arg.split(",")]
    except ValueError:
        raise WeightModelError(f"bad numeric parameter in weight model {spec!r}") from None
    if kind == "const" and len(params) == 1:
        return Constant(params[0])
    if kind == "unif" and len(params) == 1:
        return Uniform(params[0])
    if kind == "exp" and len(params) == 1:
        return Exponential(params[0])
    if kind == "twopoint" and len(params) == 3:
        return TwoPoint(params[0], params[1], params[2])
    raise WeightModelError(f"unknown weight model {spec!r}")


def moment_ratio(model: WeightModel, p: float) -> float:
    """Weight-law factor of the rate bound:
    (sqrt(fourth central moment) + (1-p) mean^2) / (variance + (1-p) mean^2).
    """
    if not (0.0 < p < 1.0):
        raise DegenerateConfigError(f"retention probability must lie in (0, 1), got {p}")
    m = model.moments()
    denom = m.variance + (1.0 - p) * m.mean**2
    if denom <= 0.0:
        raise DegenerateConfigError("degenerate weight/retention combination")
    return (math.sqrt(m.fourth_central) + (1.0 - p) * m.mean**2) / denom
