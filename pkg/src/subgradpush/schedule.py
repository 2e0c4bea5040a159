"""Stepsize schedules alpha(t), t >= 1."""

import math
from dataclasses import dataclass

import numpy as np

KINDS = ("inv-sqrt", "inv-t-power", "custom-summable-square")


@dataclass(frozen=True)
class StepSchedule:
    """
    alpha(t) for t >= 1.

    ``inv-sqrt``: 1/sqrt(t + offset). ``inv-t-power``: 1/(t + offset)^p with
    p in (1/2, 1]. ``custom-summable-square``: explicit ``values`` for
    t = 1, 2, ..., which must be positive and non-increasing.
    """

    kind: str = "inv-sqrt"
    p: float = 0.5
    offset: float = 0.0
    values: tuple = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.offset < 0:
            raise ValueError("offset must be >= 0")
        if self.kind == "inv-sqrt":
            object.__setattr__(self, "p", 0.5)
        elif self.kind == "inv-t-power" and not 0.5 < self.p <= 1.0:
            raise ValueError("inv-t-power needs p in (1/2, 1]")
        if self.kind == "custom-summable-square":
            if not self.values:
                raise ValueError("custom schedule needs a non-empty list of values")
            v = tuple(float(a) for a in self.values)
            if any(a <= 0 for a in v) or any(b > a for a, b in zip(v, v[1:])):
                raise ValueError("custom stepsizes must be positive and non-increasing")
            object.__setattr__(self, "values", v)

    def __call__(self, t):
        if t < 1:
            raise ValueError("stepsizes are defined for t >= 1")
        if self.kind == "custom-summable-square":
            if t > len(self.values):
                raise ValueError(f"custom schedule has no value for t={t}")
            return self.values[t - 1]
        return 1.0 / (t + self.offset) ** self.p

    def alphas(self, T):
        """alpha(1), ..., alpha(T)."""
        return np.array([self(t) for t in range(1, T + 1)])

    @property
    def is_inv_sqrt(self):
        return self.kind == "inv-sqrt" and self.offset == 0

    def decay_conditions(self):
        """
        (sum diverges, sum of squares finite, non-increasing), decided
        analytically per kind; a finite custom list is taken on trust.
        """
        if self.kind == "custom-summable-square":
            return True, True, True
        return True, self.p > 0.5, True

    def partial_sum(self, t):
        """S(t) = alpha(1) + ... + alpha(t), summed left to right."""
        return math.fsum(self(s) for s in range(1, t + 1))
