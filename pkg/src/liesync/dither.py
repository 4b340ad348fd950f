"""Dither frequency assignment and evaluation.

Every agent perturbs each algebra direction with a_i^j sin(omega * k_i^j * t),
where the integer multipliers k_i^j over the whole m x n grid must be pairwise
distinct, no entry may be the double of another, and no entry may be the sum of
two other distinct entries.  These constraints are exactly what makes the
pairwise and triple products of the dither sinusoids average to zero over a
common period, which in turn makes the averaged closed loop a scaled gradient
flow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .groups import AlgebraVector, tag_for_algebra_dim

DEFAULT_AMPLITUDE_CAP = 0.5


@dataclass(frozen=True)
class FrequencyViolation:
    kind: str          # "duplicate" | "double" | "sum"
    indices: tuple[int, ...]
    message: str

    def __str__(self) -> str:
        return self.message


@dataclass(frozen=True)
class FrequencyReport:
    ok: bool
    violations: tuple[FrequencyViolation, ...] = ()

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "valid"
        return "\n".join(str(v) for v in self.violations)


def validate_frequencies(multipliers) -> FrequencyReport:
    """Exhaustively check the three constraint families over a flat multiplier list.

    O(N^3); returns a report naming offending indices rather than raising.
    """
    w = [int(x) for x in np.asarray(multipliers).reshape(-1)]
    if any(x <= 0 for x in w):
        raise ValueError("multipliers must be positive integers")
    n = len(w)
    violations: list[FrequencyViolation] = []
    for p in range(n):
        for q in range(p + 1, n):
            if w[p] == w[q]:
                violations.append(FrequencyViolation(
                    "duplicate", (p, q),
                    f"duplicate: multiplier[{p}] = multiplier[{q}] = {w[p]}"))
    for p in range(n):
        for q in range(n):
            if p != q and 2 * w[p] == w[q]:
                violations.append(FrequencyViolation(
                    "double", (p, q),
                    f"double: 2*multiplier[{p}] = 2*{w[p]} = multiplier[{q}]"))
    for p in range(n):
        for q in range(n):
            for r in range(q + 1, n):
                if q == p or r == p:
                    continue
                if w[q] + w[r] == w[p]:
                    violations.append(FrequencyViolation(
                        "sum", (p, q, r),
                        f"sum: multiplier[{q}] + multiplier[{r}] = "
                        f"{w[q]}+{w[r]} = multiplier[{p}]"))
    return FrequencyReport(ok=not violations, violations=tuple(violations))


def generate_frequencies(count: int) -> list[int]:
    """Deterministic greedy scan over 1, 2, 3, ... keeping the constraints satisfied."""
    if count < 1:
        raise ValueError("count must be >= 1")
    chosen: list[int] = []
    candidate = 1
    while len(chosen) < count:
        if validate_frequencies(chosen + [candidate]).ok:
            chosen.append(candidate)
        candidate += 1
    return chosen


@dataclass(frozen=True)
class DitherSchedule:
    """Per-agent, per-direction amplitudes and integer frequency multipliers.

    amplitudes and multipliers are (m, n) arrays; the excitation of direction i
    of agent j is amplitudes[j, i] * sin(base_omega * multipliers[j, i] * t).
    Each agent's amplitude row must have 2-norm at most amplitude_cap, keeping
    the dither excursion inside a ball where the exponential map is injective.
    """

    amplitudes: np.ndarray
    base_omega: float
    multipliers: np.ndarray
    amplitude_cap: float = DEFAULT_AMPLITUDE_CAP

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=float)
        mult = np.array(self.multipliers, dtype=np.int64)
        if amp.ndim != 2 or mult.shape != amp.shape:
            raise ValueError("amplitudes and multipliers must be (m, n) arrays of equal shape")
        if not np.all(amp > 0.0):
            raise ValueError("amplitudes must be positive")
        if not self.base_omega > 0.0:
            raise ValueError("base_omega must be positive")
        if not self.amplitude_cap > 0.0:
            raise ValueError("amplitude_cap must be positive")
        report = validate_frequencies(mult)
        if not report.ok:
            raise ValueError("invalid frequency multipliers:\n" + report.describe())
        row_norms = np.linalg.norm(amp, axis=1)
        if np.any(row_norms > self.amplitude_cap):
            j = int(np.argmax(row_norms))
            raise ValueError(
                f"agent {j} amplitude row has norm {row_norms[j]:.6g} "
                f"> amplitude_cap {self.amplitude_cap:.6g}")
        amp.setflags(write=False)
        mult.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)
        object.__setattr__(self, "multipliers", mult)

    @classmethod
    def uniform(cls, m: int, n: int, amplitude: float, base_omega: float,
                multipliers=None, amplitude_cap: float = DEFAULT_AMPLITUDE_CAP) -> DitherSchedule:
        """Equal amplitudes everywhere; multipliers default to the greedy assignment."""
        if multipliers is None:
            multipliers = generate_frequencies(m * n)
        mult = np.asarray(multipliers, dtype=np.int64).reshape(m, n)
        return cls(np.full((m, n), float(amplitude)), base_omega, mult, amplitude_cap)

    @property
    def m(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def n(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def omegas(self) -> np.ndarray:
        """Angular frequencies base_omega * multipliers, shape (m, n)."""
        return self.base_omega * self.multipliers.astype(float)

    @property
    def max_omega(self) -> float:
        return float(self.base_omega * self.multipliers.max())


def dither_matrix(schedule: DitherSchedule, t: float) -> np.ndarray:
    """All agents' dither coordinates at time t, shape (m, n)."""
    return schedule.amplitudes * np.sin(schedule.omegas * t)


def dither_vector(schedule: DitherSchedule, agent: int, t: float) -> AlgebraVector:
    """Agent ``agent``'s dither coordinates at time t."""
    if not 0 <= agent < schedule.m:
        raise ValueError(f"agent index {agent} out of range for m={schedule.m}")
    coords = schedule.amplitudes[agent] * np.sin(schedule.omegas[agent] * t)
    return AlgebraVector(tag_for_algebra_dim(schedule.n), coords)


def common_period(schedule: DitherSchedule) -> float:
    """Smallest T > 0 with sin(omega*k*(t+T)) = sin(omega*k*t) for every multiplier.

    With integer multipliers this is 2*pi / (base_omega * gcd of multipliers).
    """
    g = math.gcd(*(int(x) for x in schedule.multipliers.reshape(-1)))
    return 2.0 * math.pi / (schedule.base_omega * g)
