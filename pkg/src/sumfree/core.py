"""Entropy, exact multinomial counting, and the one-dimensional growth-rate problem.

The growth-rate base `theta` for modulus q is the minimum over sigma > 0 of
(1 + sigma + ... + sigma^(q-1)) * sigma^(-(q-1)/3), attained at a unique
sigma = rho.  The geometric-weight distribution psi_k proportional to rho^k is
the maximum-entropy distribution on {0..q-1} with mean (q-1)/3, and its
entropy equals log(theta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

PROB_SUM_TOL = 1e-12
IDENTITY_TOL = 1e-9
BISECTION_TOL = 1e-13


@dataclass(frozen=True)
class Distribution:
    """Dense probability vector over the ground set {0, ..., ground_size - 1}."""

    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) == 0:
            raise ValueError("distribution needs a nonempty ground set")
        if any(p < 0.0 for p in self.probs):
            raise ValueError("negative probability entry")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {total!r}, not 1")

    @property
    def ground_size(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class CountVector:
    """Nonnegative integer histogram; n is the exact integer sum of the counts."""

    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) == 0:
            raise ValueError("empty count vector")
        if any((not isinstance(c, int)) or c < 0 for c in self.counts):
            raise ValueError("counts must be nonnegative integers")
        if sum(self.counts) < 1:
            raise ValueError("count vector must have positive total")

    @property
    def n(self) -> int:
        return sum(self.counts)

    def frequencies(self) -> Distribution:
        n = self.n
        return Distribution(tuple(c / n for c in self.counts))


def entropy(d: Distribution) -> float:
    """Natural-log entropy; zero entries contribute zero."""
    acc = 0.0
    for p in d.probs:
        if p > 0.0:
            acc -= p * math.log(p)
    return acc


def pushforward(d: Distribution, f: Callable[[int], int] | Sequence[int],
                image_size: int | None = None) -> Distribution:
    """Distribution induced on the image of f; mass of b is the mass of f^-1(b)."""
    size = d.ground_size
    images = [f(a) for a in range(size)] if callable(f) else list(f)
    if len(images) != size:
        raise ValueError("map must be total on the ground set")
    if image_size is None:
        image_size = max(images) + 1
    out = [0.0] * image_size
    for a, b in enumerate(images):
        if not 0 <= b < image_size:
            raise ValueError(f"image {b} outside range(0, {image_size})")
        out[b] += d.probs[a]
    return Distribution(tuple(out))


def multinomial(c: CountVector) -> int:
    """Exact n! / prod(counts!) by an iterative product of binomials."""
    result = 1
    placed = 0
    for count in c.counts:
        for i in range(1, count + 1):
            placed += 1
            result = result * placed // i
    return result


def log_multinomial_bounds(c: CountVector) -> tuple[float, float]:
    """Two-sided entropy bracket for log(multinomial(c)).

    upper = n * entropy(counts / n); lower subtracts the explicit Stirling
    slack |A| * (log n + log 2*pi + 1/6).  Always lower <= log multinomial <= upper.
    """
    n = c.n
    upper = n * entropy(c.frequencies())
    slack = len(c.counts) * (math.log(n) + math.log(2.0 * math.pi) + 1.0 / 6.0)
    return upper - slack, upper


@dataclass(frozen=True)
class ThetaSolution:
    """Growth-rate base theta, its minimizer rho, and the geometric weights psi."""

    q: int
    rho: float
    theta: float
    psi: Distribution

    def __post_init__(self):
        probs = self.psi.probs
        for k in range(self.q - 1):
            if abs(probs[k + 1] / probs[k] - self.rho) > IDENTITY_TOL:
                raise ValueError("psi is not geometric with ratio rho")
        if abs(entropy(self.psi) - math.log(self.theta)) > IDENTITY_TOL:
            raise ValueError("entropy(psi) != log(theta)")
        mean = sum(k * p for k, p in enumerate(probs))
        if abs(mean - (self.q - 1) / 3.0) > IDENTITY_TOL:
            raise ValueError("psi mean is not (q-1)/3")


def _psi_mean(sigma: float, q: int) -> float:
    """Mean of k under weights sigma^k, k = 0..q-1; strictly increasing in sigma."""
    wsum = 0.0
    ksum = 0.0
    w = 1.0
    for k in range(q):
        wsum += w
        ksum += k * w
        w *= sigma
    return ksum / wsum


def solve_theta(q: int) -> ThetaSolution:
    """Bisect the stationarity condition mean(psi(sigma)) = (q-1)/3 to find rho.

    The mean is strictly increasing in sigma, so the bracket found by doubling
    outward from sigma = 1 pins the unique minimizer of the objective.
    """
    if q < 2:
        raise ValueError("q must be at least 2")
    target = (q - 1) / 3.0
    lo = hi = 1.0
    while _psi_mean(lo, q) > target:
        lo *= 0.5
    while _psi_mean(hi, q) < target:
        hi *= 2.0
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if _psi_mean(mid, q) < target:
            lo = mid
        else:
            hi = mid
    rho = 0.5 * (lo + hi)
    gsum = 0.0
    w = 1.0
    for _ in range(q):
        gsum += w
        w *= rho
    theta = gsum * rho ** (-(q - 1) / 3.0)
    psi = Distribution(tuple(rho ** k / gsum for k in range(q)))
    return ThetaSolution(q=q, rho=rho, theta=theta, psi=psi)


def size_bounds(q: int, n: int) -> tuple[float, float]:
    """Log-scale reference bounds for the largest sum-free set in C_q^n.

    log_upper = log 3 + n log theta.  log_lower = n log theta minus the
    explicit subexponential term 2 * sqrt(2 log 2 * log theta * n); the
    additional O(log n) correction has no specified constant and is omitted.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    log_theta = math.log(solve_theta(q).theta)
    log_upper = math.log(3.0) + n * log_theta
    log_lower = n * log_theta - 2.0 * math.sqrt(2.0 * math.log(2.0) * log_theta * n)
    return log_lower, log_upper
