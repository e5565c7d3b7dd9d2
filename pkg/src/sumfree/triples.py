"""The triple space T(q) and symmetric distributions on it.

T(q) is the set of lattice triples (i, j, k) with entries in {0..q-1} summing
to q-1.  The three-fold coordinate-permutation action splits T into orbits of
size 1, 3 or 6; a permutation-invariant distribution is stored as one weight
per orbit.  `solve_pi` fits such a distribution so that its coordinate
marginal matches the geometric weights psi(q), and `round_to_lattice` snaps it
to per-element counts that are integer multiples of 1/n with the exact-sum
identity preserved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import CountVector, Distribution, solve_theta

MASS_TOL = 1e-12
DEFAULT_PI_TOL = 1e-10
DEFAULT_MAX_SWEEPS = 10 ** 6


class IterationLimitExceeded(RuntimeError):
    """Marginal fitting failed to reach the requested residual within the sweep cap."""


class InfeasibleRounding(ValueError):
    """No nonnegative integer orbit counts satisfy the weighted sum; increase n."""


@dataclass(frozen=True)
class Orbit:
    """One coordinate-permutation orbit: canonical sorted representative and members."""

    rep: tuple[int, int, int]
    members: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class TripleSpace:
    q: int
    elements: tuple[tuple[int, int, int], ...]
    orbits: tuple[Orbit, ...]

    def __post_init__(self):
        q = self.q
        if len(self.elements) != q * (q + 1) // 2:
            raise ValueError("wrong number of triple-space elements")
        if sum(o.size for o in self.orbits) != len(self.elements):
            raise ValueError("orbits do not partition the elements")
        for o in self.orbits:
            i, j, k = o.rep
            distinct = len({i, j, k})
            expected = {1: 1, 2: 3, 3: 6}[distinct]
            if o.size != expected:
                raise ValueError(f"orbit {o.rep} has size {o.size}, expected {expected}")

    def orbit_index(self) -> list[int]:
        """Orbit number of each element."""
        out = [0] * len(self.elements)
        for oi, orbit in enumerate(self.orbits):
            for e in orbit.members:
                out[e] = oi
        return out


def build_triple_space(q: int) -> TripleSpace:
    """Enumerate T(q) in lexicographic order and group elements into orbits."""
    if q < 2:
        raise ValueError("q must be at least 2")
    elements = [(i, j, q - 1 - i - j) for i in range(q) for j in range(q - i)]
    groups: dict[tuple[int, int, int], list[int]] = {}
    for idx, e in enumerate(elements):
        groups.setdefault(tuple(sorted(e)), []).append(idx)
    orbits = tuple(Orbit(rep, tuple(members)) for rep, members in sorted(groups.items()))
    return TripleSpace(q=q, elements=tuple(elements), orbits=orbits)


@dataclass(frozen=True)
class SymmetricDistribution:
    """Permutation-invariant distribution on a triple space, one weight per orbit."""

    space: TripleSpace
    orbit_weights: tuple[float, ...]

    def __post_init__(self):
        if len(self.orbit_weights) != len(self.space.orbits):
            raise ValueError("one weight required per orbit")
        if any(w < 0.0 for w in self.orbit_weights):
            raise ValueError("negative orbit weight")
        mass = math.fsum(o.size * w for o, w in zip(self.space.orbits, self.orbit_weights))
        if abs(mass - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {mass!r}, not 1")

    def element_weights(self) -> list[float]:
        weights = [0.0] * len(self.space.elements)
        for orbit, w in zip(self.space.orbits, self.orbit_weights):
            for e in orbit.members:
                weights[e] = w
        return weights

    def as_distribution(self) -> Distribution:
        """The same distribution viewed as a dense vector over the elements."""
        return Distribution(tuple(self.element_weights()))

    def marginal(self, axis: int = 2) -> Distribution:
        """Distribution of the chosen coordinate.  fsum keeps this order-independent,
        so the three axes agree exactly, not just within rounding."""
        weights = self.element_weights()
        buckets: list[list[float]] = [[] for _ in range(self.space.q)]
        for e, w in zip(self.space.elements, weights):
            buckets[e[axis]].append(w)
        return Distribution(tuple(math.fsum(b) for b in buckets))


def solve_pi(q: int, tol: float = DEFAULT_PI_TOL,
             max_sweeps: int = DEFAULT_MAX_SWEEPS) -> SymmetricDistribution:
    """Fit the symmetric distribution on T(q) whose coordinate marginal is psi(q).

    Iterative proportional fitting: start uniform, then alternately rescale each
    third-coordinate fiber to match psi and restore symmetry by averaging every
    orbit, until the marginal residual drops below tol.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    space = build_triple_space(q)
    psi = solve_theta(q).psi.probs
    elements = space.elements
    m = len(elements)
    third = [e[2] for e in elements]
    orbit_of = space.orbit_index()
    orbit_members = [o.members for o in space.orbits]
    weights = [1.0 / m] * m
    for _ in range(max_sweeps):
        marg = [0.0] * q
        for e in range(m):
            marg[third[e]] += weights[e]
        weights = [weights[e] * psi[third[e]] / marg[third[e]] for e in range(m)]
        orbit_weights = [sum(weights[e] for e in members) / len(members)
                         for members in orbit_members]
        weights = [orbit_weights[orbit_of[e]] for e in range(m)]
        marg = [0.0] * q
        for e in range(m):
            marg[third[e]] += weights[e]
        residual = max(abs(marg[k] - psi[k]) for k in range(q))
        if residual <= tol:
            return SymmetricDistribution(space=space, orbit_weights=tuple(orbit_weights))
    raise IterationLimitExceeded(
        f"marginal residual above {tol} after {max_sweeps} sweeps (q={q})")


def _marginal_from_counts(space: TripleSpace, orbit_counts: tuple[int, ...]) -> list[int]:
    orbit_of = space.orbit_index()
    marg = [0] * space.q
    for e, element in enumerate(space.elements):
        marg[element[2]] += orbit_counts[orbit_of[e]]
    return marg


@dataclass(frozen=True)
class LatticeSymmetricDistribution:
    """Integer-count version of a symmetric distribution: per-element counts that
    are constant on orbits and sum (weighted by orbit size) exactly to n."""

    space: TripleSpace
    n: int
    orbit_counts: tuple[int, ...]

    def __post_init__(self):
        if self.n <= 0 or self.n % 3 != 0:
            raise ValueError("n must be a positive multiple of 3")
        if len(self.orbit_counts) != len(self.space.orbits):
            raise ValueError("one count required per orbit")
        if any((not isinstance(c, int)) or c < 0 for c in self.orbit_counts):
            raise ValueError("orbit counts must be nonnegative integers")
        total = sum(o.size * c for o, c in zip(self.space.orbits, self.orbit_counts))
        if total != self.n:
            raise ValueError(f"weighted counts sum to {total}, not n={self.n}")
        marg = _marginal_from_counts(self.space, self.orbit_counts)
        # symmetry forces the exact rational mean (q-1)/3
        if 3 * sum(k * c for k, c in enumerate(marg)) != self.n * (self.space.q - 1):
            raise ValueError("marginal mean is not exactly (q-1)/3")


def round_to_lattice(pi: SymmetricDistribution, n: int) -> LatticeSymmetricDistribution:
    """Largest-remainder rounding of per-element orbit weights to counts out of n.

    Counts start at floor(n * weight).  The remaining deficit is repaid by
    repeatedly bumping one orbit count, choosing the orbit whose bump induces
    the smallest per-element error (ties by lexicographic representative),
    restricted to bumps that keep the residual deficit repayable by the
    available orbit sizes.  The result satisfies sum(size * count) = n exactly
    and stays within (R + 1)/n of the weights in sup norm, R = orbit count.
    """
    if n <= 0 or n % 3 != 0:
        raise ValueError("n must be a positive multiple of 3")
    space = pi.space
    orbits = space.orbits
    sizes = [o.size for o in orbits]
    weights = pi.orbit_weights
    counts = [math.floor(n * w) for w in weights]
    deficit = n - sum(s * c for s, c in zip(sizes, counts))
    has_singleton = 1 in sizes

    def repayable(d: int) -> bool:
        return d == 0 or (d > 0 and (has_singleton or d % 3 == 0))

    while deficit > 0:
        best = None
        for o, (size, orbit) in enumerate(zip(sizes, orbits)):
            if size <= deficit and repayable(deficit - size):
                induced = (counts[o] + 1) - n * weights[o]
                key = (induced, orbit.rep)
                if best is None or key < best[0]:
                    best = (key, o, size)
        if best is None:
            raise InfeasibleRounding(f"cannot settle deficit {deficit} at n={n}")
        counts[best[1]] += 1
        deficit -= best[2]

    sup_error = max(abs(c / n - w) for c, w in zip(counts, weights))
    assert sup_error <= (len(orbits) + 1) / n + 1e-9
    return LatticeSymmetricDistribution(space=space, n=n, orbit_counts=tuple(counts))


def marginal_counts(ld: LatticeSymmetricDistribution) -> CountVector:
    """Third-coordinate marginal of the lattice distribution, as integer counts."""
    return CountVector(tuple(_marginal_from_counts(ld.space, ld.orbit_counts)))
