"""Progression-free subsets of F_p.

Two generators over the integer window [0, N): a digit-sphere construction
(carry-free radix, largest shell of constant squared norm) and a randomized
greedy scan.  The winner is shifted into the middle third of [0, p), where
any mod-p progression among three window elements is already a progression
over the integers, so integer progression-freeness transfers to F_p.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .primes import is_prime
from .rng import SplitMix64, permutation


class WindowOverflow(ValueError):
    """Integer set does not fit inside the embedding window [0, ceil(p/3))."""


@dataclass(frozen=True)
class APFreeSet:
    """Sorted distinct residues mod an odd prime p.

    The generators in this module only ever produce sets with no three distinct
    members x, y, z satisfying x + z = 2y (mod p); `verify_apfree` checks that
    property exhaustively for any instance.
    """

    p: int
    members: tuple[int, ...]

    def __post_init__(self):
        if self.p < 3 or self.p % 2 == 0 or not is_prime(self.p):
            raise ValueError("p must be an odd prime")
        if len(self.members) == 0:
            raise ValueError("members must be nonempty")
        if list(self.members) != sorted(set(self.members)):
            raise ValueError("members must be sorted and distinct")
        if self.members[0] < 0 or self.members[-1] >= self.p:
            raise ValueError("members must lie in [0, p)")


def behrend_integers(N: int) -> set[int]:
    """Progression-free subset of [0, N) from spheres in a carry-free digit cube.

    Dimension d = round(sqrt(2 log2 N)), radix D = floor(N^(1/d)), digits
    capped below ceil(D/2) so that adding two members never carries; the
    largest shell of constant squared norm is returned (ties to the smallest
    norm).  Degenerately small parameters fall back to {0, 1}.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    d = max(1, round(math.sqrt(2.0 * math.log2(N))))
    root = max(1, int(N ** (1.0 / d)))
    while (root + 1) ** d <= N:
        root += 1
    while root > 1 and root ** d > N:
        root -= 1
    radix = max(2, root)
    cap = (radix + 1) // 2
    place = [radix ** i for i in range(d)]
    shells: dict[int, set[int]] = {}
    for digits in itertools.product(range(cap), repeat=d):
        value = sum(x * place[i] for i, x in enumerate(digits))
        norm = sum(x * x for x in digits)
        shells.setdefault(norm, set()).add(value)
    best = max(shells.items(), key=lambda item: (len(item[1]), -item[0]))[1]
    if len(best) < 2:
        return {0, 1}
    return best


def _greedy_pass(N: int, order) -> set[int]:
    """One greedy scan: take each value unless it completes a progression with
    two values already taken.  `forbidden` is kept incrementally: accepting x
    bans 2x - a, 2a - x and (a + x)/2 for every prior member a."""
    forbidden = np.zeros(N, dtype=bool)
    chosen = np.empty(N, dtype=np.int64)
    count = 0
    for e in order:
        e = int(e)
        if forbidden[e]:
            continue
        prior = chosen[:count]
        for bad in (2 * e - prior, 2 * prior - e):
            bad = bad[(bad >= 0) & (bad < N)]
            forbidden[bad] = True
        mids = e + prior
        forbidden[mids[mids % 2 == 0] // 2] = True
        forbidden[e] = True
        chosen[count] = e
        count += 1
    return {int(x) for x in chosen[:count]}


def greedy_apfree_integers(N: int, trials: int = 20, seed: int = 0) -> set[int]:
    """Best progression-free subset of [0, N) over greedy scans.

    The first trial scans 0, 1, ..., N-1 in order (reproducing the classic
    base-3 digit sequence prefix); the rest scan seeded random permutations.
    Ties keep the earliest trial.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    root = SplitMix64(seed)
    best: set[int] | None = None
    for trial in range(trials):
        order = range(N) if trial == 0 else permutation(N, root.next_u64())
        members = _greedy_pass(N, order)
        if best is None or len(members) > len(best):
            best = members
    return best


def embed_mod_p(s_int: set[int], p: int) -> APFreeSet:
    """Shift an integer progression-free set into the middle third of [0, p).

    All members land in [w, 2w) with w = ceil(p/3), so for any x, y, z in the
    image, x + z - 2y lies strictly inside (-p, p); a congruence mod p is then
    an equality over the integers and progression-freeness transfers.
    """
    window = (p + 2) // 3
    if any(s < 0 or s >= window for s in s_int):
        raise WindowOverflow(f"set must lie in [0, {window}) for p={p}")
    return APFreeSet(p=p, members=tuple(sorted(s + window for s in s_int)))


def build_apfree(p: int, seed: int = 0) -> APFreeSet:
    """Progression-free subset of F_p: the larger of the two integer generators
    on the window [0, ceil(p/3)), embedded into the middle third."""
    if p < 3 or not is_prime(p):
        raise ValueError("p must be an odd prime")
    window = (p + 2) // 3
    digit_set = behrend_integers(window) if window >= 2 else {0}
    greedy_set = greedy_apfree_integers(window, 20, seed)
    chosen = digit_set if len(digit_set) >= len(greedy_set) else greedy_set
    return embed_mod_p(chosen, p)


def verify_apfree(s: APFreeSet) -> tuple[int, int, int] | None:
    """Exhaustive progression check over F_p, wraparound included.

    For every ordered pair x != z the midpoint y = (x + z) / 2 mod p is looked
    up; the first triple found is returned as a witness, None means the set is
    progression-free.
    """
    inv2 = pow(2, -1, s.p)
    members = set(s.members)
    for x in s.members:
        for z in s.members:
            if x == z:
                continue
            y = (x + z) * inv2 % s.p
            if y in members and y != x and y != z:
                return (x, y, z)
    return None
