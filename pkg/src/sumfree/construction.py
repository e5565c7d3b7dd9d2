"""Assembly of the randomized sum-free construction, with exhaustive verifiers.

Fix q and n (a multiple of 3).  W is the pool of vectors in {0..q-1}^n whose
letter histogram equals the rounded marginal counts; V is the family of
triples (a, b, c) in W^3 summing coordinatewise to the all-(q-1) target over
the integers.  A random linear functional h mod p and a progression-free set
S cut V down to V': triples whose three evaluation values coincide and land
in S.  Dropping every triple that shares an a-, b- or c-vector with another
yields V'', which is sum-free mod q by construction and is re-checked here
exhaustively.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

from .apfree import APFreeSet, build_apfree
from .core import CountVector, multinomial, size_bounds
from .primes import is_prime
from .rng import SplitMix64
from .triples import (LatticeSymmetricDistribution, build_triple_space,
                      marginal_counts, round_to_lattice, solve_pi)

DEFAULT_MAX_POOL = 10 ** 7
MAX_POOL_ENV = "SUMFREE_MAX_W"
MAX_EXACT_TRIPLE_SPACE = 10
MAX_EXACT_N = 60
PRIME_LIMIT = 2 ** 63


class InstanceTooLarge(RuntimeError):
    """Instance exceeds an enumeration cap; see the message for the remedy."""


class EvenModulus(ValueError):
    """2 is not invertible mod an even q."""


class AuditFailed(RuntimeError):
    """A statistical audit assertion failed; carries the report."""

    def __init__(self, message: str, report: "AuditReport"):
        super().__init__(message)
        self.report = report


def _max_pool() -> int:
    value = os.environ.get(MAX_POOL_ENV)
    return int(value) if value else DEFAULT_MAX_POOL


@dataclass(frozen=True)
class InstanceParams:
    """Frozen inputs of one construction instance."""

    q: int
    n: int
    lattice: LatticeSymmetricDistribution
    marginal: CountVector
    target: tuple[int, ...]

    def __post_init__(self):
        if self.n != self.lattice.n:
            raise ValueError("n disagrees with the lattice distribution")
        if self.marginal != marginal_counts(self.lattice):
            raise ValueError("marginal does not match the lattice distribution")
        if self.target != (self.q - 1,) * self.n:
            raise ValueError("target must be the all-(q-1) vector")
        weighted = sum(k * c for k, c in enumerate(self.marginal.counts))
        if 3 * weighted != self.n * (self.q - 1):
            raise ValueError("marginal mean is not exactly (q-1)/3")

    @classmethod
    def build(cls, q: int, n: int, tol: float = 1e-10) -> "InstanceParams":
        pi = solve_pi(q, tol)
        lattice = round_to_lattice(pi, n)
        return cls(q=q, n=n, lattice=lattice,
                   marginal=marginal_counts(lattice), target=(q - 1,) * n)


@dataclass(frozen=True)
class LinearFunctional:
    """n+2 coefficients mod p; evaluates (x, y, v) -> c0*x + c1*y + <c[2:], v>."""

    p: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if self.p < 3 or not is_prime(self.p):
            raise ValueError("p must be an odd prime")
        if any(c < 0 or c >= self.p for c in self.coeffs):
            raise ValueError("coefficients must lie in [0, p)")

    def evaluate(self, x: int, y: int, vec) -> int:
        acc = self.coeffs[0] * x + self.coeffs[1] * y
        for coef, v in zip(self.coeffs[2:], vec):
            acc += coef * v
        return acc % self.p


@dataclass(frozen=True)
class TripleSet:
    """A list of vector triples (a, b, c) with a + b + c = target over Z."""

    q: int
    n: int
    target: tuple[int, ...]
    triples: tuple[tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]], ...]

    def __len__(self) -> int:
        return len(self.triples)


def validate_triples(ts: TripleSet, marginal: CountVector) -> None:
    """Check the pool-membership invariants: exact integer sums to the target
    and every component vector carrying the prescribed histogram."""
    for a, b, c in ts.triples:
        for i in range(ts.n):
            if a[i] + b[i] + c[i] != ts.target[i]:
                raise ValueError("triple does not sum to the target over Z")
        for vec in (a, b, c):
            hist = [0] * ts.q
            for v in vec:
                hist[v] += 1
            if tuple(hist) != marginal.counts:
                raise ValueError("component vector histogram mismatch")


def count_w(params: InstanceParams) -> int:
    """Exact size of the pool W: the multinomial of the marginal counts."""
    return multinomial(params.marginal)


def count_triples_with_marginal(q: int, n: int, counts: tuple[int, ...]) -> int:
    """Exact |V| by summing multinomials over triple-space histograms.

    Enumerates functions m from T(q) to nonnegative integers with total n whose
    three coordinate projections each equal `counts`, pruning on exhausted
    values and forcing the count when an element is the last supplier of some
    coordinate value.  Returns 0 when no histogram fits (e.g. wrong mean).
    """
    space = build_triple_space(q)
    elements = space.elements
    if len(elements) > MAX_EXACT_TRIPLE_SPACE or n > MAX_EXACT_N:
        raise InstanceTooLarge(
            "exact triple counting is capped at |T| <= "
            f"{MAX_EXACT_TRIPLE_SPACE} and n <= {MAX_EXACT_N}; "
            "use count_v_lower_bound instead")
    if len(counts) != q or sum(counts) != n:
        raise ValueError("counts must be a length-q histogram summing to n")
    m = len(elements)
    # supply[axis][value][pos]: how many elements at index >= pos carry value on axis
    supply = [[[0] * (m + 1) for _ in range(q)] for _ in range(3)]
    for pos in range(m - 1, -1, -1):
        for axis in range(3):
            for v in range(q):
                supply[axis][v][pos] = supply[axis][v][pos + 1]
            supply[axis][elements[pos][axis]][pos] += 1
    rem = [list(counts), list(counts), list(counts)]
    total = 0

    def descend(pos: int, remaining: int, coeff: int) -> None:
        nonlocal total
        if pos == m:
            if remaining == 0:
                total += coeff
            return
        for axis in range(3):
            for v in range(q):
                if rem[axis][v] > 0 and supply[axis][v][pos] == 0:
                    return
        e = elements[pos]
        hi = min(remaining, rem[0][e[0]], rem[1][e[1]], rem[2][e[2]])
        lo = 0
        for axis in range(3):
            if supply[axis][e[axis]][pos + 1] == 0:
                lo = max(lo, rem[axis][e[axis]])
        if lo > hi:
            return
        for take in range(lo, hi + 1):
            for axis in range(3):
                rem[axis][e[axis]] -= take
            descend(pos + 1, remaining - take, coeff * math.comb(remaining, take))
            for axis in range(3):
                rem[axis][e[axis]] += take

    descend(0, n, 1)
    return total


def count_v(params: InstanceParams) -> int:
    """Exact |V| for the instance; raises InstanceTooLarge beyond the caps."""
    return count_triples_with_marginal(params.q, params.n, params.marginal.counts)


def count_v_lower_bound(params: InstanceParams) -> int:
    """|V| restricted to the single histogram given by the lattice counts:
    the multinomial of the per-element counts.  Always a valid lower bound."""
    orbit_of = params.lattice.space.orbit_index()
    per_element = tuple(params.lattice.orbit_counts[orbit_of[e]]
                        for e in range(len(params.lattice.space.elements)))
    return multinomial(CountVector(per_element))


def choose_prime(v_count: int, w_count: int) -> int:
    """Smallest prime strictly above max(4 |V| / |W|, 4).

    Integer arithmetic throughout: the first candidate is floor(4V/W) + 1.
    Whenever the ratio |V|/|W| exceeds 5/4 the result is checked against the
    doubling window p < 8 |V| / |W|, which Bertrand's postulate guarantees.
    """
    if w_count < 1 or v_count < w_count:
        raise ValueError("need v_count >= w_count >= 1")
    candidate = max(4 * v_count // w_count + 1, 5)
    if candidate >= PRIME_LIMIT:
        raise InstanceTooLarge("prime window exceeds the 64-bit testing range")
    p = candidate
    while not is_prime(p):
        p += 1
    if 4 * v_count > 5 * w_count:
        assert p * w_count < 8 * v_count, "prime fell outside the doubling window"
    return p


def sample_functional(n: int, p: int, seed: int) -> LinearFunctional:
    """n+2 coefficients drawn independently and uniformly from [0, p)."""
    if p < 3:
        raise ValueError("p must be at least 3")
    gen = SplitMix64(seed)
    return LinearFunctional(p=p, coeffs=tuple(gen.next_below(p) for _ in range(n + 2)))


def iter_pool(counts: tuple[int, ...]) -> Iterator[tuple[int, ...]]:
    """All vectors with the given letter histogram, in lexicographic order."""
    n = sum(counts)
    state = list(counts)
    buf = [0] * n

    def rec(pos: int) -> Iterator[tuple[int, ...]]:
        if pos == n:
            yield tuple(buf)
            return
        for symbol in range(len(state)):
            if state[symbol] > 0:
                state[symbol] -= 1
                buf[pos] = symbol
                yield from rec(pos + 1)
                state[symbol] += 1

    yield from rec(0)


@lru_cache(maxsize=8)
def pool_array(counts: tuple[int, ...]) -> np.ndarray:
    """The pool as a read-only int8 matrix, rows in lexicographic order.

    Built by memoizing completion blocks per remaining histogram, so the cost
    is linear in the output cells rather than in recursion nodes.
    """
    memo: dict[tuple[int, ...], np.ndarray] = {}

    def block(state: tuple[int, ...]) -> np.ndarray:
        cached = memo.get(state)
        if cached is not None:
            return cached
        length = sum(state)
        if length == 0:
            out = np.zeros((1, 0), dtype=np.int8)
        else:
            parts = []
            for symbol, left in enumerate(state):
                if left > 0:
                    sub = block(state[:symbol] + (left - 1,) + state[symbol + 1:])
                    lead = np.full((sub.shape[0], 1), symbol, dtype=np.int8)
                    parts.append(np.hstack([lead, sub]))
            out = np.vstack(parts)
        memo[state] = out
        return out

    arr = block(tuple(counts)).copy()
    arr.setflags(write=False)
    return arr


def _pool_values(pool: np.ndarray, coeffs: np.ndarray, p: int,
                 chunk: int = 1 << 18) -> np.ndarray:
    """<row, coeffs> mod p for every pool row, chunked to bound memory."""
    out = np.empty(pool.shape[0], dtype=np.int64)
    for start in range(0, pool.shape[0], chunk):
        stop = min(start + chunk, pool.shape[0])
        out[start:stop] = pool[start:stop].astype(np.int64) @ coeffs % p
    return out


def build_v_prime(params: InstanceParams, h: LinearFunctional,
                  s: APFreeSet) -> TripleSet:
    """All triples of V whose three evaluation values coincide inside S.

    One pass over the pool computes, per vector w, the values h(0,1,w),
    h(1,0,w) and (1/2) h(1,1,target-w).  For each s the a- and c-buckets are
    paired; b = target - a - c is accepted when its entries stay in range and
    it appears in the b-index (vector-content key) with value s.
    """
    w_total = count_w(params)
    cap = _max_pool()
    if w_total > cap:
        raise InstanceTooLarge(
            f"|W| = {w_total} exceeds the enumeration cap {cap} "
            f"(override with {MAX_POOL_ENV})")
    q, n, p = params.q, params.n, h.p
    assert p < 3_000_000_000, "p too large for int64 bucket arithmetic"
    pool = pool_array(params.marginal.counts)
    inv2 = pow(2, -1, p)
    c0, c1 = h.coeffs[0], h.coeffs[1]
    coeffs = np.array(h.coeffs[2:], dtype=np.int64)
    dots = _pool_values(pool, coeffs, p)
    target_dot = (q - 1) * int(coeffs.sum()) % p
    value_a = (dots + c1) % p
    value_c = (dots + c0) % p
    value_b = (c0 + c1 + target_dot - dots) % p * inv2 % p

    members = sorted(s.members)
    b_index = {pool[r].tobytes(): int(value_b[r])
               for r in np.flatnonzero(np.isin(value_b, np.array(members)))}
    order_a = np.argsort(value_a, kind="stable")
    sorted_a = value_a[order_a]
    order_c = np.argsort(value_c, kind="stable")
    sorted_c = value_c[order_c]

    target_row = np.full(n, q - 1, dtype=np.int8)
    triples = []
    for val in members:
        a_rows = order_a[np.searchsorted(sorted_a, val):
                         np.searchsorted(sorted_a, val, side="right")]
        if a_rows.size == 0:
            continue
        c_rows = order_c[np.searchsorted(sorted_c, val):
                         np.searchsorted(sorted_c, val, side="right")]
        if c_rows.size == 0:
            continue
        for ia in a_rows:
            base = target_row - pool[ia]
            for ic in c_rows:
                b = base - pool[ic]
                if b.min() < 0:
                    continue
                if b_index.get(b.tobytes()) == val:
                    triples.append((tuple(int(x) for x in pool[ia]),
                                    tuple(int(x) for x in b),
                                    tuple(int(x) for x in pool[ic])))
    return TripleSet(q=q, n=n, target=params.target, triples=tuple(triples))


def prune_to_v_double_prime(vp: TripleSet) -> TripleSet:
    """Keep exactly the triples whose a-, b- and c-vectors are each unique
    across the input; order is preserved."""
    from collections import Counter

    count_a = Counter(t[0] for t in vp.triples)
    count_b = Counter(t[1] for t in vp.triples)
    count_c = Counter(t[2] for t in vp.triples)
    kept = tuple(t for t in vp.triples
                 if count_a[t[0]] == 1 and count_b[t[1]] == 1 and count_c[t[2]] == 1)
    return TripleSet(q=vp.q, n=vp.n, target=vp.target, triples=kept)


def verify_sum_free(ts: TripleSet) -> tuple[int, int, int] | None:
    """Exhaustive check that a_i + b_j + c_k = target mod q exactly when i=j=k.

    c-vectors are indexed by value; every (i, j) pair resolves the required
    residual (target - a_i - b_j) mod q with a lookup.  Returns the first
    witness (i, j, k) of a failure, None if the family is sum-free.
    """
    m = len(ts.triples)
    if m == 0:
        return None
    q, n = ts.q, ts.n
    a_rows = np.array([t[0] for t in ts.triples], dtype=np.int16)
    b_rows = np.array([t[1] for t in ts.triples], dtype=np.int16)
    target = np.array(ts.target, dtype=np.int16)
    c_map: dict[bytes, list[int]] = {}
    for k, t in enumerate(ts.triples):
        c_map.setdefault(np.array(t[2], dtype=np.int8).tobytes(), []).append(k)
    for i in range(m):
        need = (target - a_rows[i] - b_rows) % q
        keys = need.astype(np.int8)
        for j in range(m):
            hits = c_map.get(keys[j].tobytes())
            if i == j:
                if hits is None or i not in hits:
                    return (i, i, i)
                for k in hits:
                    if k != i:
                        return (i, j, k)
            elif hits is not None:
                for k in hits:
                    return (i, j, k)
    return None


def to_ap_form(ts: TripleSet) -> list[tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]]:
    """Rewrite (a, b, c) as (a, b~, c) with b~ = (q-1-b)/2 mod q entrywise,
    turning the sum-free family into a progression-free one; q must be odd."""
    if ts.q % 2 == 0:
        raise EvenModulus("2 is not invertible for even q")
    inv2 = pow(2, -1, ts.q)
    out = []
    for a, b, c in ts.triples:
        middle = tuple((ts.q - 1 - v) * inv2 % ts.q for v in b)
        out.append((a, middle, c))
    return out


def verify_ap_form(triples, q: int) -> tuple[int, int, int] | None:
    """Check a_i + c_k = 2 b~_j mod q exactly when i=j=k (mirror of
    verify_sum_free for the progression form)."""
    m = len(triples)
    doubled: dict[tuple[int, ...], list[int]] = {}
    for j, (_, middle, _) in enumerate(triples):
        key = tuple(2 * v % q for v in middle)
        doubled.setdefault(key, []).append(j)
    for i in range(m):
        a = triples[i][0]
        for k in range(m):
            c = triples[k][2]
            hits = doubled.get(tuple((x + y) % q for x, y in zip(a, c)))
            if i == k:
                if hits is None or i not in hits:
                    return (i, i, i)
                for j in hits:
                    if j != i:
                        return (i, j, k)
            elif hits is not None:
                for j in hits:
                    return (i, j, k)
    return None


def _rank_mod_p(rows: list[list[int]], p: int) -> int:
    """Rank of a small matrix over F_p by Gaussian elimination."""
    rows = [[v % p for v in row] for row in rows]
    rank = 0
    cols = len(rows[0]) if rows else 0
    for col in range(cols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col] % p != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [v * inv % p for v in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col] % p != 0:
                factor = rows[r][col]
                rows[r] = [(v - factor * w) % p for v, w in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def pair_evaluation_rank(t1, t2, p: int, q: int) -> int:
    """Rank over F_p of the 6-column matrix of evaluation vectors for two triples.

    Columns are (0,1,a), (0,1,a'), (1,1,t-b)/2, (1,1,t-b')/2, (1,0,c), (1,0,c');
    distinct triples always give rank at least 3.
    """
    inv2 = pow(2, -1, p)
    n = len(t1[0])
    t = q - 1

    def col_a(a):
        return [0, 1] + list(a)

    def col_b(b):
        return [inv2, inv2] + [(t - v) * inv2 % p for v in b]

    def col_c(c):
        return [1, 0] + list(c)

    cols = [col_a(t1[0]), col_a(t2[0]), col_b(t1[1]), col_b(t2[1]),
            col_c(t1[2]), col_c(t2[2])]
    rows = [[cols[j][i] for j in range(6)] for i in range(n + 2)]
    return _rank_mod_p(rows, p)


@dataclass(frozen=True)
class RunReport:
    """Scalars describing one pipeline run; v_mode records whether v_count is
    the exact |V| or the single-histogram lower bound used above the caps."""

    q: int
    n: int
    seed: int
    p: int
    s_size: int
    w_count: int
    v_count: int
    v_mode: str
    v_prime_size: int
    v_double_prime_size: int
    log_lower: float
    log_upper: float


@dataclass(frozen=True)
class PipelineResult:
    triple_set: TripleSet
    report: RunReport


def run_pipeline(q: int, n: int, seed: int = 0, tol: float = 1e-10) -> PipelineResult:
    """Full chain: fit and round the symmetric distribution, count the pool and
    the triple family, pick the prime, build the progression-free set and the
    random functional, filter and prune, then re-verify sum-freeness."""
    if q < 2:
        raise ValueError("q must be at least 2")
    if n <= 0 or n % 3 != 0:
        raise ValueError("n must be a positive multiple of 3")
    params = InstanceParams.build(q, n, tol)
    w_total = count_w(params)
    try:
        v_total = count_v(params)
        v_mode = "exact"
        p = choose_prime(v_total, w_total)
    except InstanceTooLarge:
        v_total = count_v_lower_bound(params)
        v_mode = "lower_bound"
        # |V| <= |W|^2, so a prime above 4|W| keeps the window direction valid
        p = choose_prime(w_total * w_total, w_total)
    root = SplitMix64(seed)
    s = build_apfree(p, root.next_u64())
    h = sample_functional(n, p, root.next_u64())
    vp = build_v_prime(params, h, s)
    vpp = prune_to_v_double_prime(vp)
    witness = verify_sum_free(vpp)
    if witness is not None:
        raise RuntimeError(f"pruned family failed verification at {witness}")
    log_lower, log_upper = size_bounds(q, n)
    report = RunReport(q=q, n=n, seed=seed, p=p, s_size=len(s.members),
                       w_count=w_total, v_count=v_total, v_mode=v_mode,
                       v_prime_size=len(vp), v_double_prime_size=len(vpp),
                       log_lower=log_lower, log_upper=log_upper)
    if v_mode == "exact":
        assert len(vpp) <= len(vp) <= v_total
    assert len(vpp) <= w_total
    return PipelineResult(triple_set=vpp, report=report)


@dataclass(frozen=True)
class AuditReport:
    """Moment audit of the filter sizes over many functionals at fixed (p, S)."""

    q: int
    n: int
    seeds: int
    p: int
    s_size: int
    w_count: int
    v_count: int
    expected_v_prime: float
    v_prime_mean: float
    v_prime_se: float
    v_double_prime_mean: float
    v_double_prime_se: float
    v_prime_ok: bool
    v_double_prime_ok: bool


def expectation_audit(q: int, n: int, num_seeds: int, base_seed: int = 0,
                      tol: float = 1e-10) -> AuditReport:
    """Check the exact first-moment identity E|V'| = |V||S|/p^2 and the
    quarter lower bound on E|V''| by Monte Carlo over functionals.

    (p, S) are fixed once from the instance and base seed; the sample mean of
    |V'| must sit within 5 standard errors of the exact value and the sample
    mean of |V''| must reach a quarter of it minus 5 standard errors.  Raises
    AuditFailed (with the report attached) if either check fails.
    """
    if num_seeds < 30:
        raise ValueError("num_seeds must be at least 30")
    if n <= 0 or n % 3 != 0:
        raise ValueError("n must be a positive multiple of 3")
    params = InstanceParams.build(q, n, tol)
    w_total = count_w(params)
    v_total = count_v(params)
    p = choose_prime(v_total, w_total)
    root = SplitMix64(base_seed)
    s = build_apfree(p, root.next_u64())
    sizes_vp = np.empty(num_seeds, dtype=np.int64)
    sizes_vpp = np.empty(num_seeds, dtype=np.int64)
    for i in range(num_seeds):
        h = sample_functional(n, p, root.next_u64())
        vp = build_v_prime(params, h, s)
        sizes_vp[i] = len(vp)
        sizes_vpp[i] = len(prune_to_v_double_prime(vp))
    exact = v_total * len(s.members) / p ** 2
    mean_vp = float(sizes_vp.mean())
    se_vp = float(sizes_vp.std(ddof=1) / math.sqrt(num_seeds))
    mean_vpp = float(sizes_vpp.mean())
    se_vpp = float(sizes_vpp.std(ddof=1) / math.sqrt(num_seeds))
    ok_vp = abs(mean_vp - exact) <= 5.0 * se_vp
    ok_vpp = mean_vpp >= exact / 4.0 - 5.0 * se_vpp
    report = AuditReport(q=q, n=n, seeds=num_seeds, p=p, s_size=len(s.members),
                         w_count=w_total, v_count=v_total, expected_v_prime=exact,
                         v_prime_mean=mean_vp, v_prime_se=se_vp,
                         v_double_prime_mean=mean_vpp, v_double_prime_se=se_vpp,
                         v_prime_ok=ok_vp, v_double_prime_ok=ok_vpp)
    if not (ok_vp and ok_vpp):
        raise AuditFailed(
            f"audit failed: mean|V'|={mean_vp:.4f} expected {exact:.4f} "
            f"(se {se_vp:.4f}), mean|V''|={mean_vpp:.4f} (se {se_vpp:.4f})",
            report)
    return report
