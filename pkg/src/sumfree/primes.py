"""Deterministic Miller-Rabin primality testing.

The witness set below makes the strong-pseudoprime test exact for every
n < 3317044064679887385961981 (Sorenson-Webster), far beyond the 64-bit
range this package works in.
"""

from __future__ import annotations

_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for w in _WITNESSES:
        if n == w:
            return True
        if n % w == 0:
            return False
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for w in _WITNESSES:
        x = pow(w, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime_at_least(c: int) -> int:
    """Smallest prime >= c."""
    p = max(2, c)
    while not is_prime(p):
        p += 1
    return p
