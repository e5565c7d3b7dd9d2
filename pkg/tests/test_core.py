import math
import random

import pytest

from sumfree.core import (CountVector, Distribution, entropy,
                          log_multinomial_bounds, multinomial, pushforward,
                          size_bounds, solve_theta)


def test_entropy_uniform():
    d = Distribution((1 / 3, 1 / 3, 1 / 3))
    assert abs(entropy(d) - math.log(3)) < 1e-12


def test_entropy_point_mass():
    assert entropy(Distribution((1.0, 0.0, 0.0))) == 0.0


def test_entropy_matches_log_theta_for_q3():
    sol = solve_theta(3)
    assert abs(sol.theta - 2.7551) < 5e-4
    assert abs(entropy(sol.psi) - math.log(sol.theta)) < 1e-9


def test_distribution_validation():
    with pytest.raises(ValueError):
        Distribution((0.5, 0.6))
    with pytest.raises(ValueError):
        Distribution((-0.1, 1.1))
    with pytest.raises(ValueError):
        Distribution(())


def test_pushforward_identity():
    d = Distribution((0.2, 0.3, 0.5))
    out = pushforward(d, [0, 1, 2])
    assert out.probs == d.probs


def test_pushforward_collapse():
    d = Distribution((1 / 3, 1 / 3, 1 / 3))
    out = pushforward(d, lambda a: 0, image_size=1)
    assert out.probs == (1.0,)
    assert entropy(out) == 0.0


def test_pushforward_requires_total_map():
    with pytest.raises(ValueError):
        pushforward(Distribution((0.5, 0.5)), [0])
    with pytest.raises(ValueError):
        pushforward(Distribution((0.5, 0.5)), [0, 5], image_size=2)


def test_pushforward_never_increases_entropy():
    # coarsening a distribution cannot gain entropy; merging two atoms of
    # positive mass strictly loses some
    rng = random.Random(7)
    for _ in range(300):
        size = rng.randint(2, 8)
        # masses on a coarse grid keep the strictness margin meaningful
        masses = [rng.randint(1, 16) for _ in range(size)]
        total = sum(masses)
        d = Distribution(tuple(m / total for m in masses))
        image_size = rng.randint(1, size)
        images = [rng.randrange(image_size) for _ in range(size)]
        out = pushforward(d, images, image_size=image_size)
        assert entropy(out) <= entropy(d) + 1e-12
        shared = len(set(images)) < size
        if shared:
            assert entropy(out) < entropy(d) - 1e-4


def test_multinomial_small_cases():
    assert multinomial(CountVector((2, 1, 1))) == 12
    assert multinomial(CountVector((1, 1, 1))) == 6
    assert multinomial(CountVector((5, 2, 2))) == 756
    assert multinomial(CountVector((4, 0, 0))) == 1


def test_multinomial_matches_brute_force_string_count():
    import itertools

    rng = random.Random(3)
    for _ in range(40):
        alphabet = rng.randint(1, 3)
        n = rng.randint(1, 8)
        counts = [0] * alphabet
        for _ in range(n):
            counts[rng.randrange(alphabet)] += 1
        target = tuple(counts)
        brute = sum(
            1 for word in itertools.product(range(alphabet), repeat=n)
            if tuple(word.count(s) for s in range(alphabet)) == target)
        assert multinomial(CountVector(target)) == brute


def test_log_multinomial_bounds_examples():
    lower, upper = log_multinomial_bounds(CountVector((2, 1, 1)))
    assert abs(upper - 4.158883) < 1e-5
    assert lower <= math.log(12) <= upper

    lower, upper = log_multinomial_bounds(CountVector((6, 0, 0)))
    assert upper == 0.0
    assert lower <= 0.0

    lower, upper = log_multinomial_bounds(CountVector((5, 2, 2)))
    assert lower <= math.log(756) <= upper


def test_log_multinomial_bounds_random():
    rng = random.Random(11)
    for _ in range(300):
        alphabet = rng.randint(1, 8)
        n = rng.randint(1, 200)
        counts = [0] * alphabet
        for _ in range(n):
            counts[rng.randrange(alphabet)] += 1
        c = CountVector(tuple(counts))
        lower, upper = log_multinomial_bounds(c)
        log_exact = math.log(multinomial(c))
        assert lower - 1e-9 <= log_exact <= upper + 1e-9


def test_solve_theta_q2_closed_form():
    sol = solve_theta(2)
    assert abs(sol.rho - 0.5) < 1e-12
    assert abs(sol.theta - 3 * 2 ** (-2 / 3)) < 1e-12
    assert abs(sol.psi.probs[0] - 2 / 3) < 1e-12


def test_solve_theta_q3_closed_form():
    # rho is the positive root of 4 s^2 + s - 2 = 0
    sol = solve_theta(3)
    root = (math.sqrt(33) - 1) / 8
    assert abs(sol.rho - root) < 1e-12
    expected = (1 + root + root * root) * root ** (-2 / 3)
    assert abs(sol.theta - expected) < 1e-11
    psi = sol.psi.probs
    assert abs(psi[0] - 0.51419) < 1e-5
    assert abs(psi[1] - 0.30495) < 1e-5
    assert abs(psi[2] - 0.18086) < 1e-5


def test_solve_theta_rejects_bad_q():
    with pytest.raises(ValueError):
        solve_theta(1)


@pytest.mark.parametrize("q", range(2, 13))
def test_theta_solution_invariants(q):
    sol = solve_theta(q)
    psi = sol.psi.probs
    for k in range(q - 1):
        assert abs(psi[k + 1] / psi[k] - sol.rho) < 1e-9
    assert abs(entropy(sol.psi) - math.log(sol.theta)) < 1e-9
    mean = sum(k * p for k, p in enumerate(psi))
    assert abs(mean - (q - 1) / 3) < 1e-9


@pytest.mark.parametrize("q", range(2, 13))
@pytest.mark.parametrize("eps", [0.01, 0.1])
def test_theta_is_the_minimum(q, eps):
    sol = solve_theta(q)

    def objective(sigma):
        return sum(sigma ** k for k in range(q)) * sigma ** (-(q - 1) / 3)

    assert objective(sol.rho * (1 + eps)) >= sol.theta
    assert objective(sol.rho * (1 - eps)) >= sol.theta


def test_size_bounds_q3_n1():
    lower, upper = size_bounds(3, 1)
    assert abs(upper - 2.112068) < 1e-5
    log_theta = math.log(solve_theta(3).theta)
    assert abs(lower - (log_theta - 2 * math.sqrt(2 * math.log(2) * log_theta))) < 1e-12


def test_size_bounds_rejects_n0():
    with pytest.raises(ValueError):
        size_bounds(2, 0)


def test_size_bounds_q3_n100():
    lower, upper = size_bounds(3, 100)
    assert abs(lower - 77.6394) < 1e-3
    log_theta = math.log(solve_theta(3).theta)
    assert abs(upper - (math.log(3) + 100 * log_theta)) < 1e-9
