import math
from collections import Counter

import pytest
from helpers import brute_force_v

from sumfree.apfree import APFreeSet, build_apfree
from sumfree.construction import (EvenModulus, InstanceParams, InstanceTooLarge,
                                  LinearFunctional, TripleSet, build_v_prime,
                                  choose_prime, count_triples_with_marginal,
                                  count_v, count_v_lower_bound, count_w,
                                  expectation_audit, iter_pool,
                                  pair_evaluation_rank, pool_array,
                                  prune_to_v_double_prime, run_pipeline,
                                  sample_functional, to_ap_form,
                                  validate_triples, verify_ap_form,
                                  verify_sum_free)
from sumfree.core import CountVector
from sumfree.rng import SplitMix64


@pytest.fixture(scope="module")
def params_q2n3():
    return InstanceParams.build(2, 3)


@pytest.fixture(scope="module")
def params_q3n9():
    return InstanceParams.build(3, 9)


def test_count_w_examples(params_q2n3, params_q3n9):
    assert count_w(params_q2n3) == 3
    assert count_w(params_q3n9) == 756


def test_count_w_degenerate_marginal():
    assert count_triples_with_marginal(2, 3, (3, 0)) == 0  # wrong mean, no histogram
    from sumfree.core import multinomial
    assert multinomial(CountVector((6, 0, 0))) == 1


def test_count_v_examples(params_q2n3, params_q3n9):
    assert count_v(params_q2n3) == 6
    assert count_v(params_q3n9) == 45360
    assert count_v(params_q3n9) == len(brute_force_v(params_q3n9))


def test_count_v_infeasible_marginal_is_zero():
    # mean != (q-1)/3 admits no triple-space histogram
    assert count_triples_with_marginal(2, 3, (1, 2)) == 0


def test_count_v_caps():
    with pytest.raises(InstanceTooLarge):
        count_triples_with_marginal(5, 9, (5, 2, 1, 1, 0))
    with pytest.raises(InstanceTooLarge):
        count_triples_with_marginal(2, 63, (42, 21))


def test_count_v_lower_bound(params_q2n3, params_q3n9):
    assert count_v_lower_bound(params_q2n3) == 6
    lower = count_v_lower_bound(params_q3n9)
    assert lower <= count_v(params_q3n9)
    # q=3, n=9 per-element lattice counts are (2,1,2,1,1,2); the triple-space
    # histogram is unique at q=3, so the bound is tight here
    assert lower == math.factorial(9) // (2 * 2 * 2)
    assert lower == count_v(params_q3n9)


def test_w_enumeration_matches_count(params_q2n3, params_q3n9):
    for params in (params_q2n3, params_q3n9):
        stream = list(iter_pool(params.marginal.counts))
        assert len(stream) == count_w(params)
        assert len(set(stream)) == len(stream)
        total = params.n * (params.q - 1) // 3
        assert all(sum(v) == total for v in stream)


def test_pool_array_matches_iterator(params_q3n9):
    arr = pool_array(params_q3n9.marginal.counts)
    stream = list(iter_pool(params_q3n9.marginal.counts))
    assert arr.shape == (len(stream), params_q3n9.n)
    assert [tuple(int(x) for x in row) for row in arr] == stream


def test_choose_prime_examples():
    assert choose_prime(6, 3) == 11
    assert choose_prime(5, 5) == 5
    assert choose_prime(100, 1) == 401


def test_choose_prime_guards():
    with pytest.raises(ValueError):
        choose_prime(3, 6)
    with pytest.raises(InstanceTooLarge):
        choose_prime(2 ** 70, 1)


def test_sample_functional_determinism_and_range():
    h1 = sample_functional(9, 241, seed=5)
    h2 = sample_functional(9, 241, seed=5)
    assert h1 == h2
    assert len(h1.coeffs) == 11
    assert all(0 <= c < 241 for c in h1.coeffs)
    assert sample_functional(9, 241, seed=6) != h1


def test_zero_functional():
    h = LinearFunctional(p=11, coeffs=(0,) * 5)
    assert h.evaluate(0, 1, (1, 2, 0)) == 0
    assert h.evaluate(1, 1, (2, 2, 2)) == 0


def test_functional_coefficient_uniformity():
    # chi-squared over 10^4 draws of the first coefficient, p = 11, df = 10;
    # critical value at significance 1e-3 is 29.5883
    draws = [sample_functional(1, 11, seed).coeffs[0] for seed in range(10 ** 4)]
    observed = Counter(draws)
    expected = 10 ** 4 / 11
    stat = sum((observed[v] - expected) ** 2 / expected for v in range(11))
    assert stat < 29.5883


def test_build_v_prime_empty_when_s_misses_zero(params_q2n3):
    h = LinearFunctional(p=11, coeffs=(0,) * 5)
    s = APFreeSet(p=11, members=(4, 5, 7))
    assert len(build_v_prime(params_q2n3, h, s)) == 0


def test_build_v_prime_vacuous_filter_recovers_v(params_q2n3, params_q3n9):
    # h == 0 with S = {0} disables every constraint, so V' = V exactly
    for params in (params_q2n3, params_q3n9):
        h = LinearFunctional(p=11, coeffs=(0,) * (params.n + 2))
        s = APFreeSet(p=11, members=(0,))
        vp = build_v_prime(params, h, s)
        assert len(vp) == count_v(params)
        if params.n == 3:
            assert sorted(vp.triples) == sorted(brute_force_v(params))


def test_build_v_prime_predicate_reevaluation(params_q3n9):
    result = run_pipeline(3, 9, seed=0)
    p = result.report.p
    root = SplitMix64(0)
    s = build_apfree(p, root.next_u64())
    h = sample_functional(9, p, root.next_u64())
    vp = build_v_prime(params_q3n9, h, s)
    assert len(vp) == result.report.v_prime_size
    members = set(s.members)
    inv2 = pow(2, -1, p)
    for a, b, c in vp.triples:
        va = h.evaluate(0, 1, a)
        vb = h.evaluate(1, 1, tuple(2 - x for x in b)) * inv2 % p
        vc = h.evaluate(1, 0, c)
        assert va == vb == vc
        assert va in members
    validate_triples(vp, params_q3n9.marginal)


def test_build_v_prime_equals_brute_force_filter(params_q2n3, params_q3n9):
    # filter the exhaustive V by the raw predicate and compare exactly
    for params, seed in ((params_q2n3, 11), (params_q3n9, 2)):
        result = run_pipeline(params.q, params.n, seed=seed)
        p = result.report.p
        root = SplitMix64(seed)
        s = build_apfree(p, root.next_u64())
        h = sample_functional(params.n, p, root.next_u64())
        inv2 = pow(2, -1, p)
        members = set(s.members)
        expected = set()
        for a, b, c in brute_force_v(params):
            va = h.evaluate(0, 1, a)
            vb = h.evaluate(1, 1, tuple(params.q - 1 - x for x in b)) * inv2 % p
            vc = h.evaluate(1, 0, c)
            if va == vb == vc and va in members:
                expected.add((a, b, c))
        vp = build_v_prime(params, h, s)
        assert set(vp.triples) == expected
        assert len(vp.triples) == len(set(vp.triples))


def test_build_v_prime_cap_env_override(params_q3n9, monkeypatch):
    monkeypatch.setenv("SUMFREE_MAX_W", "100")
    h = LinearFunctional(p=11, coeffs=(0,) * 11)
    s = APFreeSet(p=11, members=(0,))
    with pytest.raises(InstanceTooLarge):
        build_v_prime(params_q3n9, h, s)
    monkeypatch.setenv("SUMFREE_MAX_W", "1000")
    assert len(build_v_prime(params_q3n9, h, s)) == count_v(params_q3n9)


def _toy_triple_set(triples, q=2, n=3):
    return TripleSet(q=q, n=n, target=(q - 1,) * n, triples=tuple(triples))


def test_prune_singleton_unchanged():
    ts = _toy_triple_set([(((1, 0, 0)), (0, 1, 0), (0, 0, 1))])
    assert prune_to_v_double_prime(ts).triples == ts.triples


def test_prune_removes_both_on_shared_a():
    shared_a = _toy_triple_set([
        ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
        ((1, 0, 0), (0, 0, 1), (0, 1, 0)),
    ])
    assert len(prune_to_v_double_prime(shared_a)) == 0


def test_prune_keeps_fully_distinct():
    distinct = _toy_triple_set([
        ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
        ((0, 1, 0), (0, 0, 1), (1, 0, 0)),
        ((0, 0, 1), (1, 0, 0), (0, 1, 0)),
    ])
    assert len(prune_to_v_double_prime(distinct)) == 3


def test_verify_sum_free_single_triple():
    ts = _toy_triple_set([((1, 0, 0), (0, 1, 0), (0, 0, 1))])
    assert verify_sum_free(ts) is None


def test_verify_sum_free_detects_planted_violation():
    # second triple's b, c complete the first triple's a off-diagonally
    planted = _toy_triple_set([
        ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
        ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    ])
    witness = verify_sum_free(planted)
    assert witness is not None
    i, j, k = witness
    assert not (i == j == k)


def test_verify_sum_free_detects_broken_diagonal():
    ts = _toy_triple_set([((1, 0, 0), (0, 1, 0), (0, 1, 1))])
    assert verify_sum_free(ts) == (0, 0, 0)


def test_to_ap_form_q3_entry_map():
    ts = TripleSet(q=3, n=3, target=(2, 2, 2),
                   triples=(((0, 1, 2), (0, 1, 2), (2, 0, 1)),))
    (a, middle, c), = to_ap_form(ts)
    # entrywise (q-1-b)/2 mod 3: 0 -> 1, 1 -> 2, 2 -> 0
    assert middle == (1, 2, 0)
    assert a == (0, 1, 2) and c == (2, 0, 1)
    # inverse map recovers b
    assert tuple((2 - 2 * v) % 3 for v in middle) == (0, 1, 2)


def test_to_ap_form_rejects_even_q():
    ts = _toy_triple_set([((1, 0, 0), (0, 1, 0), (0, 0, 1))])
    with pytest.raises(EvenModulus):
        to_ap_form(ts)


def test_ap_form_of_pipeline_output_passes_mirror_checker():
    result = run_pipeline(3, 9, seed=3)
    ap = to_ap_form(result.triple_set)
    assert verify_ap_form(ap, 3) is None


def test_ap_form_checker_detects_duplicates():
    result = run_pipeline(3, 9, seed=3)
    ap = to_ap_form(result.triple_set)
    if len(ap) >= 1:
        assert verify_ap_form(ap + [ap[0]], 3) is not None


def test_run_pipeline_q2n3_report():
    result = run_pipeline(2, 3, seed=7)
    r = result.report
    assert (r.w_count, r.v_count, r.p) == (3, 6, 11)
    assert r.v_mode == "exact"
    assert r.v_double_prime_size <= r.v_prime_size <= r.v_count
    assert verify_sum_free(result.triple_set) is None


def test_run_pipeline_q3n9_seed0():
    result = run_pipeline(3, 9, seed=0)
    assert result.report.p == 241
    assert verify_sum_free(result.triple_set) is None
    validate_triples(result.triple_set, InstanceParams.build(3, 9).marginal)
    # pruning leaves every coordinate vector unique across the family
    for slot in range(3):
        vectors = [t[slot] for t in result.triple_set.triples]
        assert len(vectors) == len(set(vectors))


def test_run_pipeline_determinism():
    first = run_pipeline(3, 9, seed=5)
    second = run_pipeline(3, 9, seed=5)
    assert first.report == second.report
    assert first.triple_set == second.triple_set


def test_run_pipeline_guards():
    with pytest.raises(ValueError):
        run_pipeline(3, 4, seed=0)
    with pytest.raises(ValueError):
        run_pipeline(1, 3, seed=0)


def test_run_pipeline_many_seeds_always_verify():
    gen = SplitMix64(99)
    for _ in range(10):
        result = run_pipeline(3, 9, seed=gen.next_u64())
        assert verify_sum_free(result.triple_set) is None


def test_run_pipeline_lower_bound_fallback():
    # q=5 has |T| = 15 > the exact-count cap, so the pipeline switches to the
    # single-histogram bound and the wider prime floor above 4|W|
    result = run_pipeline(5, 6, seed=0)
    r = result.report
    assert r.v_mode == "lower_bound"
    assert r.p > 4 * r.w_count
    assert r.v_count <= r.w_count ** 2
    assert verify_sum_free(result.triple_set) is None


def test_fiber_equinumerosity_q2n3(params_q2n3):
    v = brute_force_v(params_q2n3)
    fibers = Counter(t[0] for t in v)
    assert set(fibers.values()) == {len(v) // count_w(params_q2n3)} == {2}


def test_pair_rank_at_least_3(params_q3n9):
    v = brute_force_v(params_q3n9)
    gen = SplitMix64(17)
    p = 241
    for _ in range(25):
        i = gen.next_below(len(v))
        j = gen.next_below(len(v))
        if i == j:
            continue
        assert pair_evaluation_rank(v[i], v[j], p, 3) >= 3
    # identical pair collapses to the first two rows
    assert pair_evaluation_rank(v[0], v[0], p, 3) == 2


def test_expectation_audit_q2n3():
    report = expectation_audit(2, 3, 120, base_seed=1)
    assert report.p == 11
    assert report.s_size == 3
    assert abs(report.expected_v_prime - 6 * 3 / 121) < 1e-12
    assert report.v_prime_ok and report.v_double_prime_ok


def test_expectation_audit_guards():
    with pytest.raises(ValueError):
        expectation_audit(2, 3, 10, base_seed=1)
    with pytest.raises(ValueError):
        expectation_audit(2, 4, 50, base_seed=1)


def test_instance_params_validation():
    params = InstanceParams.build(3, 9)
    assert params.marginal.counts == (5, 2, 2)
    assert params.target == (2,) * 9
    with pytest.raises(ValueError):
        InstanceParams(q=3, n=9, lattice=params.lattice,
                       marginal=CountVector((4, 3, 2)), target=params.target)
