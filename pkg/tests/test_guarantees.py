import itertools
import json
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
import scipy.linalg

from weightedcs import (
    InvalidCoherence,
    InvalidSparsity,
    NotApplicable,
    TooLarge,
    basic_lemma_check,
    cai_constant,
    coherence,
    delta_s_bound,
    delta_s_exact,
    error_bound,
    f_mu,
    independence_max_size,
    orthonormal_basis,
    random_dictionary,
    recovery_constants,
    simplex_dictionary,
    two_ortho_dictionary,
    uniqueness_max_sparsity,
)
from weightedcs.guarantees import f_mu_endpoint, sparse_representations_unique, subset_min_singular_value

mpmath.mp.dps = 40


def mp_constants(mu, s):
    mu, s = mpmath.mpf(mu), mpmath.mpf(s)
    k = 2 * s - 1
    d = 1 - mu * k
    return float(mpmath.sqrt(3 - 1 / k) / d), float(2 * mpmath.sqrt(mu * s * (1 + mu)) / d)


def generalized_delta(D, s):
    """Oracle: eigenvalues of (raw Gram, diag(w^2)) on every support."""
    G = D.gram()
    W2 = np.diag(D.weights**2)
    best = 0.0
    for S in itertools.combinations(range(D.N), s):
        ix = np.ix_(S, S)
        ev = scipy.linalg.eigh(G[ix], W2[ix], eigvals_only=True)
        best = max(best, float(np.max(np.abs(ev - 1.0))))
    return best


# ---- Basic lemma ---------------------------------------------------------

def test_lemma_orthonormal_is_parseval(rng):
    D = orthonormal_basis(5)
    for _ in range(20):
        c = rng.standard_normal(5) * (rng.random(5) < 0.6)
        chk = basic_lemma_check(D, c)
        assert chk.sparse.value == pytest.approx(chk.sparse.lower, rel=1e-14, abs=1e-300)
        assert chk.sparse.value == pytest.approx(chk.sparse.upper, rel=1e-14, abs=1e-300)


def test_lemma_disjoint_part_is_tight_on_D0(D0):
    chk = basic_lemma_check(D0, [1, 0, 0], [0, 0, 1])
    assert not chk.disjoint.vacuous
    assert chk.disjoint.value == pytest.approx(math.sqrt(2), rel=1e-15)
    assert chk.disjoint.upper == pytest.approx(math.sqrt(2), rel=1e-15)
    assert chk.holds()


def test_lemma_disjoint_vacuous_on_overlap(D0):
    assert basic_lemma_check(D0, [1, 1, 0], [0, 1, 1]).disjoint.vacuous


def test_lemma_sparse_interval_two_ortho(rng):
    D = two_ortho_dictionary(4)
    for _ in range(200):
        c = np.zeros(8)
        c[rng.choice(8, 2, replace=False)] = rng.standard_normal(2)
        chk = basic_lemma_check(D, c, mu=0.5)
        tc2 = float(np.sum((D.matrix @ c) ** 2))
        n2 = float(np.sum((c * D.weights) ** 2))
        assert chk.sparse.value == pytest.approx(tc2, rel=1e-13)
        assert chk.sparse.lower == pytest.approx(0.5 * n2, rel=1e-13)
        assert chk.sparse.upper == pytest.approx(1.5 * n2, rel=1e-13)
        assert 0.5 * n2 - 1e-12 <= tc2 <= 1.5 * n2 + 1e-12


def test_lemma_randomized(rng):
    for trial in range(500):
        n = int(rng.integers(2, 8))
        N = int(rng.integers(n, 14))
        D = random_dictionary(n, N, (0.5, 2.0), seed=trial)
        mu = coherence(D)
        S = rng.permutation(N)
        k = int(rng.integers(1, N))
        c = np.zeros(N)
        d = np.zeros(N)
        c[S[:k]] = rng.standard_normal(k)
        d[S[k:]] = rng.standard_normal(N - k)
        chk = basic_lemma_check(D, c, d, mu=mu)
        assert not chk.disjoint.vacuous
        assert chk.holds(), chk


def test_lemma_chain_consistency(rng):
    """The quadratic interval sits inside the sparse interval."""
    for trial in range(300):
        D = random_dictionary(6, 10, seed=trial)
        mu = coherence(D)
        c = rng.standard_normal(10) * (rng.random(10) < 0.5)
        chk = basic_lemma_check(D, c, mu=mu)
        tol = 1e-12 * max(1.0, chk.quadratic.scale)
        assert chk.sparse.lower <= chk.quadratic.lower + tol
        assert chk.quadratic.upper <= chk.sparse.upper + tol


# ---- Uniqueness and independence ------------------------------------------

@pytest.mark.parametrize("mu, expected", [(1.0, 0), (1 / 3, 1), (0.25, 2), (0.2, 2), (0.1, 5)])
def test_uniqueness_max_sparsity(mu, expected):
    assert uniqueness_max_sparsity(mu) == expected


@pytest.mark.parametrize("mu, expected", [(1.0, 1), (0.5, 2), (0.25, 4), (0.3, 4)])
def test_independence_max_size(mu, expected):
    assert independence_max_size(mu) == expected


@pytest.mark.parametrize("mu", [0.0, -0.1, 1.5])
def test_invalid_coherence(mu):
    with pytest.raises(InvalidCoherence):
        uniqueness_max_sparsity(mu)
    with pytest.raises(InvalidCoherence):
        independence_max_size(mu)


FIXTURES = [
    two_ortho_dictionary(2),
    two_ortho_dictionary(4),
    two_ortho_dictionary(4, weight_seed=7),
    simplex_dictionary(4, weight_seed=1),
    simplex_dictionary(6),
    random_dictionary(3, 6, seed=1),
    random_dictionary(4, 8, seed=2),
    random_dictionary(5, 10, seed=3),
    random_dictionary(6, 12, seed=4),
]


@pytest.mark.parametrize("D", FIXTURES)
def test_independence_realized(D):
    k = min(independence_max_size(coherence(D)), D.N)
    assert subset_min_singular_value(D, k) > 1e-8


@pytest.mark.parametrize("D", FIXTURES)
def test_uniqueness_realized(D):
    smax = uniqueness_max_sparsity(coherence(D))
    for s in range(1, smax + 1):
        assert sparse_representations_unique(D, s)


def test_uniqueness_fails_beyond_dimension():
    # two 2-sparse supports span four atoms, which are always dependent in R^2
    assert not sparse_representations_unique(two_ortho_dictionary(2), 2)


@pytest.mark.parametrize("mu, s, expected", [(0.7, 1, 0.0), (0.5, 2, 0.5), (0.25, 3, 0.5)])
def test_delta_s_bound(mu, s, expected):
    assert delta_s_bound(mu, s) == expected


def test_delta_s_bound_rejects_zero_s():
    with pytest.raises(InvalidSparsity):
        delta_s_bound(0.5, 0)


def test_delta_s_exact_examples(D0):
    assert delta_s_exact(D0, 1) == pytest.approx(0.0, abs=1e-15)
    assert delta_s_exact(two_ortho_dictionary(4), 2) == pytest.approx(0.5, abs=1e-12)
    assert delta_s_exact(D0, 2) <= math.sqrt(2) / 2 + 1e-12


@pytest.mark.parametrize("D", FIXTURES)
def test_delta_s_exact_matches_generalized_eigen_oracle(D):
    for s in range(1, min(4, D.N) + 1):
        assert delta_s_exact(D, s) == pytest.approx(generalized_delta(D, s), abs=1e-10)


def test_delta_s_exact_dominates_sampling(rng):
    D = random_dictionary(5, 9, seed=11)
    exact = delta_s_exact(D, 3)
    w = D.weights
    for _ in range(2000):
        c = np.zeros(9)
        c[rng.choice(9, 3, replace=False)] = rng.standard_normal(3)
        n2 = np.sum((w * c) ** 2)
        ratio = abs(np.sum((D.matrix @ c) ** 2) - n2) / n2
        assert ratio <= exact + 1e-12


def test_delta_s_exact_cap():
    with pytest.raises(TooLarge):
        delta_s_exact(random_dictionary(4, 30, seed=0), 10, cap=1000)


# ---- Constants -------------------------------------------------------------

@pytest.mark.parametrize("mu, s, C1, C2", [
    (0.0, 1, math.sqrt(2), 0.0),
    (0.25, 1, 1.8856181, 1.4907120),
    (0.2, 2, 4.0824829, 3.4641016),
])
def test_recovery_constants(mu, s, C1, C2):
    got = recovery_constants(mu, s)
    assert got == pytest.approx((C1, C2), abs=5e-8)
    assert got == pytest.approx(mp_constants(mu, s), rel=1e-14, abs=1e-300)


def test_recovery_constants_not_applicable():
    with pytest.raises(NotApplicable):
        recovery_constants(0.5, 2)
    with pytest.raises(NotApplicable):
        recovery_constants(1 / 3, 2)


@pytest.mark.parametrize("mu, s, expected", [(0.0, 1, 1.7320508), (0.25, 1, 2.5819889), (0.2, 2, 4.7434165)])
def test_cai_constant(mu, s, expected):
    assert cai_constant(mu, s) == pytest.approx(expected, abs=5e-8)
    exact = mpmath.sqrt(3 * (1 + mpmath.mpf(mu))) / (1 - (2 * s - 1) * mpmath.mpf(mu))
    assert cai_constant(mu, s) == pytest.approx(float(exact), rel=1e-14)


def test_cai_not_applicable():
    with pytest.raises(NotApplicable):
        cai_constant(0.5, 2)


def f_exact(mu: Fraction, s: int) -> Fraction:
    return ((8 * s * s - 8 * s + 1) * mu * mu + 2 * mu + 1) / (1 + mu)


@pytest.mark.parametrize("mu, s, expected", [
    (Fraction(0), 3, Fraction(1)),
    (Fraction(1), 1, Fraction(2)),
    (Fraction(1, 3), 2, Fraction(8, 3)),
])
def test_f_mu_values(mu, s, expected):
    assert f_exact(mu, s) == expected
    assert f_mu(float(mu), s) == pytest.approx(float(expected), rel=1e-15)


def test_f_mu_endpoint_identity_exact():
    for s in range(1, 30):
        assert f_exact(Fraction(1, 2 * s - 1), s) == Fraction(6 * s - 4, 2 * s - 1)
        assert abs(f_mu(1 / (2 * s - 1), s) - f_mu_endpoint(s)) <= 1e-12


def test_f_mu_derivative_matches_closed_form():
    # finite differences against the quotient-rule numerator a mu^2 + 2 a mu + 1
    for s in (1, 2, 5):
        a = 8 * s * s - 8 * s + 1
        for mu in np.linspace(0, 1 / (2 * s - 1), 7):
            h = 1e-6
            fd = (f_mu(mu + h, s) - f_mu(mu - h, s)) / (2 * h)
            closed = (a * mu * mu + 2 * a * mu + 1) / (1 + mu) ** 2
            assert fd == pytest.approx(closed, rel=1e-6)


def test_sqrt_f_endpoint_is_signal_constant_numerator():
    for s in range(1, 9):
        assert math.sqrt(f_mu_endpoint(s)) == pytest.approx(math.sqrt(3 - 1 / (2 * s - 1)), rel=1e-15)


def test_error_bound_examples():
    rep = error_bound(0.25, 1, 0.1, 0.1, 0.0)
    assert rep.applicable
    assert rep.bound_value == pytest.approx(0.3771236, abs=5e-8)
    assert rep.cai_bound == pytest.approx(0.5163978, abs=5e-8)
    assert error_bound(0.0, 1, 0.0, 0.0, 0.0).bound_value == 0.0
    na = error_bound(0.5, 2, 0.1, 0.1, 0.0)
    assert not na.applicable
    assert na.C1 is None and na.C2 is None and na.bound_value is None


def test_error_bound_with_tail():
    C1, C2 = recovery_constants(0.1, 3)
    rep = error_bound(0.1, 3, 0.05, 0.02, 0.4)
    assert rep.bound_value == pytest.approx(C1 * 0.07 + C2 * 0.4, rel=1e-15)


def test_report_json_omits_constants_when_not_applicable():
    obj = json.loads(error_bound(0.5, 2, 0.1, 0.1, 0.0).to_json())
    assert obj["applicable"] is False
    assert not {"C1", "C2", "bound_value", "cai_C"} & set(obj)
    obj = json.loads(error_bound(0.1, 2, 0.1, 0.1, 0.0).to_json())
    assert obj["applicable"] is True and obj["C1"] > 0 and obj["C2"] >= 0


def test_error_bound_rejects_negative_inputs():
    with pytest.raises(ValueError):
        error_bound(0.1, 1, -1.0, 0.0, 0.0)
