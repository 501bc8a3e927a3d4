"""Model layer: measures, entropies, mixing and tail certificates.

Expected values were computed independently (closed forms, linear
solves, itertools enumeration) and frozen here; see the repeated
literals below.
"""
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hitstat import (
    BadThetaRange,
    ContractionDegenerate,
    InvalidSymbol,
    NonPositiveS,
    NonStochasticRow,
    ReducibleChain,
    ZeroMassSymbol,
    as_word,
    bernoulli,
    builtin_model,
    cylinder_measure,
    geometric,
    log_cylinder_measure,
    markov,
    model_fingerprint,
    model_from_dict,
    model_to_dict,
    next_symbol_distribution,
    partition_slope,
    partition_sum_exact,
    phi_bound,
    renyi_entropy,
    shannon_entropy,
    stationary_distribution,
    tail_decay,
    tail_mass,
    word_str,
)
from hitstat.errors import BudgetExceeded

P_CHAIN = [[0.9, 0.1], [0.2, 0.8]]


# --- probability-vector and kernel strategies -------------------------------

def prob_vectors(min_size=2, max_size=5):
    return st.lists(
        st.floats(min_value=0.05, max_value=1.0),
        min_size=min_size, max_size=max_size,
    ).map(lambda xs: [x / sum(xs) for x in xs])


@st.composite
def kernels(draw, max_states=4):
    k = draw(st.integers(min_value=2, max_value=max_states))
    rows = [
        draw(st.lists(st.floats(min_value=0.05, max_value=1.0), min_size=k, max_size=k))
        for _ in range(k)
    ]
    return [[x / sum(row) for x in row] for row in rows]


# --- construction and validation --------------------------------------------

def test_stationary_vector_of_two_state_chain():
    model = markov(P_CHAIN)
    assert model.pi == pytest.approx([2 / 3, 1 / 3], abs=1e-12)


def test_supplied_stationary_vector_is_checked():
    with pytest.raises(NonStochasticRow):
        markov(P_CHAIN, pi=[0.5, 0.5])


def test_non_stochastic_row_rejected():
    with pytest.raises(NonStochasticRow):
        markov([[0.9, 0.2], [0.2, 0.8]])
    with pytest.raises(NonStochasticRow):
        markov([[1.1, -0.1], [0.2, 0.8]])


def test_reducible_kernel_rejected():
    with pytest.raises(ReducibleChain):
        markov([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ReducibleChain):
        markov([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.3, 0.3, 0.4]])


def test_periodic_kernel_rejected():
    with pytest.raises(ReducibleChain):
        markov([[0.0, 1.0], [1.0, 0.0]])


def test_zero_mass_symbol_rejected():
    with pytest.raises(ZeroMassSymbol):
        bernoulli([1.0, 0.0])
    with pytest.raises(ZeroMassSymbol):
        bernoulli([1.0])  # single-symbol alphabet is degenerate


def test_bad_theta_rejected():
    for theta in (0.0, 1.0, -0.3, 1.7):
        with pytest.raises(BadThetaRange):
            geometric(theta)


def test_geometric_truncation_matches_residual_target():
    assert geometric(0.5).truncation == 50  # ceil(log(1e-15)/log(0.5))


@given(kernels())
@settings(max_examples=40, deadline=None)
def test_stationary_distribution_fixed_point(P):
    pi = stationary_distribution(np.array(P))
    assert pi.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(pi > 0)
    assert np.abs(pi @ np.array(P) - pi).max() < 1e-10


# --- cylinder measures -------------------------------------------------------

def test_markov_cylinder_measure_hand_value():
    model = markov(P_CHAIN)
    assert cylinder_measure(model, "01") == pytest.approx(1 / 15, rel=1e-12)
    assert cylinder_measure(model, "010") == pytest.approx((2 / 3) * 0.1 * 0.2, rel=1e-12)


def test_bernoulli_cylinder_measure_hand_value():
    model = bernoulli([0.7, 0.3])
    assert cylinder_measure(model, "0110") == pytest.approx(0.7 * 0.3 * 0.3 * 0.7, rel=1e-12)


def test_geometric_cylinder_measure_hand_value():
    model = geometric(0.5)
    # word (0, 2): masses 1/2 and 1/8
    assert cylinder_measure(model, (0, 2)) == pytest.approx(0.0625, rel=1e-12)


def test_zero_measure_word_gives_minus_inf():
    model = markov([[0.0, 1.0], [0.5, 0.5]])  # P[0][0] = 0, still irreducible aperiodic
    assert log_cylinder_measure(model, "00") == -math.inf


def test_out_of_alphabet_symbol_rejected():
    with pytest.raises(InvalidSymbol):
        log_cylinder_measure(bernoulli([0.5, 0.5]), "012")
    with pytest.raises(InvalidSymbol):
        as_word([1, -2])


def test_word_parsing_round_trip():
    assert as_word("0110") == (0, 1, 1, 0)
    assert word_str((0, 1, 1, 0)) == "0110"
    assert word_str((3, 12)) == "3-12"
    with pytest.raises(ValueError):
        as_word("")


@given(prob_vectors(max_size=2), st.lists(st.integers(0, 1), min_size=1, max_size=6),
       st.lists(st.integers(0, 1), min_size=1, max_size=6))
@settings(max_examples=40, deadline=None)
def test_iid_measure_is_multiplicative(p, u, v):
    model = bernoulli(p)
    lm = log_cylinder_measure
    assert lm(model, u + v) == pytest.approx(lm(model, u) + lm(model, v), abs=1e-10)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=6))
@settings(max_examples=40, deadline=None)
def test_markov_measure_extension_consistency(w):
    # appending one symbol splits a cylinder; prepending uses shift invariance
    model = markov(P_CHAIN)
    mu = cylinder_measure(model, w)
    right = sum(cylinder_measure(model, w + [a]) for a in range(2))
    left = sum(cylinder_measure(model, [a] + w) for a in range(2))
    assert right == pytest.approx(mu, rel=1e-12)
    assert left == pytest.approx(mu, rel=1e-12)


def test_next_symbol_distribution():
    chain = markov(P_CHAIN)
    assert next_symbol_distribution(chain) == pytest.approx([2 / 3, 1 / 3])
    assert next_symbol_distribution(chain, prev=1) == pytest.approx([0.2, 0.8])
    law = next_symbol_distribution(geometric(0.5))
    assert law.pmf(2) == pytest.approx(0.125)


# --- entropies ----------------------------------------------------------------

def test_shannon_entropy_frozen_values():
    assert shannon_entropy(bernoulli([0.5, 0.5])) == pytest.approx(math.log(2), rel=1e-14)
    assert shannon_entropy(bernoulli([0.7, 0.3])) == pytest.approx(0.6108643020548935, rel=1e-13)
    assert shannon_entropy(markov(P_CHAIN)) == pytest.approx(0.38352279010702806, rel=1e-12)
    assert shannon_entropy(geometric(0.5)) == pytest.approx(2 * math.log(2), rel=1e-13)


def test_renyi_entropy_frozen_values():
    assert renyi_entropy(bernoulli([0.7, 0.3]), 1.0) == pytest.approx(0.5447271754416722, rel=1e-13)
    # two-state chain: Perron root of P**2 has closed form (1.45 + sqrt(0.0305))/2
    assert renyi_entropy(markov(P_CHAIN), 1.0) == pytest.approx(0.2078593939270485, abs=1e-10)
    assert renyi_entropy(markov(P_CHAIN), 0.5) == pytest.approx(0.27415209680713715, abs=1e-10)
    assert renyi_entropy(geometric(0.5), 1.0) == pytest.approx(math.log(3), rel=1e-13)


def test_renyi_requires_positive_s():
    for s in (0.0, -1.0):
        with pytest.raises(NonPositiveS):
            renyi_entropy(bernoulli([0.5, 0.5]), s)
        with pytest.raises(NonPositiveS):
            partition_sum_exact(bernoulli([0.5, 0.5]), 3, s)


@given(prob_vectors(), st.floats(min_value=0.05, max_value=4.0),
       st.floats(min_value=0.05, max_value=4.0))
@settings(max_examples=60, deadline=None)
def test_renyi_nonincreasing_and_below_shannon(p, s1, s2):
    model = bernoulli(p)
    lo, hi = sorted((s1, s2))
    assert renyi_entropy(model, hi) <= renyi_entropy(model, lo) + 1e-9
    assert renyi_entropy(model, lo) <= shannon_entropy(model) + 1e-9


@given(kernels(), st.floats(min_value=0.1, max_value=3.0))
@settings(max_examples=30, deadline=None)
def test_markov_perron_root_matches_dense_eigensolver(P, s):
    model = markov(P)
    lam_eig = float(np.linalg.eigvals(np.array(P) ** (1 + s)).real.max())
    assert renyi_entropy(model, s) == pytest.approx(-math.log(lam_eig) / s, abs=1e-9)


def test_geometric_renyi_matches_brute_series():
    model = geometric(0.6)
    for s in (0.3, 1.0, 2.5):
        z = math.fsum(((0.4) * 0.6**j) ** (1 + s) for j in range(4000))
        assert renyi_entropy(model, s) == pytest.approx(-math.log(z) / s, rel=1e-12)


# --- partition sums -----------------------------------------------------------

def test_markov_partition_sum_matches_enumeration():
    # brute-force values frozen from an itertools enumeration
    model = markov(P_CHAIN)
    expected = {
        (1, 1.0): -0.587786664902119,
        (2, 1.0): -0.8209805520698303,
        (5, 1.0): -1.4941330065348106,
        (8, 1.0): -2.1426044865664573,
        (5, 0.5): -0.8794196115843823,
    }
    for (n, s), value in expected.items():
        assert partition_sum_exact(model, n, s) == pytest.approx(value, abs=1e-11)


def test_bernoulli_partition_sum_matches_closed_form():
    model = bernoulli([0.7, 0.3])
    assert partition_sum_exact(model, 6, 1.0) == pytest.approx(6 * math.log(0.58), abs=1e-12)


@given(prob_vectors(max_size=3), st.integers(1, 5), st.floats(min_value=0.2, max_value=2.0))
@settings(max_examples=30, deadline=None)
def test_bernoulli_partition_sum_matches_brute_force(p, n, s):
    model = bernoulli(p)
    brute = math.fsum(
        math.prod(p[a] for a in w) ** (1 + s)
        for w in itertools.product(range(len(p)), repeat=n)
    )
    assert partition_sum_exact(model, n, s) == pytest.approx(math.log(brute), abs=1e-10)


def test_partition_sum_budget_guard():
    with pytest.raises(BudgetExceeded):
        partition_sum_exact(bernoulli([0.5, 0.5]), 40, 1.0, budget=10**6)


def test_iid_partition_slope_equals_rate_exactly():
    # |log Z_n| = n |log Z_1| for product measures, so the slope is flat
    model = bernoulli([0.7, 0.3])
    r = renyi_entropy(model, 1.0)
    for n in (1, 4, 9):
        assert partition_slope(model, n, 1.0) == pytest.approx(r, rel=1e-12)


def test_markov_partition_slope_converges_to_rate():
    model = markov(P_CHAIN)
    r = renyi_entropy(model, 1.0)
    gaps = [abs(partition_slope(model, n, 1.0) - r) for n in (4, 8, 16, 32)]
    assert all(g <= 0.8 / n for g, n in zip(gaps, (4, 8, 16, 32)))
    assert gaps == sorted(gaps, reverse=True)


# --- mixing and tails ----------------------------------------------------------

def test_phi_bound_frozen_values():
    chain = markov(P_CHAIN)
    # rho = 1 - (0.2 + 0.1) = 0.7, C = 1/min(pi) = 3
    assert phi_bound(chain, 0) == pytest.approx(3.0, rel=1e-11)
    assert phi_bound(chain, 3) == pytest.approx(3 * 0.7**3, rel=1e-11)
    assert phi_bound(bernoulli([0.5, 0.5]), 5) == 0.0
    assert phi_bound(geometric(0.5), 5) == 0.0


def test_phi_bound_degenerate_contraction_warns():
    P = [[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]
    chain = markov(P)
    with pytest.warns(ContractionDegenerate):
        bound = phi_bound(chain, 10)
    assert bound >= 1.0  # vacuous constant, never decays


def test_tail_decay_certificates():
    assert tail_decay(bernoulli([0.5, 0.5])).trivially_satisfied
    assert tail_decay(markov(P_CHAIN)).trivially_satisfied
    cert = tail_decay(geometric(0.5))
    assert not cert.trivially_satisfied
    assert cert.delta == pytest.approx(0.5)


def test_tail_mass_values():
    assert tail_mass(geometric(0.5), 1) == pytest.approx(1.0)
    assert tail_mass(geometric(0.5), 4) == pytest.approx(0.125)
    assert tail_mass(bernoulli([0.7, 0.3]), 2) == pytest.approx(0.3)


# --- serialization ---------------------------------------------------------------

def test_model_dict_round_trip():
    for name in ("fair-coin", "biased-coin", "two-state-chain", "geometric-half"):
        model = builtin_model(name)
        again = model_from_dict(model_to_dict(model))
        assert model_fingerprint(again) == model_fingerprint(model)


def test_model_from_dict_computes_stationary_vector():
    model = model_from_dict({"kind": "markov", "P": P_CHAIN})
    assert model.pi == pytest.approx([2 / 3, 1 / 3], abs=1e-10)


def test_model_from_dict_rejects_malformed_specs():
    for spec in ({}, {"kind": "nope"}, {"kind": "bernoulli"}, {"kind": "markov"},
                 {"kind": "geometric"}, "fair-coin"):
        with pytest.raises(ValueError):
            model_from_dict(spec)


def test_fingerprint_distinguishes_parameters():
    assert model_fingerprint(bernoulli([0.5, 0.5])) != model_fingerprint(bernoulli([0.7, 0.3]))
