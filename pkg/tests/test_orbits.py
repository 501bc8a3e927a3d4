"""Orbit engine: hand traces, naive-scan oracles, and drift audits."""
import math

import numpy as np
import pytest
from scipy.special import logsumexp

from hitstat import bernoulli, log_cylinder_measure, markov
from hitstat.errors import (
    EmptyInput,
    MixedLengths,
    SequenceTooShort,
    ZeroMeasureTarget,
)
from hitstat.models import BernoulliModel, MarkovModel
from hitstat.orbits import (
    CapPolicy,
    OrbitStream,
    ReplayStream,
    TimeResult,
    entrance_time,
    hits_until_entrance,
    hitting_number,
    recurrence_time,
    sample_orbit,
    w_sum,
)

FAIR = bernoulli([0.5, 0.5])
CHAIN = markov([[0.9, 0.1], [0.2, 0.8]])


# --- naive oracles -----------------------------------------------------------

def window_at(sym, i, n):
    return tuple(int(x) for x in sym[i:i + n])


def naive_entrance(sym, target, cap):
    n = len(target)
    for i in range(1, cap + 1):
        if window_at(sym, i, n) == tuple(target):
            return TimeResult(value=i, censored=False)
    return TimeResult(value=cap, censored=True)


def naive_hit_count(sym, patterns, lo, hi):
    n = len(next(iter(patterns)))
    pats = {tuple(p) for p in patterns}
    return sum(1 for i in range(lo, hi + 1) if window_at(sym, i, n) in pats)


# --- stream determinism ------------------------------------------------------

def test_sample_orbit_deterministic():
    a = sample_orbit(CHAIN, 42, 50)
    b = sample_orbit(CHAIN, 42, 50)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, sample_orbit(CHAIN, 43, 50))
    assert np.array_equal(sample_orbit(FAIR, (7, 3), 20), sample_orbit(FAIR, (7, 3), 20))


def test_stream_reads_independent_of_chunking():
    whole = sample_orbit(CHAIN, 11, 40)
    s = OrbitStream(CHAIN, 11)
    pieces = np.concatenate([s.take(7), s.take(13), s.take(20)])
    assert np.array_equal(whole, pieces)


def test_single_symbol_process_is_constant():
    # degenerate model, constructed directly to bypass validation
    model = BernoulliModel(p=np.array([1.0]))
    assert np.array_equal(sample_orbit(model, 5, 12), np.zeros(12, dtype=np.int64))


def test_periodic_chain_alternates():
    # validation rejects this kernel; the engine itself must still run it
    model = MarkovModel(P=np.array([[0.0, 1.0], [1.0, 0.0]]), pi=np.array([0.5, 0.5]))
    orb = sample_orbit(model, 3, 30)
    assert np.all(orb[1:] != orb[:-1])


# --- entrance times ----------------------------------------------------------

def test_entrance_time_hand_trace():
    # x = 0,1,0,0,1: windows 10, 00, 01 -> first 01 at step 3
    stream = ReplayStream([0, 1, 0, 0, 1])
    assert entrance_time(stream, "01", cap=3) == TimeResult(3)


def test_entrance_window_zero_never_counts():
    stream = ReplayStream([0, 1, 0, 1])
    assert entrance_time(stream, "01", cap=2) == TimeResult(2)


def test_entrance_length_one_target():
    stream = ReplayStream([0, 1, 0])
    assert entrance_time(stream, "1", cap=2) == TimeResult(1)


def test_entrance_censored_at_cap():
    stream = ReplayStream([0] * 50)
    assert entrance_time(stream, "11", cap=5) == TimeResult(5, censored=True)


def test_entrance_zero_measure_target_refused():
    model = markov([[0.0, 1.0], [0.5, 0.5]])
    with pytest.raises(ZeroMeasureTarget):
        entrance_time(OrbitStream(model, 0), "00", cap=10)


def test_entrance_matches_naive_scan():
    rng = np.random.default_rng(0)
    for trial in range(200):
        model = FAIR if trial % 2 == 0 else CHAIN
        n = int(rng.integers(1, 5))
        target = tuple(int(x) for x in rng.integers(0, 2, size=n))
        sym = sample_orbit(model, (900, trial), 120)
        got = entrance_time(ReplayStream(sym, model=model), target, cap=100)
        assert got == naive_entrance(sym, target, 100)


def test_replay_exhaustion_censors_at_last_window():
    # only windows 1..2 fit in 4 symbols; no match -> censored at 2
    stream = ReplayStream([0, 0, 0, 0])
    assert entrance_time(stream, "11", cap=50) == TimeResult(2, censored=True)
    with pytest.raises(SequenceTooShort):
        entrance_time(ReplayStream([0, 0]), "111", cap=50)


def test_replay_stream_validation():
    with pytest.raises(EmptyInput):
        ReplayStream([])
    with pytest.raises(ValueError):
        entrance_time(ReplayStream([0, 1]), "01")  # no model, no cap


# --- recurrence times ---------------------------------------------------------

def test_recurrence_constant_stream():
    assert recurrence_time(ReplayStream([0] * 10), 3, cap=5) == TimeResult(1)


def test_recurrence_alternating_stream():
    assert recurrence_time(ReplayStream([0, 1, 0, 1, 0, 1]), 2, cap=4) == TimeResult(2)


def test_recurrence_equals_entrance_on_own_prefix():
    for seed in range(100):
        rec = recurrence_time(OrbitStream(FAIR, seed), 3, cap=200)
        prefix = sample_orbit(FAIR, seed, 3)
        ent = entrance_time(OrbitStream(FAIR, seed), prefix, cap=200)
        assert rec == ent


# --- hitting numbers ------------------------------------------------------------

def test_hitting_number_hand_counts():
    sym = [0, 1, 0, 1, 0, 1, 0]
    assert hitting_number(ReplayStream(sym), ["01"], M=4) == 3  # i = 0, 2, 4
    full = ["00", "01", "10", "11"]
    sym = sample_orbit(FAIR, 1, 9)
    assert hitting_number(ReplayStream(sym), full, M=7) == 8  # every window hits


def test_hitting_number_matches_naive_scan():
    rng = np.random.default_rng(1)
    for trial in range(200):
        model = FAIR if trial % 2 == 0 else CHAIN
        n = int(rng.integers(1, 4))
        n_pats = int(rng.integers(1, 2**n + 1))
        pool = [tuple(int(x) for x in rng.integers(0, 2, size=n)) for _ in range(n_pats)]
        pats = list(dict.fromkeys(pool))
        M = int(rng.integers(0, 60))
        sym = sample_orbit(model, (901, trial), M + n)
        got = hitting_number(ReplayStream(sym), pats, M=M)
        assert got == naive_hit_count(sym, pats, 0, M)


def test_hitting_number_window_validation():
    with pytest.raises(MixedLengths):
        hitting_number(ReplayStream([0, 1]), [], M=3)
    with pytest.raises(ValueError):
        hitting_number(ReplayStream([0, 1]), ["01"], M=-1)
    with pytest.raises(SequenceTooShort):
        hitting_number(ReplayStream([0, 1, 0]), ["01"], M=5)


# --- joint hits and entrance -----------------------------------------------------

def test_hits_until_entrance_matches_double_scan():
    rng = np.random.default_rng(2)
    for trial in range(200):
        model = FAIR if trial % 2 == 0 else CHAIN
        n = int(rng.integers(1, 4))
        target = tuple(int(x) for x in rng.integers(0, 2, size=n))
        pats = [tuple(int(x) for x in rng.integers(0, 2, size=n))
                for _ in range(int(rng.integers(1, 4)))]
        pats = list(dict.fromkeys(pats))
        cap = 80
        sym = sample_orbit(model, (902, trial), cap + n)
        time, count = hits_until_entrance(ReplayStream(sym, model=model), target, pats, cap=cap)
        expect_time = naive_entrance(sym, target, cap)
        assert time == expect_time
        assert count == naive_hit_count(sym, pats, 0, expect_time.value)


def test_hits_until_entrance_impossible_union_counts_zero():
    model = markov([[0.0, 1.0], [0.5, 0.5]])
    stream = OrbitStream(model, 4)
    time, count = hits_until_entrance(stream, "11", ["00"], cap=500)
    assert not time.censored
    assert count == 0


def test_hits_until_entrance_requires_patterns():
    with pytest.raises(MixedLengths):
        hits_until_entrance(ReplayStream([0, 1]), "01", [], cap=5)


# --- orbit measure sums ------------------------------------------------------------

def test_w_sum_at_zero_equals_recurrence_time():
    for seed in range(100):
        n = 2 + (seed % 3)
        res = w_sum(OrbitStream(FAIR, seed), s=0.0, cap=5000, n=n)
        rec = recurrence_time(OrbitStream(FAIR, seed), n, cap=5000)
        assert res.terms == rec.value
        assert res.time == rec
        assert math.exp(res.log_value) == pytest.approx(res.terms, rel=1e-12)


def test_w_sum_equal_measure_windows():
    # fair coin: every window has measure 2^-n, so W = tau * 2^(-n)
    for seed in (0, 1, 2):
        res = w_sum(OrbitStream(FAIR, seed), target=(1, 1, 1, 1), s=1.0, cap=10**5)
        assert not res.time.censored
        expected = math.log(res.time.value) - 4 * math.log(2)
        assert res.log_value == pytest.approx(expected, rel=1e-12)
        assert res.terms == res.time.value


def test_w_sum_matches_naive_recomputation():
    for seed in range(20):
        res = w_sum(OrbitStream(CHAIN, seed), s=0.5, cap=10**4, n=4)
        assert not res.time.censored
        sym = sample_orbit(CHAIN, seed, res.time.value + 4)
        logs = [log_cylinder_measure(CHAIN, window_at(sym, i, 4))
                for i in range(1, res.time.value + 1)]
        assert res.log_value == pytest.approx(float(logsumexp(0.5 * np.array(logs))), abs=1e-9)
        assert window_at(sym, 0, 4) == tuple(int(x) for x in sample_orbit(CHAIN, seed, 4))


def test_w_sum_censored_keeps_partial_sum():
    res = w_sum(OrbitStream(FAIR, 0), target=(1,) * 12, s=1.0, cap=50)
    assert res.time == TimeResult(50, censored=True)
    assert res.terms == 50
    assert res.log_value == pytest.approx(math.log(50) - 12 * math.log(2), rel=1e-12)


def test_w_sum_unpacks_as_pair():
    time, log_value = w_sum(OrbitStream(FAIR, 3), s=0.0, cap=1000, n=2)
    assert time.value >= 1
    assert log_value == pytest.approx(math.log(time.value), rel=1e-12)


def test_w_sum_argument_validation():
    with pytest.raises(ValueError):
        w_sum(OrbitStream(FAIR, 0), s=-0.5, cap=10, n=2)
    with pytest.raises(ValueError):
        w_sum(OrbitStream(FAIR, 0), s=1.0, cap=10)  # diagonal needs n


def test_sliding_measure_drift_stays_tiny():
    # million-step censored scan, then recompute the final window measure
    model = bernoulli([0.7, 0.3])
    n, cap = 24, 10**6
    res = w_sum(OrbitStream(model, 9), target=(1,) * n, s=1.0, cap=cap)
    assert res.time.censored
    sym = sample_orbit(model, 9, res.terms + n)
    fresh = log_cylinder_measure(model, window_at(sym, res.terms, n))
    assert abs(res.window_log_measure - fresh) <= 1e-8

    res = w_sum(OrbitStream(CHAIN, 9), target=(0, 1) * 8, s=1.0, cap=2 * 10**5)
    assert res.time.censored
    sym = sample_orbit(CHAIN, 9, res.terms + 16)
    fresh = log_cylinder_measure(CHAIN, window_at(sym, res.terms, 16))
    assert abs(res.window_log_measure - fresh) <= 1e-8


# --- cap policy ---------------------------------------------------------------------

def test_cap_policy_default_scale():
    assert CapPolicy().cap_for(FAIR, "11") == 400  # ceil(100 / 0.25)
    assert CapPolicy(multiplier=10.0).cap_for(FAIR, "1") == 20
    assert CapPolicy(max_cap=100).cap_for(FAIR, "11") == 100


def test_cap_policy_zero_measure_target():
    model = markov([[0.0, 1.0], [0.5, 0.5]])
    with pytest.raises(ZeroMeasureTarget):
        CapPolicy().cap_for(model, "00")
