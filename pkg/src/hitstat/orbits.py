"""Seeded orbits and their pathwise statistics.

An ``OrbitStream`` is a lazily generated stationary sample path of a
measure model: the first symbol follows the stationary law, later ones
the conditional kernel.  Everything downstream is a deterministic
function of ``(model, seed)``; seeds may be tuples, so experiments can
hand sample ``j`` the substream ``(seed, j)`` and stay reproducible under
any parallel schedule.

Time conventions (fixed throughout the package):

* the orbit's windows are ``x_i .. x_{i+n-1}`` for ``i = 0, 1, 2, ...``;
* the entrance time into a word is the smallest ``i >= 1`` whose window
  equals it -- the window at ``i = 0`` never counts;
* hitting counts sum the indicator over ``i in [0, M]`` inclusive;
* orbit measure sums run over ``i = 1 .. tau`` inclusive.

All scans are single passes driven by a dense pattern automaton, with a
hard cap: when no event occurs within ``cap`` windows the result is
right-censored at the cap.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass

import numpy as np

from .automata import PatternAutomaton, build_automaton
from .errors import EmptyInput, MixedLengths, SequenceTooShort, ZeroMeasureTarget
from .models import (
    BernoulliModel,
    GeometricModel,
    MarkovModel,
    MeasureModel,
    log_cylinder_measure,
)
from .words import Word, as_word

BLOCK = 4096
REANCHOR_EVERY = 1 << 16

_EMPTY = np.empty(0, dtype=np.int64)


@dataclass(frozen=True)
class TimeResult:
    """An entrance/recurrence step count, or the cap when censored."""

    value: int
    censored: bool = False


@dataclass(frozen=True)
class CapPolicy:
    """Rule turning a target measure into a censoring cap.

    The default ``ceil(100 / mu(target))`` keeps at most ``exp(-100)`` of
    the mass beyond the cap under the rescaled exponential regime while
    bounding the work per sample.
    """

    multiplier: float = 100.0
    max_cap: int | None = None

    def cap_for(self, model: MeasureModel, target) -> int:
        log_mu = log_cylinder_measure(model, target)
        if log_mu == -math.inf:
            raise ZeroMeasureTarget(f"target {as_word(target)} has measure zero")
        cap = math.ceil(self.multiplier * math.exp(-log_mu))
        if self.max_cap is not None:
            cap = min(cap, self.max_cap)
        return max(int(cap), 1)


class OrbitStream:
    """Deterministic stationary sample path, read in blocks.

    Single-owner mutable state: one stream feeds one scan at a time.
    Many streams over one shared model may run concurrently.
    """

    def __init__(self, model: MeasureModel, seed):
        self.model = model
        self.seed = seed
        path = tuple(int(x) for x in seed) if isinstance(seed, tuple) else (int(seed),)
        self._rng = np.random.Generator(np.random.Philox(seed=np.random.SeedSequence(path)))
        self.position = 0
        self._buf = _EMPTY
        self._off = 0
        self._last = -1  # previous symbol, the Markov state between blocks

    def take(self, count: int) -> np.ndarray:
        """Next ``count`` symbols (always full for generated streams)."""
        if count <= 0:
            return _EMPTY
        avail = len(self._buf) - self._off
        if avail >= count:
            out = self._buf[self._off:self._off + count]
            self._off += count
        else:
            parts = [self._buf[self._off:]] if avail else []
            parts.append(self._generate(count - avail))
            self._buf = _EMPTY
            self._off = 0
            out = np.concatenate(parts) if len(parts) > 1 else parts[0]
        self.position += count
        return out

    def _generate(self, count: int) -> np.ndarray:
        model = self.model
        if isinstance(model, BernoulliModel):
            u = self._rng.random(count)
            out = np.searchsorted(model.cum_p, u, side="right").astype(np.int64)
            np.clip(out, 0, model.k - 1, out=out)
            return out
        if isinstance(model, MarkovModel):
            u = self._rng.random(count).tolist()
            rows = [row.tolist() for row in model.cum_P]
            k_top = model.k - 1
            out = np.empty(count, dtype=np.int64)
            s = self._last
            start = 0
            if s < 0:
                s = min(bisect_right(np.cumsum(model.pi).tolist(), u[0]), k_top)
                out[0] = s
                start = 1
            for t in range(start, count):
                s = bisect_right(rows[s], u[t])
                if s > k_top:
                    s = k_top
                out[t] = s
            self._last = s
            return out
        u = self._rng.random(count)
        out = np.floor(np.log1p(-u) / model.log_theta).astype(np.int64)
        np.clip(out, 0, model.truncation - 1, out=out)
        return out


class ReplayStream:
    """Stream interface over recorded symbols; exhausts with short reads."""

    def __init__(self, symbols, model: MeasureModel | None = None):
        arr = np.ascontiguousarray(symbols, dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise EmptyInput("replay data must be a non-empty 1-d symbol array")
        self.symbols = arr
        self.model = model
        self.position = 0

    @property
    def remaining(self) -> int:
        return len(self.symbols) - self.position

    def take(self, count: int) -> np.ndarray:
        out = self.symbols[self.position:self.position + max(count, 0)]
        self.position += len(out)
        return out


def sample_orbit(model: MeasureModel, seed, length: int) -> np.ndarray:
    """Finite prefix of the stationary path; deterministic in (model, seed)."""
    if length < 1:
        raise ValueError(f"length must be >= 1, got {length}")
    return OrbitStream(model, seed).take(length)


# ---------------------------------------------------------------------------
# scan helpers
# ---------------------------------------------------------------------------

def _alphabet_size(model: MeasureModel | None) -> int | None:
    if model is None or isinstance(model, GeometricModel):
        return None
    return model.k


def _column_view(auto: PatternAutomaton):
    """Block-to-columns mapper; identity for finite alphabets."""
    if auto.other_col is None:
        return lambda chunk: chunk.tolist()
    # clip one slot past the largest pattern symbol: that slot, like every
    # non-pattern symbol, carries the fallback column
    top = max(auto.columns) + 1
    arr = auto.column_array(top)
    return lambda chunk: arr[np.minimum(chunk, top)].tolist()


def _resolve_cap(model: MeasureModel | None, target, cap) -> int:
    if model is not None and log_cylinder_measure(model, target) == -math.inf:
        raise ZeroMeasureTarget(f"target {as_word(target)} has measure zero")
    if cap is None:
        if model is None:
            raise ValueError("replay streams without a model need an explicit cap")
        return CapPolicy().cap_for(model, target)
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    return int(cap)


def entrance_time(stream, target, cap: int | None = None) -> TimeResult:
    """First step ``i in [1, cap]`` whose window matches ``target``.

    Consumes at most ``cap + n`` symbols from the stream; a match in the
    window at ``i = 0`` does not count.  Without an explicit ``cap`` the
    default ``CapPolicy`` is applied to the target's measure.
    """
    target = as_word(target)
    cap = _resolve_cap(stream.model, target, cap)
    auto = build_automaton([target], alphabet_size=_alphabet_size(stream.model))
    return _entrance_scan(stream, auto, cap)


def recurrence_time(stream, n: int, cap: int | None = None) -> TimeResult:
    """Entrance time of the stream into its own first ``n`` symbols."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    head = stream.take(n)
    if len(head) < n:
        raise SequenceTooShort(f"needed {n} symbols for the initial window")
    prefix = tuple(int(x) for x in head)
    cap = _resolve_cap(stream.model, prefix, cap)
    auto = build_automaton([prefix], alphabet_size=_alphabet_size(stream.model))
    return _entrance_scan(stream, auto, cap, preamble=head)


def _entrance_scan(stream, auto: PatternAutomaton, cap: int,
                   preamble: np.ndarray | None = None) -> TimeResult:
    n = auto.word_length
    table, terminal = auto.table, auto.terminal
    to_cols = _column_view(auto)
    budget = cap + n - (0 if preamble is None else len(preamble))
    state = 0
    j = -1
    chunk = preamble if preamble is not None else None
    while True:
        if chunk is None:
            if budget <= 0:
                return TimeResult(value=cap, censored=True)
            chunk = stream.take(min(BLOCK, budget))
            budget -= len(chunk)
            if len(chunk) == 0:
                scanned = j - n + 1
                if scanned < 1:
                    raise SequenceTooShort("data ends before the first candidate window")
                return TimeResult(value=scanned, censored=True)
        for c in to_cols(chunk):
            j += 1
            state = table[state][c]
            if terminal[state] >= 0 and j >= n:
                return TimeResult(value=j - n + 1, censored=False)
        chunk = None


def hitting_number(stream, patterns, M: int) -> int:
    """Number of steps ``i in [0, M]`` whose window lies in ``patterns``."""
    if M < 0:
        raise ValueError(f"window bound must be >= 0, got {M}")
    auto = build_automaton(patterns, alphabet_size=_alphabet_size(stream.model))
    table, terminal = auto.table, auto.terminal
    to_cols = _column_view(auto)
    need = M + auto.word_length
    state = 0
    count = 0
    while need > 0:
        chunk = stream.take(min(BLOCK, need))
        if len(chunk) == 0:
            raise SequenceTooShort(f"needed {need} more symbols to cover the window range")
        need -= len(chunk)
        for c in to_cols(chunk):
            state = table[state][c]
            if terminal[state] >= 0:
                count += 1
    return count


def hits_until_entrance(stream, target, patterns, cap: int | None = None) -> tuple[TimeResult, int]:
    """Entrance time into ``target`` plus hit count of ``patterns`` on ``[0, tau]``.

    One streaming pass over a combined automaton.  When censored, the
    count covers ``i in [0, cap]``.
    """
    target = as_word(target)
    pats = [as_word(p) for p in patterns]
    if not pats:
        raise MixedLengths("need at least one pattern word")
    words = list(dict.fromkeys(pats))
    if target not in words:
        words.append(target)
    auto = build_automaton(words, alphabet_size=_alphabet_size(stream.model))
    cap = _resolve_cap(stream.model, target, cap)
    pat_set = set(pats)
    in_u = [w in pat_set for w in auto.words]
    is_target = [w == target for w in auto.words]
    n = auto.word_length
    table, terminal = auto.table, auto.terminal
    to_cols = _column_view(auto)
    budget = cap + n
    state = 0
    j = -1
    count = 0
    while budget > 0:
        chunk = stream.take(min(BLOCK, budget))
        if len(chunk) == 0:
            scanned = j - n + 1
            if scanned < 1:
                raise SequenceTooShort("data ends before the first candidate window")
            return TimeResult(value=scanned, censored=True), count
        budget -= len(chunk)
        for c in to_cols(chunk):
            j += 1
            state = table[state][c]
            w = terminal[state]
            if w >= 0:
                if in_u[w]:
                    count += 1
                if is_target[w] and j >= n:
                    return TimeResult(value=j - n + 1, censored=False), count
    return TimeResult(value=cap, censored=True), count


# ---------------------------------------------------------------------------
# orbit measure sums
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitSumResult:
    """Streaming sum of ``mu(window_i)**s`` over ``i = 1 .. tau``.

    ``terms`` is the exact number of summands; at ``s = 0`` every
    summand is one, so ``terms`` *is* the sum (and equals the entrance
    step).  ``window_log_measure`` is the maintained log-measure of the
    final window, kept for drift audits against fresh recomputation.
    Iterating yields ``(time, log_value)``.
    """

    time: TimeResult
    log_value: float
    terms: int
    s: float
    window_log_measure: float

    def __iter__(self):
        return iter((self.time, self.log_value))


def w_sum(stream, target=None, s: float = 0.0, cap: int | None = None,
          n: int | None = None) -> OrbitSumResult:
    """Accumulate ``sum_i mu(x_i..x_{i+n-1})**s`` until entrance into ``target``.

    ``target=None`` selects the diagonal variant: the target is the
    stream's own first ``n`` symbols (then ``n`` is required).  The
    window log-measure slides in O(1) per step and is re-anchored by a
    fresh recomputation every ``2**16`` steps, so accumulated float
    drift stays below 1e-8 even on million-step scans.
    """
    model = stream.model
    if model is None:
        raise ValueError("orbit measure sums need a measure model")
    if s < 0.0:
        raise ValueError(f"s must be >= 0, got {s}")

    if target is None:
        if n is None:
            raise ValueError("diagonal variant needs the window length n")
        head = stream.take(n)
        if len(head) < n:
            raise SequenceTooShort(f"needed {n} symbols for the initial window")
        target = tuple(int(x) for x in head)
    else:
        target = as_word(target)
        n = len(target)
        head = stream.take(n)
        if len(head) < n:
            raise SequenceTooShort(f"needed {n} symbols for the initial window")

    cap = _resolve_cap(model, target, cap)
    auto = build_automaton([target], alphabet_size=_alphabet_size(model))
    table, terminal = auto.table, auto.terminal
    to_cols = _column_view(auto)

    win = deque(int(x) for x in head)
    state = 0
    for c in to_cols(np.asarray(head)):
        state = table[state][c]

    kind, tab1, tab2 = _measure_tables(model)
    log_mu = _window_log_measure(model, win)

    # streaming log-sum-exp state
    run_max = -math.inf
    run_sum = 0.0
    terms = 0
    budget = cap  # one new symbol per candidate window i = 1..cap
    censored = True
    tau = cap
    while budget > 0:
        chunk = stream.take(min(BLOCK, budget))
        if len(chunk) == 0:
            if terms < 1:
                raise SequenceTooShort("data ends before the first candidate window")
            tau = terms
            break
        budget -= len(chunk)
        cols = to_cols(chunk)
        for b, c in zip(chunk.tolist(), cols):
            a = win[0]
            if kind == 0:
                log_mu += tab1[b] - tab1[a]
            elif kind == 1:
                if len(win) == 1:
                    log_mu = tab1[b]
                else:
                    h1 = win[1]
                    log_mu += tab1[h1] + tab2[win[-1]][b] - tab1[a] - tab2[a][h1]
            else:
                log_mu += (b - a) * tab1
            win.popleft()
            win.append(b)
            terms += 1
            if terms % REANCHOR_EVERY == 0:
                log_mu = _window_log_measure(model, win)
            assert log_mu > -math.inf, "zero-measure window on a realized orbit"
            term = s * log_mu
            if term <= run_max:
                run_sum += math.exp(term - run_max)
            else:
                run_sum = run_sum * math.exp(run_max - term) + 1.0
                run_max = term
            state = table[state][c]
            if terminal[state] >= 0:
                tau = terms
                censored = False
                budget = 0
                break

    log_value = run_max + math.log(run_sum) if terms else -math.inf
    return OrbitSumResult(
        time=TimeResult(value=tau, censored=censored),
        log_value=log_value,
        terms=terms,
        s=s,
        window_log_measure=log_mu,
    )


def _measure_tables(model: MeasureModel):
    if isinstance(model, BernoulliModel):
        return 0, model.log_p.tolist(), None
    if isinstance(model, MarkovModel):
        return 1, model.log_pi.tolist(), [row.tolist() for row in model.log_P]
    return 2, model.log_theta, None


def _window_log_measure(model: MeasureModel, win) -> float:
    """Fresh log-measure of the window symbols, no validation overhead."""
    if isinstance(model, BernoulliModel):
        logp = model.log_p
        return float(sum(logp[a] for a in win))
    if isinstance(model, MarkovModel):
        seq = list(win)
        total = float(model.log_pi[seq[0]])
        log_P = model.log_P
        for a, b in zip(seq, seq[1:]):
            total += float(log_P[a][b])
        return total
    return len(win) * model.log_one_minus_theta + sum(win) * model.log_theta
