"""Entropy estimation from raw byte data.

Two estimators over a symbol sequence: window-recurrence times give
Shannon entropy (the exponent of the first repeat of an n-window scales
with the entropy rate), and plug-in n-gram frequencies give the Renyi
entropy function.  Both work on finite data, so recurrence scans can be
censored by the end of the sequence; the censored fraction is reported
and a hard error fires once it could visibly bias the median.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .errors import (
    BudgetExceeded,
    CensoringExceeded,
    EmptyInput,
    InvalidSymbol,
    IoFailure,
    NonPositiveS,
    SequenceTooShort,
)
from .orbits import ReplayStream, recurrence_time
from .rng import substream

OW_METHOD = "OW-recurrence"
PLUGIN_METHOD = "plugin-renyi"
CENSOR_LIMIT = 0.05
MIN_LENGTH_MULTIPLE = 64


# ---------------------------------------------------------------------------
# byte-to-symbol maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SymbolMap:
    """Total, deterministic map from bytes to symbol tuples."""

    mode: str
    k: int
    table: tuple | None = None  # custom mode only: 256 symbol values

    @staticmethod
    def byte_identity() -> "SymbolMap":
        return SymbolMap(mode="byte", k=256)

    @staticmethod
    def nibble() -> "SymbolMap":
        return SymbolMap(mode="nibble", k=16)

    @staticmethod
    def bits() -> "SymbolMap":
        return SymbolMap(mode="bit", k=2)

    @staticmethod
    def custom(table) -> "SymbolMap":
        values = tuple(int(v) for v in table)
        if len(values) != 256:
            raise InvalidSymbol(
                f"custom tables must map all 256 byte values, got {len(values)}"
            )
        if any(v < 0 for v in values):
            raise InvalidSymbol("custom table symbols must be >= 0")
        return SymbolMap(mode="custom", k=max(values) + 1, table=values)

    def apply(self, data: bytes) -> np.ndarray:
        raw = np.frombuffer(data, dtype=np.uint8)
        if self.mode == "byte":
            return raw.astype(np.int64)
        if self.mode == "nibble":
            out = np.empty(2 * len(raw), dtype=np.int64)
            out[0::2] = raw >> 4
            out[1::2] = raw & 0x0F
            return out
        if self.mode == "bit":
            return np.unpackbits(raw).astype(np.int64)  # MSB first
        return np.asarray(self.table, dtype=np.int64)[raw]


def named_map(name: str) -> SymbolMap:
    makers = {
        "byte": SymbolMap.byte_identity,
        "nibble": SymbolMap.nibble,
        "bit": SymbolMap.bits,
    }
    if name not in makers:
        raise InvalidSymbol(f"unknown symbol map {name!r}; expected one of {sorted(makers)}")
    return makers[name]()


def ingest(source, symbol_map: SymbolMap | None = None) -> np.ndarray:
    """Read bytes (or a file of bytes) into a symbol sequence."""
    symbol_map = symbol_map or SymbolMap.byte_identity()
    if isinstance(source, (bytes, bytearray, memoryview)):
        data = bytes(source)
    else:
        try:
            data = Path(source).read_bytes()
        except OSError as exc:
            raise IoFailure(f"cannot read {source}: {exc}") from exc
    if len(data) == 0:
        raise EmptyInput("no bytes to ingest")
    return symbol_map.apply(data)


# ---------------------------------------------------------------------------
# estimate series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimateRow:
    method: str
    n: int
    s: float | None
    estimate_nats: float
    stderr: float
    censored_fraction: float
    sample_count: int


@dataclass(frozen=True)
class EstimateSeries:
    rows: tuple

    def __post_init__(self):
        for row in self.rows:
            if row.estimate_nats < 0.0:
                raise ValueError(f"negative entropy estimate in row {row}")

    def to_csv(self, path) -> None:
        with open(Path(path), "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["method", "n", "s", "estimate_nats", "stderr",
                             "censored_fraction", "sample_count"])
            for r in self.rows:
                writer.writerow([
                    r.method, r.n,
                    "" if r.s is None else repr(float(r.s)),
                    repr(float(r.estimate_nats)), repr(float(r.stderr)),
                    repr(float(r.censored_fraction)), r.sample_count,
                ])


# ---------------------------------------------------------------------------
# recurrence-time entropy
# ---------------------------------------------------------------------------

def ow_entropy_estimate(sequence, n_list, starts_per_n: int = 200, seed: int = 0,
                        length_multiple: int = MIN_LENGTH_MULTIPLE) -> EstimateSeries:
    """Shannon entropy from the first repeats of sampled n-windows.

    For each sampled start offset the scan looks for the next occurrence
    of that offset's n-window within the remainder of the sequence; the
    estimate is the median of ``(1/n) log tau``.  Windows whose repeat
    falls past the end of the data are censored; beyond a 5% censored
    fraction the median itself is suspect and the run fails hard.
    """
    seq = np.ascontiguousarray(sequence, dtype=np.int64)
    if seq.ndim != 1 or len(seq) == 0:
        raise EmptyInput("need a non-empty 1-d symbol sequence")
    n_list = [int(n) for n in n_list]
    if not n_list or any(n < 1 for n in n_list):
        raise ValueError("n_list must hold positive window lengths")
    if starts_per_n < 1:
        raise ValueError("starts_per_n must be >= 1")
    L = len(seq)
    needed = max(n_list) * length_multiple
    if L < needed:
        raise SequenceTooShort(
            f"sequence of length {L} is shorter than {length_multiple} x max(n) = {needed}"
        )
    rows = []
    for n in n_list:
        rng = substream(seed, n)
        # keep one candidate window after every start
        top = L - 2 * n
        count = min(starts_per_n, top + 1)
        starts = np.sort(rng.choice(top + 1, size=count, replace=False))
        values = []
        censored = 0
        for i in starts:
            t = recurrence_time(ReplayStream(seq[int(i):]), n, cap=L)
            if t.censored:
                censored += 1
            else:
                values.append(math.log(t.value) / n)
        frac = censored / count
        if frac > CENSOR_LIMIT:
            raise CensoringExceeded(
                f"{frac:.1%} of n={n} windows never recur inside the data "
                f"(limit {CENSOR_LIMIT:.0%}); the sequence is too short for this n"
            )
        v = np.array(values)
        # stderr of a sample median under approximate normality
        stderr = 1.2533 * float(v.std(ddof=1)) / math.sqrt(len(v)) if len(v) > 1 else 0.0
        rows.append(EstimateRow(
            method=OW_METHOD,
            n=n,
            s=None,
            estimate_nats=float(np.median(v)) + 0.0,
            stderr=stderr,
            censored_fraction=frac,
            sample_count=count,
        ))
    return EstimateSeries(rows=tuple(rows))


# ---------------------------------------------------------------------------
# plug-in Renyi entropy
# ---------------------------------------------------------------------------

def window_counts(sequence, n: int) -> np.ndarray:
    """Occurrence counts of the distinct overlapping n-windows."""
    seq = np.ascontiguousarray(sequence, dtype=np.int64)
    if seq.ndim != 1 or len(seq) == 0:
        raise EmptyInput("need a non-empty 1-d symbol sequence")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if len(seq) < n:
        raise SequenceTooShort(f"need at least {n} symbols, have {len(seq)}")
    if seq.min() < 0:
        raise InvalidSymbol("negative symbols in sequence")
    k = int(seq.max()) + 1
    if k < 2:
        k = 2  # constant data still encodes
    if n * math.log2(k) > 64.0:
        raise BudgetExceeded(
            f"n-gram codes for k={k}, n={n} exceed 64 bits; reduce n or remap symbols"
        )
    m = len(seq) - n + 1
    codes = np.zeros(m, dtype=np.uint64)
    base = np.uint64(k)
    u = seq.astype(np.uint64)
    for j in range(n):
        codes = codes * base + u[j:j + m]
    return np.unique(codes, return_counts=True)[1]


def plugin_renyi_estimate(sequence, n: int, s: float) -> float:
    """Empirical Renyi entropy ``-(1/(s n)) log sum_w f(w)^(1+s)``.

    Overlapping windows feed the frequency table; at large n relative to
    the data the plug-in is biased upward (unseen mass) -- documented,
    not corrected.
    """
    if s <= 0.0:
        raise NonPositiveS(f"s must be > 0, got {s}")
    counts = window_counts(sequence, n)
    log_c = np.log(counts.astype(float))
    log_total = math.log(counts.sum())
    log_z = float(logsumexp((1.0 + s) * log_c)) - (1.0 + s) * log_total
    return -log_z / (s * n) + 0.0
