"""Shift-invariant measures on symbol sequences and their entropies.

Three model families are supported, each giving an ergodic stationary
measure on one-sided sequences over a symbolic alphabet:

* ``BernoulliModel`` -- i.i.d. symbols with distribution ``p`` on a finite
  alphabet.
* ``MarkovModel`` -- an irreducible aperiodic finite-state chain ``P``
  started from its stationary vector ``pi``.
* ``GeometricModel`` -- i.i.d. symbols on the countable alphabet
  ``{0, 1, 2, ...}`` with masses ``(1 - theta) * theta**j``.  This is the
  standard witness for an infinite partition whose tail mass decays
  geometrically.

The measure of the cylinder set fixing the first ``n`` symbols to a word
``w`` is ``mu(w)``; all measures are handled in natural-log space (nats)
so that long cylinders never underflow.  The key scalar summaries are the
Shannon entropy rate ``h`` and the Renyi-type rate

    R(s) = lim_n (1/(s*n)) * |log Z_n(s)|,    Z_n(s) = sum_w mu(w)**(1+s),

with the sum over all n-cylinders.  For i.i.d. models ``Z_n`` factorizes,
giving ``R(s) = -(1/s) * log sum_i p_i**(1+s)``; for Markov models
``R(s) = -(1/s) * log lambda(s)`` where ``lambda(s)`` is the Perron root
of the entrywise power matrix ``P**(1+s)``.
"""
from __future__ import annotations

import hashlib
import json
import math
import warnings
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.special import logsumexp

from .errors import (
    BadThetaRange,
    BudgetExceeded,
    ContractionDegenerate,
    InvalidSymbol,
    NonPositiveS,
    NonStochasticRow,
    PowerIterationNoConvergence,
    ReducibleChain,
    ZeroMassSymbol,
)
from .words import Word, as_word

_SUM_TOL = 1e-12          # row/vector stochasticity tolerance
_STATIONARY_TOL = 1e-10   # accepted residual for a supplied stationary vector
_LOG_ZERO = float("-inf")


# ---------------------------------------------------------------------------
# model types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BernoulliModel:
    """I.i.d. symbols on ``{0, ..., k-1}`` with strictly positive masses."""

    p: np.ndarray

    @property
    def k(self) -> int:
        return int(self.p.shape[0])

    @cached_property
    def log_p(self) -> np.ndarray:
        return np.log(self.p)

    @cached_property
    def cum_p(self) -> np.ndarray:
        return np.cumsum(self.p)


@dataclass(frozen=True, eq=False)
class MarkovModel:
    """Irreducible aperiodic chain ``P`` with stationary vector ``pi``."""

    P: np.ndarray
    pi: np.ndarray

    @property
    def k(self) -> int:
        return int(self.P.shape[0])

    @cached_property
    def log_P(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.where(self.P > 0.0, np.log(np.where(self.P > 0.0, self.P, 1.0)), _LOG_ZERO)

    @cached_property
    def log_pi(self) -> np.ndarray:
        return np.log(self.pi)

    @cached_property
    def cum_P(self) -> np.ndarray:
        return np.cumsum(self.P, axis=1)


@dataclass(frozen=True, eq=False)
class GeometricModel:
    """I.i.d. symbols on ``{0, 1, 2, ...}`` with masses ``(1-theta)*theta**j``.

    ``truncation`` only bounds *sampling*: symbols are clipped to
    ``truncation - 1``, losing mass below the construction-time residual
    target.  Measures and entropies always use the exact infinite law.
    """

    theta: float
    truncation: int

    @property
    def k(self) -> None:
        return None  # countable alphabet

    @cached_property
    def log_theta(self) -> float:
        return math.log(self.theta)

    @cached_property
    def log_one_minus_theta(self) -> float:
        return math.log1p(-self.theta)


MeasureModel = Union[BernoulliModel, MarkovModel, GeometricModel]


# ---------------------------------------------------------------------------
# construction and validation
# ---------------------------------------------------------------------------

def bernoulli(p) -> BernoulliModel:
    """Validated i.i.d. model from a probability vector."""
    model = BernoulliModel(p=np.asarray(p, dtype=float))
    validate(model)
    return model


def markov(P, pi=None) -> MarkovModel:
    """Validated Markov model; computes the stationary vector when omitted."""
    P = np.asarray(P, dtype=float)
    _check_kernel(P)
    if pi is None:
        pi = stationary_distribution(P)
    model = MarkovModel(P=P, pi=np.asarray(pi, dtype=float))
    validate(model)
    return model


def geometric(theta: float, residual_mass: float = 1e-15) -> GeometricModel:
    """Validated countable-alphabet model with geometric symbol masses.

    The sampling truncation level is the smallest ``L`` with
    ``theta**L < residual_mass``.
    """
    if not (0.0 < theta < 1.0):
        raise BadThetaRange(f"theta must lie in (0, 1), got {theta}")
    truncation = max(1, math.ceil(math.log(residual_mass) / math.log(theta)))
    model = GeometricModel(theta=float(theta), truncation=truncation)
    validate(model)
    return model


def validate(model: MeasureModel) -> None:
    """Check every structural invariant of ``model``; raise on failure.

    Bernoulli: masses positive, summing to one, alphabet size >= 2.
    Markov: rows stochastic, kernel irreducible and aperiodic, supplied
    ``pi`` stationary.  Geometric: ``theta`` in (0, 1).  Degenerate
    (zero-entropy) models cannot pass: they are either reducible,
    periodic, or carry a zero-mass symbol.
    """
    if isinstance(model, BernoulliModel):
        p = model.p
        if p.ndim != 1 or p.shape[0] < 2:
            raise ZeroMassSymbol("need a probability vector over at least 2 symbols")
        if np.any(p <= 0.0):
            raise ZeroMassSymbol("every symbol must have positive mass")
        if abs(float(p.sum()) - 1.0) > _SUM_TOL:
            raise NonStochasticRow(f"masses sum to {p.sum()!r}, not 1")
    elif isinstance(model, MarkovModel):
        _check_kernel(model.P)
        pi = model.pi
        if pi.shape != (model.k,) or np.any(pi <= 0.0):
            raise NonStochasticRow("stationary vector must be positive over all states")
        if abs(float(pi.sum()) - 1.0) > _SUM_TOL:
            raise NonStochasticRow(f"stationary vector sums to {pi.sum()!r}, not 1")
        residual = float(np.max(np.abs(pi @ model.P - pi)))
        if residual > _STATIONARY_TOL:
            raise NonStochasticRow(f"pi P = pi violated by {residual:.3e}")
    elif isinstance(model, GeometricModel):
        if not (0.0 < model.theta < 1.0):
            raise BadThetaRange(f"theta must lie in (0, 1), got {model.theta}")
        if model.truncation < 1:
            raise BadThetaRange("sampling truncation must be >= 1")
    else:
        raise TypeError(f"not a measure model: {model!r}")


def _check_kernel(P: np.ndarray) -> None:
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
        raise ReducibleChain("kernel must be square with at least 2 states")
    if np.any(P < 0.0):
        raise NonStochasticRow("kernel entries must be non-negative")
    row_err = np.abs(P.sum(axis=1) - 1.0)
    if np.any(row_err > _SUM_TOL):
        bad = int(np.argmax(row_err))
        raise NonStochasticRow(f"row {bad} sums to {P[bad].sum()!r}, not 1")
    support = P > 0.0
    n_comp, _ = connected_components(csr_matrix(support), directed=True, connection="strong")
    if n_comp != 1:
        raise ReducibleChain(f"kernel has {n_comp} strongly connected components")
    period = _graph_period(support)
    if period != 1:
        raise ReducibleChain(f"kernel is periodic with period {period}")


def _graph_period(support: np.ndarray) -> int:
    """Period (gcd of cycle lengths) of a strongly connected digraph."""
    adj = [np.nonzero(row)[0] for row in support]
    depth = {0: 0}
    g = 0
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            v = int(v)
            if v not in depth:
                depth[v] = depth[u] + 1
                queue.append(v)
            else:
                g = math.gcd(g, depth[u] + 1 - depth[v])
    return abs(g)


def stationary_distribution(P: np.ndarray, tol: float = 1e-13, max_iter: int = 1_000_000) -> np.ndarray:
    """Stationary vector of an irreducible kernel by damped power iteration.

    Iterates ``pi <- pi (P + I) / 2``; the damping makes the iteration
    matrix primitive even for nearly periodic chains, so convergence is
    guaranteed.  Stops on the fixed-point residual ``max|pi P - pi|``,
    which certifies the answer rather than mere stagnation.  Raises
    ``PowerIterationNoConvergence`` past ``max_iter``.
    """
    P = np.asarray(P, dtype=float)
    k = P.shape[0]
    pi = np.full(k, 1.0 / k)
    for _ in range(max_iter):
        step = pi @ P
        if float(np.abs(step - pi).max()) <= tol:
            return pi
        pi = 0.5 * (step + pi)
        pi /= pi.sum()
    raise PowerIterationNoConvergence(f"stationary vector not converged in {max_iter} iterations")


# ---------------------------------------------------------------------------
# cylinder measures
# ---------------------------------------------------------------------------

def check_symbols(model: MeasureModel, word: Word) -> Word:
    """Validate that every symbol of ``word`` lies in the model's alphabet."""
    word = as_word(word)
    k = model.k
    if k is not None and any(s >= k for s in word):
        raise InvalidSymbol(f"symbol out of range for alphabet of size {k}: {word}")
    return word


def log_cylinder_measure(model: MeasureModel, word) -> float:
    """``log mu([w])`` in nats; ``-inf`` for a zero-measure word."""
    w = check_symbols(model, word)
    if isinstance(model, BernoulliModel):
        return float(model.log_p[list(w)].sum())
    if isinstance(model, MarkovModel):
        idx = np.asarray(w, dtype=np.intp)
        total = float(model.log_pi[idx[0]])
        if idx.shape[0] > 1:
            total += float(model.log_P[idx[:-1], idx[1:]].sum())
        return total
    return len(w) * model.log_one_minus_theta + sum(w) * model.log_theta


def cylinder_measure(model: MeasureModel, word) -> float:
    """``mu([w])``, the plain-space cylinder measure."""
    return math.exp(log_cylinder_measure(model, word))


def next_symbol_distribution(model: MeasureModel, prev: int | None = None):
    """Law of the next symbol, stationary when ``prev`` is omitted.

    Finite models return a mass vector; the countable model returns a
    ``GeometricLaw`` sampler since its support is infinite.
    """
    if isinstance(model, BernoulliModel):
        return model.p.copy()
    if isinstance(model, MarkovModel):
        if prev is None:
            return model.pi.copy()
        if not (0 <= prev < model.k):
            raise InvalidSymbol(f"state out of range: {prev}")
        return model.P[prev].copy()
    if prev is not None and prev < 0:
        raise InvalidSymbol(f"symbol out of range: {prev}")
    return GeometricLaw(theta=model.theta, truncation=model.truncation)


@dataclass(frozen=True)
class GeometricLaw:
    """Parametric next-symbol law for the countable model."""

    theta: float
    truncation: int

    def pmf(self, j: int) -> float:
        return (1.0 - self.theta) * self.theta**j if j >= 0 else 0.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        raw = np.floor(np.log1p(-u) / math.log(self.theta)).astype(np.int64)
        return np.minimum(raw, self.truncation - 1)


# ---------------------------------------------------------------------------
# entropies
# ---------------------------------------------------------------------------

def shannon_entropy(model: MeasureModel) -> float:
    """Entropy rate ``h`` in nats per symbol.

    Bernoulli: ``-sum p log p``.  Markov: ``sum_i pi_i * H(P[i, :])``.
    Geometric: ``-log(1-theta) - theta/(1-theta) * log theta`` (closed
    form of the series).
    """
    if isinstance(model, BernoulliModel):
        return float(-(model.p * model.log_p).sum())
    if isinstance(model, MarkovModel):
        row_entropy = -np.where(model.P > 0.0, model.P * model.log_P, 0.0).sum(axis=1)
        return float(model.pi @ row_entropy)
    t = model.theta
    return -math.log1p(-t) - t / (1.0 - t) * math.log(t)


def renyi_entropy(model: MeasureModel, s: float, rel_tol: float = 1e-12,
                  max_iter: int = 100_000) -> float:
    """Renyi-type rate ``R(s)`` for ``s > 0``.

    I.i.d. models use the closed form ``-(1/s) log sum_i p_i**(1+s)``
    (series summation for the countable model).  Markov models use the
    Perron root of the entrywise power kernel ``P**(1+s)``, found by
    power iteration to relative tolerance ``rel_tol``.  The stationary
    factor ``pi**(1+s)`` in ``Z_n`` only shifts the prefactor, never the
    exponential rate; ``partition_sum_exact`` checks this numerically.
    """
    if s <= 0.0:
        raise NonPositiveS(f"s must be > 0, got {s}")
    if isinstance(model, BernoulliModel):
        return float(-logsumexp((1.0 + s) * model.log_p) / s)
    if isinstance(model, MarkovModel):
        lam = _perron_root(model.P ** (1.0 + s), rel_tol=rel_tol, max_iter=max_iter)
        return -math.log(lam) / s
    t = model.theta
    log_z1 = (1.0 + s) * math.log1p(-t) - math.log1p(-(t ** (1.0 + s)))
    return -log_z1 / s


def _perron_root(Q: np.ndarray, rel_tol: float = 1e-12, max_iter: int = 100_000) -> float:
    """Leading eigenvalue of a primitive non-negative matrix."""
    v = np.full(Q.shape[0], 1.0 / Q.shape[0])
    lam_prev = 0.0
    settled = 0
    for _ in range(max_iter):
        w = v @ Q
        lam = float(w.sum())
        if lam <= 0.0:
            raise PowerIterationNoConvergence("iterate collapsed to zero mass")
        w /= lam
        settled = settled + 1 if abs(lam - lam_prev) <= rel_tol * lam else 0
        if settled >= 2:
            return lam
        lam_prev = lam
        v = w
    raise PowerIterationNoConvergence(f"no convergence in {max_iter} iterations")


def partition_sum_exact(model: MeasureModel, n: int, s: float, budget: int = 10**8) -> float:
    """``log Z_n(s) = log sum_w mu([w])**(1+s)`` over all n-cylinders.

    Bernoulli models enumerate all ``k**n`` cylinders (log-sum-exp over
    materialized chunks), refusing beyond ``budget`` with
    ``BudgetExceeded``.  Markov models need no enumeration: ``Z_n`` is a
    bilinear form in powers of the entrywise kernel ``P**(1+s)``, applied
    as repeated log-space matrix-vector products.  The countable model
    sums its series in closed form; independence makes the n-fold
    factorization exact.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if s <= 0.0:
        raise NonPositiveS(f"s must be > 0, got {s}")
    if isinstance(model, BernoulliModel):
        return _enumerated_log_partition(model.log_p, n, s, budget)
    if isinstance(model, MarkovModel):
        power = 1.0 + s
        log_Q = np.where(model.P > 0.0, power * model.log_P, _LOG_ZERO)
        lv = power * model.log_pi
        for _ in range(n - 1):
            lv = logsumexp(lv[:, None] + log_Q, axis=0)
        return float(logsumexp(lv))
    t = model.theta
    log_z1 = (1.0 + s) * math.log1p(-t) - math.log1p(-(t ** (1.0 + s)))
    return n * log_z1


def _enumerated_log_partition(log_p: np.ndarray, n: int, s: float, budget: int) -> float:
    k = log_p.shape[0]
    total = k**n
    if total > budget:
        raise BudgetExceeded(f"{k}**{n} = {total} cylinders exceeds budget {budget}")
    base = (1.0 + s) * log_p
    # materialize suffix blocks of at most 2**20 words, walk prefixes in python
    block_len = 1
    while block_len < n and k ** (block_len + 1) <= 2**20:
        block_len += 1
    suffix = base.copy()
    for _ in range(block_len - 1):
        suffix = (suffix[:, None] + base[None, :]).ravel()
    if block_len == n:
        return float(logsumexp(suffix))
    prefix = np.zeros(1)
    for _ in range(n - block_len):
        prefix = (prefix[:, None] + base[None, :]).ravel()
    chunks = [float(logsumexp(pl + suffix)) for pl in prefix]
    return float(logsumexp(np.array(chunks)))


def partition_slope(model: MeasureModel, n: int, s: float, budget: int = 10**8) -> float:
    """Finite-n rate ``(1/(s*n)) * |log Z_n(s)|`` from the exact partition sum."""
    log_z = partition_sum_exact(model, n, s, budget=budget)
    return abs(log_z) / (s * n)


# ---------------------------------------------------------------------------
# mixing and tail certificates
# ---------------------------------------------------------------------------

def phi_bound(model: MeasureModel, gap: int) -> float:
    """Certified upper bound on the phi-mixing coefficient at ``gap``.

    I.i.d. models are exactly independent across any gap, so the bound is
    zero.  Markov models get the one-step contraction certificate
    ``C * rho**gap`` with ``rho = 1 - sum_j min_i P[i, j]`` (Dobrushin
    coefficient) and ``C = max_j 1/pi_j``.  Geometric decay makes the
    sequence summable, which is the standing mixing hypothesis for the
    exponential entrance-law and orbit-sum limits.  When ``rho == 1`` the
    bound cannot decay; a ``ContractionDegenerate`` warning is issued and
    the constant is returned as a (vacuous) bound.
    """
    if gap < 0:
        raise ValueError(f"gap must be >= 0, got {gap}")
    if isinstance(model, (BernoulliModel, GeometricModel)):
        return 0.0
    rho = 1.0 - float(model.P.min(axis=0).sum())
    c = float(1.0 / model.pi.min())
    if rho >= 1.0 - 1e-15:
        warnings.warn("contraction coefficient is 1; mixing bound does not decay",
                      ContractionDegenerate, stacklevel=2)
        return c
    return c * rho**gap


@dataclass(frozen=True)
class TailDecay:
    """Tail behaviour of the one-symbol partition.

    ``trivially_satisfied`` marks finite alphabets, where any decay
    requirement on the partition tail holds vacuously.  For the countable
    model ``delta`` is the geometric ratio: the mass of partition cells of
    rank >= j is ``delta**(j-1)``.
    """

    trivially_satisfied: bool
    delta: float | None


def tail_decay(model: MeasureModel) -> TailDecay:
    """Tail-decay certificate for the symbol partition."""
    if isinstance(model, GeometricModel):
        return TailDecay(trivially_satisfied=False, delta=model.theta)
    return TailDecay(trivially_satisfied=True, delta=None)


def tail_mass(model: MeasureModel, j: int) -> float:
    """Total mass of partition cells with (1-based) rank >= ``j``.

    For the geometric model this is ``theta**(j-1)``; for finite models it
    is the sum of the trailing masses in index order.
    """
    if j < 1:
        raise ValueError(f"rank must be >= 1, got {j}")
    if isinstance(model, GeometricModel):
        return model.theta ** (j - 1)
    if isinstance(model, BernoulliModel):
        return float(model.p[j - 1:].sum())
    return float(model.pi[j - 1:].sum())


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def model_to_dict(model: MeasureModel) -> dict:
    """JSON-ready description of ``model``."""
    if isinstance(model, BernoulliModel):
        return {"kind": "bernoulli", "p": [float(x) for x in model.p]}
    if isinstance(model, MarkovModel):
        return {
            "kind": "markov",
            "P": [[float(x) for x in row] for row in model.P],
            "pi": [float(x) for x in model.pi],
        }
    return {"kind": "geometric", "theta": float(model.theta)}


def model_from_dict(spec: dict) -> MeasureModel:
    """Build and validate a model from its JSON description.

    Recognized shapes: ``{"kind": "bernoulli", "p": [...]}``,
    ``{"kind": "markov", "P": [[...]], "pi": [...](optional)}`` and
    ``{"kind": "geometric", "theta": x}``.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("model spec must be a dict with a 'kind' key")
    kind = spec["kind"]
    if kind == "bernoulli":
        if "p" not in spec:
            raise ValueError("bernoulli spec needs 'p'")
        return bernoulli(spec["p"])
    if kind == "markov":
        if "P" not in spec:
            raise ValueError("markov spec needs 'P'")
        return markov(spec["P"], pi=spec.get("pi"))
    if kind == "geometric":
        if "theta" not in spec:
            raise ValueError("geometric spec needs 'theta'")
        return geometric(float(spec["theta"]))
    raise ValueError(f"unknown model kind: {kind!r}")


def load_model(path) -> MeasureModel:
    """Read a model spec from a JSON file."""
    with open(Path(path), "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def model_fingerprint(model: MeasureModel) -> str:
    """Short stable hash identifying the model parameters."""
    blob = json.dumps(model_to_dict(model), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# built-in models
# ---------------------------------------------------------------------------

def fair_coin() -> BernoulliModel:
    return bernoulli([0.5, 0.5])


def biased_coin() -> BernoulliModel:
    return bernoulli([0.7, 0.3])


def two_state_chain() -> MarkovModel:
    return markov([[0.9, 0.1], [0.2, 0.8]])


def geometric_half() -> GeometricModel:
    return geometric(0.5)


BUILTIN_MODELS = {
    "fair-coin": fair_coin,
    "biased-coin": biased_coin,
    "two-state-chain": two_state_chain,
    "geometric-half": geometric_half,
}

# finite-alphabet subset: entrance times into typical n-cylinders stay
# simulable (the countable model has E[1/mu(A_n)] = infinity, so long-run
# exponent experiments at large n are not affordable there)
BUILTIN_FINITE = ("fair-coin", "biased-coin", "two-state-chain")


def builtin_model(name: str) -> MeasureModel:
    try:
        return BUILTIN_MODELS[name]()
    except KeyError:
        raise ValueError(f"unknown built-in model {name!r}") from None
