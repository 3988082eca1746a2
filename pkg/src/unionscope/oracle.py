"""Set-oracle contract: approximate sizes, biased generators, batched membership.

An input set is a black box that reports an approximate size m_i, draws a
(possibly biased) random element, and answers batched membership queries.
Explicit in-memory sets with synthetic bias injection serve as the reference
realization; lattice-ball oracles live in `ball_union`.
"""

from __future__ import annotations

import math
import threading
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .rng import RandomStream, randbelow

# An element is an opaque integer id or a lattice point (tuple of ints).
ElementId = Union[int, tuple]


class OracleError(ValueError):
    pass


@dataclass(frozen=True)
class BiasSpec:
    """Generator bias (alpha_l, alpha_r) and size bias (beta_l, beta_r).

    Per-element generation probability is confined to
    [(1-alpha_l)/|A|, (1+alpha_r)/|A|] and the reported size to
    [(1-beta_l)|A|, (1+beta_r)|A|].
    """

    alpha_l: float = 0.0
    alpha_r: float = 0.0
    beta_l: float = 0.0
    beta_r: float = 0.0

    def __post_init__(self):
        for name in ("alpha_l", "alpha_r", "beta_l", "beta_r"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise OracleError(f"bias field {name}={v} outside [0, 1)")

    @property
    def is_zero(self) -> bool:
        return self.alpha_l == self.alpha_r == self.beta_l == self.beta_r == 0.0

    def merge_worst(self, other: "BiasSpec") -> "BiasSpec":
        """Component-wise maximum; used when mixing oracle families."""
        return BiasSpec(
            max(self.alpha_l, other.alpha_l),
            max(self.alpha_r, other.alpha_r),
            max(self.beta_l, other.beta_l),
            max(self.beta_r, other.beta_r),
        )


class SetOracle(ABC):
    """One input set: approximate size, biased generator, batched membership.

    Oracles are immutable after construction; the instrumentation counters are
    guarded by a lock so concurrent batched queries stay consistent.
    Generators take an explicit caller stream, never shared mutable state.
    """

    def __init__(self, approx_size: int):
        if approx_size < 1:
            raise OracleError(f"approx_size must be >= 1, got {approx_size}")
        self.approx_size = int(approx_size)
        self._lock = threading.Lock()
        self.sample_count = 0
        self.query_count = 0

    def _count_samples(self, n: int) -> None:
        with self._lock:
            self.sample_count += n

    def _count_queries(self, n: int) -> None:
        with self._lock:
            self.query_count += n

    @abstractmethod
    def random_element(self, rng: RandomStream) -> ElementId:
        """Draw one element of the set (biased at most per the declared spec)."""

    def random_elements(self, rng: RandomStream, size: int) -> list:
        return [self.random_element(rng) for _ in range(size)]

    @abstractmethod
    def contains_batch(self, queries: Sequence[ElementId]) -> list[bool]:
        """Order-preserving membership answers; counts |queries| queries."""


class ExplicitSetOracle(SetOracle):
    """In-memory set with a fixed per-element generation distribution."""

    def __init__(self, elements: Sequence[ElementId], approx_size: int, probs: np.ndarray):
        super().__init__(approx_size)
        self.elements = tuple(elements)
        self.true_size = len(self.elements)
        self._members = set(self.elements)
        self.probabilities = np.asarray(probs, dtype=float)
        if abs(float(self.probabilities.sum()) - 1.0) > 1e-9:
            raise OracleError("generator probabilities must sum to 1")
        self._cum = np.cumsum(self.probabilities)
        self._cum[-1] = 1.0

    def random_element(self, rng: RandomStream) -> ElementId:
        self._count_samples(1)
        idx = int(np.searchsorted(self._cum, rng.gen.random(), side="right"))
        return self.elements[min(idx, self.true_size - 1)]

    def random_elements(self, rng: RandomStream, size: int) -> list:
        if size == 0:
            return []
        self._count_samples(size)
        idx = np.searchsorted(self._cum, rng.gen.random(size), side="right")
        idx = np.minimum(idx, self.true_size - 1)
        return [self.elements[i] for i in idx]

    def contains_batch(self, queries: Sequence[ElementId]) -> list[bool]:
        self._count_queries(len(queries))
        return [q in self._members for q in queries]


def make_biased_explicit_set(
    elements: Iterable[ElementId],
    bias: BiasSpec,
    rng: RandomStream,
) -> ExplicitSetOracle:
    """Build an explicit oracle realizing the declared bias envelope.

    The reported size is drawn once from [(1-beta_l)n, (1+beta_r)n].  The
    generator perturbs the uniform distribution by per-element factors drawn
    once at construction, renormalizes, and redraws (with shrinking
    perturbation) until every probability sits inside
    [(1-alpha_l)/n, (1+alpha_r)/n], so the bias bounds are certified.
    """
    elems = list(dict.fromkeys(elements))
    n = len(elems)
    if n == 0:
        raise OracleError("explicit set needs at least one element")

    lo_size = max(1, math.ceil((1.0 - bias.beta_l) * n))
    hi_size = max(lo_size, math.floor((1.0 + bias.beta_r) * n))
    if bias.beta_l == 0.0 and bias.beta_r == 0.0:
        m_i = n
    else:
        m_i = lo_size + randbelow(rng.gen, hi_size - lo_size + 1)

    lo_p, hi_p = (1.0 - bias.alpha_l) / n, (1.0 + bias.alpha_r) / n
    if bias.alpha_l == 0.0 and bias.alpha_r == 0.0:
        probs = np.full(n, 1.0 / n)
    else:
        shrink = 1.0
        for _ in range(1000):
            factors = rng.gen.uniform(
                1.0 - shrink * bias.alpha_l, 1.0 + shrink * bias.alpha_r, size=n
            )
            probs = factors / factors.sum()
            if probs.min() >= lo_p and probs.max() <= hi_p:
                break
            shrink *= 0.8
        else:  # pragma: no cover
            probs = np.full(n, 1.0 / n)
    return ExplicitSetOracle(elems, m_i, probs)


@dataclass(frozen=True)
class OracleList:
    """Ordered list of oracles with the bias spec they were declared under."""

    oracles: tuple
    bias: BiasSpec

    def __post_init__(self):
        if len(self.oracles) < 2:
            raise OracleError("an oracle list needs m >= 2 sets")

    @property
    def m(self) -> int:
        return len(self.oracles)

    @property
    def total_size(self) -> int:
        return sum(o.approx_size for o in self.oracles)

    def size_cumsum(self) -> list[int]:
        out, acc = [], 0
        for o in self.oracles:
            acc += o.approx_size
            out.append(acc)
        return out

    def subset(self, indices: Sequence[int]) -> "OracleList":
        if len(indices) < 2:
            raise OracleError("subset needs at least 2 indices")
        return OracleList(tuple(self.oracles[i] for i in indices), self.bias)


def random_choice(olist: OracleList, rng: RandomStream) -> tuple[int, ElementId]:
    """One two-step draw: set index i with probability exactly m_i / M, then
    one element from that oracle's generator.  Index selection is exact
    integer inversion, so the m_i/M marginal holds with no float fuzz."""
    cum = olist.size_cumsum()
    v = randbelow(rng.gen, cum[-1])
    idx = next(i for i, c in enumerate(cum) if v < c)
    return idx, olist.oracles[idx].random_element(rng)


def random_choice_indices(olist: OracleList, rng: RandomStream, size: int) -> np.ndarray:
    """Vectorized index part of `random_choice`: size draws of i ~ m_i / M.

    Falls back to per-draw arbitrary-precision inversion when the total size
    does not fit in int64 (lattice-ball counts can exceed 64 bits).
    """
    cum = olist.size_cumsum()
    total = cum[-1]
    if total < 1 << 62:
        arr = np.array(cum, dtype=np.int64)
        draws = rng.gen.integers(0, total, size=size)
        return np.searchsorted(arr, draws, side="right")
    out = np.empty(size, dtype=np.int64)
    for k in range(size):
        v = randbelow(rng.gen, total)
        out[k] = next(i for i, c in enumerate(cum) if v < c)
    return out
