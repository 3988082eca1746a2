"""Simulated client-server transport: one batch exchange = one round.

The estimator (server) issues a `RoundRequest` naming, per oracle (client),
how many fresh samples it wants and which membership queries to answer.  The
harness plays all clients, answers synchronously, bumps the round counter and
appends a transcript entry.  Set selection for random choices happens
server-side using the public sizes m_i; only the inner generator call is
client work.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .oracle import ElementId, OracleList
from .rng import RandomStream


class RoundFormatError(ValueError):
    pass


class RoundSizeError(ValueError):
    pass


@dataclass(frozen=True)
class RoundRequest:
    """Per-oracle sample counts and membership query batches.

    Both tuples must have one entry per oracle.  A request may carry zero work
    for every oracle (a barrier round: the estimator still synchronizes once
    per stage even when nothing is left to ask), but it must be shaped for the
    full client list.
    """

    sample_counts: tuple
    membership: tuple

    def validate(self, m: int) -> None:
        if len(self.sample_counts) == 0 and len(self.membership) == 0:
            raise RoundFormatError("request carries no per-oracle entries")
        if len(self.sample_counts) != m or len(self.membership) != m:
            raise RoundFormatError(
                f"request shaped for {len(self.sample_counts)}/{len(self.membership)} "
                f"oracles, list has {m}"
            )
        if any(c < 0 for c in self.sample_counts):
            raise RoundFormatError("negative sample count")

    def work_size(self) -> int:
        return sum(self.sample_counts) + sum(len(q) for q in self.membership)

    def to_json(self) -> dict:
        return {
            "sample_counts": list(self.sample_counts),
            "membership_sizes": [len(q) for q in self.membership],
        }


@dataclass(frozen=True)
class RoundAnswers:
    samples: tuple
    membership: tuple


@dataclass
class RoundTranscript:
    round_index: int
    request: RoundRequest
    answer_sample_sizes: list[int]
    answer_membership_sizes: list[int]
    wall_time: float

    def to_json(self) -> dict:
        return {
            "round": self.round_index,
            "request": self.request.to_json(),
            "answer_sample_sizes": self.answer_sample_sizes,
            "answer_membership_sizes": self.answer_membership_sizes,
            "wall_time_s": self.wall_time,
        }


@dataclass
class RoundHarness:
    """Executes rounds against an oracle list and records the transcript."""

    olist: OracleList
    query_cap: int = 10**8
    rounds: int = 0
    transcript: list = field(default_factory=list)

    def execute_round(
        self,
        req: RoundRequest,
        rng: RandomStream,
        logical_size: Optional[int] = None,
    ) -> RoundAnswers:
        """Answer every sub-request as if by independent clients.

        `logical_size` lets the caller declare the pre-deduplication query
        volume; the safety cap applies to the larger of declared and actual.
        """
        req.validate(self.olist.m)
        size = req.work_size()
        if max(size, logical_size or 0) > self.query_cap:
            raise RoundSizeError(
                f"round of {max(size, logical_size or 0)} logical queries exceeds "
                f"cap {self.query_cap}"
            )
        t0 = time.perf_counter()
        samples = []
        membership = []
        for i, oracle in enumerate(self.olist.oracles):
            count = req.sample_counts[i]
            stream = rng.child(f"round{self.rounds}:oracle{i}")
            samples.append(tuple(oracle.random_elements(stream, count)) if count else ())
            queries = req.membership[i]
            membership.append(tuple(oracle.contains_batch(queries)) if queries else ())
        answers = RoundAnswers(samples=tuple(samples), membership=tuple(membership))
        self.transcript.append(
            RoundTranscript(
                round_index=self.rounds,
                request=req,
                answer_sample_sizes=[len(s) for s in answers.samples],
                answer_membership_sizes=[len(b) for b in answers.membership],
                wall_time=time.perf_counter() - t0,
            )
        )
        self.rounds += 1
        return answers


def sampling_request(m: int, counts: Sequence[int]) -> RoundRequest:
    return RoundRequest(sample_counts=tuple(int(c) for c in counts), membership=((),) * m)


def membership_request(queries_per_oracle: Sequence[Sequence[ElementId]]) -> RoundRequest:
    m = len(queries_per_oracle)
    return RoundRequest(
        sample_counts=(0,) * m,
        membership=tuple(tuple(q) for q in queries_per_oracle),
    )


def counts_from_indices(indices: np.ndarray, m: int) -> list[int]:
    return np.bincount(np.asarray(indices, dtype=np.int64), minlength=m).tolist()
