"""Instance files: JSON descriptions of oracle lists.

Schema:
    {"sets": [{"kind": "explicit", "elements": [...]}
              | {"kind": "ball", "dim": d, "radius": r, "lambda": "u/v",
                 "l": L, "center": [[i, j], ...]}
              | {"kind": "ball-free", "center": [reals], "radius": r}],
     "bias": {"alpha_l": ., "alpha_r": ., "beta_l": ., "beta_r": .},
     "seed": u64}

Element ids are integers or integer vectors.  Explicit sets realize the
file's bias spec; ball oracles derive theirs from the alpha/beta arguments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .ball_union import ball_oracle, list_bias
from .lattice_count import BallSpec, FreeBall, make_ball
from .oracle import BiasSpec, OracleList, make_biased_explicit_set
from .rng import RandomStream


class InstanceError(ValueError):
    pass


@dataclass
class Instance:
    sets: list  # list of ("explicit", elements) | ("ball", BallSpec|FreeBall)
    bias: BiasSpec
    seed: Optional[int]

    @property
    def m(self) -> int:
        return len(self.sets)


def _element(raw) -> Union[int, tuple]:
    if isinstance(raw, int):
        return raw
    if isinstance(raw, list):
        return tuple(int(v) for v in raw)
    raise InstanceError(f"element {raw!r} must be an integer or an integer vector")


def parse_instance(doc: dict) -> Instance:
    if "sets" not in doc or not isinstance(doc["sets"], list):
        raise InstanceError("instance needs a 'sets' list")
    sets = []
    for i, entry in enumerate(doc["sets"]):
        kind = entry.get("kind")
        if kind == "explicit":
            elements = [_element(e) for e in entry.get("elements", [])]
            if not elements:
                raise InstanceError(f"set {i}: explicit set is empty")
            sets.append(("explicit", elements))
        elif kind == "ball":
            ball = make_ball(
                dim=int(entry["dim"]),
                radius=float(entry["radius"]),
                lam=entry.get("lambda", 0),
                l=int(entry.get("l", 0)),
                center=[(int(i_k), int(j_k)) for i_k, j_k in entry["center"]],
            )
            sets.append(("ball", ball))
        elif kind == "ball-free":
            ball = FreeBall(
                dim=len(entry["center"]),
                radius=float(entry["radius"]),
                center=tuple(float(c) for c in entry["center"]),
            )
            sets.append(("ball", ball))
        else:
            raise InstanceError(f"set {i}: unknown kind {kind!r}")
    braw = doc.get("bias", {})
    bias = BiasSpec(
        alpha_l=float(braw.get("alpha_l", 0.0)),
        alpha_r=float(braw.get("alpha_r", 0.0)),
        beta_l=float(braw.get("beta_l", 0.0)),
        beta_r=float(braw.get("beta_r", 0.0)),
    )
    seed = doc.get("seed")
    return Instance(sets=sets, bias=bias, seed=None if seed is None else int(seed))


def load_instance(path: Union[str, Path]) -> Instance:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path}: invalid JSON: {exc}") from exc
    return parse_instance(doc)


def build_oracle_list(
    inst: Instance,
    rng: RandomStream,
    *,
    ball_alpha: float = 0.2,
    ball_beta: float = 0.2,
) -> OracleList:
    """Materialize the oracles; construction randomness comes from
    rng.child('oracle:<index>') so bias realizations are reproducible."""
    if inst.m < 2:
        raise InstanceError("instance needs m >= 2 sets")
    oracles = []
    ball_oracles = []
    for i, (kind, payload) in enumerate(inst.sets):
        if kind == "explicit":
            oracles.append(
                make_biased_explicit_set(payload, inst.bias, rng.child(f"oracle:{i}"))
            )
        else:
            bo = ball_oracle(payload, ball_alpha, ball_beta)
            oracles.append(bo)
            ball_oracles.append(bo)
    bias = inst.bias
    if ball_oracles:
        bias = bias.merge_worst(list_bias(ball_oracles))
    return OracleList(tuple(oracles), bias)


def exact_union_size(inst: Instance, cap: int = 10**7) -> int:
    """Brute-force union size of an instance (reference paths only)."""
    from .reference import enumerate_ball_spec

    union: set = set()
    for kind, payload in inst.sets:
        if kind == "explicit":
            union.update(payload)
        else:
            union.update(enumerate_ball_spec(payload, cap=cap))
        if len(union) > cap:
            raise InstanceError(f"union exceeded cap {cap}")
    return len(union)
