"""Exhaustive ground truth for small CAs.

Every configuration of an n-cell CA is encoded as an integer with cell 0 in
the most significant bit, so ``int("1010", 2)`` is the state ``1010``.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .ca import NC_RULES, ResourceLimitError, RuleVector, as_rule_vector

DEFAULT_CAP = 24
CENSUS_BUDGET = 10**10  # vectors * configurations * cells
CENSUS_VECTOR_LIMIT = 10_000
_CHUNK = 1 << 18


def _check_size(n: int, cap: int) -> None:
    if n < 3:
        raise ValueError(f"need at least 3 cells, got {n}")
    if n > cap:
        raise ResourceLimitError(
            f"{n} cells means 2**{n} configurations; the oracle cap is {cap}"
        )


def _cell_bit(configs: np.ndarray, n: int, i: int) -> np.ndarray:
    return (configs >> np.uint32(n - 1 - (i % n))) & np.uint32(1)


def _rmts(configs: np.ndarray, n: int, i: int) -> np.ndarray:
    return (
        (_cell_bit(configs, n, i - 1) << np.uint32(2))
        | (_cell_bit(configs, n, i) << np.uint32(1))
        | _cell_bit(configs, n, i + 1)
    )


def _successors(rules: Sequence[int], configs: np.ndarray) -> np.ndarray:
    n = len(rules)
    out = np.zeros_like(configs)
    for i, rule in enumerate(rules):
        bit = (np.uint32(rule) >> _rmts(configs, n, i)) & np.uint32(1)
        out |= bit << np.uint32(n - 1 - i)
    return out


def _popcount(values: np.ndarray, n: int) -> np.ndarray:
    total = np.zeros(values.shape, dtype=np.int16)
    for i in range(n):
        total += ((values >> np.uint32(i)) & np.uint32(1)).astype(np.int16)
    return total


def brute_force_is_ncca(rv, cap: int = DEFAULT_CAP) -> bool:
    """Check popcount conservation on all 2**n configurations."""
    rv = as_rule_vector(rv)
    n = len(rv)
    _check_size(n, cap)
    total = 1 << n
    for start in range(0, total, _CHUNK):
        configs = np.arange(start, min(start + _CHUNK, total), dtype=np.uint32)
        nxt = _successors(rv.rules, configs)
        if not np.array_equal(_popcount(configs, n), _popcount(nxt, n)):
            return False
    return True


@dataclass
class StateTransitionGraph:
    """Successor of every configuration plus in-degree counts."""

    n: int
    successor: np.ndarray
    predecessor_count: np.ndarray

    def label(self, state: int) -> str:
        return format(state, f"0{self.n}b")

    def successor_of(self, state: str) -> str:
        return self.label(int(self.successor[int(state, 2)]))

    def reachable(self) -> list[str]:
        return [self.label(s) for s in np.flatnonzero(self.predecessor_count)]

    def non_reachable(self) -> list[str]:
        return [self.label(s) for s in np.flatnonzero(self.predecessor_count == 0)]

    def conserves_popcount(self) -> bool:
        states = np.arange(1 << self.n, dtype=np.uint32)
        return bool(
            np.array_equal(
                _popcount(states, self.n), _popcount(self.successor, self.n)
            )
        )

    def to_dot(self, name: str = "stg") -> str:
        lines = [f'digraph "{name}" {{', "  rankdir=LR;"]
        for s in range(1 << self.n):
            lines.append(f'  "{self.label(s)}";')
        for s in range(1 << self.n):
            t = int(self.successor[s])
            lines.append(f'  "{self.label(s)}" -> "{self.label(t)}";')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "successor": {
                self.label(s): self.label(int(t)) for s, t in enumerate(self.successor)
            },
            "non_reachable": self.non_reachable(),
        }


def build_stg(rv, cap: int = DEFAULT_CAP) -> StateTransitionGraph:
    rv = as_rule_vector(rv)
    n = len(rv)
    _check_size(n, cap)
    configs = np.arange(1 << n, dtype=np.uint32)
    succ = _successors(rv.rules, configs)
    preds = np.bincount(succ, minlength=1 << n)
    return StateTransitionGraph(n=n, successor=succ, predecessor_count=preds)


# -- census over rule vectors -------------------------------------------------


def _conserving_mask(vectors: np.ndarray, n: int) -> np.ndarray:
    """Row-wise brute-force verdicts for a (V, n) array of rule numbers."""
    configs = np.arange(1 << n, dtype=np.uint32)
    pop = _popcount(configs, n)
    ones = np.zeros((vectors.shape[0], configs.size), dtype=np.int16)
    rules = vectors.astype(np.uint32)
    for i in range(n):
        shift = _rmts(configs, n, i)[None, :]
        ones += ((rules[:, i : i + 1] >> shift) & np.uint32(1)).astype(np.int16)
    return (ones == pop[None, :]).all(axis=1)


def _vectors_in_range(alphabet: np.ndarray, n: int, start: int, stop: int) -> np.ndarray:
    # Mixed-radix decoding with cell 0 as the most significant digit.
    idx = np.arange(start, stop, dtype=np.int64)
    a = alphabet.size
    digits = np.empty((idx.size, n), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        digits[:, i] = idx % a
        idx //= a
    return alphabet[digits]


def _census_chunk(args) -> tuple[int, list[tuple[int, ...]]]:
    alphabet, n, start, stop, keep = args
    vectors = _vectors_in_range(np.asarray(alphabet), n, start, stop)
    mask = _conserving_mask(vectors, n)
    accepted = [tuple(int(x) for x in row) for row in vectors[mask]] if keep else []
    return int(mask.sum()), accepted


@dataclass
class Census:
    n: int
    alphabet: tuple[int, ...]
    count: int
    accepted_vectors: Optional[list[tuple[int, ...]]] = field(default=None)

    def to_json(self) -> dict:
        out = {"n": self.n, "alphabet": list(self.alphabet), "count": self.count}
        if self.accepted_vectors is not None:
            out["accepted_vectors"] = [list(v) for v in self.accepted_vectors]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Census":
        vectors = data.get("accepted_vectors")
        return cls(
            n=data["n"],
            alphabet=tuple(data["alphabet"]),
            count=data["count"],
            accepted_vectors=None if vectors is None else [tuple(v) for v in vectors],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def census(
    n: int,
    alphabet: Iterable[int] = NC_RULES,
    *,
    jobs: int = 1,
    budget: int = CENSUS_BUDGET,
) -> Census:
    """Brute-force every rule vector over ``alphabet`` of length ``n``.

    Vectors are listed only when at most ``CENSUS_VECTOR_LIMIT`` pass.
    """
    alphabet = tuple(sorted(set(int(a) for a in alphabet)))
    if not alphabet:
        raise ValueError("alphabet is empty")
    if any(not 0 <= a <= 255 for a in alphabet):
        raise ValueError("alphabet rules must lie in 0..255")
    if n < 3:
        raise ValueError(f"need at least 3 cells, got {n}")
    total = len(alphabet) ** n
    cost = total * (1 << n) * n
    if cost > budget:
        raise ResourceLimitError(
            f"census of {total} vectors x 2**{n} states exceeds budget {budget}"
        )
    step = max(1, (1 << 22) >> n)
    tasks = [
        (alphabet, n, s, min(s + step, total), True) for s in range(0, total, step)
    ]
    if jobs is None or jobs <= 0:
        jobs = os.cpu_count() or 1
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_census_chunk, tasks))
    else:
        results = [_census_chunk(t) for t in tasks]
    count = sum(c for c, _ in results)
    vectors = None
    if count <= CENSUS_VECTOR_LIMIT:
        vectors = [v for _, acc in results for v in acc]
    return Census(n=n, alphabet=alphabet, count=count, accepted_vectors=vectors)


def count_ncca_vectors(
    n: int, alphabet: Iterable[int] = NC_RULES, *, jobs: int = 1, budget: int = CENSUS_BUDGET
) -> int:
    return census(n, alphabet, jobs=jobs, budget=budget).count


def find_ncca_containing(
    rule: int, n: int, alphabet: Iterable[int], budget: int = CENSUS_BUDGET
) -> Optional[RuleVector]:
    """First conserving vector over ``alphabet`` (lexicographic) that uses ``rule``."""
    pool = np.array(sorted(set(int(a) for a in alphabet) | {int(rule)}), dtype=np.int64)
    total = pool.size**n
    if total * (1 << n) * n > budget:
        raise ResourceLimitError(f"search over {total} vectors exceeds budget {budget}")
    step = max(1, (1 << 22) >> n)
    for start in range(0, total, step):
        vectors = _vectors_in_range(pool, n, start, min(start + step, total))
        vectors = vectors[(vectors == rule).any(axis=1)]
        hits = vectors[_conserving_mask(vectors, n)]
        if hits.size:
            return RuleVector(int(x) for x in hits[0])
    return None
