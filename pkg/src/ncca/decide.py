"""Linear-time number-conservation decision over super nodes.

A super node keeps, for each of the four root sibling pairs k, the RMTs that
can occur at the current level together with their weight: the running
surplus (+) or deficiency (-) of 1s of the configuration prefix over its
image. One super node per level is enough, so a rule vector is decided in a
single left-to-right scan.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

from .ca import CENTRE_ONE, NC_RULES, RuleLike, as_rule_vector, successors

_NC_SET = frozenset(NC_RULES)

#: Allowed weights of RMT r in set k, indexed ``TABLE3[k][r]``.
POSSIBLE_WEIGHTS: tuple[tuple[frozenset[int], ...], ...] = tuple(
    tuple(frozenset(ws) for ws in column)
    for column in (
        ((0,), (0,), (-1, 0), (-1, 0), (0, 1), (0, 1), (-1, 0, 1), (-1, 0, 1)),
        ((0, 1), (0, 1), (-1, 0, 1), (-1, 0, 1), (0, 1, 2), (0, 1, 2), (0, 1), (0, 1)),
        ((-1, 0), (-1, 0), (-2, -1, 0), (-2, -1, 0), (-1, 0, 1), (-1, 0, 1), (-1, 0), (-1, 0)),
        ((-1, 0, 1), (-1, 0, 1), (-1, 0), (-1, 0), (0, 1), (0, 1), (0,), (0,)),
    )
)

EVEN_RMTS = frozenset({0, 2, 4, 6})
ODD_RMTS = frozenset({1, 3, 5, 7})
#: Level n-2 keeps RMTs whose right cell matches the left cell of the root pair.
PENULTIMATE_KEEP = (EVEN_RMTS, EVEN_RMTS, ODD_RMTS, ODD_RMTS)
#: Level n-1 keeps RMTs whose right two cells match the root pair.
LAST_KEEP = tuple(frozenset({k, k + 4}) for k in range(4))

Weights = tuple[Optional[int], ...]


def weight_delta(r: int, bit: int) -> int:
    """Change in surplus when a cell seeing RMT ``r`` moves to ``bit``."""
    if r in CENTRE_ONE:
        return 1 if bit == 0 else 0
    return -1 if bit == 1 else 0


@dataclass(frozen=True)
class SuperNode:
    """Four RMT sets with weights; ``weights[k][r]`` is None when r is absent."""

    weights: tuple[Weights, Weights, Weights, Weights]

    @classmethod
    def root(cls) -> "SuperNode":
        return cls(
            tuple(
                tuple(0 if r // 2 == k else None for r in range(8)) for k in range(4)
            )
        )

    @classmethod
    def from_maps(cls, maps: Iterable[Mapping[int, int]]) -> "SuperNode":
        maps = list(maps)
        if len(maps) != 4:
            raise ValueError("a super node has exactly four RMT sets")
        return cls(tuple(tuple(m.get(r) for r in range(8)) for m in maps))

    @property
    def gamma(self) -> tuple[frozenset[int], ...]:
        return tuple(
            frozenset(r for r, w in enumerate(ws) if w is not None)
            for ws in self.weights
        )

    def maps(self) -> list[dict[int, int]]:
        return [
            {r: w for r, w in enumerate(ws) if w is not None} for ws in self.weights
        ]

    def restrict(self, keep: tuple[frozenset[int], ...]) -> "SuperNode":
        return SuperNode(
            tuple(
                tuple(w if r in keep[k] else None for r, w in enumerate(ws))
                for k, ws in enumerate(self.weights)
            )
        )

    def is_zero(self) -> bool:
        return all(w in (None, 0) for ws in self.weights for w in ws)

    def to_json(self) -> dict:
        return {
            "gamma": [sorted(g) for g in self.gamma],
            "weights": [{str(r): w for r, w in m.items()} for m in self.maps()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SuperNode":
        return cls.from_maps(
            {int(r): int(w) for r, w in m.items()} for m in data["weights"]
        )


# -- verdicts -----------------------------------------------------------------


@dataclass(frozen=True)
class Accepted:
    pass


@dataclass(frozen=True)
class NonNCRule:
    cell: int
    rule: int


@dataclass(frozen=True)
class Step5Violation:
    level: int
    condition: str


@dataclass(frozen=True)
class Step6Violation:
    level: int
    condition: str
    k: int


@dataclass(frozen=True)
class WeightConflict:
    """An RMT reached with two different weights at the same level."""

    level: int
    k: int
    rmt: int
    weights: tuple[int, int]
    node: Optional[int] = None


@dataclass(frozen=True)
class NonzeroLeafWeight:
    k: int
    rmt: int
    weight: int


Reason = Union[
    Accepted, NonNCRule, Step5Violation, Step6Violation, WeightConflict, NonzeroLeafWeight
]


def reason_to_json(reason: Reason) -> dict:
    out: dict = {"kind": type(reason).__name__}
    out.update(reason.__dict__)
    if "weights" in out:
        out["weights"] = list(out["weights"])
    return out


_REASON_TYPES = {
    cls.__name__: cls
    for cls in (
        Accepted, NonNCRule, Step5Violation, Step6Violation, WeightConflict, NonzeroLeafWeight
    )
}


def reason_from_json(data: dict) -> Reason:
    fields = dict(data)
    cls = _REASON_TYPES[fields.pop("kind")]
    if "weights" in fields:
        fields["weights"] = tuple(fields["weights"])
    return cls(**fields)


@dataclass(frozen=True)
class Verdict:
    reason: Reason
    trace: Optional[tuple[SuperNode, ...]] = None

    @property
    def accepted(self) -> bool:
        return isinstance(self.reason, Accepted)

    def __bool__(self) -> bool:
        return self.accepted

    def to_json(self) -> dict:
        out = {"accepted": self.accepted, "reason": reason_to_json(self.reason)}
        if self.trace is not None:
            out["trace"] = [
                dict(level=i, **node.to_json()) for i, node in enumerate(self.trace)
            ]
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Verdict":
        trace = data.get("trace")
        return cls(
            reason=reason_from_json(data["reason"]),
            trace=None if trace is None else tuple(SuperNode.from_json(t) for t in trace),
        )


# -- FindNextWeight -----------------------------------------------------------


class WeightConflictError(ValueError):
    def __init__(self, rmt: int, first: int, second: int):
        super().__init__(f"RMT {rmt} receives weights {first} and {second}")
        self.rmt = rmt
        self.weights = (first, second)


def find_next_weight(
    rule: RuleLike, gamma: Iterable[int], weights: Mapping[int, int]
) -> tuple[frozenset[int], dict[int, int]]:
    """Successor RMTs of ``gamma`` under ``rule`` with their weights.

    Raises :class:`WeightConflictError` when two parents hand the same child
    different weights.
    """
    rule = int(rule)
    out: dict[int, int] = {}
    for r in sorted(gamma):
        w = weights[r] + weight_delta(r, (rule >> r) & 1)
        for c in successors(r):
            seen = out.setdefault(c, w)
            if seen != w:
                raise WeightConflictError(c, seen, w)
    return frozenset(out), out


def _advance(node: SuperNode, rule: int) -> SuperNode:
    """FindNextWeight on all four sets; conflicts carry ``k`` on the error."""
    nxt = []
    for k, ws in enumerate(node.weights):
        out: list[Optional[int]] = [None] * 8
        for r, w in enumerate(ws):
            if w is None:
                continue
            w += weight_delta(r, (rule >> r) & 1)
            for c in successors(r):
                if out[c] is None:
                    out[c] = w
                elif out[c] != w:
                    err = WeightConflictError(c, out[c], w)
                    err.k = k
                    raise err
        nxt.append(tuple(out))
    return SuperNode(tuple(nxt))


def advance(node: SuperNode, rule: RuleLike) -> SuperNode:
    """Super node of the next level, as built by FindNextWeight."""
    return _advance(node, int(rule))


# -- step checks --------------------------------------------------------------

# (id, k, rmt, {weight: required next state})
STEP5_CONDITIONS: tuple[tuple[str, int, int, dict[int, int]], ...] = (
    ("i", 0, 2, {-1: 0}),
    ("ii", 0, 4, {0: 0, 1: 1}),
    ("iii", 0, 5, {1: 1}),
    ("iv", 0, 6, {-1: 0, 1: 1}),
    ("v", 1, 2, {-1: 0}),
    ("vi", 1, 3, {-1: 0, 1: 1}),
    ("vii", 1, 4, {0: 0, 2: 1}),
    ("viii", 1, 5, {2: 1}),
    ("ix", 2, 2, {-2: 0}),
    ("x", 2, 3, {-2: 0, 0: 1}),
    ("xi", 2, 4, {-1: 0, 1: 1}),
    ("xii", 2, 5, {1: 1}),
    ("xiii", 3, 1, {-1: 0, 1: 1}),
    ("xiv", 3, 2, {-1: 0}),
    ("xv", 3, 3, {-1: 0, 0: 1}),
    ("xvi", 3, 5, {1: 1}),
)


def check_step5(node: SuperNode, rule: RuleLike) -> Optional[str]:
    """First violated weight-implies-next-state condition, or None.

    Conditions on an RMT missing from its set hold vacuously.
    """
    rule = int(rule)
    for cid, k, r, demands in STEP5_CONDITIONS:
        w = node.weights[k][r]
        if w is not None and w in demands and (rule >> r) & 1 != demands[w]:
            return cid
    return None


def check_step6(node: SuperNode, rule: RuleLike) -> Optional[tuple[str, int]]:
    """First violated (condition, k) relating equivalent RMT weights, or None."""
    rule = int(rule)
    R = [(rule >> r) & 1 for r in range(8)]
    for k, w in enumerate(node.weights):
        if w[4] is not None and w[0] is not None:
            if w[4] == w[0] and R[4] != 0:
                return "i", k
            if w[4] > w[0] and R[4] != 1:
                return "ii", k
        if w[5] is not None and w[1] is not None:
            if w[5] > w[1] and not (R[5] == 1 and R[1] == 0):
                return "iii", k
        if w[3] is not None and w[7] is not None:
            if w[3] == w[7] and R[3] != 1:
                return "iv", k
            if w[3] < w[7] and R[3] != 0:
                return "v", k
        if w[2] is not None and w[6] is not None:
            if w[2] < w[6] and not (R[2] == 0 and R[6] == 1):
                return "vi", k
    return None


# -- memoised scan ------------------------------------------------------------

FIRST, BODY, PENULTIMATE, LAST = range(4)


class _Machine:
    """Interns super nodes and caches per-(node, rule, stage) outcomes.

    Reachable super nodes form a small finite set, so after warm-up every
    level costs one dictionary lookup. Outcomes are pure functions of their
    key, which keeps concurrent use safe.
    """

    def __init__(self) -> None:
        self.nodes: list[SuperNode] = []
        self.ids: dict[SuperNode, int] = {}
        self.moves: dict[int, int] = {}
        self.plain: dict[int, int] = {}
        self.rejects: list[tuple] = []
        self.root = self.intern(SuperNode.root())

    def intern(self, node: SuperNode) -> int:
        sid = self.ids.get(node)
        if sid is None:
            sid = self.ids[node] = len(self.nodes)
            self.nodes.append(node)
        return sid

    def _reject(self, why: tuple) -> int:
        self.rejects.append(why)
        return -len(self.rejects)

    def checked_node(self, sid: int, stage: int) -> SuperNode:
        node = self.nodes[sid]
        if stage == PENULTIMATE:
            return node.restrict(PENULTIMATE_KEEP)
        if stage == LAST:
            return node.restrict(LAST_KEEP)
        return node

    def compute(self, sid: int, rule: int, stage: int) -> int:
        node = self.checked_node(sid, stage)
        if stage in (FIRST, BODY) and rule not in _NC_SET:
            out = self._reject(("rule",))
        else:
            why = None
            if stage == BODY:
                cond = check_step5(node, rule)
                if cond is not None:
                    why = ("step5", cond)
            if why is None and stage != FIRST:
                hit = check_step6(node, rule)
                if hit is not None:
                    why = ("step6",) + hit
            if why is None:
                try:
                    out = self.intern(_advance(node, rule))
                except WeightConflictError as err:
                    out = self._reject(("conflict", err.k, err.rmt, err.weights))
            else:
                out = self._reject(why)
        self.moves[((sid << 2) | stage) << 8 | rule] = out
        return out

    def step(self, sid: int, rule: int, stage: int) -> int:
        out = self.moves.get(((sid << 2) | stage) << 8 | rule)
        if out is None:
            out = self.compute(sid, rule, stage)
        return out

    def plain_step(self, sid: int, rule: int) -> int:
        """FindNextWeight only, no checks; used by synthesis."""
        key = (sid << 8) | rule
        out = self.plain.get(key)
        if out is None:
            out = self.intern(_advance(self.nodes[sid], rule))
            self.plain[key] = out
        return out

    def reason(self, code: int, level: int, rule: int) -> Reason:
        why = self.rejects[-code - 1]
        if why[0] == "rule":
            return NonNCRule(level, rule)
        if why[0] == "step5":
            return Step5Violation(level, why[1])
        if why[0] == "step6":
            return Step6Violation(level, why[1], why[2])
        _, k, rmt, weights = why
        return WeightConflict(level + 1, k, rmt, tuple(weights))


MACHINE = _Machine()

MIN_CELLS = 5


def decide_ncca(rv, trace: bool = False) -> Verdict:
    """Decide whether the CA conserves the number of 1s, in O(n).

    ``trace=True`` attaches the super node of every level 0..n as checked
    (levels n-2 and n-1 after their RMT restriction).
    """
    rules = as_rule_vector(rv).rules
    n = len(rules)
    if n < MIN_CELLS:
        raise ValueError(
            f"the super-node decision needs n >= {MIN_CELLS}; use the brute-force "
            f"oracle for {n} cells"
        )
    m = MACHINE
    moves = m.moves
    nodes: Optional[list[SuperNode]] = [] if trace else None

    def stop(code: int, level: int) -> Verdict:
        reason = m.reason(code, level, rules[level])
        return Verdict(reason, tuple(nodes) if nodes is not None else None)

    sid = m.root
    if nodes is not None:
        nodes.append(m.nodes[sid])
    nxt = m.step(sid, rules[0], FIRST)
    if nxt < 0:
        return stop(nxt, 0)
    sid = nxt
    if nodes is None:
        compute = m.compute
        for i in range(1, n - 2):
            rule = rules[i]
            nxt = moves.get((sid << 10) | (BODY << 8) | rule)
            if nxt is None:
                nxt = compute(sid, rule, BODY)
            if nxt < 0:
                return stop(nxt, i)
            sid = nxt
    else:
        for i in range(1, n - 2):
            nodes.append(m.nodes[sid])
            nxt = m.step(sid, rules[i], BODY)
            if nxt < 0:
                return stop(nxt, i)
            sid = nxt
    for i, stage in ((n - 2, PENULTIMATE), (n - 1, LAST)):
        if nodes is not None:
            nodes.append(m.checked_node(sid, stage))
        nxt = m.step(sid, rules[i], stage)
        if nxt < 0:
            return stop(nxt, i)
        sid = nxt
    leaf = m.nodes[sid]
    if nodes is not None:
        nodes.append(leaf)
    reason: Reason = Accepted()
    for k, ws in enumerate(leaf.weights):
        bad = next(((r, w) for r, w in enumerate(ws) if w), None)
        if bad is not None:
            reason = NonzeroLeafWeight(k, *bad)
            break
    return Verdict(reason, tuple(nodes) if nodes is not None else None)


def weights_outside_table(nodes: Iterable[SuperNode]) -> list[tuple[int, int, int, int]]:
    """(level, k, rmt, weight) entries not allowed by the possible-weight table."""
    bad = []
    for level, node in enumerate(nodes):
        for k, ws in enumerate(node.weights):
            for r, w in enumerate(ws):
                if w is not None and w not in POSSIBLE_WEIGHTS[k][r]:
                    bad.append((level, k, r, w))
    return bad
