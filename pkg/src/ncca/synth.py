"""Seeded synthesis of number-conserving rule vectors.

Every free bit ("alpha site") is drawn from one ``random.Random`` stream in a
fixed order and can be logged, so a run is reproducible from its seed or from
an explicit list of choices.

Site names: ``"rule"`` is the pick of the first rule; ``"2"``, ``"4,6"``,
``"1,5"`` and ``"2,6"`` name the RMTs that share the drawn bit.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Union

from .ca import NC_RULES, RuleVector, is_nc_rule
from .decide import (
    LAST_KEEP,
    MACHINE,
    MIN_CELLS,
    PENULTIMATE_KEEP,
    SuperNode,
    decide_ncca,
)

Choose = Callable[[str], int]
Plan = tuple[int, tuple[tuple[str, int], ...], tuple[str, ...]]


class SynthesisError(RuntimeError):
    """A selection produced a vector the decision procedure rejects."""


class ReplayError(ValueError):
    """A replayed choice list does not fit the run."""


def _bits(rule: Mapping[int, int]) -> int:
    return sum(bit << r for r, bit in rule.items())


def _w(node: SuperNode, k: int, r: int) -> Optional[int]:
    return node.weights[k][r]


def _any_k(node: SuperNode, a: int, b: int, ks: Iterable[int] = range(4)) -> int:
    # "For any k": every k with both RMTs present gives the same answer in a
    # valid run, so the first one is used.
    for k in ks:
        if _w(node, k, a) is not None and _w(node, k, b) is not None:
            return k
    raise SynthesisError(f"no set holds both RMT {a} and RMT {b}")


def select_r1(node: SuperNode, choose: Choose) -> tuple[int, tuple[str, ...]]:
    """Rule of cell 1 from the level-1 super node."""
    W = lambda k, r: _w(node, k, r)  # noqa: E731
    R = {0: 0, 7: 1}
    fired: list[str] = []
    if W(0, 2) == -1:
        fired.append("W0[2]=-1")
        R[2] = 0
        if W(1, 4) == W(1, 6):
            R[3] = R[4] = 0
            R[6] = 1
            R[1] = R[5] = choose("1,5")
        else:
            R[5] = 1
            R[4] = R[6] = choose("4,6")
            R[1] = R[3] = 1 if R[4] == 0 else 0
    else:
        R[2] = choose("2")
        if R[2] == 0:
            if W(1, 4) == W(1, 6):
                if W(1, 4) == 0 or W(2, 3) == 0:
                    fired.append("W1[4]=0|W2[3]=0")
                    R[3] = 1
                    R[4] = R[6] = 0
                else:
                    R[4] = R[6] = choose("4,6")
                    R[3] = 1 if R[6] == 0 else 0
                if R[4] == 0:
                    R[1] = R[5] = choose("1,5")
                else:
                    R[1], R[5] = 0, 1
            else:
                R[5] = 1
                R[4], R[6] = 1, 0
                R[1], R[3] = 0, 1
        else:
            R[3] = R[6] = 1
            if W(1, 4) == W(1, 6):
                R[4] = 0
                R[1] = R[5] = choose("1,5")
            else:
                R[5] = 1
                R[4], R[1] = 1, 0
    return _bits(R), tuple(fired)


def generic_plan(node: SuperNode) -> Plan:
    """Forced bits of a body rule plus the alpha sites left open.

    Returns ``(base, sites, fired)``; each site is ``(name, mask)`` and a drawn
    1 ORs ``mask`` into ``base``.
    """
    W = lambda k, r: _w(node, k, r)  # noqa: E731
    R = {0: 0, 7: 1}
    sites: list[tuple[str, int]] = []
    fired: list[str] = []

    k = _any_k(node, 4, 0)
    R[4] = 0 if W(k, 4) == W(k, 0) else 1
    if R[4] != R[0]:
        R[1], R[5] = 0, 1
    else:
        ones = [
            name
            for name, hit in (
                ("i", W(0, 5) == 1),
                ("ii", W(1, 5) == 2),
                ("iii", W(2, 5) == 1),
                ("iv", W(3, 5) == 1),
                ("v", W(3, 1) == 1),
            )
            if hit
        ]
        fired += ones
        if ones:
            R[1] = R[5] = 1
        elif W(3, 1) == -1:
            fired.append("vi")
            R[1] = R[5] = 0
        else:
            R[1] = R[5] = 0
            sites.append(("1,5", (1 << 1) | (1 << 5)))

    k = _any_k(node, 3, 7)
    R[3] = 1 if W(k, 3) == W(k, 7) else 0
    if R[3] != R[7]:
        R[2], R[6] = 0, 1
    else:
        zeros = [
            name
            for name, hit in (
                ("a", W(0, 2) == -1),
                ("b", W(0, 6) == -1),
                ("c", W(1, 2) == -1),
                ("d", W(2, 2) == -2),
                ("e", W(3, 2) == -1),
            )
            if hit
        ]
        fired += zeros
        if zeros:
            R[2] = R[6] = 0
        elif W(0, 6) == 1:
            fired.append("f")
            R[2] = R[6] = 1
        else:
            R[2] = R[6] = 0
            sites.append(("2,6", (1 << 2) | (1 << 6)))
    return _bits(R), tuple(sites), tuple(fired)


def penultimate_plan(node: SuperNode) -> Plan:
    """Plan for cell n-2; ``node`` is the level n-2 super node, unrestricted."""
    node = node.restrict(PENULTIMATE_KEEP)
    W = lambda k, r: _w(node, k, r)  # noqa: E731
    R = {0: 0, 7: 1}
    sites: list[tuple[str, int]] = []

    c5 = W(0, 2) == W(0, 6) == -1
    c6 = W(1, 2) == W(1, 6) == 1
    c7 = W(2, 1) == W(2, 5) == -1
    c8 = W(3, 1) == W(3, 5) == 1
    if c5 and c6:
        raise SynthesisError("conditions 5 and 6 hold together")
    if c7 and c8:
        raise SynthesisError("conditions 7 and 8 hold together")
    fired = tuple(name for name, hit in (("5", c5), ("6", c6), ("7", c7), ("8", c8)) if hit)

    k = _any_k(node, 4, 0, (0, 1))
    R[4] = 0 if W(k, 4) == W(k, 0) else 1
    if R[4] != R[0]:
        R[1], R[5] = 0, 1
    elif c7:
        R[1] = R[5] = 0
    elif c8:
        R[1] = R[5] = 1
    else:
        R[1] = R[5] = 0
        sites.append(("1,5", (1 << 1) | (1 << 5)))

    k = _any_k(node, 3, 7, (2, 3))
    R[3] = 1 if W(k, 3) == W(k, 7) else 0
    if R[3] != R[7]:
        R[2], R[6] = 0, 1
    elif c5:
        R[2] = R[6] = 0
    elif c6:
        R[2] = R[6] = 1
    else:
        R[2] = R[6] = 0
        sites.append(("2,6", (1 << 2) | (1 << 6)))
    return _bits(R), tuple(sites), fired


def select_rn1(node: SuperNode) -> int:
    """Rule of the last cell; fully forced by the level n-1 weights."""
    node = node.restrict(LAST_KEEP)
    W = lambda k, r: _w(node, k, r)  # noqa: E731
    R = {0: 0, 7: 1}
    R[4] = 0 if W(0, 4) == 0 else 1
    R[3] = 1 if W(3, 3) == 0 else 0
    for r in (1, 5):
        R[r] = 0 if W(1, r) == 0 else 1
    for r in (2, 6):
        R[r] = 1 if W(2, r) == 0 else 0
    return _bits(R)


def _apply(plan: Plan, choose: Choose) -> int:
    rule, sites, _ = plan
    for site, mask in sites:
        if choose(site):
            rule |= mask
    return rule


def select_generic(node: SuperNode, choose: Choose) -> int:
    return _apply(generic_plan(node), choose)


def select_rn2(node: SuperNode, choose: Choose) -> int:
    return _apply(penultimate_plan(node), choose)


@dataclass(frozen=True)
class Choice:
    cell: int
    site: str
    value: int

    def to_json(self) -> dict:
        return {"cell": self.cell, "site": self.site, "value": self.value}

    @classmethod
    def from_json(cls, data: Mapping) -> "Choice":
        return cls(int(data["cell"]), str(data["site"]), int(data["value"]))


@dataclass
class SynthesisTrace:
    seed: Optional[int]
    n: int
    rules: tuple[int, ...] = ()
    choices: list[Choice] = field(default_factory=list)
    # (cell, condition) pairs whose antecedent held while selecting.
    fired: list[tuple[int, str]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "seed": self.seed,
            "n": self.n,
            "rules": list(self.rules),
            "choices": [c.to_json() for c in self.choices],
            "fired": [{"cell": c, "condition": name} for c, name in self.fired],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SynthesisTrace":
        return cls(
            seed=data.get("seed"),
            n=int(data["n"]),
            rules=tuple(data.get("rules", ())),
            choices=[Choice.from_json(c) for c in data.get("choices", ())],
            fired=[(int(f["cell"]), str(f["condition"])) for f in data.get("fired", ())],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json())


class _Chooser:
    """Serves alpha bits from an rng or from a replayed choice list."""

    def __init__(self, rng: Optional[random.Random], choices: Optional[list[Choice]], log: bool):
        self.rng = rng
        self.pending = None
        if choices is not None:
            self.pending = {}
            for c in choices:
                if (c.cell, c.site) in self.pending:
                    raise ReplayError(f"duplicate choice for cell {c.cell} site {c.site}")
                self.pending[(c.cell, c.site)] = c.value
        self.log: Optional[list[Choice]] = [] if log else None
        self.cell = 0

    def _take(self, site: str) -> Optional[int]:
        if self.pending is None:
            return None
        try:
            return self.pending.pop((self.cell, site))
        except KeyError:
            raise ReplayError(f"no choice given for cell {self.cell} site {site}") from None

    def first_rule(self) -> int:
        value = self._take("rule")
        if value is None:
            value = self.rng.choice(NC_RULES)
        elif value not in NC_RULES:
            raise ReplayError(f"first rule {value} is not number conserving")
        if self.log is not None:
            self.log.append(Choice(0, "rule", value))
        return value

    def __call__(self, site: str) -> int:
        value = self._take(site)
        if value is None:
            value = self.rng.getrandbits(1)
        elif value not in (0, 1):
            raise ReplayError(f"choice for cell {self.cell} site {site} must be 0 or 1")
        if self.log is not None:
            self.log.append(Choice(self.cell, site, value))
        return value

    def leftovers(self) -> list[tuple[int, str]]:
        return sorted(self.pending) if self.pending else []


def synthesize(
    n: int,
    seed: Optional[int] = None,
    *,
    choices: Optional[Iterable[Union[Choice, Mapping]]] = None,
    record: bool = True,
    verify: bool = True,
) -> tuple[RuleVector, SynthesisTrace]:
    """Build an n-cell number-conserving rule vector.

    With ``choices`` the run is a strict replay: every alpha site must be
    listed and every listed site must be used. ``seed`` then only matters for
    the trace. ``record=False`` skips the per-cell log, which keeps very long
    runs cheap.
    """
    if isinstance(n, bool) or not isinstance(n, int):
        raise TypeError("n must be an int")
    if n < MIN_CELLS:
        raise ValueError(f"synthesis needs n >= {MIN_CELLS}, got {n}")
    replay = None
    if choices is not None:
        replay = [c if isinstance(c, Choice) else Choice.from_json(c) for c in choices]
    chooser = _Chooser(None if replay is not None else random.Random(seed), replay, record)
    trace = SynthesisTrace(seed=seed, n=n)
    m = MACHINE
    fired = trace.fired if record else None

    rules = [chooser.first_rule()]
    sid = m.plain_step(m.root, rules[0])

    chooser.cell = 1
    rule, why = select_r1(m.nodes[sid], chooser)
    if fired is not None:
        fired.extend((1, name) for name in why)
    rules.append(rule)
    sid = m.plain_step(sid, rule)

    plans: dict[int, Plan] = _GENERIC_PLANS
    for i in range(2, n - 2):
        plan = plans.get(sid)
        if plan is None:
            plan = plans[sid] = generic_plan(m.nodes[sid])
        base, sites, why = plan
        if sites:
            chooser.cell = i
            rule = _apply(plan, chooser)
        else:
            rule = base
        if fired is not None:
            fired.extend((i, name) for name in why)
        rules.append(rule)
        sid = m.plain_step(sid, rule)

    chooser.cell = n - 2
    sid = m.intern(m.nodes[sid].restrict(PENULTIMATE_KEEP))
    plan = penultimate_plan(m.nodes[sid])
    if fired is not None:
        fired.extend((n - 2, name) for name in plan[2])
    rule = _apply(plan, chooser)
    rules.append(rule)
    sid = m.plain_step(sid, rule)

    rules.append(select_rn1(m.nodes[sid]))

    extra = chooser.leftovers()
    if extra:
        raise ReplayError(f"unused choices {extra}")
    rv = RuleVector(rules)
    trace.rules = rv.rules
    if chooser.log is not None:
        trace.choices = chooser.log
    if verify:
        bad = next((r for r in set(rules) if not is_nc_rule(r)), None)
        if bad is not None:
            raise SynthesisError(f"selected rule {bad} is not number conserving")
        verdict = decide_ncca(rv)
        if not verdict.accepted:
            raise SynthesisError(f"synthesized vector rejected: {verdict.reason}")
    return rv, trace


_GENERIC_PLANS: dict[int, Plan] = {}
