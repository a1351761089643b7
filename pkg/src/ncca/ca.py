"""Rule tables, configurations and one-step evolution of non-uniform ECAs.

Configurations are written cell 0 first, so ``"1110"`` is seen by the four
cells as the RMT sequence ``(3, 7, 6, 5)`` under periodic boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

#: Rules allowed in a number-conserving rule vector of size n >= 5.
NC_RULES: tuple[int, ...] = (136, 170, 184, 192, 204, 226, 238, 240, 252)

#: Rules that additionally appear in 4-cell number-conserving CAs only.
#: Deliberately kept out of :func:`is_nc_rule`.
N4_EXTRA_NC_RULES: tuple[int, ...] = (160, 172, 202, 216, 228, 250)

#: RMTs whose centre cell is 1.
CENTRE_ONE = frozenset({2, 3, 6, 7})


class ResourceLimitError(RuntimeError):
    """An input exceeds a configured size cap."""


def successors(r: int) -> tuple[int, int]:
    """RMTs that can follow ``r`` one cell to the right."""
    return (2 * r) % 8, (2 * r + 1) % 8


def equivalent(r: int) -> frozenset[int]:
    return frozenset({r, (r + 4) % 8})


def sibling(r: int) -> frozenset[int]:
    base = 2 * (r // 2)
    return frozenset({base, base + 1})


@dataclass(frozen=True)
class RuleTable:
    """A Wolfram rule; ``table[r]`` is the next state for RMT ``r``."""

    wolfram: int

    def __post_init__(self) -> None:
        if isinstance(self.wolfram, bool) or not isinstance(self.wolfram, int):
            raise TypeError(f"rule must be an int, got {self.wolfram!r}")
        if not 0 <= self.wolfram <= 255:
            raise ValueError(f"rule {self.wolfram} outside 0..255")

    def __getitem__(self, r: int) -> int:
        if not 0 <= r <= 7:
            raise IndexError(f"RMT {r} outside 0..7")
        return (self.wolfram >> r) & 1

    def __index__(self) -> int:
        return self.wolfram

    def __str__(self) -> str:
        return str(self.wolfram)

    @property
    def bits(self) -> tuple[int, ...]:
        """Next states for RMTs 0..7."""
        return tuple((self.wolfram >> r) & 1 for r in range(8))

    @classmethod
    def from_bits(cls, bits: Union[Mapping[int, int], Sequence[int]]) -> "RuleTable":
        if isinstance(bits, Mapping):
            missing = set(range(8)) - set(bits)
            if missing:
                raise ValueError(f"next state unset for RMTs {sorted(missing)}")
            values = [bits[r] for r in range(8)]
        else:
            values = list(bits)
            if len(values) != 8:
                raise ValueError("need exactly 8 next-state bits")
        if any(v not in (0, 1) for v in values):
            raise ValueError("next-state bits must be 0 or 1")
        return cls(sum(v << r for r, v in enumerate(values)))


RuleLike = Union[int, RuleTable]


def rule_lookup(rule: RuleLike, r: int) -> int:
    return RuleTable(int(rule))[r]


def is_nc_rule(rule: RuleLike) -> bool:
    """True iff ``rule`` can take part in a number-conserving vector (n >= 5).

    Checks R[0]=0, R[7]=1, and that the pairs (0,1,4,5) and (2,3,6,7) each
    agree either across equivalent RMTs or across sibling RMTs.
    """
    R = RuleTable(int(rule)).bits
    if R[0] != 0 or R[7] != 1:
        return False
    low = (R[0] == R[4] and R[1] == R[5]) or (R[0] == R[1] and R[4] == R[5])
    high = (R[2] == R[6] and R[3] == R[7]) or (R[2] == R[3] and R[6] == R[7])
    return low and high


@dataclass(frozen=True, init=False)
class RuleVector:
    """Per-cell rules of an n-cell CA with periodic boundary.

    Stored as plain Wolfram numbers; ``rv[i]`` is an ``int`` and
    ``rv.table(i)`` the corresponding :class:`RuleTable`.
    """

    rules: tuple[int, ...]

    def __init__(self, rules: Iterable[RuleLike]):
        values = tuple(int(r) for r in rules)
        if not values:
            raise ValueError("rule vector must have at least one cell")
        if min(values) < 0 or max(values) > 255:
            bad = next(r for r in values if not 0 <= r <= 255)
            raise ValueError(f"rule {bad} outside 0..255")
        object.__setattr__(self, "rules", values)

    @classmethod
    def parse(cls, text: str) -> "RuleVector":
        """Parse ``"192,136,184"``; whitespace around items is ignored."""
        items = [t.strip() for t in text.split(",")]
        if not text.strip() or any(not t for t in items):
            raise ValueError(f"malformed rule vector {text!r}")
        try:
            return cls(int(t, 10) for t in items)
        except ValueError as exc:
            raise ValueError(f"malformed rule vector {text!r}: {exc}") from None

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self) -> Iterator[int]:
        return iter(self.rules)

    def __getitem__(self, i: int) -> int:
        return self.rules[i % len(self.rules)]

    def __str__(self) -> str:
        return ",".join(map(str, self.rules))

    def table(self, i: int) -> RuleTable:
        return RuleTable(self[i])

    def rotate(self, k: int) -> "RuleVector":
        """Cell ``i`` of the result runs the rule of cell ``i + k``."""
        k %= len(self.rules)
        return RuleVector(self.rules[k:] + self.rules[:k])


def as_rule_vector(rv: Union[RuleVector, Iterable[RuleLike], str]) -> RuleVector:
    if isinstance(rv, RuleVector):
        return rv
    if isinstance(rv, str):
        return RuleVector.parse(rv)
    return RuleVector(rv)


@dataclass(frozen=True, init=False)
class Configuration:
    """Global state; ``bits[0]`` is cell 0, printed leftmost."""

    bits: tuple[int, ...]

    def __init__(self, bits: Iterable[int]):
        values = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in values):
            raise ValueError("configuration bits must be 0 or 1")
        object.__setattr__(self, "bits", values)

    @classmethod
    def parse(cls, text: str) -> "Configuration":
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError(f"configuration must be a 0/1 string, got {text!r}")
        return cls(int(c) for c in text)

    @classmethod
    def from_int(cls, value: int, n: int) -> "Configuration":
        """Cell 0 is the most significant of the ``n`` bits."""
        return cls((value >> (n - 1 - i)) & 1 for i in range(n))

    def to_int(self) -> int:
        return int(str(self), 2)

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))

    @property
    def popcount(self) -> int:
        return sum(self.bits)


def as_configuration(config: Union[Configuration, str, Iterable[int]]) -> Configuration:
    if isinstance(config, Configuration):
        return config
    if isinstance(config, str):
        return Configuration.parse(config)
    return Configuration(config)


def rmt_sequence(config: Union[Configuration, str]) -> tuple[int, ...]:
    """RMT seen by each cell: (left, self, right) read as a 3-bit number."""
    bits = as_configuration(config).bits
    n = len(bits)
    if n < 3:
        raise ValueError(f"need at least 3 cells, got {n}")
    return tuple(
        (bits[i - 1] << 2) | (bits[i] << 1) | bits[(i + 1) % n] for i in range(n)
    )


def next_config(rv, config) -> Configuration:
    rv = as_rule_vector(rv)
    config = as_configuration(config)
    if len(config) != len(rv):
        raise ValueError(
            f"configuration has {len(config)} cells, rule vector has {len(rv)}"
        )
    rules = rv.rules
    return Configuration(
        (rules[i] >> r) & 1 for i, r in enumerate(rmt_sequence(config))
    )


def evolve(rv, config, steps: int) -> list[Configuration]:
    """The initial configuration followed by ``steps`` successors."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    rv = as_rule_vector(rv)
    current = as_configuration(config)
    history = [current]
    for _ in range(steps):
        current = next_config(rv, current)
        history.append(current)
    return history
