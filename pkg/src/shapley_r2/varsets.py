"""Bitmask-encoded variable sets.

Variables are indexed 0..d where 0 is the response and 1..d are the
covariates. A :class:`VariableSet` wraps an integer mask whose bit ``i``
marks membership of variable ``i``; the mask doubles as the key for every
determinant and covariance cache in the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

__all__ = ["VariableSet", "iter_submasks"]


@dataclass(frozen=True, slots=True)
class VariableSet:
    """Immutable subset of {0} ∪ [d], encoded as a bitmask."""

    mask: int

    def __post_init__(self) -> None:
        if self.mask < 0:
            raise ValueError("mask must be nonnegative")

    @classmethod
    def from_indices(cls, indices: Iterable[int]) -> "VariableSet":
        mask = 0
        for i in indices:
            if i < 0:
                raise ValueError(f"negative variable index {i}")
            mask |= 1 << i
        return cls(mask)

    @classmethod
    def full(cls, d: int, include_response: bool = True) -> "VariableSet":
        """All covariates 1..d, optionally together with the response 0."""
        mask = ((1 << (d + 1)) - 1) if include_response else ((1 << (d + 1)) - 2)
        return cls(mask)

    @property
    def cardinality(self) -> int:
        return self.mask.bit_count()

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    def indices(self) -> tuple[int, ...]:
        """Member indices in ascending order."""
        return tuple(self)

    def __iter__(self) -> Iterator[int]:
        mask = self.mask
        while mask:
            low = mask & -mask
            yield low.bit_length() - 1
            mask ^= low

    def __len__(self) -> int:
        return self.cardinality

    def __contains__(self, index: int) -> bool:
        return index >= 0 and bool(self.mask >> index & 1)

    def __or__(self, other: "VariableSet") -> "VariableSet":
        return VariableSet(self.mask | other.mask)

    def add(self, index: int) -> "VariableSet":
        return VariableSet(self.mask | (1 << index))

    def remove(self, index: int) -> "VariableSet":
        return VariableSet(self.mask & ~(1 << index))

    def with_response(self) -> "VariableSet":
        """The set together with the response variable 0."""
        return VariableSet(self.mask | 1)

    def contains_response(self) -> bool:
        return bool(self.mask & 1)

    def __repr__(self) -> str:
        return f"VariableSet({{{', '.join(map(str, self))}}})"


def iter_submasks(positions: tuple[int, ...]) -> Iterator[int]:
    """Yield the masks of all subsets of the given bit positions.

    ``positions`` must be ascending; the expansion of consecutive counters
    onto them is then monotone, so masks come out in ascending order. The
    deterministic order fixes cache population and floating-point
    summation order across runs.
    """
    k = len(positions)
    for counter in range(1 << k):
        mask = 0
        rest = counter
        t = 0
        while rest:
            if rest & 1:
                mask |= 1 << positions[t]
            rest >>= 1
            t += 1
        yield mask
