"""
Finite partitions of [n]

Exact partitions of {1, ..., n} with the coagulation operator, restriction,
the metric index, block frequencies and the single-block encoding used to turn
reproduction events into partitions.

Blocks are stored as sorted tuples and ordered by least element, so two
partitions are equal exactly when their tuples are equal.
"""

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Hashable, Iterable, Iterator, List, Sequence, Tuple

from .errors import PartitionError

MAX_ENUMERATION_N = 10

_BLOCK_RE = re.compile(r"\{([^{}]*)\}")


@dataclass(frozen=True)
class PartitionN:
    """A partition of [n], blocks ordered by least element"""

    n: int
    blocks: Tuple[Tuple[int, ...], ...]

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def __len__(self) -> int:
        return len(self.blocks)

    def __str__(self) -> str:
        return self.to_text()

    def to_text(self) -> str:
        """Serializes as ``{1,3}{2}{4}``"""
        return "".join("{" + ",".join(str(i) for i in block) + "}" for block in self.blocks)

    def block(self, i: int) -> Tuple[int, ...]:
        """The i-th block (1-based); empty tuple when i exceeds the block count"""
        if i < 1:
            raise PartitionError(f"Block index must be positive, got {i}")
        return self.blocks[i - 1] if i <= len(self.blocks) else ()

    def labels(self) -> Tuple[int, ...]:
        """For each element 1..n, the least element of its block"""
        out = [0] * self.n
        for block in self.blocks:
            head = block[0]
            for i in block:
                out[i - 1] = head
        return tuple(out)

    def block_indices(self) -> Tuple[int, ...]:
        """For each element 1..n, the 1-based index of its block"""
        out = [0] * self.n
        for index, block in enumerate(self.blocks, start=1):
            for i in block:
                out[i - 1] = index
        return tuple(out)

    def non_singleton_blocks(self) -> List[Tuple[int, ...]]:
        return [block for block in self.blocks if len(block) > 1]

    def is_identity(self) -> bool:
        return len(self.blocks) == self.n


def _canonical(n: int, blocks: Iterable[Iterable[int]]) -> PartitionN:
    """Builds a partition from trusted blocks: sorts, drops empties, orders by least element"""
    cleaned = [tuple(sorted(block)) for block in blocks]
    cleaned = [block for block in cleaned if block]
    cleaned.sort(key=lambda block: block[0])
    return PartitionN(n=n, blocks=tuple(cleaned))


def make_partition(blocks: Iterable[Iterable[int]], n: int) -> PartitionN:
    """Validates and canonicalizes a list of integer sets covering [n]"""
    if n < 1:
        raise PartitionError(f"Ground set size must be positive, got {n}")
    seen = set()
    collected = []
    for block in blocks:
        members = list(block)
        if not members:
            raise PartitionError("Blocks must be non-empty")
        for i in members:
            if isinstance(i, bool) or not isinstance(i, int):
                raise PartitionError(f"Element {i!r} is not an integer")
            if i < 1 or i > n:
                raise PartitionError(f"Element {i} is outside [1, {n}]")
            if i in seen:
                raise PartitionError(f"Element {i} appears more than once")
            seen.add(i)
        collected.append(members)
    if len(seen) != n:
        missing = next(i for i in range(1, n + 1) if i not in seen)
        raise PartitionError(f"Element {missing} is missing from the blocks")
    return _canonical(n, collected)


def identity_partition(n: int) -> PartitionN:
    """O_[n], the partition into singletons"""
    if n < 1:
        raise PartitionError(f"Ground set size must be positive, got {n}")
    return PartitionN(n=n, blocks=tuple((i,) for i in range(1, n + 1)))


def one_block(n: int) -> PartitionN:
    """The partition {{1, ..., n}}"""
    if n < 1:
        raise PartitionError(f"Ground set size must be positive, got {n}")
    return PartitionN(n=n, blocks=(tuple(range(1, n + 1)),))


def partition_from_labels(labels: Sequence[Hashable]) -> PartitionN:
    """Groups elements 1..n sharing a label; any hashable labels work"""
    groups: Dict[Hashable, List[int]] = {}
    for i, label in enumerate(labels, start=1):
        groups.setdefault(label, []).append(i)
    # dict order is first appearance, which is least-element order
    return PartitionN(n=len(labels), blocks=tuple(tuple(g) for g in groups.values()))


def parse_partition(text: str) -> PartitionN:
    """Parses the ``{1,3}{2}{4}`` serialization"""
    stripped = re.sub(r"\s+", "", text)
    matches = _BLOCK_RE.findall(stripped)
    if not matches or "".join("{" + m + "}" for m in matches) != stripped:
        raise PartitionError(f"Malformed partition text: {text!r}")
    blocks = []
    for body in matches:
        try:
            blocks.append([int(token) for token in body.split(",")])
        except ValueError:
            raise PartitionError(f"Malformed block {{{body}}} in {text!r}")
    n = max(max(block) for block in blocks)
    return make_partition(blocks, n)


def coag(pi: PartitionN, pi_prime: PartitionN) -> PartitionN:
    """Coag(pi, pi')(i) is the union of the blocks of pi indexed by block i of pi'

    Indices of pi' beyond the block count of pi refer to empty blocks and are
    dropped.
    """
    k = len(pi.blocks)
    if pi_prime.n < k:
        raise PartitionError(
            f"Second argument covers [{pi_prime.n}] but the first has {k} blocks"
        )
    merged = []
    for block in pi_prime.blocks:
        union = [e for j in block if j <= k for e in pi.blocks[j - 1]]
        if union:
            merged.append(union)
    return _canonical(pi.n, merged)


def restrict(pi: PartitionN, m: int) -> PartitionN:
    """Restriction of pi to [m]"""
    if m < 1 or m > pi.n:
        raise PartitionError(f"Restriction size {m} is outside [1, {pi.n}]")
    return _canonical(m, ([i for i in block if i <= m] for block in pi.blocks))


def distance_index(pi: PartitionN, pi_prime: PartitionN) -> int:
    """Largest j such that the restrictions to [j] agree (n when equal)

    Restrictions to [j] agree iff every element up to j has the same least
    block element in both partitions.
    """
    if pi.n != pi_prime.n:
        raise PartitionError(f"Partitions of [{pi.n}] and [{pi_prime.n}] cannot be compared")
    for j, (left, right) in enumerate(zip(pi.labels(), pi_prime.labels()), start=1):
        if left != right:
            return j - 1
    return pi.n


def distance(pi: PartitionN, pi_prime: PartitionN) -> float:
    """d(pi, pi') = 2^-i with i the distance index, 0 for equal partitions"""
    if pi == pi_prime:
        return 0.0
    return 2.0 ** -distance_index(pi, pi_prime)


def block_frequencies(pi: PartitionN) -> List[Fraction]:
    """|block i| / n for every block"""
    return [Fraction(len(block), pi.n) for block in pi.blocks]


def relabel(pi: PartitionN, perm: Sequence[int]) -> PartitionN:
    """Image of pi under the permutation i -> perm[i-1]"""
    if sorted(perm) != list(range(1, pi.n + 1)):
        raise PartitionError(f"Not a permutation of [{pi.n}]: {list(perm)}")
    return _canonical(pi.n, ([perm[i - 1] for i in block] for block in pi.blocks))


def encode_single_block(members: Iterable[int], n: int) -> PartitionN:
    """1_I: the partition of [n] whose only non-singleton block is I"""
    chosen = sorted(set(members))
    if len(chosen) < 2:
        raise PartitionError(f"Single-block encoding needs at least two members, got {chosen}")
    if chosen[0] < 1 or chosen[-1] > n:
        raise PartitionError(f"Members {chosen} are not a subset of [1, {n}]")
    member_set = set(chosen)
    singles = [(i,) for i in range(1, n + 1) if i not in member_set]
    return _canonical(n, [tuple(chosen)] + singles)


def decode_single_block(pi: PartitionN) -> Tuple[int, ...]:
    """Inverse of encode_single_block"""
    wide = pi.non_singleton_blocks()
    if len(wide) != 1:
        raise PartitionError(
            f"Expected exactly one non-singleton block, found {len(wide)} in {pi.to_text()}"
        )
    return wide[0]


def enumerate_partitions(n: int) -> Iterator[PartitionN]:
    """All partitions of [n] (Bell(n) of them) via restricted growth strings"""
    if n < 1 or n > MAX_ENUMERATION_N:
        raise PartitionError(f"Enumeration supports 1 <= n <= {MAX_ENUMERATION_N}, got {n}")

    def grow(prefix: List[int], top: int) -> Iterator[List[int]]:
        if len(prefix) == n:
            yield prefix
            return
        for label in range(top + 2):
            yield from grow(prefix + [label], max(top, label))

    for labels in grow([0], 0):
        yield partition_from_labels(labels)


def enumerate_single_blocks(n: int) -> Iterator[Tuple[int, ...]]:
    """All subsets of [n] with at least two elements"""
    if n < 2 or n > MAX_ENUMERATION_N:
        raise PartitionError(f"Enumeration supports 2 <= n <= {MAX_ENUMERATION_N}, got {n}")
    for size in range(2, n + 1):
        yield from itertools.combinations(range(1, n + 1), size)
