"""Digital search trees: construction, protection counts, Monte Carlo.

A DST stores one binary string per node. The first string sits at the root;
each later one walks down consuming one bit per level (0 = left, 1 = right)
and settles in the first empty slot. Under the random model every bit is a
fair coin, so below a root holding one of n items the other n - 1 split
Binomial(n - 1, 1/2) between the subtrees.

A node is k-protected when its shortest distance to a descendant leaf is at
least k: every node is 0-protected, non-leaves are 1-protected, and a node is
2-protected iff it is not a leaf and none of its children is a leaf.
"""

from __future__ import annotations

import enum
import math
import os
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

# Trials are simulated in fixed blocks; block b always draws from the stream
# keyed (seed, b), so results do not depend on how blocks are scheduled.
BLOCK_SIZE = 256


class BitsExhausted(ValueError):
    """A string ran out of bits before reaching an empty slot."""

    def __init__(self, label, index):
        self.label = label
        self.index = index
        name = f"{label!r}" if label is not None else f"number {index + 1}"
        super().__init__(f"bits exhausted while inserting record {name}")


class StringFileError(ValueError):
    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


@dataclass(frozen=True)
class BitString:
    bits: str
    label: str | None = None

    def __post_init__(self):
        if set(self.bits) - {"0", "1"}:
            raise ValueError(f"bits must be 0/1 characters, got {self.bits!r}")


class Node:
    __slots__ = ("label", "left", "right")

    def __init__(self, label=None):
        self.label = label
        self.left = None
        self.right = None

    @property
    def is_leaf(self):
        return self.left is None and self.right is None

    def children(self):
        return [c for c in (self.left, self.right) if c is not None]


@dataclass
class DstTree:
    root: Node | None = None
    size: int = 0

    def nodes(self) -> Iterator[Node]:
        """Pre-order traversal, iterative so deep trees are fine."""
        stack = [self.root] if self.root is not None else []
        while stack:
            node = stack.pop()
            yield node
            if node.right is not None:
                stack.append(node.right)
            if node.left is not None:
                stack.append(node.left)

    def render(self) -> str:
        """Parenthesised form ``label(left,right)``; ``-`` marks an empty slot."""

        def show(node):
            if node is None:
                return "-"
            name = node.label if node.label is not None else "*"
            if node.is_leaf:
                return name
            return f"{name}({show(node.left)},{show(node.right)})"

        return show(self.root) if self.root is not None else ""

    def shape(self):
        """Nested tuples (left, right) with None for empty; labels dropped."""

        def walk(node):
            if node is None:
                return None
            return (walk(node.left), walk(node.right))

        return walk(self.root)

    def find(self, label) -> Node | None:
        return next((n for n in self.nodes() if n.label == label), None)


def insert(tree: DstTree, item: BitString, index: int = 0) -> Node:
    node = Node(item.label)
    if tree.root is None:
        tree.root = node
        tree.size = 1
        return node
    current = tree.root
    for bit in item.bits:
        slot = "left" if bit == "0" else "right"
        child = getattr(current, slot)
        if child is None:
            setattr(current, slot, node)
            tree.size += 1
            return node
        current = child
    raise BitsExhausted(item.label, index)


def build_from_strings(inputs: Iterable[BitString]) -> DstTree:
    inputs = list(inputs)
    if not inputs:
        raise ValueError("need at least one string")
    tree = DstTree()
    for i, item in enumerate(inputs):
        insert(tree, item, i)
    return tree


_RECORD = re.compile(r"^(?:(?P<label>[^:]+?)\s*:\s*)?(?P<bits>[01]+)$")


def parse_strings(lines: Iterable[str]) -> list[BitString]:
    """Parse ``bits`` or ``label:bits`` records; blanks and ``#`` comments skipped."""
    out = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _RECORD.match(line)
        if match is None:
            raise StringFileError(lineno, f"expected 'bits' or 'label:bits', got {line!r}")
        label = match["label"].strip() if match["label"] else None
        out.append(BitString(match["bits"], label))
    return out


def read_strings(path) -> list[BitString]:
    with open(path) as fh:
        return parse_strings(fh)


def format_strings(items: Iterable[BitString]) -> str:
    return "".join(f"{s.label}:{s.bits}\n" if s.label is not None else f"{s.bits}\n" for s in items)


class Mode(enum.Enum):
    BIT_STREAM = "bit-stream"
    SPLIT = "split"


def _build_bit_stream(n: int, rng: random.Random) -> DstTree:
    tree = DstTree()
    for _ in range(n):
        node = Node()
        if tree.root is None:
            tree.root = node
        else:
            current = tree.root
            while True:
                slot = "right" if rng.getrandbits(1) else "left"
                child = getattr(current, slot)
                if child is None:
                    setattr(current, slot, node)
                    break
                current = child
        tree.size += 1
    return tree


def _build_split(n: int, rng: np.random.Generator) -> DstTree:
    tree = DstTree(size=n)
    if n == 0:
        return tree
    tree.root = Node()
    stack = [(tree.root, n)]
    while stack:
        node, size = stack.pop()
        left = int(rng.binomial(size - 1, 0.5))
        right = size - 1 - left
        if left:
            node.left = Node()
            stack.append((node.left, left))
        if right:
            node.right = Node()
            stack.append((node.right, right))
    return tree


def build_random(n: int, rng_seed: int, mode: Mode = Mode.SPLIT) -> DstTree:
    """A random DST on n items; both modes give the same shape distribution."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    if mode is Mode.BIT_STREAM:
        return _build_bit_stream(n, random.Random(rng_seed))
    return _build_split(n, np.random.default_rng(rng_seed))


def min_leaf_distances(tree: DstTree) -> dict[int, int]:
    """Map id(node) -> distance to the nearest descendant leaf."""
    dist = {}
    for node in reversed(list(tree.nodes())):
        kids = node.children()
        dist[id(node)] = 0 if not kids else 1 + min(dist[id(c)] for c in kids)
    return dist


def k_protected_nodes(tree: DstTree, k: int) -> list[Node]:
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    dist = min_leaf_distances(tree)
    return [node for node in tree.nodes() if dist[id(node)] >= k]


def count_k_protected(tree: DstTree, k: int) -> int:
    return len(k_protected_nodes(tree, k))


def count_leaves(tree: DstTree) -> int:
    return sum(1 for node in tree.nodes() if node.is_leaf)


def enumerate_shapes(n: int) -> list[tuple[object, Fraction]]:
    """Every tree shape on n nodes with its exact probability under the split model.

    Shapes are nested tuples ``(left, right)``, None for an empty slot. Used as
    a brute-force oracle; the number of shapes grows fast, keep n small.
    """
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    table: list[list[tuple[object, Fraction]]] = [[(None, Fraction(1))]]
    for size in range(1, n + 1):
        rest = size - 1
        dist = []
        for k in range(rest + 1):
            p = Fraction(math.comb(rest, k), 1 << rest)
            for ls, lp in table[k]:
                for rs, rp in table[rest - k]:
                    dist.append(((ls, rs), p * lp * rp))
        table.append(dist)
    return table[n]


def shape_distance_counts(shape, k: int) -> int:
    """k-protected count of a nested-tuple shape."""

    def walk(s):
        # returns (distance to nearest leaf, count)
        left, right = s
        subs = [walk(c) for c in (left, right) if c is not None]
        d = 0 if not subs else 1 + min(sd for sd, _ in subs)
        return d, sum(c for _, c in subs) + (d >= k)

    return 0 if shape is None else walk(shape)[1]


def exact_expectation_by_enumeration(n: int, k: int = 2) -> Fraction:
    return sum((p * shape_distance_counts(s, k) for s, p in enumerate_shapes(n)), Fraction(0))


@dataclass(frozen=True)
class Statistic:
    """What to count per tree: k-protected nodes or leaves."""

    kind: str
    k: int = 2

    def __post_init__(self):
        if self.kind not in ("protected", "leaves"):
            raise ValueError(f"unknown statistic kind {self.kind!r}")
        if self.k < 0:
            raise ValueError("k must be non-negative")

    @classmethod
    def protected(cls, k: int = 2):
        return cls("protected", k)

    @classmethod
    def leaves(cls):
        return cls("leaves", 0)

    @classmethod
    def parse(cls, text: str, k: int | None = None):
        """``protected2``, ``protected`` (with *k*), or ``leaves``."""
        text = text.strip().lower()
        if text in ("leaves", "endnodes"):
            return cls.leaves()
        match = re.fullmatch(r"protected(\d*)", text)
        if match is None:
            raise ValueError(f"unknown statistic {text!r}")
        if match[1]:
            return cls.protected(int(match[1]))
        return cls.protected(2 if k is None else k)

    @property
    def name(self):
        return "leaves" if self.kind == "leaves" else f"protected{self.k}"

    def of_tree(self, tree: DstTree) -> int:
        if self.kind == "leaves":
            return count_leaves(tree)
        return count_k_protected(tree, self.k)


@dataclass(frozen=True)
class SummaryStats:
    trials: int
    mean: float
    variance: float
    std_error: float
    ci_low: float
    ci_high: float
    seed: int

    def as_dict(self):
        return {
            "trials": self.trials,
            "mean": self.mean,
            "variance": self.variance,
            "std_error": self.std_error,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "seed": self.seed,
        }


def _block_generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def _simulate_split_block(n: int, count: int, statistic: Statistic, rng: np.random.Generator) -> np.ndarray:
    """Per-trial statistic for *count* independent split-model trees, vectorised by level."""
    result = np.zeros(count, dtype=np.int64)
    if n == 0:
        return result
    k = statistic.k
    direct = statistic.kind == "leaves" or k <= 2
    tree_ids = np.arange(count)
    sizes = np.full(count, n, dtype=np.int64)
    levels = []
    parents = None
    while sizes.size:
        left = rng.binomial(sizes - 1, 0.5)
        right = sizes - 1 - left
        if statistic.kind == "leaves":
            flag = sizes == 1
        elif k == 0:
            flag = np.ones(sizes.size, dtype=bool)
        elif k == 1:
            flag = sizes >= 2
        elif k == 2:
            flag = (sizes >= 2) & (left != 1) & (right != 1)
        if direct:
            result += np.bincount(tree_ids, weights=flag, minlength=count).astype(np.int64)
        else:
            levels.append((tree_ids, sizes, parents))
        has_left, has_right = left > 0, right > 0
        idx = np.arange(sizes.size)
        parents = np.concatenate([idx[has_left], idx[has_right]])
        tree_ids = np.concatenate([tree_ids[has_left], tree_ids[has_right]])
        sizes = np.concatenate([left[has_left], right[has_right]])
    if direct:
        return result
    child_dist = None
    child_parents = None
    for ids, level_sizes, level_parents in reversed(levels):
        dist = np.zeros(level_sizes.size, dtype=np.int64)
        if child_dist is not None and child_dist.size:
            nearest = np.full(level_sizes.size, np.iinfo(np.int64).max)
            np.minimum.at(nearest, child_parents, child_dist)
            internal = level_sizes > 1
            dist[internal] = nearest[internal] + 1
        result += np.bincount(ids, weights=dist >= k, minlength=count).astype(np.int64)
        child_dist, child_parents = dist, level_parents
    return result


def _simulate_bit_stream_block(n, count, statistic, rng):
    seeds = rng.integers(0, 2**63, size=count)
    return np.array(
        [statistic.of_tree(_build_bit_stream(n, random.Random(int(s)))) for s in seeds], dtype=np.int64
    )


def _block_values(n, count, statistic, seed, block, mode):
    rng = _block_generator(seed, block)
    if mode is Mode.BIT_STREAM:
        return _simulate_bit_stream_block(n, count, statistic, rng)
    return _simulate_split_block(n, count, statistic, rng)


def _blocks(trials):
    for block, start in enumerate(range(0, trials, BLOCK_SIZE)):
        yield block, min(BLOCK_SIZE, trials - start)


def _run_block(args):
    values = [int(v) for v in _block_values(*args)]
    return sum(values), sum(v * v for v in values)


def sample(n: int, trials: int, seed: int, statistic: Statistic = Statistic.protected(2), mode: Mode = Mode.SPLIT):
    """Per-trial values of *statistic*; the same draws :func:`monte_carlo` summarises."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    return np.concatenate([_block_values(n, count, statistic, seed, b, mode) for b, count in _blocks(trials)])


def monte_carlo(
    n: int,
    trials: int,
    seed: int,
    statistic: Statistic = Statistic.protected(2),
    *,
    mode: Mode = Mode.SPLIT,
    workers: int | None = 1,
) -> SummaryStats:
    """Mean, variance and 95% normal CI of *statistic* over random DSTs on n items.

    Blocks of ``BLOCK_SIZE`` trials draw from independent streams keyed by
    (seed, block index); per-block sums are exact integers, so the result is
    identical for any *workers* count.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    jobs = [(n, count, statistic, seed, block, mode) for block, count in _blocks(trials)]
    workers = workers or os.cpu_count() or 1
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            sums = list(pool.map(_run_block, jobs))
    else:
        sums = [_run_block(job) for job in jobs]
    total = sum(s for s, _ in sums)
    squares = sum(q for _, q in sums)
    mean = Fraction(total, trials)
    variance = (squares - total * mean) / (trials - 1) if trials > 1 else Fraction(0)
    std_error = math.sqrt(variance / trials)
    m = float(mean)
    return SummaryStats(
        trials=trials,
        mean=m,
        variance=float(variance),
        std_error=std_error,
        ci_low=m - 1.96 * std_error,
        ci_high=m + 1.96 * std_error,
        seed=seed,
    )
