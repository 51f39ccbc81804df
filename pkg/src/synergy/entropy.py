"""Sparse three-way contingency tables and the entropy statistics over them.

All quantities are plug-in (maximum-likelihood) estimates in bits, computed
from exact integer cell counts.  Sums go through :func:`math.fsum`, which is
correctly rounded and therefore independent of cell order; two tables that
hold the same multiset of counts give bit-identical results no matter how
they were built or merged.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySampleError

DIMENSIONS = ("g", "t", "o")

#: dimension subsets in the order the profile fields are reported
_SUBSETS = {
    "h_g": (0,),
    "h_t": (1,),
    "h_o": (2,),
    "h_gt": (0, 1),
    "h_go": (0, 2),
    "h_to": (1, 2),
    "h_gto": (0, 1, 2),
}


@dataclass
class DimensionRegistry:
    """Dense 0..k-1 indexing of the category labels seen on one dimension."""

    name: str
    labels: list[str] = field(default_factory=list)
    _index: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.labels and not self._index:
            self._index = {label: i for i, label in enumerate(self.labels)}
            if len(self._index) != len(self.labels):
                raise ValueError(f"duplicate labels in dimension {self.name!r}")

    def __len__(self):
        return len(self.labels)

    def __contains__(self, label):
        return label in self._index

    def add(self, label: str) -> int:
        """Return the index of ``label``, registering it if new."""
        idx = self._index.get(label)
        if idx is None:
            idx = len(self.labels)
            self._index[label] = idx
            self.labels.append(label)
        return idx

    def lookup(self, label: str) -> int:
        return self._index[label]

    def label_at(self, index: int) -> str:
        return self.labels[index]

    def copy(self) -> DimensionRegistry:
        return DimensionRegistry(self.name, list(self.labels), dict(self._index))


class ContingencyTable3:
    """Sparse integer counts over (g, t, o) cells.

    Only cells with a positive count are stored.  Equality is label based:
    two tables are equal when they assign the same count to every label
    triple, regardless of the order in which labels were registered.
    """

    __slots__ = ("dims", "cells", "n")

    def __init__(self, dims=None, cells=None, n=None):
        if dims is None:
            dims = tuple(DimensionRegistry(d) for d in DIMENSIONS)
        self.dims: tuple[DimensionRegistry, DimensionRegistry, DimensionRegistry] = tuple(dims)
        self.cells: dict[tuple[int, int, int], int] = {} if cells is None else cells
        self.n: int = sum(self.cells.values()) if n is None else n

    @classmethod
    def from_label_counts(cls, counts: Mapping[tuple[str, str, str], int]) -> ContingencyTable3:
        """Build a table from ``{(g, t, o): count}``; zero counts are dropped."""
        table = cls()
        add_g, add_t, add_o = (d.add for d in table.dims)
        cells = table.cells
        n = 0
        for (g, t, o), c in counts.items():
            if c < 0:
                raise ValueError("cell counts must be nonnegative")
            if c == 0:
                continue
            key = (add_g(g), add_t(t), add_o(o))
            cells[key] = cells.get(key, 0) + c
            n += c
        table.n = n
        return table

    def add(self, g: str, t: str, o: str, count: int = 1) -> None:
        if count <= 0:
            if count < 0:
                raise ValueError("cell counts must be nonnegative")
            return
        key = (self.dims[0].add(g), self.dims[1].add(t), self.dims[2].add(o))
        self.cells[key] = self.cells.get(key, 0) + count
        self.n += count

    def label_counts(self) -> dict[tuple[str, str, str], int]:
        lg, lt, lo = (d.labels for d in self.dims)
        return {(lg[i], lt[j], lo[k]): c for (i, j, k), c in self.cells.items()}

    def cardinalities(self) -> tuple[int, int, int]:
        return tuple(len(d) for d in self.dims)

    def copy(self) -> ContingencyTable3:
        return ContingencyTable3(tuple(d.copy() for d in self.dims), dict(self.cells), self.n)

    def __len__(self):
        return len(self.cells)

    def __eq__(self, other):
        if not isinstance(other, ContingencyTable3):
            return NotImplemented
        return self.n == other.n and self.label_counts() == other.label_counts()

    def __repr__(self):
        return f"ContingencyTable3(n={self.n}, cells={len(self.cells)}, shape={self.cardinalities()})"


def build_table(records: Iterable[tuple[str, str, str]]) -> ContingencyTable3:
    """Count (g, t, o) label tuples into a sparse table."""
    table = ContingencyTable3()
    add_g, add_t, add_o = (d.add for d in table.dims)
    cells = table.cells
    n = 0
    for g, t, o in records:
        key = (add_g(g), add_t(t), add_o(o))
        cells[key] = cells.get(key, 0) + 1
        n += 1
    table.n = n
    return table


def merge_tables(a: ContingencyTable3, b: ContingencyTable3) -> ContingencyTable3:
    """Cell-wise sum of two tables; registries are unioned by label.

    The result keeps ``a``'s label order and appends labels only seen in
    ``b``.  Neither input is modified.
    """
    merged = a.copy()
    remap = [
        [dst.add(label) for label in src.labels]
        for dst, src in zip(merged.dims, b.dims)
    ]
    rg, rt, ro = remap
    cells = merged.cells
    for (i, j, k), c in b.cells.items():
        key = (rg[i], rt[j], ro[k])
        cells[key] = cells.get(key, 0) + c
    merged.n = a.n + b.n
    return merged


def _plugin_entropy(counts: np.ndarray, n: int) -> float:
    counts = counts[counts > 0]
    if counts.size == 0:
        return 0.0
    p = counts / float(n)
    # every term is >= 0; abs() only folds a possible -0.0
    return abs(math.fsum(-p * np.log2(p)))


def _cell_arrays(table: ContingencyTable3) -> tuple[np.ndarray, np.ndarray]:
    if not table.cells:
        return np.empty((0, 3), dtype=np.int64), np.empty(0, dtype=np.int64)
    keys = np.array(sorted(table.cells), dtype=np.int64)
    counts = np.array([table.cells[tuple(k)] for k in keys.tolist()], dtype=np.int64)
    return keys, counts


def _marginal_counts(keys: np.ndarray, counts: np.ndarray, axes: tuple[int, ...], shape) -> np.ndarray:
    if len(axes) == 3:
        return counts
    if len(axes) == 1:
        return np.bincount(keys[:, axes[0]], weights=counts, minlength=shape[axes[0]])
    a, b = axes
    packed = keys[:, a] * shape[b] + keys[:, b]
    _, inverse = np.unique(packed, return_inverse=True)
    return np.bincount(inverse, weights=counts)


@dataclass(frozen=True)
class EntropyProfile:
    """The seven marginal and joint entropies of a three-way table, in bits."""

    h_g: float
    h_t: float
    h_o: float
    h_gt: float
    h_go: float
    h_to: float
    h_gto: float

    def pair(self, pair: str) -> tuple[float, float, float]:
        """Return ``(H_a, H_b, H_ab)`` for a pair such as ``"gt"``."""
        a, b = _normalize_pair(pair)
        joint = "h_" + "".join(sorted((a, b), key=DIMENSIONS.index))
        return getattr(self, "h_" + a), getattr(self, "h_" + b), getattr(self, joint)

    def synergy(self) -> float:
        return math.fsum(
            (self.h_g, self.h_t, self.h_o, -self.h_gt, -self.h_go, -self.h_to, self.h_gto)
        )


@dataclass(frozen=True)
class SynergyValue:
    """Signed three-way mutual information.

    Negative values mean the configuration generates redundancy (synergy).
    """

    bits: float
    n: int

    @property
    def millibits(self) -> float:
        return self.bits * 1000

    def __float__(self):
        return self.bits


def entropy_profile(table: ContingencyTable3) -> EntropyProfile:
    """Compute H for every non-empty subset of the three dimensions."""
    if table.n <= 0:
        raise EmptySampleError("entropy is undefined for an empty sample")
    keys, counts = _cell_arrays(table)
    shape = table.cardinalities()
    values = {
        name: _plugin_entropy(_marginal_counts(keys, counts, axes, shape), table.n)
        for name, axes in _SUBSETS.items()
    }
    return EntropyProfile(**values)


def _normalize_pair(pair) -> tuple[str, str]:
    if isinstance(pair, str):
        pair = tuple(pair)
    pair = tuple(pair)
    if len(pair) != 2 or pair[0] == pair[1] or any(p not in DIMENSIONS for p in pair):
        raise ValueError(f"pair must name two distinct dimensions of {DIMENSIONS}, got {pair!r}")
    return pair


def mutual_info2(table: ContingencyTable3, pair="gt", profile: EntropyProfile | None = None) -> float:
    """Two-way mutual information H_a + H_b - H_ab in bits."""
    if profile is None:
        profile = entropy_profile(table)
    h_a, h_b, h_ab = profile.pair(pair)
    return math.fsum((h_a, h_b, -h_ab))


def mutual_info3(table: ContingencyTable3, profile: EntropyProfile | None = None) -> SynergyValue:
    """Signed three-way mutual information T_gto in bits.

    >>> xor = build_table([("0", "0", "0"), ("0", "1", "1"), ("1", "0", "1"), ("1", "1", "0")])
    >>> mutual_info3(xor).bits
    -1.0
    """
    if profile is None:
        profile = entropy_profile(table)
    return SynergyValue(profile.synergy(), table.n)
