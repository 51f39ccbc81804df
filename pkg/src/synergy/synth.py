"""Synthetic populations with planted structure, and a dense brute-force oracle.

Random draws come from SplitMix64 (Steele, Lea & Flood 2014): output ``i``
of a stream seeded with ``s`` is ``mix(s + (i + 1) * 0x9E3779B97F4A7C15)``
modulo 2**64, and a draw below ``k`` is that output modulo ``k``.  The
algorithm is a few lines in any language, so fixtures reproduce exactly
outside Python.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainTooLargeError, InvalidSpecError

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
RNG_NAME = "splitmix64"


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Scalar SplitMix64 stream."""

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return _mix(self.state)

    def below(self, k: int) -> int:
        if k < 1:
            raise ValueError("k must be >= 1")
        return self.next_u64() % k

    def random(self) -> float:
        """Uniform float in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def choice(self, seq: Sequence):
        return seq[self.below(len(seq))]

    def weighted(self, cumulative: Sequence[int]) -> int:
        """Index drawn with integer weights given as a cumulative sum."""
        x = self.below(cumulative[-1])
        lo, hi = 0, len(cumulative) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if cumulative[mid] > x:
                hi = mid
            else:
                lo = mid + 1
        return lo


def splitmix64_array(seed: int, count: int, start: int = 0) -> np.ndarray:
    """Outputs ``start .. start+count-1`` of the stream seeded with ``seed``.

    Matches ``SplitMix64(seed)`` draw for draw; uint64 arithmetic wraps.
    """
    i = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed & MASK64) + i * np.uint64(GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


STRUCTURES = ("independent", "xor", "copy", "mixture")
_XOR_CELLS = ((0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0))


@dataclass(frozen=True)
class SynthSpec:
    """What to generate.

    ``groups`` is only used by ``mixture`` and holds ``(key, spec)`` pairs;
    ``n`` of a mixture may be left at 0 and is then the sum over groups.
    """

    structure: str
    n: int = 0
    cardinalities: tuple[int, int, int] = (2, 2, 2)
    seed: int = 0
    groups: tuple[tuple[str, SynthSpec], ...] = field(default=())

    def validate(self) -> None:
        if self.structure not in STRUCTURES:
            raise InvalidSpecError(f"unknown structure {self.structure!r}")
        if len(self.cardinalities) != 3 or any(int(c) < 1 for c in self.cardinalities):
            raise InvalidSpecError("need three cardinalities, each >= 1")
        if self.structure == "mixture":
            if not self.groups:
                raise InvalidSpecError("mixture needs at least one group")
            keys = [k for k, _ in self.groups]
            if len(set(keys)) != len(keys):
                raise InvalidSpecError("mixture group keys must be distinct")
            for _, sub in self.groups:
                sub.validate()
            total = sum(sub.total() for _, sub in self.groups)
            if self.n not in (0, total):
                raise InvalidSpecError(f"mixture n={self.n} but groups sum to {total}")
            return
        if self.groups:
            raise InvalidSpecError("only mixture specs take groups")
        if self.n < 1:
            raise InvalidSpecError("n must be >= 1")
        if self.structure == "xor" and tuple(self.cardinalities) != (2, 2, 2):
            raise InvalidSpecError("xor is defined on 2x2x2")
        if self.structure == "copy" and len(set(self.cardinalities)) != 1:
            raise InvalidSpecError("copy needs equal cardinalities")

    def total(self) -> int:
        if self.structure == "mixture":
            return sum(sub.total() for _, sub in self.groups)
        return self.n


def _generate_indices(spec: SynthSpec) -> np.ndarray:
    n = spec.n
    if spec.structure == "independent":
        draws = splitmix64_array(spec.seed, 3 * n).reshape(n, 3)
        return (draws % np.array(spec.cardinalities, dtype=np.uint64)).astype(np.int64)
    if spec.structure == "xor":
        return np.array(_XOR_CELLS, dtype=np.int64)[np.arange(n) % 4]
    # copy
    diag = np.arange(n, dtype=np.int64) % spec.cardinalities[0]
    return np.column_stack([diag, diag, diag])


def generate_labeled(spec: SynthSpec) -> list[tuple[str | None, tuple[str, str, str]]]:
    """Generate ``(group, (g, t, o))`` pairs; ``group`` is None outside mixtures."""
    spec.validate()
    if spec.structure == "mixture":
        out = []
        for key, sub in spec.groups:
            out.extend((key, cell) for _, cell in generate_labeled(sub))
        return out
    idx = _generate_indices(spec)
    return [(None, (str(g), str(t), str(o))) for g, t, o in idx.tolist()]


def generate(spec: SynthSpec) -> list[tuple[str, str, str]]:
    """Generate (g, t, o) label tuples; mixtures are concatenated in group order.

    ``independent`` draws each dimension uniformly; ``xor`` cycles the four
    even-parity cells; ``copy`` cycles the diagonal.
    """
    return [cell for _, cell in generate_labeled(spec)]


MAX_DENSE_CELLS = 10**6


def dense_joint(records: Iterable[tuple], max_cells: int = MAX_DENSE_CELLS) -> np.ndarray:
    """Dense joint count array over the sorted distinct labels of each dimension."""
    records = list(records)
    if not records:
        return np.zeros((0, 0, 0))
    columns = list(zip(*records))
    levels = [sorted(set(col), key=repr) for col in columns]
    shape = tuple(len(lv) for lv in levels)
    if int(np.prod(shape, dtype=np.float64)) > max_cells:
        raise DomainTooLargeError(f"dense domain {shape} exceeds {max_cells} cells")
    index = [{v: i for i, v in enumerate(lv)} for lv in levels]
    coords = np.array([[index[d][v] for d, v in enumerate(rec)] for rec in records], dtype=np.int64)
    joint = np.zeros(shape, dtype=np.float64)
    np.add.at(joint, tuple(coords.T), 1.0)
    return joint


def _h(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def brute_force_entropies(records: Iterable[tuple], max_cells: int = MAX_DENSE_CELLS) -> dict[str, float]:
    """All seven entropies by explicit summation over the dense joint."""
    joint = dense_joint(records, max_cells)
    total = joint.sum()
    if total == 0:
        raise ValueError("empty sample")
    p = joint / total
    return {
        "h_g": _h(p.sum(axis=(1, 2))),
        "h_t": _h(p.sum(axis=(0, 2))),
        "h_o": _h(p.sum(axis=(0, 1))),
        "h_gt": _h(p.sum(axis=2)),
        "h_go": _h(p.sum(axis=1)),
        "h_to": _h(p.sum(axis=0)),
        "h_gto": _h(p),
    }


def brute_force_t3(records: Iterable[tuple], max_cells: int = MAX_DENSE_CELLS) -> float:
    """Three-way mutual information from the dense joint distribution, in bits."""
    h = brute_force_entropies(records, max_cells)
    return (h["h_g"] + h["h_t"] + h["h_o"]
            - h["h_gt"] - h["h_go"] - h["h_to"]
            + h["h_gto"])
