"""Directed +-1 walks: Bernoulli walks, meanders, Dyck paths, bilateral Dyck paths."""
from __future__ import annotations

from enum import Enum
from typing import Iterator

from .polygons import SizeLimitExceeded

MAX_WALK_LENGTH = 22


class WalkModel(str, Enum):
    BERNOULLI = "bernoulli"
    MEANDER = "meander"
    DYCK = "dyck"
    BILATERAL = "bilateral-dyck"

    @property
    def nonnegative(self) -> bool:
        return self in (WalkModel.MEANDER, WalkModel.DYCK)

    @property
    def returns(self) -> bool:
        return self in (WalkModel.DYCK, WalkModel.BILATERAL)


def height_moments(steps: str, kmax: int) -> tuple[int, ...]:
    """``(n, n_1, ..., n_kmax)`` with ``n_k = sum |h(s)|^k`` over positions ``s = 0..n``."""
    h = 0
    sums = [0] * kmax
    for s in steps:
        h += 1 if s == "u" else -1
        a = abs(h)
        p = 1
        for k in range(kmax):
            p *= a
            sums[k] += p
    return (len(steps), *sums)


def enumerate_walks(model: WalkModel | str, length: int, kmax: int = 1) -> Iterator[tuple[str, tuple[int, ...]]]:
    """Yield ``(steps, moments)`` for every walk of the model with ``length`` steps.

    Steps are written over ``u`` and ``d`` and enumerated in lexicographic order
    (``d`` before ``u``).
    """
    model = WalkModel(model)
    if length < 0:
        raise ValueError("length must be >= 0")
    if length > MAX_WALK_LENGTH:
        raise SizeLimitExceeded(f"length={length} > {MAX_WALK_LENGTH}")
    path: list[str] = []

    def rec(h: int) -> Iterator[tuple[str, tuple[int, ...]]]:
        left = length - len(path)
        if left == 0:
            if not model.returns or h == 0:
                s = "".join(path)
                yield s, height_moments(s, kmax)
            return
        for s, dh in (("d", -1), ("u", 1)):
            nh = h + dh
            if model.nonnegative and nh < 0:
                continue
            if model.returns and abs(nh) > left - 1:
                continue
            path.append(s)
            yield from rec(nh)
            path.pop()

    yield from rec(0)
