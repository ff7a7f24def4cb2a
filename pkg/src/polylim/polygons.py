"""Square-lattice polygons, staircase polygons and their counting parameters.

Polygons are stored as closed step strings over ``R``, ``L``, ``U``, ``D``.
Unit squares ("cells") are indexed by their lower-left corner, so cell
``(i, j)`` is ``[i, i+1] x [j, j+1]``.  The negative diagonal through cell
``(i, j)`` is labelled ``i + j``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from math import comb
from typing import Iterator, Sequence

STEPS = {"R": (1, 0), "L": (-1, 0), "U": (0, 1), "D": (0, -1)}

MAX_STAIRCASE_N0 = 14
MAX_SAP_PERIMETER = 16


class PolygonError(ValueError):
    """Base class for rejected step sequences."""


class NotClosed(PolygonError):
    pass


class SelfIntersecting(PolygonError):
    pass


class OddLength(PolygonError):
    pass


class SizeLimitExceeded(ValueError):
    """Raised when an enumeration oracle is asked for more than it can do at desk scale."""


class OddPerimeter(ValueError):
    pass


def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


def _vertices(steps: str) -> list[tuple[int, int]]:
    x = y = 0
    out = [(0, 0)]
    for s in steps:
        dx, dy = STEPS[s]
        x += dx
        y += dy
        out.append((x, y))
    return out


@dataclass(frozen=True)
class LatticePolygon:
    """Self-avoiding polygon up to translation.

    ``steps`` is canonical: it starts at the lexicographically smallest vertex
    (placed at the origin) and runs counter-clockwise, so it always begins
    with ``R`` and ends with ``D``.
    """

    steps: str

    @property
    def perimeter(self) -> int:
        return len(self.steps)

    @property
    def half_perimeter(self) -> int:
        return len(self.steps) // 2

    def vertices(self) -> list[tuple[int, int]]:
        return _vertices(self.steps)[:-1]

    def cells(self) -> set[tuple[int, int]]:
        return polygon_cells(self.steps)

    @property
    def area(self) -> int:
        return len(self.cells())


def _canonical_steps(steps: str) -> str:
    verts = _vertices(steps)[:-1]
    start = min(range(len(verts)), key=lambda i: verts[i])
    rotated = steps[start:] + steps[:start]
    if rotated[0] != "R":
        # traversed clockwise: reverse direction
        flip = {"R": "L", "L": "R", "U": "D", "D": "U"}
        rotated = "".join(flip[s] for s in reversed(rotated))
        verts = _vertices(rotated)[:-1]
        start = min(range(len(verts)), key=lambda i: verts[i])
        rotated = rotated[start:] + rotated[:start]
    return rotated


def validate_polygon(steps: Sequence[str] | str) -> LatticePolygon:
    """Check that ``steps`` is a closed self-avoiding cycle and canonicalise it.

    >>> validate_polygon("RULD").steps
    'RULD'
    """
    steps = "".join(steps)
    if not steps:
        raise ValueError("empty step sequence")
    bad = set(steps) - set(STEPS)
    if bad:
        raise ValueError(f"unknown steps {sorted(bad)}")
    verts = _vertices(steps)
    if verts[-1] != (0, 0):
        raise NotClosed(steps)
    if len(steps) % 2:
        raise OddLength(steps)
    if len(set(verts[:-1])) != len(steps):
        raise SelfIntersecting(steps)
    if len(steps) < 4:
        raise SelfIntersecting(steps)
    return LatticePolygon(_canonical_steps(steps))


def polygon_cells(steps: str) -> set[tuple[int, int]]:
    """Cells enclosed by a closed self-avoiding step string (crossing parity per column)."""
    cols: dict[int, list[int]] = defaultdict(list)
    x = y = 0
    for s in steps:
        dx, dy = STEPS[s]
        if dy == 0:
            cols[min(x, x + dx)].append(y)
        x += dx
        y += dy
    cells = set()
    for i, ys in cols.items():
        ys.sort()
        for a, b in zip(ys[::2], ys[1::2]):
            cells.update((i, j) for j in range(a, b))
    return cells


@dataclass(frozen=True)
class MomentVector:
    """``values = (n0, n1, ..., nM)``; ``variant`` is ``exact``, ``a`` or ``b``."""

    values: tuple[int, ...]
    variant: str = "exact"

    @property
    def M(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, k: int) -> int:
        return self.values[k]


@dataclass(frozen=True)
class StaircasePolygon:
    """Pair of up/right paths from the origin to a common endpoint.

    ``upper`` starts with ``U`` and ``lower`` with ``R``; the paths meet only
    at their endpoints.
    """

    upper: str
    lower: str

    def __post_init__(self):
        if len(self.upper) != len(self.lower) or len(self.upper) < 2:
            raise ValueError("paths must have equal length >= 2")
        if set(self.upper + self.lower) - {"R", "U"}:
            raise ValueError("staircase paths use only R and U")
        if self.upper.count("R") != self.lower.count("R"):
            raise ValueError("paths must end at the same vertex")
        ux = lx = 0
        for k in range(len(self.upper) - 1):
            ux += self.upper[k] == "R"
            lx += self.lower[k] == "R"
            # both points lie on the anti-diagonal x+y = k+1
            if ux >= lx:
                raise ValueError("upper path must stay strictly above the lower path")

    @property
    def half_perimeter(self) -> int:
        return len(self.upper)

    @property
    def width(self) -> int:
        return self.lower.count("R")

    @property
    def height(self) -> int:
        return self.lower.count("U")

    def to_lattice(self) -> LatticePolygon:
        back = {"R": "L", "U": "D"}
        return validate_polygon(self.lower + "".join(back[s] for s in reversed(self.upper)))

    def columns(self) -> list[tuple[int, int]]:
        """``(bottom, top)`` of every column, left to right."""
        return list(zip(_floor_heights(self.lower), _floor_heights(self.upper)))

    def cells(self) -> set[tuple[int, int]]:
        return {(i, j) for i, (b, t) in enumerate(self.columns()) for j in range(b, t)}

    @property
    def area(self) -> int:
        return sum(t - b for b, t in self.columns())

    def reflect(self) -> "StaircasePolygon":
        """Mirror image across the main diagonal x = y."""
        swap = {"R": "U", "U": "R"}
        return StaircasePolygon(
            "".join(swap[s] for s in self.lower), "".join(swap[s] for s in self.upper)
        )


def _floor_heights(path: str) -> list[int]:
    y = 0
    out = []
    for s in path:
        if s == "R":
            out.append(y)
        else:
            y += 1
    return out


def diagonal_moments(p: StaircasePolygon, kmax: int) -> MomentVector:
    """``n0`` = number of negative diagonals, ``n_k`` = sum of their lengths to the k."""
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    counts: dict[int, int] = defaultdict(int)
    for i, j in p.cells():
        counts[i + j] += 1
    lengths = counts.values()
    return MomentVector((len(counts),) + tuple(sum(l**k for l in lengths) for k in range(1, kmax + 1)))


def column_moments(p: StaircasePolygon, kmax: int) -> tuple[int, int, MomentVector]:
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    heights = [t - b for b, t in p.columns()]
    mv = MomentVector((len(heights),) + tuple(sum(h**k for h in heights) for k in range(1, kmax + 1)))
    return p.width, p.height, mv


def _segments(cells: set[tuple[int, int]], family: str) -> dict[int, list[int]]:
    """Segment lengths of every layer.

    ``diagonal`` layers are ``i + j = const`` walked along ``(+1, -1)``;
    ``vertical`` layers are columns walked along ``(0, +1)``.
    """
    if family == "diagonal":
        key, step = (lambda c: c[0] + c[1]), (1, -1)
    elif family == "vertical":
        key, step = (lambda c: c[0]), (0, 1)
    else:
        raise ValueError(f"unknown layer family {family!r}")
    layers: dict[int, list[int]] = defaultdict(list)
    for c in cells:
        prev = (c[0] - step[0], c[1] - step[1])
        if prev in cells:
            continue
        n = 1
        nxt = (c[0] + step[0], c[1] + step[1])
        while nxt in cells:
            n += 1
            nxt = (nxt[0] + step[0], nxt[1] + step[1])
        layers[key(c)].append(n)
    return layers


def layer_moments(
    p: LatticePolygon | StaircasePolygon, kmax: int, family: str = "diagonal"
) -> tuple[MomentVector, MomentVector]:
    """Layer moments of variant a (layer total to the k) and b (segment lengths to the k)."""
    if kmax < 1:
        raise ValueError("kmax must be >= 1")
    layers = _segments(p.cells(), family)
    a = [len(layers)]
    b = [len(layers)]
    for k in range(1, kmax + 1):
        a.append(sum(sum(seg) ** k for seg in layers.values()))
        b.append(sum(sum(l**k for l in seg) for seg in layers.values()))
    return MomentVector(tuple(a), "a"), MomentVector(tuple(b), "b")


# --- Dyck paths ---------------------------------------------------------------


@dataclass(frozen=True)
class DyckPath:
    steps: tuple[int, ...]

    def __post_init__(self):
        h = 0
        for s in self.steps:
            if s not in (1, -1):
                raise ValueError("Dyck steps are +1/-1")
            h += s
            if h < 0:
                raise ValueError("Dyck path dips below zero")
        if h:
            raise ValueError("Dyck path must end at height zero")

    def peaks_and_valleys(self) -> tuple[list[int], list[int]]:
        peaks, valleys = [], []
        h = 0
        for a, b in zip(self.steps, self.steps[1:]):
            h += a
            if a == 1 and b == -1:
                peaks.append(h)
            elif a == -1 and b == 1:
                valleys.append(h)
        return peaks, valleys

    def __str__(self) -> str:
        return "".join("u" if s == 1 else "d" for s in self.steps)


def staircase_to_dyck(p: StaircasePolygon) -> DyckPath:
    """Columns become peaks, column overlaps minus one become valleys."""
    cols = p.columns()
    steps: list[int] = []
    prev_valley = 0
    for i, (b, t) in enumerate(cols):
        h = t - b
        steps += [1] * (h - prev_valley)
        if i + 1 < len(cols):
            overlap = t - cols[i + 1][0]
            valley = overlap - 1
        else:
            valley = 0
        steps += [-1] * (h - valley)
        prev_valley = valley
    return DyckPath(tuple(steps))


def dyck_to_staircase(d: DyckPath) -> StaircasePolygon:
    peaks, valleys = d.peaks_and_valleys()
    bottoms = [0]
    for i, v in enumerate(valleys):
        # column i+1 starts (overlap) = valley + 1 below the top of column i
        bottoms.append(bottoms[i] + peaks[i] - (v + 1))
    tops = [b + h for b, h in zip(bottoms, peaks)]
    return StaircasePolygon(_path_from_heights(tops, tops[-1]), _path_from_heights(bottoms, tops[-1]))


def _path_from_heights(levels: list[int], end: int) -> str:
    """Up/right path whose i-th horizontal step sits at height ``levels[i]``."""
    out = []
    y = 0
    for f in levels:
        out.append("U" * (f - y) + "R")
        y = f
    out.append("U" * (end - y))
    return "".join(out)


# --- enumeration oracles ------------------------------------------------------


def enumerate_staircase(n0: int) -> Iterator[StaircasePolygon]:
    """All staircase polygons of half-perimeter ``n0``, lexicographic in (upper, lower)."""
    if n0 < 2:
        raise ValueError("half-perimeter must be >= 2")
    if n0 > MAX_STAIRCASE_N0:
        raise SizeLimitExceeded(f"n0={n0} > {MAX_STAIRCASE_N0}")

    upper = ["U"]
    lower = ["R"]

    # gap = lower.x - upper.x on the common anti-diagonal
    def rec(k: int, gap: int) -> Iterator[StaircasePolygon]:
        if k == n0:
            if gap == 0:
                yield StaircasePolygon("".join(upper), "".join(lower))
            return
        left = n0 - k - 1
        for us in "RU":
            for ls in "RU":
                g = gap - (us == "R") + (ls == "R")
                if g > left or (g == 0) != (left == 0):
                    continue
                upper.append(us)
                lower.append(ls)
                yield from rec(k + 1, g)
                upper.pop()
                lower.pop()

    yield from rec(1, 1)


def enumerate_sap(perimeter: int) -> Iterator[LatticePolygon]:
    """All self-avoiding polygons of the given perimeter, each once (canonical form)."""
    if perimeter % 2:
        raise OddPerimeter(perimeter)
    if perimeter < 4:
        raise ValueError("perimeter must be >= 4")
    if perimeter > MAX_SAP_PERIMETER:
        raise SizeLimitExceeded(f"perimeter={perimeter} > {MAX_SAP_PERIMETER}")
    # walk from the lex-min vertex (origin) with first step R, return to (0, 1), close with D
    visited = {(0, 0), (1, 0)}
    path = ["R"]
    target = (0, 1)

    def rec(x: int, y: int) -> Iterator[LatticePolygon]:
        left = perimeter - 1 - len(path)
        if left == 0:
            if (x, y) == target:
                yield LatticePolygon("".join(path) + "D")
            return
        for s, (dx, dy) in STEPS.items():
            nx, ny = x + dx, y + dy
            if nx < 0 or (nx == 0 and ny < 0) or (nx, ny) in visited:
                continue
            if (nx, ny) == target and left != 1:
                continue
            if abs(nx - target[0]) + abs(ny - target[1]) > left - 1:
                continue
            visited.add((nx, ny))
            path.append(s)
            yield from rec(nx, ny)
            path.pop()
            visited.discard((nx, ny))

    yield from rec(1, 0)
