"""Ball enumeration, growth tables, and distance transforms in Cayley graphs.

Everything here is exact: balls are layered breadth-first enumerations with
canonical-normal-form dedup, layers are sealed in sorted order so output is
independent of scheduling, and all counts are integers.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ResourceError, UsageError
from .groups import Element, GroupBackend

#: Hard cap on enumerated elements; configurable per call.
DEFAULT_BUDGET = 200_000_000


@dataclass(frozen=True, eq=False)
class MetricBall:
    """An enumerated closed ball B(center, radius).

    ``dist`` maps each element to its distance from the center; ``layers[k]``
    is the sphere at distance k, sorted by coordinate tuple.  Instances are
    immutable after construction and safe to share across threads.
    """

    backend: GroupBackend
    center: Element
    radius: int
    elements: frozenset
    dist: Mapping[Element, int]
    layers: tuple[tuple[Element, ...], ...]

    def __contains__(self, g: Element) -> bool:
        return g in self.elements

    @property
    def size(self) -> int:
        return len(self.elements)

    def sphere(self, k: int) -> tuple[Element, ...]:
        return self.layers[k]


def enumerate_ball(backend: GroupBackend, center: Element, radius: int, *,
                   budget: int | None = None) -> MetricBall:
    """Enumerate B(center, radius) exactly, layered by sphere.

    Raises ResourceError when the predicted or running element count exceeds
    the budget.  B(g, 0) = {g}.
    """
    backend.check_element(center)
    if not isinstance(radius, int) or radius < 0:
        raise UsageError(f"radius must be a nonnegative integer, got {radius!r}")
    cap = DEFAULT_BUDGET if budget is None else budget
    predicted = backend.predicted_ball_size(radius)
    if predicted is not None and predicted > cap:
        raise ResourceError(
            f"predicted ball size {predicted} at radius {radius} exceeds "
            f"budget {cap}")
    dist: dict[Element, int] = {center: 0}
    layers: list[tuple[Element, ...]] = [(center,)]
    frontier: list[Element] = [center]
    for r in range(1, radius + 1):
        nxt = []
        for u in frontier:
            for s in backend.steps:
                v = backend.multiply(u, s)
                if v not in dist:
                    dist[v] = r
                    nxt.append(v)
        if len(dist) > cap:
            raise ResourceError(
                f"ball enumeration reached {len(dist)} elements at radius {r}, "
                f"over budget {cap}")
        nxt.sort()
        layers.append(tuple(nxt))
        frontier = nxt
    return MetricBall(backend, center, radius, frozenset(dist), dist,
                      tuple(layers))


@dataclass(frozen=True)
class GrowthTable:
    """alpha[n] = |B(e, n)| and spheres[n] = |S(e, n)| for n = 0..max_radius."""

    backend_name: str
    generator_count: int
    alpha: tuple[int, ...]
    spheres: tuple[int, ...]

    @property
    def max_radius(self) -> int:
        return len(self.alpha) - 1


@functools.lru_cache(maxsize=None)
def growth_table(backend: GroupBackend, max_radius: int, *,
                 budget: int | None = None) -> GrowthTable:
    """Exact growth function table via layered BFS from the identity."""
    if max_radius < 1:
        raise UsageError("max_radius must be at least 1")
    ball = enumerate_ball(backend, backend.identity, max_radius, budget=budget)
    spheres = tuple(len(layer) for layer in ball.layers)
    alpha = tuple(itertools.accumulate(spheres))
    return GrowthTable(backend.name, len(backend.generators), alpha, spheres)


@dataclass(frozen=True)
class GrowthFit:
    """Least-squares growth degree estimate with its witness constant.

    ``constant`` is the smallest c making (1/c) n^deg_round <= alpha_n
    <= c n^deg_round hold on the whole fit range, by construction.
    """

    degree: float
    degree_round: int
    constant: Fraction
    lo: int
    hi: int


def fit_growth_degree(table: GrowthTable, lo: int, hi: int) -> GrowthFit:
    """Fit alpha_n ~ c * n^d over [lo, hi] by log-log least squares."""
    if not (1 <= lo < hi <= table.max_radius):
        raise UsageError(
            f"fit range [{lo}, {hi}] not inside [1, {table.max_radius}]")
    if hi - lo + 1 < 5:
        raise UsageError("fit range must contain at least 5 points")
    xs = [math.log(n) for n in range(lo, hi + 1)]
    ys = [math.log(table.alpha[n]) for n in range(lo, hi + 1)]
    mx = sum(xs) / len(xs)
    my = sum(ys) / len(ys)
    slope = sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / \
        sum((x - mx) ** 2 for x in xs)
    deg = round(slope)
    constant = Fraction(1)
    for n in range(lo, hi + 1):
        ratio = Fraction(table.alpha[n], n ** deg)
        constant = max(constant, ratio, 1 / ratio)
    return GrowthFit(slope, deg, constant, lo, hi)


def _multi_source_bfs(backend: GroupBackend, sources: Sequence[Element],
                      allowed: frozenset) -> dict[Element, int]:
    """Exact distances from a source set, restricted to ``allowed``."""
    dist = {s: 0 for s in sources}
    frontier = sorted(dist)
    d = 0
    while frontier:
        d += 1
        nxt = []
        for u in frontier:
            for s in backend.steps:
                v = backend.multiply(u, s)
                if v in allowed and v not in dist:
                    dist[v] = d
                    nxt.append(v)
        frontier = nxt
    return dist


def region_for(window: MetricBall) -> MetricBall:
    """Enumerate the region ball that makes window-local BFS exact.

    Geodesics between window elements stay within distance 2R of the center,
    and geodesics from window elements to the external boundary sphere stay
    within 2R + 1, so one region of radius 2R + 1 serves both transforms.
    """
    return enumerate_ball(window.backend, window.center, 2 * window.radius + 1)


def distance_to_set(window: MetricBall, targets: Iterable[Element], *,
                    region: MetricBall | None = None) -> dict[Element, int]:
    """d(x, targets) for every x in the window, by multi-source BFS.

    Targets must be nonempty and lie inside the window; distances are taken
    in the group, so paths may leave the window (the region restriction is
    wide enough that this is exact).
    """
    targets = frozenset(targets)
    if not targets:
        raise UsageError("targets must be nonempty; the empty-set convention "
                         "is handled by the caller")
    if not targets <= window.elements:
        raise UsageError("targets must lie inside the window")
    if region is None:
        region = region_for(window)
    dist = _multi_source_bfs(window.backend, sorted(targets), region.elements)
    return {x: dist[x] for x in window.elements}


def containment_radii(window: MetricBall, *,
                      region: MetricBall | None = None) -> dict[Element, int]:
    """Exact max M with B(x, M) inside the window, for every window element.

    Computed as d(x, S(center, radius+1)) - 1 by multi-source BFS from the
    external boundary sphere; this is genuine set containment, not the
    triangle-inequality proxy.
    """
    if region is None:
        region = region_for(window)
    boundary = region.layers[window.radius + 1]
    dist = _multi_source_bfs(window.backend, boundary, region.elements)
    return {x: dist[x] - 1 for x in window.elements}


def containment_radius(window: MetricBall, x: Element) -> int:
    """Exact max M with B(x, M) contained in the window."""
    if x not in window.elements:
        raise UsageError(f"{x!r} is outside the window")
    return containment_radii(window)[x]
