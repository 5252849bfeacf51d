"""Gap fractions, neighborhood densities, and group-level statistics.

The gap function reports the largest normalized subball of a window that
misses a set, with a verified witness.  The measure surrogate is the
neighborhood density at a resolution rho: the fraction of the window within
ceil(rho * N) of the set, where N is the window radius.  All values are
exact rationals.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .balls import (MetricBall, containment_radii, distance_to_set,
                    enumerate_ball, growth_table, region_for, GrowthFit)
from .errors import UsageError
from .groups import Element, GroupBackend

#: distance-transform value on windows with no members
UNREACHED = math.inf


class SubsetWindow:
    """A subset A of the group materialized inside a window.

    Holds the window ball, the member set (a subset of the window), a
    provenance record, and lazily built transforms shared by the analyses.
    Treat instances as immutable; lazy caches are lock-guarded.
    """

    def __init__(self, window: MetricBall, members: Iterable[Element],
                 provenance: dict | None = None):
        members = frozenset(members)
        if not members <= window.elements:
            raise UsageError("members must be a subset of the window")
        self.window = window
        self.members = members
        self.provenance = dict(provenance or {})
        self._lock = threading.Lock()
        self._region: MetricBall | None = None
        self._dt: dict[Element, float] | None = None
        self._cont: dict[Element, int] | None = None
        self._order: tuple[Element, ...] | None = None
        self._gap: GapReport | None = None

    @property
    def backend(self) -> GroupBackend:
        return self.window.backend

    @property
    def order(self) -> tuple[Element, ...]:
        """Window elements in canonical (sorted coordinate) order."""
        if self._order is None:
            self._order = tuple(sorted(self.window.elements))
        return self._order

    @property
    def region(self) -> MetricBall:
        with self._lock:
            if self._region is None:
                self._region = region_for(self.window)
            return self._region

    @property
    def distance_transform(self) -> Mapping[Element, float]:
        """d(x, A) for every window element; UNREACHED when A is empty.

        Value is 0 exactly on members.
        """
        if self._dt is None:
            region = self.region
            with self._lock:
                if self._dt is None:
                    if self.members:
                        self._dt = dict(distance_to_set(
                            self.window, self.members, region=region))
                    else:
                        self._dt = {x: UNREACHED for x in self.window.elements}
        return self._dt

    @property
    def containment(self) -> Mapping[Element, int]:
        if self._cont is None:
            region = self.region
            with self._lock:
                if self._cont is None:
                    self._cont = containment_radii(self.window, region=region)
        return self._cont

    def restrict(self, ball: MetricBall) -> "SubsetWindow":
        """The same set viewed on a subball of this window."""
        if not ball.elements <= self.window.elements:
            raise UsageError("restriction target must lie inside the window")
        return SubsetWindow(ball, self.members & ball.elements,
                            {**self.provenance, "restricted_to":
                             (self.backend.format_element(ball.center),
                              ball.radius)})

    def translate(self, g: Element) -> "SubsetWindow":
        """Left translate of the pair (A, window) by g."""
        backend = self.backend
        moved = enumerate_ball(backend, backend.multiply(g, self.window.center),
                               self.window.radius)
        return SubsetWindow(moved,
                            {backend.multiply(g, a) for a in self.members},
                            dict(self.provenance))


@dataclass(frozen=True)
class GapReport:
    """Largest normalized empty subball, with its witness.

    ``gap`` is |B(x, M)| / |window| for the maximal window subball B(x, M)
    with M >= 1 disjoint from the member set; 0 with no witness when no such
    ball exists; 1 with the window itself as witness when the member set is
    empty.
    """

    gap: Fraction
    witness_center: Element | None
    witness_radius: int | None

    def to_jsonable(self, backend: GroupBackend) -> dict:
        return {
            "gap": str(self.gap),
            "witness_center": (None if self.witness_center is None
                               else backend.format_element(self.witness_center)),
            "witness_radius": self.witness_radius,
        }


def gap_fraction(A: SubsetWindow) -> GapReport:
    """The gap function of A on its window (radius-1-or-larger balls only)."""
    if A._gap is not None:
        return A._gap
    window = A.window
    if window.radius < 1:
        raise UsageError("gap_fraction needs a window of radius >= 1")
    if not A.members:
        report = GapReport(Fraction(1), window.center, window.radius)
    else:
        dt = A.distance_transform
        cont = A.containment
        best_m = 0
        witness = None
        for x in A.order:
            m = min(dt[x] - 1, cont[x])
            if m > best_m:
                best_m = int(m)
                witness = x
        if best_m >= 1:
            report = GapReport(
                Fraction(window.backend.ball_count(best_m), window.size),
                witness, best_m)
        else:
            report = GapReport(Fraction(0), None, None)
    A._gap = report
    return report


def neighborhood_density(A: SubsetWindow, rho: Fraction | None = None, *,
                         radius: int | None = None) -> Fraction:
    """Fraction of the window within ceil(rho * N) of A (N = window radius).

    Exactly one of ``rho`` (a rational in (0, 1]) or ``radius`` (an explicit
    neighborhood radius) must be given.  Returns 0 iff A has no members.
    """
    if (rho is None) == (radius is None):
        raise UsageError("pass exactly one of rho or radius")
    if rho is not None:
        rho = Fraction(rho)
        if not 0 < rho <= 1:
            raise UsageError(f"rho must be in (0, 1], got {rho}")
        radius = math.ceil(rho * A.window.radius)
    if not A.members:
        return Fraction(0)
    dt = A.distance_transform
    hits = sum(1 for x in A.window.elements if dt[x] <= radius)
    return Fraction(hits, A.window.size)


@dataclass(frozen=True)
class DensityProfile:
    """Neighborhood densities across a decreasing list of resolutions."""

    resolutions: tuple[Fraction, ...]
    values: tuple[Fraction, ...]

    @property
    def finest(self) -> Fraction:
        return self.values[-1]

    def to_jsonable(self) -> dict:
        return {"resolutions": [str(r) for r in self.resolutions],
                "values": [str(v) for v in self.values]}


def density_profile(A: SubsetWindow,
                    resolutions: Iterable[Fraction]) -> DensityProfile:
    """Neighborhood densities at each resolution, coarsest first."""
    rhos = sorted({Fraction(r) for r in resolutions}, reverse=True)
    if not rhos:
        raise UsageError("need at least one resolution")
    values = tuple(neighborhood_density(A, r) for r in rhos)
    return DensityProfile(tuple(rhos), values)


@dataclass(frozen=True)
class ReverseBMCheck:
    """Certified inequality between the max gap and the neighborhood density.

    When the witness empty ball B(x, M) has radius M > r = ceil(rho * N), the
    r-neighborhood of A misses B(x, M - r) entirely, so the density is at
    most 1 - |B(x, M - r)| / |window|.  ``vacuous`` marks instances with
    M <= r, where the inequality has no content.
    """

    holds: bool
    vacuous: bool
    rho: Fraction
    neighborhood_radius: int
    gap: GapReport
    lambda_hat: Fraction
    bound: Fraction | None
    shrunk_ball_size: int | None


def reverse_bm_check(A: SubsetWindow, rho: Fraction) -> ReverseBMCheck:
    rho = Fraction(rho)
    report = gap_fraction(A)
    r = math.ceil(rho * A.window.radius)
    lam = neighborhood_density(A, rho)
    if report.witness_radius is None or report.witness_radius <= r:
        return ReverseBMCheck(True, True, rho, r, report, lam, None, None)
    shrunk = A.backend.ball_count(report.witness_radius - r)
    bound = 1 - Fraction(shrunk, A.window.size)
    return ReverseBMCheck(lam <= bound, False, rho, r, report, lam, bound,
                          shrunk)


@dataclass(frozen=True)
class SSRatioTable:
    """Sphere sizes normalized by n^(d-1); c_prime is the max ratio."""

    degree: int
    ns: tuple[int, ...]
    sphere_sizes: tuple[int, ...]
    ratios: tuple[Fraction, ...]
    c_prime: Fraction


def ss_ratio_table(backend: GroupBackend, max_n: int, *,
                   degree: int | None = None) -> SSRatioTable:
    """|S(e, n)| / n^(d-1) for n = 1..max_n.

    The degree d comes from the backend's declared growth degree unless
    overridden; with neither available, fit the growth degree first.
    """
    d = degree if degree is not None else backend.growth_degree
    if d is None:
        raise UsageError(
            "growth degree unknown; run fit_growth_degree first and pass "
            "degree= explicitly")
    table = growth_table(backend, max_n)
    ns = tuple(range(1, max_n + 1))
    spheres = tuple(table.spheres[n] for n in ns)
    ratios = tuple(Fraction(table.spheres[n], n ** (d - 1)) for n in ns)
    return SSRatioTable(d, ns, spheres, ratios, max(ratios))


@dataclass(frozen=True)
class DoublingEntry:
    center: Element
    radius: int
    size: int
    half_size: int
    ratio: Fraction


@dataclass(frozen=True)
class DoublingTable:
    entries: tuple[DoublingEntry, ...]

    @property
    def max_ratio(self) -> Fraction:
        return max(e.ratio for e in self.entries)


def doubling_table(backend: GroupBackend, radii: Sequence[int],
                   centers: Sequence[Element] | None = None) -> DoublingTable:
    """|B(x, r)| / |B(x, floor(r/2))| for sampled centers and radii.

    Balls are enumerated at each center rather than assumed equal, so the
    table doubles as an empirical left-invariance check.
    """
    if centers is None:
        centers = (backend.identity,)
    entries = []
    for x in centers:
        for r in radii:
            if r < 1:
                raise UsageError("doubling radii must be >= 1")
            big = enumerate_ball(backend, x, r).size
            small = enumerate_ball(backend, x, r // 2).size
            entries.append(DoublingEntry(x, r, big, small,
                                         Fraction(big, small)))
    return DoublingTable(tuple(entries))


def doubling_bound(fit: GrowthFit) -> Fraction:
    """The doubling-constant bound c^2 * 32^d from the growth witness."""
    return fit.constant ** 2 * Fraction(32) ** fit.degree_round


def rho_intersection(ball_a: MetricBall, ball_b: MetricBall, *,
                     cont_a: Mapping[Element, int] | None = None,
                     cont_b: Mapping[Element, int] | None = None) -> Fraction:
    """Max |C| / |A| over balls C of radius >= 1 inside both given balls.

    Returns 0 when the intersection contains no ball of radius >= 1.
    """
    if ball_a.backend is not ball_b.backend:
        raise UsageError("balls must come from the same backend")
    inter = ball_a.elements & ball_b.elements
    if not inter:
        return Fraction(0)
    if cont_a is None:
        cont_a = containment_radii(ball_a)
    if cont_b is None:
        cont_b = containment_radii(ball_b)
    best = max(min(cont_a[x], cont_b[x]) for x in inter)
    if best < 1:
        return Fraction(0)
    return Fraction(ball_a.backend.ball_count(best), ball_a.size)


@dataclass(frozen=True)
class SubballPairPlan:
    """Deterministic grid of subball pairs for the eta scan.

    The first ball sits at ``base_center`` (identity when None) with radii
    from ``radii_a``; the second at base_center * offset with radii from
    ``radii_b``.  The seed is recorded for provenance; the grid itself is
    deterministic.
    """

    radii_a: tuple[int, ...]
    radii_b: tuple[int, ...]
    offsets: tuple[Element, ...]
    base_center: Element | None = None
    seed: int = 0


@dataclass(frozen=True)
class EtaReport:
    """Sampled upper bound for eta_n(G, delta).

    ``value`` is the minimum rho-intersection over sampled qualifying pairs
    (gap of B on A strictly below delta, |A| > n); an upper bound on the true
    eta because the sample is a subset of all pairs.  ``vacuous`` marks scans
    where no pair qualified.
    """

    value: Fraction | None
    vacuous: bool
    pair: tuple | None
    n: int
    delta: Fraction
    pairs_considered: int
    plan: SubballPairPlan

    @property
    def upper_bound(self) -> bool:
        return True


def sg_eta(backend: GroupBackend, n: int, delta: Fraction,
           plan: SubballPairPlan) -> EtaReport:
    """Scan subball pairs for the minimum rho-intersection under a gap bound."""
    delta = Fraction(delta)
    base = plan.base_center if plan.base_center is not None else backend.identity
    best: Fraction | None = None
    best_pair = None
    considered = 0
    for ra in plan.radii_a:
        if backend.ball_count(ra) <= n:
            continue
        ball_a = enumerate_ball(backend, base, ra)
        cont_a = containment_radii(ball_a)
        for off in plan.offsets:
            center_b = backend.multiply(base, off)
            for rb in plan.radii_b:
                ball_b = enumerate_ball(backend, center_b, rb)
                window = SubsetWindow(ball_a,
                                      ball_a.elements & ball_b.elements)
                if gap_fraction(window).gap >= delta:
                    continue
                considered += 1
                value = rho_intersection(ball_a, ball_b, cont_a=cont_a)
                if best is None or value < best:
                    best = value
                    best_pair = ((base, ra), (center_b, rb))
    return EtaReport(best, best is None, best_pair, n, delta, considered, plan)
