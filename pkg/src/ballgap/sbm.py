"""F-function tables, BM diagnosis, configurations, difference sets, and
cross-generating-set density transfer.

The central quantity is F(n) for parameters 0 < delta < eps < 1: over
window subballs I of radius >= n whose gap is at most delta, the minimum
number of disjoint empty subballs of I needed to occupy an eps fraction of
I.  Exact mode proves minima by branch and bound over empty-ball
candidates; greedy mode packs largest-first and reports upper bounds only.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .balls import (MetricBall, containment_radii, enumerate_ball,
                    growth_table)
from .density import (SubsetWindow, gap_fraction, neighborhood_density,
                      rho_intersection)
from .errors import CapabilityError, UsageError
from .groups import Element, GroupBackend

#: exact mode is restricted to windows of this radius or less
EXACT_RADIUS_CAP = 12
#: branch-and-bound node budget before giving up honestly
DEFAULT_NODE_BUDGET = 2_000_000

_INF = float("inf")


# ---------------------------------------------------------------------------
# subball scanning


@dataclass(frozen=True)
class SubballInfo:
    """One window subball I = B(center, radius) with its gap data.

    ``max_empty`` is the largest M with some B(y, M) inside I and disjoint
    from the member set (0 when none); ``gap`` is the normalized size of
    that ball, with the radius->=1 convention, or 1 when I misses A
    entirely.
    """

    center: Element
    radius: int
    size: int
    gap: Fraction
    max_empty: int


def _prefix_ball(ball: MetricBall, m: int) -> MetricBall:
    """B(center, m) carved out of an already enumerated larger ball."""
    layers = ball.layers[:m + 1]
    elements = frozenset(itertools.chain.from_iterable(layers))
    dist = {y: d for y, d in ball.dist.items() if d <= m}
    return MetricBall(ball.backend, ball.center, m, elements, dist, layers)


def _containment_within(ball: MetricBall) -> Mapping[Element, int]:
    """Exact containment radii inside ``ball``.

    Backends whose metric attains the triangle inequality get the closed
    form m - d(center, y); others fall back to boundary BFS.
    """
    if ball.backend.metric_attains_triangle:
        m = ball.radius
        return {y: m - d for y, d in ball.dist.items()}
    return containment_radii(ball)


def subball_infos(A: SubsetWindow, min_radius: int):
    """Yield every subball B(x, m) of the window with m >= max(1, min_radius).

    Deterministic order: centers sorted by coordinates, radii ascending.
    """
    window = A.window
    backend = window.backend
    min_radius = max(1, min_radius)
    dt = A.distance_transform
    cont_w = A.containment
    for x in A.order:
        top = cont_w[x]
        if top < min_radius:
            continue
        full = enumerate_ball(backend, x, top)
        for m in range(min_radius, top + 1):
            ball = full if m == top else _prefix_ball(full, m)
            cont_in = _containment_within(ball)
            best = 0
            for y in ball.elements:
                eff = min(dt[y] - 1, cont_in[y])
                if eff > best:
                    best = int(eff)
            size = backend.ball_count(m)
            gap = Fraction(backend.ball_count(best), size) if best >= 1 \
                else Fraction(0)
            yield SubballInfo(x, m, size, gap, best)


def iter_subballs(A: SubsetWindow, min_radius: int) -> list[SubballInfo]:
    return list(subball_infos(A, min_radius))


# ---------------------------------------------------------------------------
# disjoint empty-ball packing


@dataclass(frozen=True)
class _Candidate:
    size: int
    center: Element
    radius: int
    cells: frozenset


def _empty_candidates(A: SubsetWindow, info: SubballInfo) -> list[_Candidate]:
    """Every ball of radius >= 1 inside I and disjoint from the members."""
    backend = A.backend
    dt = A.distance_transform
    full = enumerate_ball(backend, info.center, info.radius)
    cont_in = _containment_within(full)
    cands = []
    for y in sorted(full.elements):
        top = min(dt[y] - 1, cont_in[y])
        if top < 1:
            continue
        ball = enumerate_ball(backend, y, int(top))
        cells = {y}
        for m in range(1, int(top) + 1):
            cells.update(ball.layers[m])
            cands.append(_Candidate(backend.ball_count(m), y, m,
                                    frozenset(cells)))
    cands.sort(key=lambda c: (-c.size, c.center, c.radius))
    return cands


def _greedy_pack(cands: Sequence[_Candidate], target: int) -> int | None:
    """Largest-first disjoint packing; ball count if the mass is reached."""
    used: set = set()
    mass = 0
    count = 0
    for c in cands:
        if mass >= target:
            break
        if used.isdisjoint(c.cells):
            used.update(c.cells)
            mass += c.size
            count += 1
    return count if mass >= target else None


def _min_disjoint_cover(cands: Sequence[_Candidate], target: int,
                        node_budget: int) -> float:
    """Exact minimum number of disjoint candidates with total size >= target.

    Returns inf when no packing reaches the target.  Raises CapabilityError
    when the search exceeds the node budget without resolving.
    """
    if target <= 0:
        return 0
    if not cands:
        return _INF
    union = set()
    for c in cands:
        union.update(c.cells)
    if len(union) < target:
        # even ignoring disjointness no packing can reach the mass
        return _INF
    lower = math.ceil(Fraction(target, cands[0].size))
    greedy = _greedy_pack(cands, target)
    if greedy is not None and greedy == lower:
        return greedy
    best = greedy if greedy is not None else _INF
    suffix_max = [0] * (len(cands) + 1)
    for i in range(len(cands) - 1, -1, -1):
        suffix_max[i] = max(suffix_max[i + 1], cands[i].size)
    nodes = 0

    def dfs(i: int, used: set, mass: int, count: int) -> None:
        nonlocal best, nodes
        nodes += 1
        if nodes > node_budget:
            raise CapabilityError(
                f"exact packing search exceeded {node_budget} nodes; "
                f"use greedy mode or a smaller window")
        if mass >= target:
            if count < best:
                best = count
            return
        if i >= len(cands):
            return
        need = target - mass
        top = suffix_max[i]
        if top == 0:
            return
        if count + math.ceil(need / top) >= best:
            return
        c = cands[i]
        if used.isdisjoint(c.cells):
            dfs(i + 1, used | c.cells, mass + c.size, count + 1)
        dfs(i + 1, used, mass, count)

    dfs(0, set(), 0, 0)
    return best


# ---------------------------------------------------------------------------
# the F function


@dataclass(frozen=True)
class FEntry:
    """F at one n.  ``kind`` is one of:

    - ``zero``: no qualifying subball of radius >= n (F = 0)
    - ``finite``: exact minimum, or in greedy mode an upper bound (F <= value)
    - ``infinite``: exact mode proved no packing reaches the mass
    - ``inconclusive``: greedy packing failed; no conclusion (never reported
      as infinite)
    """

    n: int
    kind: str
    value: int | None
    mode: str
    witness: tuple | None = None

    def render(self) -> str:
        if self.kind == "zero":
            return "0"
        if self.kind == "finite":
            return str(self.value)
        if self.kind == "infinite":
            return "inf"
        return "NA"

    def at_least(self, k: int) -> bool:
        """True when the entry certifies F >= k."""
        if self.kind == "infinite":
            return True
        return self.kind == "finite" and self.mode == "exact" \
            and self.value is not None and self.value >= k


@dataclass(frozen=True)
class FTable:
    delta: Fraction
    eps: Fraction
    entries: tuple[FEntry, ...]
    verdict: str | None = None
    thresholds: tuple[int, int] | None = None


def _validate_delta_eps(delta, eps) -> tuple[Fraction, Fraction]:
    delta = Fraction(delta)
    eps = Fraction(eps)
    if not (0 < delta < eps < 1):
        raise UsageError(
            f"parameters must satisfy 0 < delta < eps < 1, got "
            f"delta={delta}, eps={eps}")
    return delta, eps


class _FScanState:
    """Shared per-window data across the n grid of a scan."""

    def __init__(self, A: SubsetWindow, delta: Fraction, eps: Fraction,
                 mode: str, node_budget: int):
        self.A = A
        self.delta = delta
        self.eps = eps
        self.mode = mode
        self.node_budget = node_budget
        self.infos: list[SubballInfo] | None = None
        self.pack_cache: dict[tuple[Element, int], float | None] = {}

    def ensure_infos(self, min_radius: int) -> list[SubballInfo]:
        if self.infos is None:
            self.infos = iter_subballs(self.A, min_radius)
        return self.infos

    def pack(self, info: SubballInfo) -> float | None:
        """Exact k for one subball (inf when unreachable); greedy: k or None."""
        key = (info.center, info.radius)
        if key not in self.pack_cache:
            target = math.ceil(self.eps * info.size)
            cands = _empty_candidates(self.A, info)
            if self.mode == "exact":
                self.pack_cache[key] = _min_disjoint_cover(
                    cands, target, self.node_budget)
            else:
                self.pack_cache[key] = _greedy_pack(cands, target)
        return self.pack_cache[key]

    def entry(self, n: int) -> FEntry:
        qualifying = [info for info in self.ensure_infos(n)
                      if info.radius >= n and info.gap <= self.delta]
        if not qualifying:
            return FEntry(n, "zero", 0, self.mode)
        if self.mode == "exact":
            best = _INF
            witness_info = None
            # cheap lower bounds first so expensive packings can be skipped
            def lb(info: SubballInfo) -> float:
                if info.max_empty < 1:
                    return _INF
                return math.ceil(self.eps / info.gap)
            for info in sorted(qualifying,
                               key=lambda i: (lb(i), i.center, i.radius)):
                if lb(info) >= best:
                    break
                k = self.pack(info)
                if k < best:
                    best = k
                    witness_info = info
            if best == _INF:
                return FEntry(n, "infinite", None, self.mode)
            # each disjoint empty ball of I has normalized size <= gap(I)
            assert best >= math.ceil(self.eps / witness_info.gap), \
                "packing below the forced gap lower bound"
            return FEntry(n, "finite", int(best), self.mode,
                          (witness_info.center, witness_info.radius))
        best = None
        witness = None
        for info in qualifying:
            k = self.pack(info)
            if k is not None and (best is None or k < best):
                best = k
                witness = (info.center, info.radius)
        if best is None:
            return FEntry(n, "inconclusive", None, self.mode)
        return FEntry(n, "finite", best, self.mode, witness)


def f_value(A: SubsetWindow, delta, eps, n: int, mode: str = "exact", *,
            node_budget: int = DEFAULT_NODE_BUDGET,
            exact_radius_cap: int = EXACT_RADIUS_CAP) -> FEntry:
    """F at a single n; see the module docstring for the semantics."""
    delta, eps = _validate_delta_eps(delta, eps)
    if n < 1:
        raise UsageError("n must be >= 1")
    if mode not in ("exact", "greedy"):
        raise UsageError(f"unknown mode {mode!r}")
    if mode == "exact" and A.window.radius > exact_radius_cap:
        raise CapabilityError(
            f"exact mode is capped at window radius {exact_radius_cap}; "
            f"got {A.window.radius} (use greedy mode for bounds)")
    state = _FScanState(A, delta, eps, mode, node_budget)
    state.ensure_infos(n)
    return state.entry(n)


def f_scan(A: SubsetWindow, delta, eps, n_range: Sequence[int],
           mode: str = "exact", *,
           consistent_min: int = 10,
           refute_max: int | None = None,
           node_budget: int = DEFAULT_NODE_BUDGET,
           exact_radius_cap: int = EXACT_RADIUS_CAP) -> FTable:
    """F over a range of n plus an evidence verdict.

    Verdicts are evidence labels, never theorem claims:

    - ``SBM-consistent``: the largest-n entry certifies F >= consistent_min;
    - ``SBM-refuting``: a qualifying ball at the largest n has
      F <= refute_max (default ceil(eps/delta), the smallest value any
      finite F can take);
    - ``inconclusive`` otherwise.
    """
    delta, eps = _validate_delta_eps(delta, eps)
    ns = sorted(set(int(n) for n in n_range))
    if not ns or ns[0] < 1:
        raise UsageError("n_range must contain integers >= 1")
    if mode == "exact" and A.window.radius > exact_radius_cap:
        raise CapabilityError(
            f"exact mode is capped at window radius {exact_radius_cap}; "
            f"got {A.window.radius} (use greedy mode for bounds)")
    if refute_max is None:
        refute_max = math.ceil(eps / delta)
    state = _FScanState(A, delta, eps, mode, node_budget)
    state.ensure_infos(ns[0])
    entries = tuple(state.entry(n) for n in ns)
    last = entries[-1]
    if last.at_least(consistent_min):
        verdict = "SBM-consistent"
    elif last.kind == "finite" and last.value is not None \
            and last.value <= refute_max:
        # greedy upper bounds count: F <= value <= refute_max
        verdict = "SBM-refuting"
    else:
        verdict = "inconclusive"
    return FTable(delta, eps, entries, verdict, (consistent_min, refute_max))


# ---------------------------------------------------------------------------
# BM diagnosis


@dataclass(frozen=True)
class SubballSamplePlan:
    """Deterministic sample of window subballs: given radii at given centers.

    ``centers`` = None samples every window element that can carry the
    radius, capped at ``max_per_radius`` in canonical order.
    """

    radii: tuple[int, ...]
    centers: tuple[Element, ...] | None = None
    max_per_radius: int = 64


@dataclass(frozen=True)
class DiagnosisEntry:
    eps: Fraction
    delta_hat: Fraction | None
    violator: tuple | None


@dataclass(frozen=True)
class BMDiagnosis:
    rho: Fraction
    grid: tuple[Fraction, ...]
    entries: tuple[DiagnosisEntry, ...]
    samples: int


DEFAULT_DELTA_GRID = tuple(Fraction(1, 2 ** k) for k in range(0, 7))


def bm_diagnose(A: SubsetWindow, eps_list: Sequence[Fraction],
                plan: SubballSamplePlan, rho: Fraction,
                delta_grid: Sequence[Fraction] = DEFAULT_DELTA_GRID
                ) -> BMDiagnosis:
    """Largest grid delta such that every sampled small-gap subball is dense.

    For each eps, delta_hat(eps) is the largest delta in the grid such that
    every sampled subball J with gap(J) <= delta has neighborhood density at
    least 1 - eps at resolution rho; the violating J for the next larger
    delta is reported when one exists.
    """
    rho = Fraction(rho)
    grid = tuple(sorted((Fraction(d) for d in delta_grid), reverse=True))
    cont_w = A.containment
    backend = A.backend
    samples = []
    for r in plan.radii:
        centers = plan.centers
        if centers is None:
            centers = tuple(x for x in A.order
                            if cont_w[x] >= r)[:plan.max_per_radius]
        for x in centers:
            if cont_w.get(x, -1) < r:
                continue
            sub = A.restrict(enumerate_ball(backend, x, r))
            g = gap_fraction(sub).gap
            lam = neighborhood_density(sub, rho)
            samples.append((x, r, g, lam))
    entries = []
    for eps in eps_list:
        eps = Fraction(eps)
        delta_hat = None
        violator = None
        for delta in sorted(grid):  # ascending: find the largest that passes
            bad = next((s for s in samples
                        if s[2] <= delta and s[3] < 1 - eps), None)
            if bad is None:
                delta_hat = delta
            else:
                if violator is None:
                    violator = bad
                break
        entries.append(DiagnosisEntry(eps, delta_hat, violator))
    return BMDiagnosis(rho, grid, tuple(entries), len(samples))


# ---------------------------------------------------------------------------
# delta-configurations


@dataclass(frozen=True)
class DeltaConfiguration:
    """Equal-radius balls J_i, target sets A_i, and the common gap bound."""

    balls: tuple[MetricBall, ...]
    sets: tuple[frozenset, ...]
    delta: Fraction

    @property
    def radius(self) -> int:
        return self.balls[0].radius


def delta_configuration(balls: Sequence[MetricBall],
                        sets: Sequence[Iterable[Element]],
                        delta) -> DeltaConfiguration:
    """Validated construction: equal radii and gap at most delta per index."""
    delta = Fraction(delta)
    balls = tuple(balls)
    sets = tuple(frozenset(s) for s in sets)
    if len(balls) != len(sets) or not balls:
        raise UsageError("need one target set per ball")
    radii = {b.radius for b in balls}
    if len(radii) != 1:
        raise UsageError(f"configuration balls must share a radius, got {radii}")
    for i, (ball, members) in enumerate(zip(balls, sets)):
        g = gap_fraction(SubsetWindow(ball, members & ball.elements)).gap
        if g > delta:
            raise UsageError(
                f"ball {i} has gap {g} > delta {delta}; not a "
                f"delta-configuration")
    return DeltaConfiguration(balls, sets, delta)


@dataclass(frozen=True)
class StrongSubconfigWitness:
    """A common right translate c with per-index hits in A_i near a_i c."""

    translate: Element
    radius: int
    hits: tuple[Element, ...]


def strong_subconfig_search(config: DeltaConfiguration,
                            w: int) -> StrongSubconfigWitness | None:
    """First common translate c in B(e, R) with A_i meeting B(a_i c, w) for
    all i, in deterministic (word length, coordinates) order."""
    if w < 0:
        raise UsageError("w must be >= 0")
    backend = config.balls[0].backend
    candidates = enumerate_ball(backend, backend.identity, config.radius)
    for layer in candidates.layers:
        for c in layer:
            hits = []
            for ball, members in zip(config.balls, config.sets):
                spot = backend.multiply(ball.center, c)
                nearby = enumerate_ball(backend, spot, w)
                hit = next((y for y in sorted(nearby.elements)
                            if y in members), None)
                if hit is None:
                    break
                hits.append(hit)
            else:
                witness = StrongSubconfigWitness(c, w, tuple(hits))
                for ball, members, hit in zip(config.balls, config.sets,
                                              witness.hits):
                    spot = backend.multiply(ball.center, c)
                    assert hit in members
                    assert backend.distance(spot, hit) <= w
                return witness
    return None


@dataclass(frozen=True)
class ConfigSampler:
    """Pairs of subballs (x, x * offset) at the given radii, gap-filtered."""

    offsets: tuple[Element, ...]
    radii: tuple[int, ...]
    base_centers: tuple[Element, ...] | None = None
    max_configs: int = 32


@dataclass(frozen=True)
class WEstimate:
    w: int | None
    sample_size: int
    vacuous: bool
    cap: int
    cap_hit: bool


def w_estimate(A: SubsetWindow, delta, sampler: ConfigSampler, *,
               w_cap: int = 16) -> WEstimate:
    """Minimal w such that every sampled delta-configuration has a witness.

    Empirical only: the sample is a grid of translate pairs inside the
    window.  ``vacuous`` marks scans where the sampler produced no
    configurations.
    """
    delta = Fraction(delta)
    backend = A.backend
    cont_w = A.containment
    bases = sampler.base_centers or (A.window.center,)
    configs = []
    for r in sampler.radii:
        for base in bases:
            for off in sampler.offsets:
                if len(configs) >= sampler.max_configs:
                    break
                c1, c2 = base, backend.multiply(base, off)
                if cont_w.get(c1, -1) < r or cont_w.get(c2, -1) < r:
                    continue
                b1 = enumerate_ball(backend, c1, r)
                b2 = enumerate_ball(backend, c2, r)
                g1 = gap_fraction(A.restrict(b1)).gap
                g2 = gap_fraction(A.restrict(b2)).gap
                if g1 <= delta and g2 <= delta:
                    configs.append(DeltaConfiguration(
                        (b1, b2), (A.members, A.members), delta))
    if not configs:
        return WEstimate(None, 0, True, w_cap, False)
    worst = 0
    for config in configs:
        found = None
        for w in range(0, w_cap + 1):
            if strong_subconfig_search(config, w) is not None:
                found = w
                break
        if found is None:
            return WEstimate(None, len(configs), False, w_cap, True)
        worst = max(worst, found)
    return WEstimate(worst, len(configs), False, w_cap, False)


# ---------------------------------------------------------------------------
# difference sets


@dataclass(frozen=True)
class DifferenceSet:
    """Exact pair counts of a^-1 b over (A cap window)^2, thresholded at m."""

    backend: GroupBackend
    multiplicity: int
    counts: Mapping[Element, int]
    members: frozenset
    exact: bool


def difference_set(A: SubsetWindow, m: int, *,
                   max_pairs: int = 4_000_000) -> DifferenceSet:
    """D_m(A): elements expressible as a^-1 b for at least m member pairs."""
    if m < 2:
        raise UsageError("multiplicity threshold must be >= 2")
    members = sorted(A.members)
    if len(members) ** 2 > max_pairs:
        raise CapabilityError(
            f"{len(members)}^2 pairs exceed the budget {max_pairs}; "
            f"subsample the set or raise max_pairs")
    backend = A.backend
    counts: dict[Element, int] = {}
    for a in members:
        a_inv = backend.inverse(a)
        for b in members:
            g = backend.multiply(a_inv, b)
            counts[g] = counts.get(g, 0) + 1
    result = frozenset(g for g, c in counts.items() if c >= m)
    return DifferenceSet(backend, m, counts, result, True)


@dataclass(frozen=True)
class CenterSyndeticResult:
    passed: bool
    radius: int
    failures: tuple[Element, ...]
    checked: int


def center_syndetic_check(diff: DifferenceSet, r: int,
                          central: Sequence[Element]) -> CenterSyndeticResult:
    """Check B(g, r) meets the difference set for each supplied central g."""
    backend = diff.backend
    failures = []
    for g in central:
        ball = enumerate_ball(backend, g, r)
        if not (ball.elements & diff.members):
            failures.append(g)
    return CenterSyndeticResult(not failures, r, tuple(failures), len(central))


# ---------------------------------------------------------------------------
# Nathanson-style search


@dataclass(frozen=True)
class NathansonBudget:
    shift_radius: int = 4
    max_candidates: int = 64
    min_size: int = 1


@dataclass(frozen=True)
class NathansonResult:
    base: frozenset
    shifts: tuple[Element, ...]
    chain_sizes: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.base)


def nathanson_search(A: SubsetWindow, n: int,
                     budget: NathansonBudget = NathansonBudget()
                     ) -> NathansonResult | None:
    """Iterated-intersection search for B and C with B * C inside A.

    Greedy: at each step pick the candidate shift t (central, non-identity,
    within the budget) maximizing |B cap Bt|; C collects the inverses.  The
    result is re-verified by direct membership.  None when a step leaves
    fewer than ``min_size`` elements.
    """
    if n < 1:
        raise UsageError("n must be >= 1")
    backend = A.backend
    candidates = [t for t in backend.center_elements(budget.shift_radius)
                  if t != backend.identity][:budget.max_candidates]
    current = set(A.members)
    shifts: list[Element] = []
    sizes: list[int] = []
    for _ in range(n):
        best_t = None
        best_set: set | None = None
        for t in candidates:
            if backend.inverse(t) in shifts:
                continue
            translated = {backend.multiply(b, t) for b in current}
            nxt = current & translated
            if best_set is None or len(nxt) > len(best_set):
                best_t, best_set = t, nxt
        if best_set is None or len(best_set) < max(1, budget.min_size):
            return None
        current = best_set
        shifts.append(backend.inverse(best_t))
        sizes.append(len(current))
    for b in current:
        for c in shifts:
            assert backend.multiply(b, c) in A.members, \
                "nathanson result failed re-verification"
    return NathansonResult(frozenset(current), tuple(shifts), tuple(sizes))


# ---------------------------------------------------------------------------
# density transfer across generating sets


@dataclass(frozen=True)
class TransferReport:
    """Finite density-transfer check between two generating sets.

    Given the measured bi-Lipschitz constant K, the second-metric ball
    I' = B'(g, floor(N/K)) sits inside the first-metric window J = B(g, N),
    and any point of B'(g, floor(N/K) - K*r) within r of A under the first
    metric is within K*r of A cap I' under the second.  ``bound`` is the
    resulting exact-count floor for the second density; negative bounds are
    vacuously satisfied.
    """

    K: int
    rho: Fraction
    theta: Fraction
    inner_radius: int
    transferred_radius: int
    lambda_second: Fraction
    bound: Fraction
    containment_ok: bool
    holds: bool
    counts: dict


def density_transfer_check(A: SubsetWindow, other: GroupBackend,
                           rho, *, k_sample_radius: int | None = None
                           ) -> TransferReport:
    """Check the finite density-transfer inequality on one window.

    ``other`` must act on the same element space as A's backend (same
    coordinate shape); K is measured as the max two-way word-length ratio on
    a sample ball, exact for the shipped Z^d standard/king pairs.
    """
    rho = Fraction(rho)
    backend = A.backend
    center = A.window.center
    try:
        other.check_element(center)
    except Exception as exc:
        raise UsageError(
            f"backends {backend.name} and {other.name} do not share an "
            f"element space: {exc}") from None
    sample_radius = k_sample_radius if k_sample_radius is not None \
        else min(A.window.radius, 6)
    ratio = Fraction(1)
    for g in enumerate_ball(backend, backend.identity,
                            sample_radius).elements:
        if g == backend.identity:
            continue
        a, b = backend.word_length(g), other.word_length(g)
        ratio = max(ratio, Fraction(a, b), Fraction(b, a))
    K = math.ceil(ratio)
    N = A.window.radius
    r_first = math.ceil(rho * N)
    theta = neighborhood_density(A, rho)
    inner = N // K
    prime = enumerate_ball(other, center, inner)
    containment_ok = prime.elements <= A.window.elements
    second = SubsetWindow(prime, A.members & prime.elements)
    r_second = K * r_first
    lam2 = neighborhood_density(second, radius=r_second)
    shrunk_radius = inner - r_second
    shrunk = other.ball_count(shrunk_radius) if shrunk_radius >= 0 else 0
    bound = (Fraction(shrunk) - (1 - theta) * A.window.size) / prime.size
    holds = containment_ok and lam2 >= bound
    counts = {
        "window_size": A.window.size,
        "inner_size": prime.size,
        "shrunk_size": shrunk,
        "first_neighborhood_radius": r_first,
    }
    return TransferReport(K, rho, theta, inner, r_second, lam2, bound,
                          containment_ok, holds, counts)
