"""Reproducible constructions of the named set families.

Every generator re-verifies its defining property post hoc with an
independent check (net coverage by local ball scan, growth rules by word
length, emptiness preconditions by distance), and the same spec plus seed
always yields the identical member set.  Constructions that quantify over
all scales are truncated at an explicit horizon recorded in provenance.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .balls import MetricBall, enumerate_ball
from .density import SubsetWindow, gap_fraction
from .errors import CapabilityError, ConstructionError, UsageError
from .groups import Element, GroupBackend
from .sbm import SubballInfo, iter_subballs


@dataclass(frozen=True)
class GeneratorSpec:
    """Family id plus parameters plus seed; canonical JSON round trip."""

    family: str
    params: tuple[tuple[str, object], ...]
    seed: int

    @staticmethod
    def make(family: str, params: dict, seed: int) -> "GeneratorSpec":
        return GeneratorSpec(family, tuple(sorted(params.items())), seed)

    def to_json(self) -> str:
        return json.dumps({"family": self.family, "seed": self.seed,
                           "params": dict(self.params)}, sort_keys=True)

    @staticmethod
    def from_json(text: str) -> "GeneratorSpec":
        data = json.loads(text)
        return GeneratorSpec.make(data["family"], data["params"], data["seed"])


class SetFamily:
    """A window-parametrized set construction."""

    spec: GeneratorSpec
    backend: GroupBackend

    def materialize(self, center: Element, radius: int) -> SubsetWindow:
        raise NotImplementedError

    def _provenance(self, extra: dict | None = None) -> dict:
        out = {"spec": json.loads(self.spec.to_json())}
        if extra:
            out.update(extra)
        return out


def _near_member(backend: GroupBackend, x: Element, members: set,
                 k: int) -> bool:
    # d(x, members) <= k  iff  B(x, k) meets the member set
    return any(y in members
               for y in enumerate_ball(backend, x, k).elements)


class SyndeticFamily(SetFamily):
    """Greedy k-net plus seeded noise: meets every ball of radius k."""

    def __init__(self, backend: GroupBackend, k: int, seed: int = 0,
                 noise: float = 0.0):
        if k < 1:
            raise UsageError("syndetic bound k must be >= 1")
        self.backend = backend
        self.k = k
        self.noise = noise
        self.spec = GeneratorSpec.make(
            "syndetic", {"k": k, "noise": noise, "backend": backend.name}, seed)

    def materialize(self, center: Element, radius: int) -> SubsetWindow:
        backend = self.backend
        window = enumerate_ball(backend, center, radius)
        rng = random.Random(self.spec.seed)
        members: set = set()
        order = sorted(window.elements)
        for x in order:
            if not _near_member(backend, x, members, self.k):
                members.add(x)
        if self.noise:
            for x in order:
                if x not in members and rng.random() < self.noise:
                    members.add(x)
        for x in order:
            if not _near_member(backend, x, members, self.k):
                raise ConstructionError(
                    f"net verification failed at {backend.format_element(x)}")
        return SubsetWindow(window, members, self._provenance(
            {"window": (backend.format_element(center), radius)}))


class PiecewiseSyndeticFamily(SetFamily):
    """k-dense inside scheduled blocks, absent elsewhere.

    Blocks must be pairwise disjoint; blocks not fully inside the window are
    skipped and recorded (the finite truncation of an unbounded schedule).
    """

    def __init__(self, backend: GroupBackend, k: int,
                 blocks: Sequence[tuple[Element, int]], seed: int = 0):
        if k < 1:
            raise UsageError("gap bound k must be >= 1")
        self.backend = backend
        self.k = k
        self.blocks = tuple((tuple(c) if not isinstance(c, tuple) else c, r)
                            for c, r in blocks)
        for i, (c1, r1) in enumerate(self.blocks):
            for c2, r2 in self.blocks[i + 1:]:
                if backend.distance(c1, c2) <= r1 + r2:
                    raise UsageError(
                        f"blocks at {backend.format_element(c1)} and "
                        f"{backend.format_element(c2)} overlap")
        self.spec = GeneratorSpec.make(
            "piecewise_syndetic",
            {"k": k, "backend": backend.name,
             "blocks": [[backend.format_element(c), r]
                        for c, r in self.blocks]},
            seed)

    def materialize(self, center: Element, radius: int) -> SubsetWindow:
        backend = self.backend
        window = enumerate_ball(backend, center, radius)
        members: set = set()
        included, skipped = [], []
        for c, r in self.blocks:
            block = enumerate_ball(backend, c, r)
            if not block.elements <= window.elements:
                skipped.append((backend.format_element(c), r))
                continue
            included.append((backend.format_element(c), r))
            net: set = set()
            for x in sorted(block.elements):
                if not _near_member(backend, x, net, self.k):
                    net.add(x)
            for x in block.elements:
                if not _near_member(backend, x, net, self.k):
                    raise ConstructionError("block net verification failed")
            members |= net
        return SubsetWindow(window, members, self._provenance(
            {"included_blocks": included, "skipped_blocks": skipped,
             "window": (backend.format_element(center), radius)}))


class LacunaryFamily(SetFamily):
    """Sequence a_1, a_2, ... with |a_(n+1)| >= n * |a_n| and a_1 != e.

    Built with equality along one generator direction (seed picks the
    direction); the growth rule is re-verified by word length.
    """

    def __init__(self, backend: GroupBackend, length: int, seed: int = 0):
        if length < 1:
            raise UsageError("length must be >= 1")
        self.backend = backend
        self.length = length
        self.spec = GeneratorSpec.make(
            "lacunary", {"length": length, "backend": backend.name}, seed)

    def materialize(self, center: Element, radius: int) -> SubsetWindow:
        backend = self.backend
        window = enumerate_ball(backend, center, radius)
        direction = backend.steps[self.spec.seed % len(backend.steps)]
        lengths = [1]
        for i in range(1, self.length):
            lengths.append(max(1, i * lengths[-1]))
        if lengths[-1] > radius:
            raise CapabilityError(
                f"window radius {radius} too small for a lacunary sequence of "
                f"length {self.length} (needs {lengths[-1]})")
        points = [backend.power(direction, m) for m in lengths]
        for i, a in enumerate(points):
            if a not in window.elements:
                raise CapabilityError(
                    f"lacunary term {i + 1} falls outside the window")
        if points[0] == backend.identity:
            raise ConstructionError("first term must differ from the identity")
        word_lengths = [backend.word_length(a) for a in points]
        for i in range(len(points) - 1):
            if word_lengths[i + 1] < (i + 1) * word_lengths[i]:
                raise ConstructionError("growth rule verification failed")
        return SubsetWindow(window, set(points), self._provenance(
            {"lengths": lengths,
             "direction": backend.format_element(direction),
             "window": (backend.format_element(center), radius)}))


def sphere_spoiler_superset(A: SubsetWindow,
                            centers: Sequence[tuple[int, Element]],
                            horizon: int | None = None) -> SubsetWindow:
    """Superset of A built from concentric spheres S(x_n, k*n), k = 0..n.

    Every scheduled center must satisfy B(x_n, n^2) disjoint from A
    (checked; UsageError naming n otherwise).  Spheres are clipped to the
    window; the concentric structure is recorded in provenance so analyses
    can target the critical balls B(x_n, m*n).
    """
    backend = A.backend
    window = A.window
    members = set(A.members)
    recorded = []
    for n, x in centers:
        if n < 1:
            raise UsageError("schedule entries need n >= 1")
        if horizon is not None and n > horizon:
            continue
        backend.check_element(x)
        for a in A.members:
            if backend.distance(x, a) <= n * n:
                raise UsageError(
                    f"center for n={n} violates the emptiness precondition: "
                    f"{backend.format_element(a)} is within n^2")
        added = 0
        for y in window.elements:
            d = backend.distance(x, y)
            if d <= n * n and d % n == 0:
                members.add(y)
                added += 1
        recorded.append({"n": n, "center": backend.format_element(x),
                         "added": added})
    return SubsetWindow(window, members, {
        **A.provenance,
        "spoiler": {"horizon": horizon, "centers": recorded}})


@dataclass(frozen=True)
class PlacementStage:
    n: int
    center: Element
    radius: int
    exclusion_radius: int
    quality_center: Element
    quality_radius: int
    quality_gap: Fraction


def _quality_subball(sub: SubsetWindow, n: int) -> SubballInfo | None:
    """First subball of radius >= n with gap strictly below 1/n.

    The whole ball is tried first: gaps normalize against the subball size,
    so the full ball is the most likely witness.
    """
    bound = Fraction(1, n)
    whole = next(subball_infos(sub, sub.window.radius), None)
    if whole is not None and whole.gap < bound:
        return whole
    return next((info for info in subball_infos(sub, n)
                 if info.gap < bound), None)


def sparse_ball_union(A: SubsetWindow, stages: int, *,
                      candidate_radii: Sequence[int] | None = None
                      ) -> SubsetWindow:
    """B = union over n of (A cap I_n) under the two checkable placement
    conditions:

    - I_n is disjoint from B(e, n * r_n), where B(e, r_n) is the smallest
      ball around the identity containing I_1 .. I_(n-1);
    - I_n has a subball J of radius >= n with gap_A(J) < 1/n.

    Candidates are scanned smallest-radius, innermost-center first so later
    stages keep room inside the window; ConstructionError names the first
    stage with no qualifying ball.  The uniform small-gap-count condition of
    the underlying construction has no finite certificate and is recorded as
    unverified.
    """
    backend = A.backend
    window = A.window
    cont = A.containment
    chosen: list[PlacementStage] = []
    members: set = set()
    order = sorted(window.elements,
                   key=lambda x: (backend.word_length(x), x))
    for n in range(1, stages + 1):
        r_n = 0
        for stage in chosen:
            ball = enumerate_ball(backend, stage.center, stage.radius)
            r_n = max(r_n, max(backend.word_length(y) for y in ball.elements))
        radii = candidate_radii if candidate_radii is not None \
            else range(n, window.radius + 1)
        placed = False
        for m in radii:
            if placed:
                break
            if m < n:
                continue
            for x in order:
                if cont[x] < m:
                    continue
                if r_n and backend.word_length(x) - m <= n * r_n:
                    # even the innermost candidate element would be too close
                    continue
                ball = enumerate_ball(backend, x, m)
                if r_n and min(backend.word_length(y)
                               for y in ball.elements) <= n * r_n:
                    continue
                quality = _quality_subball(A.restrict(ball), n)
                if quality is None:
                    continue
                chosen.append(PlacementStage(
                    n, x, m, n * r_n, quality.center, quality.radius,
                    quality.gap))
                members |= (A.members & ball.elements)
                placed = True
                break
        if not placed:
            raise ConstructionError(
                f"no qualifying ball for stage n={n}: need a ball avoiding "
                f"B(e, {n * r_n}) with a radius->={n} subball of gap < 1/{n}")
    certificate = [{
        "n": s.n, "center": backend.format_element(s.center),
        "radius": s.radius, "exclusion_radius": s.exclusion_radius,
        "quality_center": backend.format_element(s.quality_center),
        "quality_radius": s.quality_radius,
        "quality_gap": str(s.quality_gap),
    } for s in chosen]
    return SubsetWindow(window, members, {
        **A.provenance,
        "sparse_ball_union": {"stages": certificate,
                              "gap_count_condition": "unverified"}})


class RandomFamily(SetFamily):
    """Independent seeded inclusion with probability p."""

    def __init__(self, backend: GroupBackend, p: float, seed: int = 0):
        if not 0 <= p <= 1:
            raise UsageError("density p must be in [0, 1]")
        self.backend = backend
        self.p = p
        self.spec = GeneratorSpec.make(
            "random", {"p": p, "backend": backend.name}, seed)

    def materialize(self, center: Element, radius: int) -> SubsetWindow:
        backend = self.backend
        window = enumerate_ball(backend, center, radius)
        rng = random.Random(self.spec.seed)
        members = {x for x in sorted(window.elements) if rng.random() < self.p}
        return SubsetWindow(window, members, self._provenance(
            {"window": (backend.format_element(center), radius)}))


def random_set(backend: GroupBackend, center: Element, radius: int,
               p: float, seed: int) -> SubsetWindow:
    return RandomFamily(backend, p, seed).materialize(center, radius)


class SublatticeFamily(SetFamily):
    """Elements whose coordinates are all congruent to a residue mod m.

    The modulus-2, residue-0 instance is the canonical 'evens' test set.
    """

    def __init__(self, backend: GroupBackend, modulus: int, residue: int = 0,
                 seed: int = 0):
        if modulus < 1:
            raise UsageError("modulus must be >= 1")
        self.backend = backend
        self.modulus = modulus
        self.residue = residue % modulus
        self.spec = GeneratorSpec.make(
            "sublattice", {"modulus": modulus, "residue": self.residue,
                           "backend": backend.name}, seed)

    def materialize(self, center: Element, radius: int) -> SubsetWindow:
        backend = self.backend
        window = enumerate_ball(backend, center, radius)
        members = {x for x in window.elements
                   if all(c % self.modulus == self.residue
                          for c in backend.coords(x))}
        return SubsetWindow(window, members, self._provenance(
            {"window": (backend.format_element(center), radius)}))


class EmptyFamily(SetFamily):
    def __init__(self, backend: GroupBackend, seed: int = 0):
        self.backend = backend
        self.spec = GeneratorSpec.make("empty", {"backend": backend.name},
                                       seed)

    def materialize(self, center: Element, radius: int) -> SubsetWindow:
        window = enumerate_ball(self.backend, center, radius)
        return SubsetWindow(window, frozenset(), self._provenance())


class FullFamily(SetFamily):
    def __init__(self, backend: GroupBackend, seed: int = 0):
        self.backend = backend
        self.spec = GeneratorSpec.make("full", {"backend": backend.name}, seed)

    def materialize(self, center: Element, radius: int) -> SubsetWindow:
        window = enumerate_ball(self.backend, center, radius)
        return SubsetWindow(window, window.elements, self._provenance())


def syndetic_set(backend: GroupBackend, k: int, seed: int = 0,
                 noise: float = 0.0) -> SyndeticFamily:
    return SyndeticFamily(backend, k, seed, noise)


def piecewise_syndetic_set(backend: GroupBackend, k: int,
                           blocks: Sequence[tuple[Element, int]],
                           seed: int = 0) -> PiecewiseSyndeticFamily:
    return PiecewiseSyndeticFamily(backend, k, blocks, seed)


def lacunary_sequence(backend: GroupBackend, length: int,
                      seed: int = 0) -> LacunaryFamily:
    return LacunaryFamily(backend, length, seed)


#: family name -> constructor taking (backend, params dict, seed)
FAMILIES: dict[str, Callable] = {
    "syndetic": lambda bk, p, s: SyndeticFamily(
        bk, p["k"], s, p.get("noise", 0.0)),
    "piecewise_syndetic": lambda bk, p, s: PiecewiseSyndeticFamily(
        bk, p["k"], [(bk.parse_element(c), r) for c, r in p["blocks"]], s),
    "lacunary": lambda bk, p, s: LacunaryFamily(bk, p["length"], s),
    "random": lambda bk, p, s: RandomFamily(bk, p["p"], s),
    "sublattice": lambda bk, p, s: SublatticeFamily(
        bk, p["modulus"], p.get("residue", 0), s),
    "empty": lambda bk, p, s: EmptyFamily(bk, s),
    "full": lambda bk, p, s: FullFamily(bk, s),
}


def make_family(backend: GroupBackend, family: str, params: dict,
                seed: int = 0) -> SetFamily:
    if family not in FAMILIES:
        raise UsageError(f"unknown set family {family!r}; "
                         f"known: {sorted(FAMILIES)}")
    return FAMILIES[family](backend, params, seed)
