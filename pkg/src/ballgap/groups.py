"""Exact arithmetic and word lengths for concrete finitely generated groups.

A backend couples a group law in canonical integer coordinates with a fixed
finite symmetric generating set (always containing the identity and closed
under inverses).  Elements are plain tuples, so equality, hashing and
ordering are structural and all arithmetic is exact.

Word lengths come from a closed form where one exists (``Z^d`` with standard
or king moves, direct products of such) and from a cached breadth-first
distance table in the Cayley graph otherwise (the Heisenberg group, custom
generating sets).  Distance tables grow on demand up to a per-backend cap.
"""

from __future__ import annotations

import itertools
import math
import re
import threading
import warnings
from abc import ABC, abstractmethod
from typing import Iterable, Sequence

from .errors import BackendMismatchError, OutOfRangeError, UsageError

#: Group elements are plain tuples of ints (nested pairs for direct products).
Element = tuple


class GroupBackend(ABC):
    """Group operations plus word-length infrastructure for one (G, S).

    All operations are pure functions over immutable values; instances only
    mutate internal caches, guarded by a lock, so they are safe to share
    across threads.
    """

    #: True when B(x, M) is contained in B(y, m) exactly iff d(y, x) + M <= m.
    #: Holds for Z^d under standard and king moves (and their products) where
    #: the triangle inequality is attained by moving radially; not assumed
    #: for non-abelian or custom generating sets.
    metric_attains_triangle = False

    flat_dim: int

    def __init__(self, name: str, generators: Iterable[Element],
                 growth_degree: int | None, max_table_radius: int):
        self.name = name
        self.growth_degree = growth_degree
        self.max_table_radius = max_table_radius
        self.generators = self._normalize_generators(tuple(generators))
        #: generators without the identity; the BFS step set
        self.steps = tuple(g for g in self.generators if g != self.identity)
        self._dist: dict[Element, int] = {self.identity: 0}
        self._frontier: list[Element] = [self.identity]
        self._layer_counts: list[int] = [1]
        self._table_radius = 0
        self._lock = threading.RLock()

    # -- group structure ---------------------------------------------------

    @property
    @abstractmethod
    def identity(self) -> Element:
        ...

    @abstractmethod
    def multiply(self, a: Element, b: Element) -> Element:
        ...

    @abstractmethod
    def inverse(self, a: Element) -> Element:
        ...

    @abstractmethod
    def check_element(self, g: Element) -> None:
        """Raise BackendMismatchError unless ``g`` has this backend's shape."""

    @abstractmethod
    def coords(self, g: Element) -> tuple[int, ...]:
        """Flatten ``g`` to a plain integer tuple."""

    @abstractmethod
    def from_coords(self, flat: Sequence[int]) -> Element:
        ...

    @abstractmethod
    def center_elements(self, radius: int) -> tuple[Element, ...]:
        """Central elements of word length at most ``radius``, sorted."""

    def _normalize_generators(self, gens: tuple[Element, ...]) -> tuple[Element, ...]:
        """Close the set under inverses, adjoin the identity, and sort.

        Sets that were not already symmetric are closed with a warning.
        """
        closed = {self.identity}
        for g in gens:
            self.check_element(g)
            closed.add(g)
            closed.add(self.inverse(g))
        if closed != set(gens):
            warnings.warn(
                f"{self.name}: generating set closed under inverses and "
                f"identity ({len(gens)} supplied, {len(closed)} used)",
                stacklevel=4)
        return tuple(sorted(closed))

    # -- word lengths -------------------------------------------------------

    def _length_formula(self, g: Element) -> int | None:
        """Closed-form word length, or None to use the BFS table."""
        return None

    def word_length(self, g: Element) -> int:
        self.check_element(g)
        n = self._length_formula(g)
        if n is not None:
            return n
        with self._lock:
            while g not in self._dist:
                if self._table_radius >= self.max_table_radius:
                    raise OutOfRangeError(
                        f"{self.name}: {self.format_element(g)} is outside the "
                        f"distance table of radius {self._table_radius}; its word "
                        f"length exceeds {self._table_radius} and the table cap is "
                        f"{self.max_table_radius}")
                self._extend_table(
                    min(self.max_table_radius, max(4, 2 * self._table_radius)))
            return self._dist[g]

    def distance(self, x: Element, y: Element) -> int:
        """Left-invariant word metric d_S(x, y) = |x^-1 y|."""
        return self.word_length(self.multiply(self.inverse(x), y))

    def _extend_table(self, radius: int) -> None:
        # caller holds self._lock
        if radius <= self._table_radius:
            return
        frontier = self._frontier
        for r in range(self._table_radius + 1, radius + 1):
            nxt = []
            for u in frontier:
                for s in self.steps:
                    v = self.multiply(u, s)
                    if v not in self._dist:
                        self._dist[v] = r
                        nxt.append(v)
            self._layer_counts.append(len(nxt))
            frontier = nxt
        self._frontier = frontier
        self._table_radius = radius

    # -- ball cardinalities --------------------------------------------------

    def _ball_count_formula(self, radius: int) -> int | None:
        """Closed-form |B(e, radius)|, or None to count via the BFS table."""
        return None

    def ball_count(self, radius: int) -> int:
        """Exact |B(e, radius)|; by left-invariance the size of any ball."""
        if radius < 0:
            return 0
        n = self._ball_count_formula(radius)
        if n is not None:
            return n
        with self._lock:
            if radius > self.max_table_radius:
                raise OutOfRangeError(
                    f"{self.name}: ball count at radius {radius} exceeds the "
                    f"distance table cap {self.max_table_radius}")
            self._extend_table(radius)
            return sum(self._layer_counts[:radius + 1])

    def sphere_count(self, radius: int) -> int:
        if radius < 0:
            return 0
        return self.ball_count(radius) - self.ball_count(radius - 1)

    def predicted_ball_size(self, radius: int) -> int | None:
        """Cheap exact prediction of |B(e, radius)| when a closed form exists."""
        return self._ball_count_formula(radius)

    # -- misc ----------------------------------------------------------------

    def power(self, g: Element, n: int) -> Element:
        if n < 0:
            return self.power(self.inverse(g), -n)
        result = self.identity
        base = g
        while n:
            if n & 1:
                result = self.multiply(result, base)
            base = self.multiply(base, base)
            n >>= 1
        return result

    def format_element(self, g: Element) -> str:
        return ",".join(str(c) for c in self.coords(g))

    def parse_element(self, text: str) -> Element:
        try:
            flat = tuple(int(part) for part in text.split(","))
        except ValueError as exc:
            raise UsageError(f"cannot parse element {text!r}: {exc}") from None
        return self.from_coords(flat)

    def __repr__(self) -> str:  # pragma: no cover
        return f"<{type(self).__name__} {self.name}>"


def _delannoy_ball(dim: int, radius: int) -> int:
    # |{x in Z^d : |x|_1 <= r}| = sum_k 2^k C(d,k) C(r,k)
    return sum((2 ** k) * math.comb(dim, k) * math.comb(radius, k)
               for k in range(0, min(dim, radius) + 1))


class ZdBackend(GroupBackend):
    """Free abelian group Z^d in coordinate normal form.

    ``moves`` selects the generating set: ``standard`` uses the unit vectors
    and their inverses (word length = l1 norm); ``king`` uses every nonzero
    vector with entries in {-1, 0, 1} (word length = l-infinity norm).
    A custom generator list switches word lengths to the BFS table.
    """

    def __init__(self, dim: int, moves: str = "standard",
                 generators: Iterable[Element] | None = None,
                 max_table_radius: int = 4096):
        if dim < 1:
            raise UsageError("dimension must be at least 1")
        self.dim = dim
        self.flat_dim = dim
        self._identity = (0,) * dim
        if generators is not None:
            self.moves = "custom"
            gens: tuple[Element, ...] = tuple(tuple(g) for g in generators)
            name = f"Z^{dim}#custom"
        elif moves == "standard":
            self.moves = "standard"
            units = [tuple(1 if i == j else 0 for j in range(dim))
                     for i in range(dim)]
            gens = tuple(units) + tuple(tuple(-c for c in u) for u in units) \
                + (self._identity,)
            name = f"Z^{dim}"
        elif moves == "king":
            self.moves = "king"
            gens = tuple(itertools.product((-1, 0, 1), repeat=dim))
            name = f"Z^{dim}#king"
        else:
            raise UsageError(f"unknown move set {moves!r}")
        self.metric_attains_triangle = self.moves in ("standard", "king")
        super().__init__(name, gens, growth_degree=dim,
                         max_table_radius=max_table_radius)

    @property
    def identity(self) -> Element:
        return self._identity

    def multiply(self, a, b):
        self.check_element(a)
        self.check_element(b)
        return tuple(x + y for x, y in zip(a, b))

    def inverse(self, a):
        self.check_element(a)
        return tuple(-x for x in a)

    def check_element(self, g):
        if not (isinstance(g, tuple) and len(g) == self.dim
                and all(isinstance(c, int) for c in g)):
            raise BackendMismatchError(
                f"{self.name} expects tuples of {self.dim} ints, got {g!r}")

    def _length_formula(self, g):
        if self.moves == "standard":
            return sum(abs(c) for c in g)
        if self.moves == "king":
            return max(abs(c) for c in g)
        return None

    def _ball_count_formula(self, radius):
        if self.moves == "standard":
            return _delannoy_ball(self.dim, radius)
        if self.moves == "king":
            return (2 * radius + 1) ** self.dim
        return None

    def coords(self, g):
        self.check_element(g)
        return g

    def from_coords(self, flat):
        g = tuple(flat)
        self.check_element(g)
        return g

    def center_elements(self, radius):
        # Z^d is abelian: the center is the whole group.
        if self.moves in ("standard", "king"):
            box = itertools.product(range(-radius, radius + 1), repeat=self.dim)
            return tuple(sorted(v for v in box
                                if self._length_formula(v) <= radius))
        with self._lock:
            self._extend_table(min(radius, self.max_table_radius))
            return tuple(sorted(g for g, d in self._dist.items() if d <= radius))


class HeisenbergBackend(GroupBackend):
    """Discrete Heisenberg group H3(Z) in coordinates (a, b, c).

    Normal form corresponds to the upper unitriangular matrix
    [[1, a, c], [0, 1, b], [0, 0, 1]], giving the product law
    (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a*b').  The default generating
    set is {x, y, x^-1, y^-1, e} with x = (1,0,0), y = (0,1,0); growth
    degree is 4.  Word lengths are BFS-backed and exact, never approximated.
    """

    flat_dim = 3

    def __init__(self, generators: Iterable[Element] | None = None,
                 max_table_radius: int = 64):
        name = "H3" if generators is None else "H3#custom"
        gens = tuple(generators) if generators is not None else \
            ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 0))
        super().__init__(name, gens, growth_degree=4,
                         max_table_radius=max_table_radius)

    @property
    def identity(self) -> Element:
        return (0, 0, 0)

    def multiply(self, a, b):
        self.check_element(a)
        self.check_element(b)
        return (a[0] + b[0], a[1] + b[1], a[2] + b[2] + a[0] * b[1])

    def inverse(self, a):
        self.check_element(a)
        return (-a[0], -a[1], a[0] * a[1] - a[2])

    def check_element(self, g):
        if not (isinstance(g, tuple) and len(g) == 3
                and all(isinstance(c, int) for c in g)):
            raise BackendMismatchError(
                f"{self.name} expects tuples of 3 ints, got {g!r}")

    def coords(self, g):
        self.check_element(g)
        return g

    def from_coords(self, flat):
        g = tuple(flat)
        self.check_element(g)
        return g

    def center_elements(self, radius):
        # Z(H3) = {(0, 0, c)}; read the lengths off the distance table.
        radius = min(radius, self.max_table_radius)
        with self._lock:
            self._extend_table(radius)
            return tuple(sorted(g for g, d in self._dist.items()
                                if g[0] == 0 and g[1] == 0 and d <= radius))


class DirectProductBackend(GroupBackend):
    """Direct product of two backends.

    Elements are pairs of component elements; the generating set is
    {(s, e)} union {(e, t)}, so the word length is the sum of the component
    word lengths.
    """

    def __init__(self, left: GroupBackend, right: GroupBackend,
                 max_table_radius: int = 256):
        self.left = left
        self.right = right
        self.flat_dim = left.flat_dim + right.flat_dim
        self.metric_attains_triangle = (left.metric_attains_triangle
                                        and right.metric_attains_triangle)
        gens = tuple((s, right.identity) for s in left.steps) + \
            tuple((left.identity, t) for t in right.steps) + \
            ((left.identity, right.identity),)
        degree = None
        if left.growth_degree is not None and right.growth_degree is not None:
            degree = left.growth_degree + right.growth_degree
        super().__init__(f"{left.name}x{right.name}", gens, degree,
                         max_table_radius=max_table_radius)

    @property
    def identity(self) -> Element:
        return (self.left.identity, self.right.identity)

    def multiply(self, a, b):
        self.check_element(a)
        self.check_element(b)
        return (self.left.multiply(a[0], b[0]), self.right.multiply(a[1], b[1]))

    def inverse(self, a):
        self.check_element(a)
        return (self.left.inverse(a[0]), self.right.inverse(a[1]))

    def check_element(self, g):
        if not (isinstance(g, tuple) and len(g) == 2):
            raise BackendMismatchError(
                f"{self.name} expects pairs of component elements, got {g!r}")
        self.left.check_element(g[0])
        self.right.check_element(g[1])

    def _length_formula(self, g):
        return self.left.word_length(g[0]) + self.right.word_length(g[1])

    def _ball_count_formula(self, radius):
        return sum(self.left.sphere_count(k) * self.right.ball_count(radius - k)
                   for k in range(radius + 1))

    def coords(self, g):
        self.check_element(g)
        return self.left.coords(g[0]) + self.right.coords(g[1])

    def from_coords(self, flat):
        flat = tuple(flat)
        if len(flat) != self.flat_dim:
            raise BackendMismatchError(
                f"{self.name} expects {self.flat_dim} coordinates, got {flat!r}")
        split = self.left.flat_dim
        return (self.left.from_coords(flat[:split]),
                self.right.from_coords(flat[split:]))

    def center_elements(self, radius):
        out = []
        for a in self.left.center_elements(radius):
            rest = radius - self.left.word_length(a)
            for b in self.right.center_elements(rest):
                out.append((a, b))
        return tuple(sorted(out))


_ZD_PATTERN = re.compile(r"^Z\^(\d+)(#king)?$")


def parse_backend(text: str) -> GroupBackend:
    """Resolve a backend selection string.

    Supported atoms: ``Z^<d>``, ``Z^<d>#king``, ``H3``; ``x`` joins atoms
    into direct products (left associative), e.g. ``Z^1xH3``.
    """
    parts = text.split("x")
    backends = [_parse_atom(part) for part in parts]
    backend = backends[0]
    for other in backends[1:]:
        backend = DirectProductBackend(backend, other)
    return backend


def _parse_atom(text: str) -> GroupBackend:
    text = text.strip()
    if text == "H3":
        return HeisenbergBackend()
    match = _ZD_PATTERN.match(text)
    if match:
        return ZdBackend(int(match.group(1)),
                         moves="king" if match.group(2) else "standard")
    raise UsageError(
        f"unknown backend {text!r}; expected Z^<d>, Z^<d>#king, H3, "
        f"or an x-joined product of these")
