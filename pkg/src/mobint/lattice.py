"""Finite lattices and Möbius inversion.

Three families are supported:

* ``Lattice.boolean(n)``: subsets of ``n`` variables encoded as bitmasks
  (bit ``i`` set means variable ``i`` is in the subset), ordered by inclusion.
* ``Lattice.dual_boolean(n)``: the same elements with the order reversed.
* ``Lattice.chain_product(*arities)``: tuples of levels ``(l_0, ..., l_{k-1})``
  with ``0 <= l_i < arities[i]``, ordered componentwise.

Enumeration is always ascending by rank, ties broken by numeric encoding
(the mask itself, or the row-major linear index of a level tuple), so anything
built on top of it is byte-stable.
"""
from __future__ import annotations

import itertools
import math
from collections.abc import Mapping
from dataclasses import dataclass
from functools import lru_cache

from .errors import InvalidElementError, MissingValueError

BOOLEAN = "boolean"
DUAL_BOOLEAN = "dual_boolean"
CHAIN_PRODUCT = "chain_product"

#: Largest number of variables a Boolean lattice (and a dense table) may have.
MAX_VARS = 20


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_of(indices) -> int:
    mask = 0
    for i in indices:
        mask |= 1 << int(i)
    return mask


def indices_of(mask: int) -> tuple[int, ...]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def submasks(mask: int):
    """All submasks of ``mask`` ascending by popcount, then numerically."""
    subs = []
    s = mask
    while True:
        subs.append(s)
        if s == 0:
            break
        s = (s - 1) & mask
    subs.sort(key=lambda m: (popcount(m), m))
    return subs


@dataclass(frozen=True)
class Lattice:
    """An immutable finite lattice with its Möbius function.

    Use the constructors :meth:`boolean`, :meth:`dual_boolean` and
    :meth:`chain_product` rather than instantiating directly.
    """

    kind: str
    n: int
    arities: tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind not in (BOOLEAN, DUAL_BOOLEAN, CHAIN_PRODUCT):
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        if self.kind == CHAIN_PRODUCT:
            if len(self.arities) != self.n or any(a < 1 for a in self.arities):
                raise ValueError("chain product needs one positive arity per variable")
            if math.prod(self.arities) > 2 ** MAX_VARS:
                raise ValueError("chain product lattice too large")
        elif not 0 <= self.n <= MAX_VARS:
            raise ValueError(f"Boolean lattices support 0..{MAX_VARS} variables, got {self.n}")

    @classmethod
    def boolean(cls, n: int) -> "Lattice":
        return cls(BOOLEAN, int(n))

    @classmethod
    def dual_boolean(cls, n: int) -> "Lattice":
        return cls(DUAL_BOOLEAN, int(n))

    @classmethod
    def chain_product(cls, *arities: int) -> "Lattice":
        arities = tuple(int(a) for a in arities)
        return cls(CHAIN_PRODUCT, len(arities), arities)

    @property
    def is_boolean_like(self) -> bool:
        return self.kind != CHAIN_PRODUCT

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def top(self):
        if self.kind == BOOLEAN:
            return self.full_mask
        if self.kind == DUAL_BOOLEAN:
            return 0
        return tuple(a - 1 for a in self.arities)

    @property
    def bottom(self):
        if self.kind == BOOLEAN:
            return 0
        if self.kind == DUAL_BOOLEAN:
            return self.full_mask
        return (0,) * self.n

    def __len__(self):
        if self.kind == CHAIN_PRODUCT:
            return math.prod(self.arities)
        return 1 << self.n

    # -- elements ---------------------------------------------------------

    def validate(self, x):
        """Return ``x`` in canonical form or raise :class:`InvalidElementError`."""
        if self.kind == CHAIN_PRODUCT:
            try:
                levels = tuple(int(v) for v in x)
            except TypeError:
                raise InvalidElementError(f"{x!r} is not a level tuple") from None
            if len(levels) != self.n or any(
                not 0 <= v < a for v, a in zip(levels, self.arities)
            ):
                raise InvalidElementError(f"{x!r} is not an element of ChainProduct{self.arities}")
            return levels
        if isinstance(x, bool) or not isinstance(x, int):
            raise InvalidElementError(f"{x!r} is not a bitmask")
        if x < 0 or x >> self.n:
            raise InvalidElementError(f"mask {x:#b} has bits beyond {self.n} variables")
        return x

    def encode(self, x) -> int:
        """Numeric encoding used to break rank ties."""
        if self.kind == CHAIN_PRODUCT:
            idx = 0
            for v, a in zip(x, self.arities):
                idx = idx * a + v
            return idx
        return x

    def rank(self, x) -> int:
        if self.kind == BOOLEAN:
            return popcount(x)
        if self.kind == DUAL_BOOLEAN:
            return self.n - popcount(x)
        return sum(x)

    def _sort_key(self, x):
        return (self.rank(x), self.encode(x))

    def elements(self):
        if self.kind == CHAIN_PRODUCT:
            els = list(itertools.product(*(range(a) for a in self.arities)))
        else:
            els = list(range(1 << self.n))
        els.sort(key=self._sort_key)
        return els

    # -- order ------------------------------------------------------------

    def _leq(self, a, b) -> bool:
        if self.kind == BOOLEAN:
            return a & b == a
        if self.kind == DUAL_BOOLEAN:
            return a & b == b
        return all(u <= v for u, v in zip(a, b))

    def leq(self, a, b) -> bool:
        return self._leq(self.validate(a), self.validate(b))

    def downset(self, top):
        """Every element ``x <= top``, ascending by rank then encoding."""
        top = self.validate(top)
        if self.kind == BOOLEAN:
            els = submasks(top)
        elif self.kind == DUAL_BOOLEAN:
            free = self.full_mask & ~top
            els = [top | s for s in submasks(free)]
        else:
            els = list(itertools.product(*(range(v + 1) for v in top)))
        els.sort(key=self._sort_key)
        return els

    def interval(self, a, b):
        """Elements ``z`` with ``a <= z <= b`` in enumeration order."""
        a = self.validate(a)
        return [z for z in self.downset(b) if self._leq(a, z)]

    # -- Möbius function --------------------------------------------------

    def mobius(self, a, b) -> int:
        a, b = self.validate(a), self.validate(b)
        if not self._leq(a, b):
            return 0
        if self.kind == BOOLEAN:
            return -1 if (popcount(b) - popcount(a)) & 1 else 1
        if self.kind == DUAL_BOOLEAN:
            return -1 if (popcount(a) - popcount(b)) & 1 else 1
        return _recursive_mobius(self, a, b)

    def mobius_recursive(self, a, b) -> int:
        """Möbius function from the defining recursion, for any kind.

        ``mu(x, x) = 1`` and ``mu(x, y) = -sum(mu(x, z) for x <= z < y)``.
        """
        a, b = self.validate(a), self.validate(b)
        return _recursive_mobius(self, a, b)


@lru_cache(maxsize=None)
def _recursive_mobius(lattice: Lattice, a, b) -> int:
    if a == b:
        return 1
    if not lattice._leq(a, b):
        return 0
    return -sum(_recursive_mobius(lattice, a, z) for z in lattice.interval(a, b) if z != b)


def leq(lattice: Lattice, a, b) -> bool:
    return lattice.leq(a, b)


def mobius(lattice: Lattice, a, b) -> int:
    return lattice.mobius(a, b)


def downset(lattice: Lattice, top):
    return lattice.downset(top)


def _lookup(g, x):
    if isinstance(g, Mapping):
        try:
            return g[x]
        except KeyError:
            raise MissingValueError(f"function undefined on element {x!r}") from None
    try:
        return g(x)
    except KeyError as exc:
        raise MissingValueError(f"function undefined on element {x!r}") from exc


def mobius_terms(lattice: Lattice, g, top):
    """Non-vanishing terms ``(x, mu(x, top), g(x))`` of the inversion at ``top``.

    ``g`` is only evaluated where ``mu(x, top) != 0``.
    """
    top = lattice.validate(top)
    terms = []
    for x in lattice.downset(top):
        mu = lattice.mobius(x, top)
        if mu:
            terms.append((x, mu, _lookup(g, x)))
    return terms


def mobius_invert(lattice: Lattice, g, top) -> float:
    """Return ``f(top) = sum_{x <= top} mu(x, top) g(x)``.

    Parameters
    ----------
    lattice : Lattice
    g : callable or mapping
        Function on lattice elements.
    top : element
        Point at which the inversion is evaluated.
    """
    return math.fsum(mu * value for _, mu, value in mobius_terms(lattice, g, top))


def zeta_sum(lattice: Lattice, f, top) -> float:
    """Inverse of :func:`mobius_invert`: ``g(top) = sum_{x <= top} f(x)``."""
    return math.fsum(_lookup(f, x) for x in lattice.downset(top))
