"""Entropy-based dependency measures written as Möbius inversions.

Entropy-family quantities default to bits (``base=2``); pointwise quantities
are in nats so they share a unit with surprisal and interactions.
"""
from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError, ZeroProbabilityError
from .lattice import Lattice, indices_of, mobius_invert, popcount, zeta_sum
from .table import JointTable


def unit_name(base) -> str:
    if base == 2:
        return "bits"
    if base == math.e:
        return "nats"
    return f"log{base:g}"


@dataclass
class InfoReport:
    target: list
    quantity: str
    value: float
    unit: str = "bits"
    context: dict | None = None

    def to_dict(self) -> dict:
        return {
            "target": list(self.target),
            "quantity": self.quantity,
            "value": float(self.value),
            "unit": self.unit,
            "context": self.context,
        }


def _entropy_of(probs: np.ndarray, base) -> float:
    p = probs[probs > 0]
    h = -math.fsum(p * np.log(p))
    return h / math.log(base)


def entropy(table: JointTable, subset=None, base=2) -> float:
    """Shannon entropy of the marginal on ``subset``; ``H(∅) = 0``."""
    idx = table.resolve(subset)
    if not idx:
        return 0.0
    return _entropy_of(table.marginalize(idx).probs.ravel(), base)


def _subset_entropies(table: JointTable, idx, base):
    """Map from bitmask over positions of ``idx`` to the marginal entropy."""
    cache = {}

    def h(mask):
        if mask not in cache:
            cache[mask] = entropy(table, [idx[i] for i in indices_of(mask)], base)
        return cache[mask]

    return h


def mutual_information(table: JointTable, subset, base=2) -> float:
    """Co-information of ``subset``, ``(-1)^(|τ|-1) Σ_{η≤τ} μ(η,τ) H(η)``.

    Equals the entropy for a singleton and the usual MI for a pair.
    """
    idx = table.resolve(subset)
    k = len(idx)
    if k == 0:
        raise InvalidArgumentError("mutual information needs at least one variable")
    lat = Lattice.boolean(k)
    sign = -1 if (k - 1) & 1 else 1
    return sign * mobius_invert(lat, _subset_entropies(table, idx, base), lat.top)


def entropy_from_mi(table: JointTable, subset, base=2) -> float:
    """Joint entropy rebuilt from co-informations, ``Σ_{η≤τ} (-1)^(|η|-1) MI(η)``."""
    idx = table.resolve(subset)
    lat = Lattice.boolean(len(idx))

    def signed_mi(mask):
        if mask == 0:
            return 0.0
        sub = [idx[i] for i in indices_of(mask)]
        sign = -1 if (popcount(mask) - 1) & 1 else 1
        return sign * mutual_information(table, sub, base)

    return zeta_sum(lat, signed_mi, lat.top)


def total_correlation(table: JointTable, subset, base=2) -> float:
    """KL divergence of the joint marginal from the product of its singletons."""
    idx = table.resolve(subset)
    if len(idx) < 2:
        raise InvalidArgumentError("total correlation needs at least two variables")
    return math.fsum(entropy(table, [i], base) for i in idx) - entropy(table, idx, base)


def dual_mutual_information(table: JointTable, subset, universe=None, base=2) -> float:
    """Möbius inversion of marginal entropy on the order-dual lattice.

    ``MI*(τ) = Σ_{η ⊇ τ, η ⊆ U} (-1)^(|η|+1) H(η)``. For the empty set this is
    ``MI(U)``; for a singleton it is the differential mutual information.
    """
    uni = table.resolve(universe)
    sub = table.resolve(subset)
    if not set(sub) <= set(uni):
        raise InvalidArgumentError(f"{table.names(sub)} is not contained in {table.names(uni)}")
    lat = Lattice.dual_boolean(len(uni))
    top = sum(1 << uni.index(i) for i in sub)
    sign = -1 if (len(sub) - 1) & 1 else 1
    return sign * mobius_invert(lat, _subset_entropies(table, uni, base), top)


def conditional_mi(table: JointTable, x, y, given, base=2) -> float:
    """``MI(X,Y|Z)`` through the co-information recursion ``MI(X,Y) - MI(X,Y,Z)``."""
    return mutual_information(table, [x, y], base) - mutual_information(table, [x, y, given], base)


def _restricted_state(table: JointTable, state, idx):
    if isinstance(state, Mapping):
        given = {table.index(k): int(v) for k, v in state.items()}
        missing = [i for i in idx if i not in given]
        if missing:
            raise InvalidArgumentError(f"state does not assign {table.names(missing)}")
        return {i: given[i] for i in idx}
    state = tuple(int(v) for v in state)
    if len(state) == table.n:
        return {i: state[i] for i in idx}
    if len(state) == len(idx):
        return dict(zip(idx, state))
    raise InvalidArgumentError("state must cover the whole table or exactly the subset")


def _log_marginals(table: JointTable, state, idx):
    values = _restricted_state(table, state, idx)

    def logp(mask):
        vars_ = [idx[i] for i in indices_of(mask)]
        if not vars_:
            return 0.0
        p = table.marginalize(vars_).prob([values[v] for v in vars_])
        if p <= 0.0:
            raise ZeroProbabilityError(
                f"marginal {dict(zip(table.names(vars_), [values[v] for v in vars_]))} has probability 0",
                state={table.var_names[v]: values[v] for v in vars_},
            )
        return math.log(p)

    return logp


def pointwise_mi(table: JointTable, state, subset) -> float:
    """Generalised pointwise MI in nats, ``(-1)^|τ| Σ_{η≤τ} μ(η,τ) ln p(x_η)``."""
    idx = table.resolve(subset)
    lat = Lattice.boolean(len(idx))
    sign = -1 if len(idx) & 1 else 1
    return sign * mobius_invert(lat, _log_marginals(table, state, idx), lat.top)


def dual_pointwise_mi(table: JointTable, state, subset, universe=None) -> float:
    """Pointwise counterpart of :func:`dual_mutual_information`, in nats.

    Its expectation over ``p`` is the dual MI (in nats).
    """
    uni = table.resolve(universe)
    sub = table.resolve(subset)
    if not set(sub) <= set(uni):
        raise InvalidArgumentError(f"{table.names(sub)} is not contained in {table.names(uni)}")
    lat = Lattice.dual_boolean(len(uni))
    top = sum(1 << uni.index(i) for i in sub)
    sign = -1 if len(sub) & 1 else 1
    return sign * mobius_invert(lat, _log_marginals(table, state, uni), top)


@dataclass
class MIBounds:
    holds: bool
    mi: float
    lower: float
    upper: float
    pairwise: dict = field(default_factory=dict)
    conditional: dict = field(default_factory=dict)


def check_mi_bounds(table: JointTable, triple, base=2, tol=1e-12) -> MIBounds:
    """Check ``-min CMI <= MI(X,Y,Z) <= min MI(pair)`` for a triple."""
    idx = table.resolve(triple)
    if len(idx) != 3:
        raise InvalidArgumentError("MI bounds are defined for exactly three variables")
    mi3 = mutual_information(table, idx, base)
    pairwise, conditional = {}, {}
    for k, given in enumerate(idx):
        pair = tuple(i for i in idx if i != given)
        key = "".join(f"{n}," for n in table.names(pair)).rstrip(",")
        pairwise[key] = mutual_information(table, pair, base)
        conditional[f"{key}|{table.var_names[given]}"] = pairwise[key] - mi3
    lower = -min(conditional.values())
    upper = min(pairwise.values())
    holds = lower - tol <= mi3 <= upper + tol
    return MIBounds(holds, mi3, lower, upper, pairwise, conditional)
