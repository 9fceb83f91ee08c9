"""Surprisal-based interactions on Boolean lattices and chain products.

An interaction among ``target`` in the context ``universe`` is the Möbius
inversion of ``ln p(target = s, universe \\ target = background)`` over the
Boolean lattice of ``target``; the dual (outeraction) inverts the same
log-probabilities over the order-reversed lattice of ``universe``.
Variables outside ``universe`` are marginalised out first. All values are
in nats.
"""
from __future__ import annotations

import itertools
import math
from collections.abc import Mapping
from dataclasses import dataclass, field

from .errors import InconsistencyError, InvalidArgumentError, ZeroProbabilityError
from .lattice import Lattice, indices_of, mobius_terms, submasks
from .table import JointTable

PRIMAL = "primal"
DUAL = "dual"


@dataclass(frozen=True)
class InteractionQuery:
    target: tuple
    universe: tuple
    background: tuple = ()
    side: str = PRIMAL

    def to_dict(self) -> dict:
        return {
            "target": list(self.target),
            "universe": list(self.universe),
            "background": dict(self.background),
            "side": self.side,
        }


@dataclass
class InteractionReport:
    query: InteractionQuery
    value: float
    terms: list = field(default_factory=list)
    annotation: str | None = None

    def to_dict(self, breakdown=False) -> dict:
        out = {"quantity": "outeraction" if self.query.side == DUAL else "mfi"}
        out.update(self.query.to_dict())
        out["value"] = float(self.value)
        out["unit"] = "nats"
        if self.annotation:
            out["annotation"] = self.annotation
        if breakdown:
            out["terms"] = [dict(t) for t in self.terms]
        return out


class _Prober:
    """Log-probabilities of full assignments of ``universe``."""

    def __init__(self, table: JointTable, universe, eps=None):
        self.table = table
        self.universe = universe
        self.marg = table if list(universe) == list(range(table.n)) else table.marginalize(universe)
        self.eps = eps

    def logp(self, values: dict) -> float:
        state = tuple(values[i] for i in self.universe)
        p = self.marg.prob(state)
        if p <= 0.0:
            if self.eps is not None:
                return math.log(self.eps)
            named = self.named(values)
            raise ZeroProbabilityError(f"probed state {named} has probability 0", state=named)
        return math.log(p)

    def named(self, values: dict) -> dict:
        return {self.table.var_names[i]: int(values[i]) for i in self.universe}


def _setup(table: JointTable, target, universe):
    tgt = table.resolve(target)
    uni = table.resolve(universe)
    if not set(tgt) <= set(uni):
        raise InvalidArgumentError(f"target {table.names(tgt)} is not inside universe {table.names(uni)}")
    return tgt, uni


def _background(table: JointTable, tgt, uni, background):
    rest = [i for i in uni if i not in tgt]
    values = {i: 0 for i in rest}
    for var, val in dict(background or {}).items():
        i = table.index(var)
        if i not in values:
            raise InvalidArgumentError(
                f"background may only assign universe variables outside the target, got {table.var_names[i]!r}"
            )
        val = int(val)
        if not 0 <= val < table.arities[i]:
            raise InvalidArgumentError(f"background value {val} out of range for {table.var_names[i]!r}")
        values[i] = val
    return values


def mfi(table: JointTable, target, universe=None, background=None, eps=None) -> InteractionReport:
    """Model-free interaction among ``target``.

    ``Σ_s (-1)^(#zeros in s) ln p(target = s, rest of universe = background)``
    with ``s`` ranging over ``{0,1}^|target|``.

    Parameters
    ----------
    table : JointTable
    target : sequence of variables
    universe : sequence of variables, optional
        Context variables; defaults to all variables of the table.
    background : mapping, optional
        Values for ``universe \\ target``, default 0.
    eps : float, optional
        Substitute probability for zero-probability probed states. Without it
        such states raise :class:`ZeroProbabilityError`.
    """
    tgt, uni = _setup(table, target, universe)
    base = _background(table, tgt, uni, background)
    prober = _Prober(table, uni, eps)
    lat = Lattice.boolean(len(tgt))
    states = {}

    def g(mask):
        values = dict(base)
        for pos, var in enumerate(tgt):
            values[var] = (mask >> pos) & 1
        states[mask] = prober.named(values)
        return prober.logp(values)

    terms = mobius_terms(lat, g, lat.top)
    value = math.fsum(mu * lp for _, mu, lp in terms)
    query = InteractionQuery(
        target=tuple(table.names(tgt)),
        universe=tuple(table.names(uni)),
        background=tuple((table.var_names[i], v) for i, v in sorted(base.items())),
        side=PRIMAL,
    )
    breakdown = [{"state": states[m], "sign": mu, "log_p": lp} for m, mu, lp in terms]
    return InteractionReport(query, value, breakdown)


def mfi_all(table: JointTable, order: int, universe=None, eps=None) -> list[InteractionReport]:
    """Interactions of every subset of ``universe`` with the given size."""
    uni = table.resolve(universe)
    if not 0 <= order <= len(uni):
        raise InvalidArgumentError(f"order {order} not in 0..{len(uni)}")
    return [mfi(table, combo, uni, eps=eps) for combo in itertools.combinations(uni, order)]


def outeraction(table: JointTable, target, universe=None, eps=None) -> InteractionReport:
    """Dual interaction: Möbius inversion of surprisal on the reversed lattice.

    ``Σ_{s ⊇ target} (-1)^(|s|-|target|) ln p(universe = s)``, i.e. the
    interaction among ``universe \\ target`` with ``target`` held at 1, up to
    the sign ``(-1)^|universe \\ target|``.
    """
    tgt, uni = _setup(table, target, universe)
    prober = _Prober(table, uni, eps)
    lat = Lattice.dual_boolean(len(uni))
    top = sum(1 << uni.index(i) for i in tgt)
    states = {}

    def g(mask):
        values = {var: (mask >> pos) & 1 for pos, var in enumerate(uni)}
        states[mask] = prober.named(values)
        return prober.logp(values)

    terms = mobius_terms(lat, g, top)
    value = math.fsum(mu * lp for _, mu, lp in terms)
    query = InteractionQuery(tuple(table.names(tgt)), tuple(table.names(uni)), (), DUAL)
    breakdown = [{"state": states[m], "sign": mu, "log_p": lp} for m, mu, lp in terms]
    return InteractionReport(query, value, breakdown)


def _triple(table, universe):
    uni = table.resolve(universe)
    if len(uni) != 3:
        raise InvalidArgumentError("J-quantities need a universe of exactly three variables")
    return uni


def j_quantity(table: JointTable, variable, universe, eps=None) -> float:
    """``J*_v = I(universe) - I(universe \\ {v})``, both in the context of ``universe``."""
    uni = _triple(table, universe)
    v = table.index(variable)
    if v not in uni:
        raise InvalidArgumentError(f"{table.var_names[v]!r} is not in the universe")
    others = [i for i in uni if i != v]
    return mfi(table, uni, uni, eps=eps).value - mfi(table, others, uni, eps=eps).value


def j_bar(table: JointTable, universe, eps=None) -> float:
    """Product of the three singleton J-quantities."""
    uni = _triple(table, universe)
    return math.prod(j_quantity(table, v, uni, eps=eps) for v in uni)


@dataclass
class DicePair:
    context: str
    at_one: float
    at_zero: float

    @property
    def difference(self) -> float:
        return self.at_one - self.at_zero


def dice_decomposition(table: JointTable, triple, universe=None, eps=None) -> list[DicePair]:
    """3-point interaction as differences of 2-point interactions.

    For each variable ``z`` of the triple, returns the 2-point interaction of
    the other two with ``z = 1`` and with ``z = 0``. Every difference equals
    the 3-point interaction.
    """
    tri = table.resolve(triple)
    if len(tri) != 3:
        raise InvalidArgumentError("dice decomposition needs exactly three variables")
    uni = table.resolve(universe)
    if not set(tri) <= set(uni):
        raise InvalidArgumentError("triple must lie inside the universe")
    out = []
    for z in tri:
        pair = [i for i in tri if i != z]
        at_one = mfi(table, pair, uni, background={z: 1}, eps=eps).value
        at_zero = mfi(table, pair, uni, eps=eps).value
        out.append(DicePair(table.var_names[z], at_one, at_zero))
    return out


def surprisal_from_interactions(table: JointTable, subset, universe=None, tol=1e-9) -> float:
    """``ln p(subset = 1, universe \\ subset = 0)`` as the sum of all interactions below ``subset``.

    The sum is cross-checked against a direct table lookup and
    :class:`InconsistencyError` is raised if they disagree beyond ``tol``.
    """
    sub, uni = _setup(table, subset, universe)
    total = math.fsum(
        mfi(table, [sub[i] for i in indices_of(mask)], uni).value
        for mask in submasks((1 << len(sub)) - 1)
    )
    values = {i: int(i in sub) for i in uni}
    direct = _Prober(table, uni).logp(values)
    if abs(total - direct) > tol * max(1.0, abs(direct)):
        raise InconsistencyError(f"interaction sum {total!r} != ln p {direct!r}")
    return total


# -- categorical interactions ----------------------------------------------------


def parse_transition(table: JointTable, transition, universe=None) -> dict:
    """Normalise a transition to ``{var_index: (from_level, to_level)}``.

    Accepts a mapping ``var -> (from, to)`` or a sequence of pairs aligned with
    ``universe`` (or the table's variables).
    """
    if isinstance(transition, Mapping):
        items = [(table.index(k), v) for k, v in transition.items()]
    else:
        order = table.resolve(universe)
        pairs = list(transition)
        if len(pairs) > len(order):
            raise InvalidArgumentError("more transitions than variables")
        items = list(zip(order, pairs))
    out = {}
    for i, (lo, hi) in items:
        lo, hi = int(lo), int(hi)
        if not (0 <= lo < hi < table.arities[i]):
            raise InvalidArgumentError(
                f"transition {lo}->{hi} invalid for {table.var_names[i]!r} with arity {table.arities[i]}"
            )
        out[i] = (lo, hi)
    return out


def categorical_interaction(table: JointTable, transition, universe=None, eps=None) -> float:
    """Interaction of categorical variables changing between two levels each.

    Probes only the ``2^k`` corner states: each transitioning variable at its
    from- or to-level, every other universe variable at 0. The sign of a term
    is ``(-1)^(number of variables at their from-level)``. For binary
    variables and ``0 -> 1`` transitions this is :func:`mfi`.
    """
    trans = parse_transition(table, transition, universe)
    uni = table.resolve(universe)
    if not set(trans) <= set(uni):
        raise InvalidArgumentError("transitioning variables must lie inside the universe")
    prober = _Prober(table, uni, eps)
    tvars = sorted(trans, key=uni.index)
    terms = []
    for bits in itertools.product((0, 1), repeat=len(tvars)):
        values = {i: 0 for i in uni}
        for var, b in zip(tvars, bits):
            values[var] = trans[var][b]
        sign = -1 if (len(bits) - sum(bits)) & 1 else 1
        terms.append(sign * prober.logp(values))
    return math.fsum(terms)


@dataclass
class SweepResult:
    value: float | None
    transitions: list
    exponents: dict | None = None

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "exponents": self.exponents,
            "n_transitions": len(self.transitions),
        }


def _two_values(probs):
    distinct = sorted(set(float(x) for x in probs.ravel()))
    if len(distinct) > 2:
        return None
    if len(distinct) == 1:
        return distinct[0], None
    return distinct[1], distinct[0]


def categorical_sweep(table: JointTable, triple, eps=None) -> SweepResult:
    """Sum of categorical 3-point interactions over all increasing transitions.

    When the table over ``triple`` takes only two values ``p > ε`` (ε may be 0)
    the net exponents of ``p`` and ``ε`` in the summed log-ratio are reported as
    well. If ε is 0 and no ``eps`` substitute is given, only the exponents are
    available and ``value`` is ``None``.
    """
    tri = table.resolve(triple)
    if len(tri) != 3:
        raise InvalidArgumentError("the sweep is defined over exactly three variables")
    marg = table.marginalize(tri)
    pair = _two_values(marg.probs)
    exponents = None
    if pair is not None:
        exponents = {"p": 0, "eps": 0}
    numeric = eps is not None or float(marg.probs.min()) > 0.0
    if not numeric and pair is None:
        raise ZeroProbabilityError("table has zero-probability states and no eps substitute was given")

    ranges = [list(itertools.combinations(range(a), 2)) for a in marg.arities]
    transitions = []
    total = []
    for combo in itertools.product(*ranges):
        value = categorical_interaction(marg, list(combo), eps=eps) if numeric else None
        transitions.append((combo, value))
        if value is not None:
            total.append(value)
        if exponents is not None:
            for bits in itertools.product((0, 1), repeat=3):
                state = tuple(c[b] for c, b in zip(combo, bits))
                sign = -1 if (3 - sum(bits)) & 1 else 1
                key = "p" if float(marg.probs[state]) == pair[0] else "eps"
                exponents[key] += sign
    return SweepResult(math.fsum(total) if numeric else None, transitions, exponents)
