"""Dyadic and triadic distributions over three 4-letter variables.

Each letter ``v`` in ``{0, 1, 2, 3}`` is a pair of bits ``v = 2*v0 + v1``.
The dyadic rule couples bits pairwise (``X0 = Y1, Y0 = Z1, Z0 = X1``); the
triadic rule has a shared bit and a parity constraint
(``X1 = Y1 = Z1`` and ``X0 + Y0 + Z0 = 0 mod 2``). Both give 8 support
states with identical Shannon profiles.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidSpecError
from ..info import dual_mutual_information, entropy, mutual_information, total_correlation
from ..interactions import categorical_interaction, categorical_sweep
from ..table import JointTable

DYADIC = "dyadic"
TRIADIC = "triadic"
VAR_NAMES = ("X", "Y", "Z")

SUPPORT = {
    DYADIC: [(0, 0, 0), (0, 2, 1), (1, 0, 2), (1, 2, 3), (2, 1, 0), (2, 3, 1), (3, 1, 2), (3, 3, 3)],
    TRIADIC: [(0, 0, 0), (1, 1, 1), (0, 2, 2), (1, 3, 3), (2, 0, 2), (3, 1, 3), (2, 2, 0), (3, 3, 1)],
}

#: The single transition reported alongside the sweep.
CORNER = ((0, 3), (0, 3), (0, 3))


def _bits(v):
    return v >> 1, v & 1


def _dyadic_rule(x, y, z):
    (x0, x1), (y0, y1), (z0, z1) = _bits(x), _bits(y), _bits(z)
    return x0 == y1 and y0 == z1 and z0 == x1


def _triadic_rule(x, y, z):
    (x0, x1), (y0, y1), (z0, z1) = _bits(x), _bits(y), _bits(z)
    return x1 == y1 == z1 and (x0 + y0 + z0) % 2 == 0


def support_from_rules(which: str) -> set:
    """Support re-derived from the bit-level construction rules."""
    rule = {DYADIC: _dyadic_rule, TRIADIC: _triadic_rule}[which]
    return {s for s in itertools.product(range(4), repeat=3) if rule(*s)}


@dataclass(frozen=True)
class DyTriSpec:
    which: str
    eps: float = 0.0

    def __post_init__(self):
        if self.which not in SUPPORT:
            raise InvalidSpecError(f"which must be {DYADIC!r} or {TRIADIC!r}")
        if not 0 <= self.eps < self.p:
            raise InvalidSpecError("need 0 <= eps < p = (1 - 56 eps) / 8")

    @property
    def p(self) -> float:
        return (1.0 - 56.0 * self.eps) / 8.0


def dytri_table(spec: DyTriSpec) -> JointTable:
    probs = np.full((4, 4, 4), float(spec.eps))
    for state in SUPPORT[spec.which]:
        probs[state] = spec.p
    return JointTable(probs, var_names=VAR_NAMES)


def transition_exponents(which: str, transition) -> dict:
    """Net powers of ``p`` and ``eps`` in a categorical 3-point interaction."""
    support = set(SUPPORT[which])
    out = {"p": 0, "eps": 0}
    for bits in itertools.product((0, 1), repeat=3):
        state = tuple(t[b] for t, b in zip(transition, bits))
        sign = -1 if (3 - sum(bits)) & 1 else 1
        out["p" if state in support else "eps"] += sign
    return out


def shannon_profile(table: JointTable, base=2) -> dict:
    """Every Shannon-type measure implemented here, for all subsets."""
    out = {}
    names = table.var_names
    for r in (1, 2, 3):
        for sub in itertools.combinations(names, r):
            key = "".join(sub)
            out[f"H({key})"] = entropy(table, sub, base)
            out[f"MI({key})"] = mutual_information(table, sub, base)
            out[f"MI*({key})"] = dual_mutual_information(table, sub, base=base)
            if r >= 2:
                out[f"TC({key})"] = total_correlation(table, sub, base)
    return out


def dytri_report(eps: float = 0.0) -> dict:
    """Corner interaction, summed sweep and Shannon profile for both distributions.

    With ``eps = 0`` the result is symbolic: interaction values are ``None`` and
    only the exponent counts of ``p`` and ``eps`` are given.
    """
    report = {"eps": eps, "p": DyTriSpec(DYADIC, eps).p}
    for which in (DYADIC, TRIADIC):
        table = dytri_table(DyTriSpec(which, eps))
        sweep = categorical_sweep(table, VAR_NAMES)
        corner = categorical_interaction(table, list(CORNER)) if eps > 0 else None
        report[which] = {
            "support": [list(s) for s in SUPPORT[which]],
            "corner": corner,
            "corner_exponents": transition_exponents(which, CORNER),
            "sweep": sweep.value,
            "sweep_exponents": sweep.exponents,
            "n_transitions": len(sweep.transitions),
            "shannon": shannon_profile(table),
        }
    if eps > 0:
        report["log_eps_over_p"] = math.log(eps / report["p"])
    return report
