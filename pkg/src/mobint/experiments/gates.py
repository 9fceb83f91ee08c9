"""Noisy logic gates.

A gate's truth-table states (inputs plus output) each get probability ``p``,
every other state gets ``eps``. Two-input gates live on ``A, B -> C``,
three-input gates on ``A, B, C -> D``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidSpecError
from ..info import entropy, mutual_information
from ..interactions import j_bar, j_quantity, mfi, outeraction
from ..table import JointTable

_RULES = {
    "XNOR": lambda a, b: int(a == b),
    "XOR": lambda a, b: a ^ b,
    "AND": lambda a, b: a & b,
    "OR": lambda a, b: a | b,
    "NAND": lambda a, b: 1 - (a & b),
    "NOR": lambda a, b: 1 - (a | b),
    "XOR3": lambda a, b, c: a ^ b ^ c,
    "AND3": lambda a, b, c: a & b & c,
    "OR3": lambda a, b, c: a | b | c,
}

TWO_INPUT = ("XNOR", "XOR", "AND", "OR", "NAND", "NOR")
THREE_INPUT = ("XOR3", "AND3", "OR3")
GATES = TWO_INPUT + THREE_INPUT
COMPLEMENT = {"XNOR": "XOR", "XOR": "XNOR", "AND": "NAND", "NAND": "AND", "OR": "NOR", "NOR": "OR"}


def n_inputs(gate: str) -> int:
    return 3 if gate in THREE_INPUT else 2


def var_names(gate: str) -> tuple:
    return ("A", "B", "C", "D")[: n_inputs(gate) + 1]


@dataclass(frozen=True)
class GateSpec:
    """A noisy gate, ``p`` per truth-table state and ``eps`` per off-table state.

    ``eps = 0`` is the noiseless limit; it is allowed for entropy-type
    measures but interactions then need a substitute.
    """

    gate: str
    p: float
    eps: float

    def __post_init__(self):
        if self.gate not in _RULES:
            raise InvalidSpecError(f"unknown gate {self.gate!r}; choose from {', '.join(GATES)}")
        k = n_inputs(self.gate)
        on = 2 ** k
        off = 2 ** (k + 1) - on
        if abs(on * self.p + off * self.eps - 1.0) > 1e-12:
            raise InvalidSpecError(
                f"{on}*p + {off}*eps = {on * self.p + off * self.eps!r}, must be 1"
            )
        if not self.p > self.eps >= 0:
            raise InvalidSpecError("need p > eps >= 0")

    @classmethod
    def from_eps(cls, gate: str, eps: float) -> "GateSpec":
        on = 2 ** n_inputs(gate)
        return cls(gate, (1.0 - on * eps) / on, eps)

    @property
    def interaction_unit(self) -> float:
        """``I = 4 ln(p/eps)``, the XNOR 3-point interaction."""
        return 4.0 * math.log(self.p / self.eps)


def truth_states(gate: str) -> list[tuple]:
    rule = _RULES[gate]
    k = n_inputs(gate)
    return [bits + (rule(*bits),) for bits in itertools.product((0, 1), repeat=k)]


def gate_table(spec: GateSpec) -> JointTable:
    k = n_inputs(spec.gate)
    probs = np.full((2,) * (k + 1), float(spec.eps))
    for state in truth_states(spec.gate):
        probs[state] = spec.p
    return JointTable(probs, var_names=var_names(spec.gate))


def limit_table(gate: str) -> JointTable:
    """Noiseless gate: uniform over the truth table."""
    return gate_table(GateSpec.from_eps(gate, 0.0))


def gate_row(gate: str, p: float, eps: float, base=2) -> dict:
    """All per-gate quantities for a two-input gate (or 4-point for three-input)."""
    spec = GateSpec(gate, p, eps)
    table = gate_table(spec)
    limit = limit_table(gate)
    unit = spec.interaction_unit
    uni = list(table.var_names)
    if gate in THREE_INPUT:
        i4 = mfi(table, uni).value
        return {"gate": gate, "I_ABCD": i4, "I_ABCD_over_I": i4 / unit,
                "MI_ABCD": mutual_information(limit, uni, base)}
    i3 = mfi(table, uni).value
    row = {
        "gate": gate,
        "I": unit,
        "MI_ABC": mutual_information(limit, uni, base),
        "I_ABC": i3,
        "Istar_A": outeraction(table, ["A"]).value,
        "Jstar_A": j_quantity(table, "A", uni),
        "Jstar_C": j_quantity(table, "C", uni),
        "Jbar": j_bar(table, uni),
        "H_A": entropy(limit, ["A"], base),
        "H_B": entropy(limit, ["B"], base),
        "H_C": entropy(limit, ["C"], base),
        "H_AB": entropy(limit, ["A", "B"], base),
        "H_AC": entropy(limit, ["A", "C"], base),
        "H_BC": entropy(limit, ["B", "C"], base),
        "H_ABC": entropy(limit, uni, base),
    }
    # coefficients in units of I (I^3 for the triple product)
    for key in ("I_ABC", "Istar_A", "Jstar_A", "Jstar_C"):
        row[key + "_over_I"] = row[key] / unit
    row["Jbar_over_I3"] = row["Jbar"] / unit ** 3
    return row


def gate_report(gates=GATES, p: float = 0.23, eps: float = 0.02, base=2) -> list[dict]:
    """One row per gate.

    Two-input gates use ``(p, eps)`` as given. Three-input gates have twice as
    many truth-table states, so they keep ``eps`` and renormalise ``p``.
    """
    rows = []
    for g in gates:
        if g in THREE_INPUT:
            spec = GateSpec.from_eps(g, eps)
            rows.append(gate_row(g, spec.p, spec.eps, base))
        else:
            rows.append(gate_row(g, p, eps, base))
    return rows
