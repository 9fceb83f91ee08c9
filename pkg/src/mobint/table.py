"""Dense joint probability tables over discrete variables.

The table is stored as a numpy array whose axes follow ``var_names``; the
flat (row-major) order has the *last* variable varying fastest. States are
tuples of integers, binary variables take values 0/1.

All logarithms in this module are natural.
"""
from __future__ import annotations

import json
import math
from collections.abc import Mapping
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateDistributionError,
    InvalidArgumentError,
    InvalidParamsError,
    InvalidTableError,
    ZeroProbabilityError,
)
from .lattice import MAX_VARS

#: Tolerance on the total probability mass of a table.
SUM_TOL = 1e-9
#: Default surprisal floor, only used when explicitly requested.
DEFAULT_FLOOR = 1e-12
MAX_STATES = 2 ** MAX_VARS


class VariableIndex:
    """Name/position lookup shared by tables and sample matrices.

    Subclasses set ``var_names``, ``arities`` and ``_index``.
    """

    var_names: tuple
    arities: tuple

    @property
    def n(self) -> int:
        return len(self.arities)

    def index(self, var) -> int:
        """Resolve a variable given by name or position."""
        if isinstance(var, (int, np.integer)) and not isinstance(var, bool):
            i = int(var)
            if not 0 <= i < self.n:
                raise InvalidArgumentError(f"variable index {i} out of range")
            return i
        var = str(var)
        if var in self._index:
            return self._index[var]
        if var.lstrip("-").isdigit():
            return self.index(int(var))
        raise InvalidArgumentError(f"unknown variable {var!r}")

    def resolve(self, variables) -> tuple[int, ...]:
        """Resolve a collection of variables, keeping the given order."""
        if variables is None:
            return tuple(range(self.n))
        if isinstance(variables, (str, int, np.integer)):
            variables = [variables]
        idx = tuple(self.index(v) for v in variables)
        if len(set(idx)) != len(idx):
            raise InvalidArgumentError(f"repeated variable in {list(variables)!r}")
        return idx

    def names(self, indices) -> list[str]:
        return [self.var_names[i] for i in indices]


class JointTable(VariableIndex):
    """Exact joint distribution over named discrete variables.

    Parameters
    ----------
    probs : array_like
        Probabilities, either already shaped by ``arities`` or flat in
        row-major order (last variable fastest).
    var_names : sequence of str, optional
        Defaults to ``"0", "1", ...``.
    arities : sequence of int, optional
        Defaults to the array shape, or all-binary for a flat input.
    """

    def __init__(self, probs, var_names=None, arities=None):
        arr = np.array(probs, dtype=float)
        if arities is None:
            if arr.ndim > 1 or (arr.ndim == 1 and var_names is not None and len(var_names) == 1):
                arities = arr.shape
            else:
                size = arr.size
                n = size.bit_length() - 1
                if size < 1 or 1 << n != size:
                    raise InvalidTableError(
                        f"flat table of length {size} needs explicit arities"
                    )
                arities = (2,) * n
        arities = tuple(int(a) for a in arities)
        if any(a < 1 for a in arities):
            raise InvalidTableError("arities must be positive")
        size = math.prod(arities)
        if size > MAX_STATES or len(arities) > MAX_VARS:
            raise InvalidTableError(f"state space of {size} states exceeds the dense cap")
        if arr.size != size:
            raise InvalidTableError(f"expected {size} probabilities, got {arr.size}")
        arr = arr.reshape(arities)
        if var_names is None:
            var_names = [str(i) for i in range(len(arities))]
        var_names = tuple(str(v) for v in var_names)
        if len(var_names) != len(arities):
            raise InvalidTableError("one name per variable is required")
        if len(set(var_names)) != len(var_names):
            raise InvalidTableError("variable names must be unique")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise InvalidTableError("probabilities must be finite and non-negative")
        total = arr.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise InvalidTableError(f"probabilities sum to {total!r}, not 1")
        arr.flags.writeable = False
        self._p = arr
        self.var_names = var_names
        self.arities = arities
        self._index = {name: i for i, name in enumerate(var_names)}

    # -- basic accessors ----------------------------------------------------

    @property
    def probs(self) -> np.ndarray:
        return self._p

    def flat(self) -> np.ndarray:
        return self._p.ravel()

    def __repr__(self):
        return f"JointTable(vars={list(self.var_names)}, arities={list(self.arities)})"

    def _state_tuple(self, state) -> tuple[int, ...]:
        if isinstance(state, Mapping):
            values = [None] * self.n
            for var, val in state.items():
                values[self.index(var)] = val
            if any(v is None for v in values):
                raise InvalidArgumentError("state must assign every variable")
            state = values
        state = tuple(int(v) for v in state)
        if len(state) != self.n or any(not 0 <= v < a for v, a in zip(state, self.arities)):
            raise InvalidArgumentError(f"invalid state {state!r} for arities {self.arities}")
        return state

    def prob(self, state) -> float:
        return float(self._p[self._state_tuple(state)])

    def log_prob(self, state) -> float:
        """Natural log of a state's probability; zero raises."""
        state = self._state_tuple(state)
        p = float(self._p[state])
        if p <= 0.0:
            raise ZeroProbabilityError(
                f"state {dict(zip(self.var_names, state))} has probability 0",
                state=dict(zip(self.var_names, state)),
            )
        return math.log(p)

    def surprisal(self, state, floor=None) -> float:
        """``-ln p(state)`` in nats.

        A zero-probability state returns ``inf`` unless ``floor`` is given,
        in which case ``p`` is clipped from below at ``floor``.
        """
        p = self.prob(state)
        if floor is not None:
            p = max(p, floor)
        if p <= 0.0:
            return math.inf
        return -math.log(p)

    # -- derived tables -------------------------------------------------------

    def marginalize(self, keep) -> "JointTable":
        """Marginal table over ``keep``, in the order given.

        An empty ``keep`` gives the trivial one-entry table with probability 1.
        """
        keep = self.resolve(keep)
        if not keep:
            return JointTable(np.ones(()), var_names=(), arities=())
        drop = tuple(i for i in range(self.n) if i not in keep)
        marg = self._p.sum(axis=drop) if drop else self._p
        remaining = [i for i in range(self.n) if i in keep]
        order = [remaining.index(i) for i in keep]
        marg = np.transpose(marg, order)
        return JointTable(marg, var_names=self.names(keep), arities=[self.arities[i] for i in keep])

    def condition(self, fixed) -> "JointTable":
        """Renormalised table of the remaining variables given ``fixed`` values."""
        fixed = {self.index(k): int(v) for k, v in dict(fixed or {}).items()}
        if not fixed:
            return self
        for i, v in fixed.items():
            if not 0 <= v < self.arities[i]:
                raise InvalidArgumentError(f"value {v} out of range for {self.var_names[i]}")
        slicer = tuple(fixed.get(i, slice(None)) for i in range(self.n))
        sub = np.array(self._p[slicer], dtype=float)
        mass = sub.sum()
        if mass <= 0.0:
            raise ZeroProbabilityError(
                f"conditioning event {self._describe_fixed(fixed)} has probability 0",
                state={self.var_names[i]: v for i, v in fixed.items()},
            )
        rest = [i for i in range(self.n) if i not in fixed]
        return JointTable(sub / mass, var_names=self.names(rest), arities=[self.arities[i] for i in rest])

    def _describe_fixed(self, fixed):
        return {self.var_names[i]: v for i, v in fixed.items()}

    # -- serialisation ----------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "vars": list(self.var_names),
            "arities": list(self.arities),
            "probs": [float(x) for x in self.flat()],
        }

    @classmethod
    def from_dict(cls, data) -> "JointTable":
        try:
            return cls(data["probs"], var_names=data.get("vars"), arities=data.get("arities"))
        except (KeyError, TypeError) as exc:
            raise InvalidTableError(f"malformed distribution: {exc}") from exc

    def to_json(self) -> str:
        # json.dumps writes floats via repr, i.e. shortest round-trip form
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "JointTable":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidTableError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise InvalidTableError("distribution JSON must be an object")
        return cls.from_dict(data)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")

    @classmethod
    def load(cls, path) -> "JointTable":
        return cls.from_json(Path(path).read_text())


def normalize(weights, var_names=None, arities=None) -> JointTable:
    """Scale non-negative weights (or a table) to a probability table."""
    if isinstance(weights, JointTable):
        var_names = var_names or weights.var_names
        arities = arities or weights.arities
        weights = weights.probs
    arr = np.array(weights, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise InvalidTableError("weights must be finite and non-negative")
    total = arr.sum()
    if total <= 0:
        raise DegenerateDistributionError("cannot normalise an all-zero table")
    return JointTable(arr / total, var_names=var_names, arities=arities)


def marginalize(table: JointTable, keep) -> JointTable:
    return table.marginalize(keep)


def condition(table: JointTable, fixed) -> JointTable:
    return table.condition(fixed)


def surprisal(table: JointTable, state, floor=None) -> float:
    return table.surprisal(state, floor=floor)


def binary_states(n: int) -> np.ndarray:
    """All ``2**n`` binary states as rows, in table order."""
    grid = np.indices((2,) * n).reshape(n, -1).T
    return grid.astype(np.int8)


def from_ising(couplings, n: int, var_names=None) -> JointTable:
    """Boltzmann table ``p(s) ∝ exp(sum_T J_T prod_{i in T} s_i)`` over ``{0,1}^n``.

    Parameters
    ----------
    couplings : mapping
        Nonempty index subsets (any iterable of ints) to coupling values.
    n : int
        Number of binary variables.
    """
    if not 0 <= n <= MAX_VARS:
        raise InvalidParamsError(f"n must lie in 0..{MAX_VARS}")
    states = binary_states(n).astype(bool)
    energy = np.zeros(states.shape[0])
    for subset, coupling in dict(couplings).items():
        subset = (subset,) if isinstance(subset, (int, np.integer)) else tuple(subset)
        if not subset:
            raise InvalidParamsError("couplings need a nonempty variable subset")
        if any(not 0 <= int(i) < n for i in subset):
            raise InvalidParamsError(f"coupling on {subset!r} references an index outside 0..{n - 1}")
        energy += float(coupling) * np.all(states[:, list(subset)], axis=1)
    weights = np.exp(energy - energy.max())
    return normalize(weights.reshape((2,) * n), var_names=var_names, arities=(2,) * n)


def random_table(rng, arities, alpha=1.0, var_names=None) -> JointTable:
    """Symmetric-Dirichlet(``alpha``) sample over the full state space."""
    arities = tuple(int(a) for a in arities)
    size = math.prod(arities)
    probs = rng.dirichlet(np.full(size, float(alpha)))
    return JointTable(probs.reshape(arities), var_names=var_names, arities=arities)


def independent_table(marginals, var_names=None) -> JointTable:
    """Product distribution of the given 1-D marginals."""
    arr = np.ones(())
    for m in marginals:
        arr = np.multiply.outer(arr, np.asarray(m, dtype=float))
    return normalize(arr, var_names=var_names, arities=arr.shape)
