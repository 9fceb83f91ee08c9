"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the package's lattice code so that they
can check it.
"""
import itertools
import math

import numpy as np
import pytest

from mobint.table import JointTable


def boolean_difference_oracle(logp, n, target, background=None):
    """Iterated finite difference of ``logp`` over ``target``, one variable at a time.

    ``logp`` maps a full 0/1 tuple of length ``n`` to a real. Variables outside
    ``target`` are held at ``background`` (default 0).
    """
    base = [0] * n
    for i, v in (background or {}).items():
        base[i] = v

    def apply(f, var):
        def g(x):
            hi = list(x)
            lo = list(x)
            hi[var], lo[var] = 1, 0
            return f(tuple(hi)) - f(tuple(lo))
        return g

    f = logp
    for var in target:
        f = apply(f, var)
    return f(tuple(base))


def table_logp(table: JointTable):
    return lambda state: math.log(table.probs[state])


def random_positive_table(rng, n, floor=0.01, names=None):
    """Dirichlet table mixed with a uniform floor so no state is (near) zero."""
    p = rng.dirichlet(np.ones(2 ** n))
    p = (1 - floor) * p + floor / 2 ** n
    return JointTable(p.reshape((2,) * n), var_names=names)


def chain_table():
    """Exact binary chain A -> B -> C with distinct conditionals."""
    pa = np.array([0.35, 0.65])
    pb_a = np.array([[0.8, 0.2], [0.25, 0.75]])
    pc_b = np.array([[0.7, 0.3], [0.1, 0.9]])
    p = pa[:, None, None] * pb_a[:, :, None] * pc_b[None, :, :]
    return JointTable(p, var_names=["A", "B", "C"])


def all_states(n):
    return list(itertools.product((0, 1), repeat=n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
