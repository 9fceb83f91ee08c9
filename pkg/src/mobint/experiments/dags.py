"""Binary causal DAG simulation and association reports.

Roots are Bernoulli(``root_p``). Every other node takes the mean (additive)
or the product (multiplicative) of its parents, plus Gaussian noise, and is
then thresholded at 0.5. Node labels follow the convention of the reference
tables: in the collider graphs node 1 is the common child of 0 and 2, and
the extra chain edge is 0 -> 2.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter

import numpy as np
from scipy import stats

from ..errors import InvalidDagError
from ..estimation import SampleMatrix, estimate_mfi
from ..info import mutual_information
from ..table import JointTable

ADDITIVE = "additive"
MULTIPLICATIVE = "multiplicative"
THRESHOLD = 0.5

TARGETS = ((0, 1), (0, 2), (1, 2), (0, 1, 2))


@dataclass(frozen=True)
class CausalDag:
    name: str
    nodes: tuple
    edges: tuple
    dynamics: str = ADDITIVE
    root_p: float = 0.5
    sigma: float = 0.4

    def __post_init__(self):
        if self.dynamics not in (ADDITIVE, MULTIPLICATIVE):
            raise InvalidDagError(f"unknown dynamics {self.dynamics!r}")
        nodes = set(self.nodes)
        if len(nodes) != len(self.nodes):
            raise InvalidDagError("duplicate node")
        for a, b in self.edges:
            if a not in nodes or b not in nodes:
                raise InvalidDagError(f"edge {a}->{b} references an unknown node")
            if a == b:
                raise InvalidDagError(f"self-loop on {a}")
        if not 0 <= self.root_p <= 1 or self.sigma < 0:
            raise InvalidDagError("need 0 <= root_p <= 1 and sigma >= 0")
        self.order()

    def parents(self, node) -> list:
        return [a for a, b in self.edges if b == node]

    def order(self) -> list:
        ts = TopologicalSorter({v: self.parents(v) for v in self.nodes})
        try:
            order = list(ts.static_order())
        except CycleError as exc:
            raise InvalidDagError(f"graph {self.name!r} is cyclic: {exc.args[1]}") from None
        # stable order: topological layers, each sorted by node position
        rank = {v: i for i, v in enumerate(self.nodes)}
        depth = {}
        for v in order:
            depth[v] = 1 + max((depth[u] for u in self.parents(v)), default=-1)
        return sorted(self.nodes, key=lambda v: (depth[v], rank[v]))

    def with_params(self, root_p=None, sigma=None) -> "CausalDag":
        return CausalDag(
            self.name, self.nodes, self.edges, self.dynamics,
            self.root_p if root_p is None else root_p,
            self.sigma if sigma is None else sigma,
        )


def standard_dags(root_p: float = 0.5, sigma: float = 0.4) -> dict:
    """The six dynamics, keyed by name, in reference order."""
    nodes = (0, 1, 2)
    specs = [
        ("chain", ((0, 1), (1, 2)), ADDITIVE),
        ("fork", ((0, 1), (0, 2)), ADDITIVE),
        ("additive_collider", ((0, 1), (2, 1)), ADDITIVE),
        ("multiplicative_collider", ((0, 1), (2, 1)), MULTIPLICATIVE),
        ("additive_collider_chain", ((0, 1), (2, 1), (0, 2)), ADDITIVE),
        ("multiplicative_collider_chain", ((0, 1), (2, 1), (0, 2)), MULTIPLICATIVE),
    ]
    return {name: CausalDag(name, nodes, edges, dyn, root_p, sigma) for name, edges, dyn in specs}


def _combine(dag: CausalDag, parent_values: list) -> np.ndarray:
    stacked = np.vstack(parent_values).astype(float)
    if dag.dynamics == ADDITIVE:
        return stacked.mean(axis=0)
    return stacked.prod(axis=0)


def simulate_dag(dag: CausalDag, m: int, seed) -> SampleMatrix:
    """Draw ``m`` i.i.d. binary samples, one column per node in ``dag.nodes`` order."""
    if m < 1:
        raise InvalidDagError("need at least one sample")
    rng = np.random.default_rng(seed)
    values = {}
    for v in dag.order():
        pa = dag.parents(v)
        if not pa:
            values[v] = (rng.random(m) < dag.root_p).astype(np.int64)
            continue
        noise = rng.normal(0.0, dag.sigma, m) if dag.sigma > 0 else np.zeros(m)
        values[v] = (_combine(dag, [values[u] for u in pa]) + noise >= THRESHOLD).astype(np.int64)
    data = np.column_stack([values[v] for v in dag.nodes])
    return SampleMatrix(data, var_names=[str(v) for v in dag.nodes], arities=[2] * len(dag.nodes))


def exact_dag_table(dag: CausalDag) -> JointTable:
    """Exact distribution of the thresholded model."""
    order = dag.order()
    pos = {v: i for i, v in enumerate(dag.nodes)}
    probs = np.zeros((2,) * len(dag.nodes))
    for state in itertools.product((0, 1), repeat=len(dag.nodes)):
        pr = 1.0
        for v in order:
            x = state[pos[v]]
            pa = dag.parents(v)
            if not pa:
                q = dag.root_p
            else:
                mean = float(_combine(dag, [np.array([state[pos[u]]]) for u in pa])[0])
                if dag.sigma == 0:
                    q = float(mean >= THRESHOLD)
                else:
                    q = float(stats.norm.sf((THRESHOLD - mean) / dag.sigma))
            pr *= q if x else 1.0 - q
        probs[state] = pr
    return JointTable(probs / probs.sum(), var_names=[str(v) for v in dag.nodes])


def _corr_pvalue(r: float, dof: int) -> float:
    if abs(r) >= 1.0:
        return 0.0
    t = r * math.sqrt(dof / (1.0 - r * r))
    return float(2.0 * stats.t.sf(abs(t), dof))


def pearson(x, y):
    r = float(np.corrcoef(x, y)[0, 1])
    return r, _corr_pvalue(r, len(x) - 2)


def partial_correlation(x, y, z):
    """Correlation of ``x`` and ``y`` after regressing out ``z``, dof ``M - 3``."""
    design = np.column_stack([np.ones(len(z)), z])
    rx = x - design @ np.linalg.lstsq(design, x, rcond=None)[0]
    ry = y - design @ np.linalg.lstsq(design, y, rcond=None)[0]
    r = float(np.corrcoef(rx, ry)[0, 1])
    return r, _corr_pvalue(r, len(x) - 3)


def dag_report(dag: CausalDag, m: int = 100_000, n_boot: int = 1000, seed=0, threads: int = 1,
               samples: SampleMatrix | None = None) -> list[dict]:
    """MFI with bootstrap F, Pearson, partial correlation and MI for every target.

    MI columns are plug-in estimates in bits: pairwise MI for pairs, the
    co-information for the triple.
    """
    root = np.random.SeedSequence(seed)
    sim_seed, *boot_seeds = root.spawn(1 + len(TARGETS))
    if samples is None:
        samples = simulate_dag(dag, m, sim_seed)
    x = samples.values.astype(float)
    emp = samples.empirical_table()
    rows = []
    for target, bseed in zip(TARGETS, boot_seeds):
        est = estimate_mfi(samples, list(target), n_boot=n_boot, seed=bseed, threads=threads)
        row = {
            "genes": list(target),
            "interaction": est.value,
            "F": est.F,
            "n_skipped": est.n_skipped,
            "pearson": None,
            "pearson_p": None,
            "partial": None,
            "partial_p": None,
            "MI": mutual_information(emp, list(target), 2),
        }
        if len(target) == 2:
            a, b = target
            (c,) = [i for i in range(3) if i not in target]
            row["pearson"], row["pearson_p"] = pearson(x[:, a], x[:, b])
            row["partial"], row["partial_p"] = partial_correlation(x[:, a], x[:, b], x[:, c])
        rows.append(row)
    return rows
