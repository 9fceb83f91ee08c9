"""Estimating interactions from samples.

Interactions are estimated in conditional-expectation form: the last target
variable is the response, and for every assignment ``s`` of the other target
variables (conditioning variables held at 0) its conditional mean
``m_s = E[X | others = s, conditioning = 0]`` is estimated by a sample mean.
The interaction is the alternating sum of the log-odds ``ln m_s / (1 - m_s)``.
With all remaining variables as conditioning set this is exactly the
plug-in interaction of the empirical table.
"""
from __future__ import annotations

import csv
import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from .errors import (
    InvalidArgumentError,
    InvalidTableError,
    SignificanceUnavailableError,
    UnestimableError,
)
from .table import JointTable, VariableIndex, normalize

#: Replicates per independently seeded bootstrap block.
BOOT_BLOCK = 250


class SampleMatrix(VariableIndex):
    """``M x N`` matrix of observed discrete states.

    Parameters
    ----------
    values : array_like of int, shape (M, N)
    var_names : sequence of str, optional
    arities : sequence of int, optional
        Defaults to ``max(2, column max + 1)`` per column.
    """

    def __init__(self, values, var_names=None, arities=None):
        arr = np.asarray(values)
        if arr.ndim != 2 or arr.shape[0] < 1:
            raise InvalidTableError("samples must be a non-empty 2-D matrix")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise InvalidTableError("samples must be integers")
        arr = arr.astype(np.int64)
        if np.any(arr < 0):
            raise InvalidTableError("sample values must be non-negative")
        if arities is None:
            arities = [max(2, int(c) + 1) for c in arr.max(axis=0)]
        arities = tuple(int(a) for a in arities)
        if len(arities) != arr.shape[1] or np.any(arr >= np.array(arities)):
            raise InvalidTableError("every sample value must be below its variable's arity")
        if var_names is None:
            var_names = [str(i) for i in range(arr.shape[1])]
        var_names = tuple(str(v) for v in var_names)
        if len(var_names) != arr.shape[1] or len(set(var_names)) != len(var_names):
            raise InvalidTableError("need one unique name per column")
        arr.flags.writeable = False
        self.values = arr
        self.var_names = var_names
        self.arities = arities
        self._index = {name: i for i, name in enumerate(var_names)}

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def __repr__(self):
        return f"SampleMatrix(M={self.m}, vars={list(self.var_names)})"

    def empirical_table(self) -> JointTable:
        idx = np.ravel_multi_index(self.values.T, self.arities)
        counts = np.bincount(idx, minlength=math.prod(self.arities))
        return normalize(counts.reshape(self.arities), var_names=self.var_names, arities=self.arities)

    @classmethod
    def from_csv(cls, path, delimiter=None) -> "SampleMatrix":
        """Read a headered CSV/TSV of integers (delimiter sniffed from the header)."""
        text = Path(path).read_text()
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if len(lines) < 2:
            raise InvalidTableError(f"{path}: need a header and at least one row")
        if delimiter is None:
            delimiter = "\t" if "\t" in lines[0] else ","
        rows = list(csv.reader(lines, delimiter=delimiter))
        header = [h.strip() for h in rows[0]]
        try:
            data = [[int(v) for v in row] for row in rows[1:]]
        except ValueError as exc:
            raise InvalidTableError(f"{path}: non-integer sample value ({exc})") from exc
        if any(len(r) != len(header) for r in data):
            raise InvalidTableError(f"{path}: ragged rows")
        return cls(np.array(data, dtype=np.int64), var_names=header)

    def to_csv(self, path, delimiter=",") -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
            writer.writerow(self.var_names)
            writer.writerows(self.values.tolist())


@dataclass
class EstimatedInteraction:
    target: list
    value: float
    conditioning: list
    counts: list
    F: float | None = None
    n_boot: int = 0
    n_skipped: int = 0
    annotation: str | None = None

    def to_dict(self) -> dict:
        out = {
            "quantity": "mfi_estimate",
            "target": list(self.target),
            "value": float(self.value),
            "unit": "nats",
            "conditioning": list(self.conditioning),
            "counts": self.counts,
            "F": None if self.F is None else float(self.F),
            "n_boot": self.n_boot,
            "n_skipped": self.n_skipped,
        }
        if self.annotation:
            out["annotation"] = self.annotation
        return out


@dataclass
class _Design:
    """Cell layout of one estimation problem."""

    target: tuple
    conditioning: tuple
    cells: list
    ones: np.ndarray
    zeros: np.ndarray
    signs: np.ndarray
    m: int = 0
    labels: list = field(default_factory=list)


def _design(samples: SampleMatrix, target, conditioning) -> _Design:
    tgt = samples.resolve(target)
    if not tgt:
        raise InvalidArgumentError("target must contain at least one variable")
    if conditioning is None:
        cond = tuple(i for i in range(samples.n) if i not in tgt)
    else:
        cond = samples.resolve(conditioning)
    if set(tgt) & set(cond):
        raise InvalidArgumentError("target and conditioning set must be disjoint")
    wide = [samples.var_names[i] for i in tgt if samples.arities[i] != 2]
    if wide:
        raise InvalidArgumentError(f"estimation needs binary target variables, got {wide}")
    x = samples.values
    response, others = tgt[-1], tgt[:-1]
    context = np.ones(samples.m, dtype=bool)
    for c in cond:
        context &= x[:, c] == 0
    for o in others:
        context &= x[:, o] <= 1
    context &= x[:, response] <= 1
    k = len(others)
    code = np.zeros(samples.m, dtype=np.int64)
    for pos, o in enumerate(others):
        code |= x[:, o] << pos
    sel = code[context] * 2 + x[context, response]
    counts = np.bincount(sel, minlength=2 ** (k + 1)).reshape(2 ** k, 2)
    cells, labels, signs = [], [], []
    for s in range(2 ** k):
        bits = [(s >> pos) & 1 for pos in range(k)]
        cells.append(bits)
        labels.append({samples.var_names[o]: b for o, b in zip(others, bits)})
        signs.append(-1.0 if (k - sum(bits)) & 1 else 1.0)
    return _Design(tgt, cond, cells, counts[:, 1], counts[:, 0], np.array(signs), samples.m, labels)


def _log_odds_sum(ones, zeros, signs, alpha):
    """Alternating sum of conditional log-odds; NaN where a cell is unestimable.

    Works row-wise on ``(..., cells)`` arrays. For the conditional mean
    ``m = (n1 + a) / (n + 2a)`` the log-odds ``ln m/(1-m)`` reduce to
    ``ln (n1 + a) - ln (n0 + a)``.
    """
    ones = np.asarray(ones, dtype=float) + alpha
    zeros = np.asarray(zeros, dtype=float) + alpha
    with np.errstate(divide="ignore", invalid="ignore"):
        logit = np.log(ones) - np.log(zeros)
    bad = (ones <= 0) | (zeros <= 0)
    logit = np.where(bad, np.nan, logit)
    return np.sum(logit * signs, axis=-1)


def estimate_mfi(
    samples: SampleMatrix,
    target,
    conditioning=None,
    pseudocount: float = 0.0,
    n_boot: int = 0,
    seed=None,
    threads: int = 1,
) -> EstimatedInteraction:
    """Estimate an interaction from samples.

    Parameters
    ----------
    samples : SampleMatrix
    target : sequence of variables
        Binary variables whose interaction is estimated.
    conditioning : sequence of variables, optional
        Variables held at 0; defaults to every non-target variable.
    pseudocount : float
        Additive count per probed cell and response value (0 = none).
    n_boot : int
        If positive, also compute the bootstrap sign-flip fraction ``F``.
    seed : int or numpy.random.SeedSequence, optional
        Required when ``n_boot > 0``.

    Raises
    ------
    UnestimableError
        A probed cell has no rows, or its conditional mean is exactly 0 or 1
        (and ``pseudocount`` is 0).
    """
    d = _design(samples, target, conditioning)
    counts = [
        {"context": lab, "n": int(n1 + n0), "n1": int(n1)}
        for lab, n1, n0 in zip(d.labels, d.ones, d.zeros)
    ]
    for lab, n1, n0 in zip(d.labels, d.ones, d.zeros):
        if n1 + pseudocount <= 0 or n0 + pseudocount <= 0:
            cell = dict(lab)
            cell.update({samples.var_names[c]: 0 for c in d.conditioning})
            raise UnestimableError(
                f"cell {cell} has {int(n1 + n0)} rows with {int(n1)} ones for "
                f"{samples.var_names[d.target[-1]]!r}; conditional mean is not estimable",
                cell=cell,
            )
    value = float(_log_odds_sum(d.ones, d.zeros, d.signs, pseudocount))
    out = EstimatedInteraction(
        target=samples.names(d.target),
        value=value,
        conditioning=samples.names(d.conditioning),
        counts=counts,
    )
    if n_boot:
        reps = _replicates(d, n_boot, seed, pseudocount, threads)
        out.F = _sign_fraction(value, reps)
        out.n_boot = n_boot
        out.n_skipped = int(np.isnan(reps).sum())
    return out


def _replicates(d: _Design, n_boot, seed, alpha, threads):
    if seed is None:
        raise InvalidArgumentError("bootstrap needs an explicit seed")
    # row-wise resampling with replacement only moves mass between these cells
    # and the remainder, so a multinomial over them has the same distribution
    cell_counts = np.concatenate([d.ones, d.zeros]).astype(float)
    rest = d.m - cell_counts.sum()
    pvals = np.append(cell_counts, rest) / d.m
    n_cells = len(d.ones)
    n_blocks = -(-n_boot // BOOT_BLOCK)
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    # fixed-size blocks with their own child seeds: same result for any thread count
    children = root.spawn(n_blocks)
    sizes = [min(BOOT_BLOCK, n_boot - b * BOOT_BLOCK) for b in range(n_blocks)]

    def block(b):
        rng = np.random.default_rng(children[b])
        draws = rng.multinomial(d.m, pvals, size=sizes[b])
        return _log_odds_sum(draws[:, :n_cells], draws[:, n_cells:2 * n_cells], d.signs, alpha)

    if threads and threads > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(block, range(n_blocks)))
    else:
        parts = [block(b) for b in range(n_blocks)]
    return np.concatenate(parts)


def _sign_fraction(point, reps):
    valid = reps[~np.isnan(reps)]
    if valid.size == 0:
        raise SignificanceUnavailableError("every bootstrap resample was unestimable")
    # a zero on either side counts as a sign change
    differ = (np.sign(valid) != np.sign(point)) | (valid == 0) | (point == 0)
    return float(differ.mean())


def bootstrap_replicates(samples, target, conditioning=None, n_boot=1000, seed=None,
                         pseudocount=0.0, threads=1) -> np.ndarray:
    """Bootstrap replicate estimates (NaN where a resample is unestimable)."""
    d = _design(samples, target, conditioning)
    return _replicates(d, n_boot, seed, pseudocount, threads)


def bootstrap_sign_fraction(samples, target, conditioning=None, n_boot=1000, seed=None,
                            pseudocount=0.0, threads=1) -> float:
    """Fraction of bootstrap re-estimates whose sign differs from the point estimate."""
    point = estimate_mfi(samples, target, conditioning, pseudocount).value
    reps = bootstrap_replicates(samples, target, conditioning, n_boot, seed, pseudocount, threads)
    return _sign_fraction(point, reps)


# -- Markov blankets ------------------------------------------------------------


def _exact_cmi(p: np.ndarray) -> float:
    """Conditional MI (nats) of axes 0 and 1 given the remaining axes."""
    pz = p.sum(axis=(0, 1), keepdims=True)
    paz = p.sum(axis=1, keepdims=True)
    pbz = p.sum(axis=0, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = p * (np.log(p) + np.log(pz) - np.log(paz) - np.log(pbz))
    return float(np.nansum(np.where(p > 0, terms, 0.0)))


def g_test(counts: np.ndarray):
    """G statistic, degrees of freedom and p-value for ``axis0 ⫫ axis1 | rest``.

    Strata with no data contribute nothing; each stratum contributes
    ``(rows - 1) * (cols - 1)`` degrees of freedom counting only non-empty
    rows and columns.
    """
    c = counts.reshape(counts.shape[0], counts.shape[1], -1).astype(float)
    g, dof = 0.0, 0
    for z in range(c.shape[2]):
        tab = c[:, :, z]
        n = tab.sum()
        if n == 0:
            continue
        rows, cols = tab.sum(axis=1), tab.sum(axis=0)
        r, k = int((rows > 0).sum()), int((cols > 0).sum())
        dof += max(r - 1, 0) * max(k - 1, 0)
        expected = np.outer(rows, cols) / n
        mask = tab > 0
        g += 2.0 * float(np.sum(tab[mask] * np.log(tab[mask] / expected[mask])))
    pval = float(stats.chi2.sf(g, dof)) if dof > 0 else float("nan")
    return g, dof, pval


def discover_markov_blankets(data, alpha: float = 0.01, max_vars: int = 12, tol: float = 1e-12) -> dict:
    """Markov blankets by exhaustive pairwise conditional-independence tests.

    Each pair ``(A, B)`` is tested for ``A ⫫ B | rest``. Given a
    :class:`JointTable` the test is exact (conditional MI below ``tol``);
    given a :class:`SampleMatrix` it is a G-test at level ``alpha``. A pair
    without any testable stratum is kept as dependent, with a warning.

    Returns
    -------
    dict
        Variable name -> frozenset of neighbour names; symmetric.
    """
    if data.n > max_vars:
        raise InvalidArgumentError(f"exhaustive blanket discovery is limited to {max_vars} variables")
    if isinstance(data, JointTable):
        p = data.probs
    else:
        idx = np.ravel_multi_index(data.values.T, data.arities)
        p = np.bincount(idx, minlength=math.prod(data.arities)).reshape(data.arities)
    names = data.var_names
    blankets = {name: set() for name in names}
    for a, b in itertools.combinations(range(data.n), 2):
        rest = [i for i in range(data.n) if i not in (a, b)]
        arr = np.transpose(p, [a, b] + rest)
        if isinstance(data, JointTable):
            dependent = _exact_cmi(arr) > tol
        else:
            _, dof, pval = g_test(arr)
            if dof == 0:
                warnings.warn(
                    f"no testable stratum for {names[a]!r}, {names[b]!r}; keeping them connected",
                    stacklevel=2,
                )
                dependent = True
            else:
                dependent = pval < alpha
        if dependent:
            blankets[names[a]].add(names[b])
            blankets[names[b]].add(names[a])
    out = {k: frozenset(v) for k, v in blankets.items()}
    assert all(b in out[a] for a, nbrs in out.items() for b in nbrs), "blankets must be symmetric"
    return out


def prune_targets(blankets: dict, order: int) -> list[tuple]:
    """Subsets of ``order`` variables that are pairwise Markov-connected.

    Every other subset has a vanishing interaction.
    """
    names = list(blankets)
    keep = []
    for combo in itertools.combinations(names, order):
        if all(b in blankets[a] for a, b in itertools.combinations(combo, 2)):
            keep.append(combo)
    return keep


def underconditioning_bias(table: JointTable, target, omitted, kept=()) -> float:
    """Error in an interaction among ``target`` when ``omitted`` is left out of the context.

    Computed as the iterated finite difference over the target variables of
    ``pmi(target = x, omitted = 0 | kept = 0)``; it equals the interaction
    conditioned on ``omitted ∪ kept`` minus the one conditioned on ``kept`` only.
    """
    x, y, z = table.resolve(target), table.resolve(omitted), table.resolve(kept)
    if set(x) & set(y) or set(x) & set(z) or set(y) & set(z):
        raise InvalidArgumentError("target, omitted and kept sets must be disjoint")
    cond = table.marginalize(x + y + z).condition({table.var_names[i]: 0 for i in z})
    xy = cond.resolve(table.names(x) + table.names(y))
    px = cond.marginalize(table.names(x))
    py0 = cond.marginalize(table.names(y)).prob((0,) * len(y)) if y else 1.0
    if py0 <= 0:
        raise UnestimableError("omitted variables are never all zero in this context")
    k = len(x)
    terms = []
    for bits in itertools.product((0, 1), repeat=k):
        pxy = cond.marginalize(xy).prob(tuple(bits) + (0,) * len(y))
        pxx = px.prob(bits)
        if pxy <= 0 or pxx <= 0:
            raise UnestimableError(f"state {bits} of the target has zero probability in context")
        pmi = math.log(pxy) - math.log(pxx) - math.log(py0)
        sign = -1 if (k - sum(bits)) & 1 else 1
        terms.append(sign * pmi)
    return math.fsum(terms)
