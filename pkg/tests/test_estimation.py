import itertools
import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import chain_table, random_positive_table
from mobint.errors import (
    InvalidArgumentError,
    InvalidTableError,
    SignificanceUnavailableError,
    UnestimableError,
)
from mobint.estimation import (
    SampleMatrix,
    _sign_fraction,
    bootstrap_replicates,
    bootstrap_sign_fraction,
    discover_markov_blankets,
    estimate_mfi,
    g_test,
    prune_targets,
    underconditioning_bias,
)
from mobint.experiments.dags import CausalDag, exact_dag_table, simulate_dag, standard_dags
from mobint.interactions import mfi
from mobint.table import JointTable, independent_table


def sample_table(table, m, rng):
    """Draw ``m`` rows from ``table``."""
    flat = rng.choice(table.probs.size, size=m, p=table.flat())
    return SampleMatrix(np.column_stack(np.unravel_index(flat, table.arities)), var_names=table.var_names)


def random_dag_table(rng, n):
    """Exact table of a random binary DAG (nodes in topological order 0..n-1)."""
    parents = {v: [u for u in range(v) if rng.random() < 0.5] for v in range(n)}
    cpts = {v: rng.uniform(0.05, 0.95, size=2 ** len(parents[v])) for v in range(n)}
    p = np.zeros((2,) * n)
    for state in itertools.product((0, 1), repeat=n):
        pr = 1.0
        for v in range(n):
            code = sum(state[u] << k for k, u in enumerate(parents[v]))
            q = cpts[v][code]
            pr *= q if state[v] else 1 - q
        p[state] = pr
    return JointTable(p, var_names=[str(i) for i in range(n)])


class TestSampleMatrix:
    def test_arity_inference(self):
        s = SampleMatrix([[0, 2], [1, 0]])
        assert s.arities == (2, 3) and s.m == 2

    @pytest.mark.parametrize("values", [[[0, 1], [0, -1]], [[0.5, 1]], np.zeros((0, 2))])
    def test_rejects(self, values):
        with pytest.raises(InvalidTableError):
            SampleMatrix(values)

    def test_value_above_arity(self):
        with pytest.raises(InvalidTableError):
            SampleMatrix([[0, 2]], arities=(2, 2))

    def test_empirical_table(self):
        s = SampleMatrix([[0, 0], [0, 1], [1, 1], [1, 1]])
        np.testing.assert_allclose(s.empirical_table().flat(), [0.25, 0.25, 0.0, 0.5])

    @pytest.mark.parametrize("delim", [",", "\t"])
    def test_csv_round_trip(self, tmp_path, rng, delim):
        s = SampleMatrix(rng.integers(0, 2, size=(20, 3)), var_names=["a", "b", "c"])
        path = tmp_path / "s.csv"
        s.to_csv(path, delimiter=delim)
        back = SampleMatrix.from_csv(path)
        np.testing.assert_array_equal(back.values, s.values)
        assert back.var_names == s.var_names

    def test_csv_malformed(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n0,x\n")
        with pytest.raises(InvalidTableError):
            SampleMatrix.from_csv(path)
        path.write_text("a,b\n0\n")
        with pytest.raises(InvalidTableError):
            SampleMatrix.from_csv(path)


class TestEstimate:
    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10 ** 6), n=st.integers(1, 4))
    def test_plug_in_equivalence(self, seed, n):
        rng = np.random.default_rng(seed)
        s = sample_table(random_positive_table(rng, n), 5000, rng)
        emp = s.empirical_table()
        for r in range(1, n + 1):
            for sub in itertools.combinations(range(n), r):
                try:
                    want = mfi(emp, sub).value
                except ArithmeticError:
                    continue
                assert estimate_mfi(s, list(sub)).value == pytest.approx(want, abs=1e-9)

    def test_pair_within_sampling_error(self, rng):
        t = JointTable([[0.4, 0.1], [0.1, 0.4]])
        est = estimate_mfi(sample_table(t, 100_000, rng), [0, 1])
        # delta-method sd is about sqrt(4 * 1/(0.1 * M) + ...) ~ 0.02
        assert est.value == pytest.approx(math.log(16), abs=0.1)

    def test_counts_reported(self):
        s = SampleMatrix([[0, 0], [0, 1], [1, 0], [1, 1], [1, 1]])
        est = estimate_mfi(s, [0, 1])
        assert est.counts == [{"context": {"0": 0}, "n": 2, "n1": 1}, {"context": {"0": 1}, "n": 3, "n1": 2}]
        assert est.value == pytest.approx(math.log(2))
        assert est.to_dict()["unit"] == "nats"

    def test_explicit_conditioning(self, rng):
        t = random_positive_table(rng, 3)
        s = sample_table(t, 2000, rng)
        marg = SampleMatrix(s.values[:, :2], var_names=s.var_names[:2])
        assert estimate_mfi(s, [0, 1], conditioning=[]).value == pytest.approx(
            mfi(marg.empirical_table(), [0, 1]).value, abs=1e-9)

    def test_unestimable_names_cell(self):
        s = SampleMatrix([[0, 0], [0, 1], [1, 1], [1, 1]])
        with pytest.raises(UnestimableError) as info:
            estimate_mfi(s, [0, 1])
        assert info.value.cell == {"0": 1}

    def test_pseudocount_rescues(self):
        s = SampleMatrix([[0, 0], [0, 1], [1, 1], [1, 1]])
        est = estimate_mfi(s, [0, 1], pseudocount=0.5)
        want = math.log(2.5 / 0.5) - math.log(1.5 / 1.5)
        assert est.value == pytest.approx(want)

    def test_overlap_rejected(self, rng):
        s = SampleMatrix(rng.integers(0, 2, size=(10, 3)))
        with pytest.raises(InvalidArgumentError):
            estimate_mfi(s, [0, 1], conditioning=[1])

    def test_non_binary_target(self):
        s = SampleMatrix([[0, 2], [1, 0], [1, 1], [0, 1]])
        with pytest.raises(InvalidArgumentError):
            estimate_mfi(s, [0, 1])

    def test_chain_dag_pair(self):
        s = simulate_dag(standard_dags()["chain"], 100_000, seed=3)
        est = estimate_mfi(s, [0, 1], n_boot=200, seed=4)
        assert est.value == pytest.approx(4.281, abs=0.2)
        assert est.F == 0.0


class TestBootstrap:
    def test_strong_effect(self, rng):
        t = JointTable([[0.4, 0.1], [0.1, 0.4]])
        assert bootstrap_sign_fraction(sample_table(t, 2000, rng), [0, 1], n_boot=500, seed=1) < 0.01

    def test_thread_independent(self, rng):
        s = sample_table(random_positive_table(rng, 3), 3000, rng)
        a = bootstrap_replicates(s, [0, 1, 2], n_boot=1000, seed=9, threads=1)
        b = bootstrap_replicates(s, [0, 1, 2], n_boot=1000, seed=9, threads=4)
        np.testing.assert_array_equal(a, b)
        assert a.shape == (1000,)

    def test_seed_required(self, rng):
        with pytest.raises(InvalidArgumentError):
            estimate_mfi(SampleMatrix(rng.integers(0, 2, size=(50, 2))), [0, 1], n_boot=10)

    def test_skipped_counted(self):
        # sparse cell: many resamples lose it and are skipped
        rows = [[0, 0]] * 30 + [[0, 1]] * 30 + [[1, 0]] * 30 + [[1, 1]]
        est = estimate_mfi(SampleMatrix(rows), [0, 1], n_boot=400, seed=2)
        assert est.n_skipped > 0 and est.n_boot == 400
        assert 0.0 <= est.F <= 1.0

    def test_ties_and_unavailable(self):
        assert _sign_fraction(1.0, np.array([1.0, 0.0, -1.0, np.nan])) == pytest.approx(2 / 3)
        assert _sign_fraction(0.0, np.array([1.0, 2.0])) == 1.0
        with pytest.raises(SignificanceUnavailableError):
            _sign_fraction(1.0, np.full(5, np.nan))

    def test_null_calibration(self):
        # For a true zero F is close to Uniform[0, 1/2], so P(F >= 0.05) is about 0.9.
        trials, inside = 120, 0
        for k in range(trials):
            rng = np.random.default_rng([2024, k])
            s = SampleMatrix(rng.integers(0, 2, size=(100_000, 3)))
            f = estimate_mfi(s, [0, 1, 2], n_boot=200, seed=k).F
            inside += 0.05 <= f <= 0.95
        frac = inside / trials
        band = 3 * math.sqrt(0.9 * 0.1 / trials)
        assert 0.9 - band <= frac <= 0.9 + band


class TestBlankets:
    def test_chain(self):
        mb = discover_markov_blankets(chain_table())
        assert mb == {"A": {"B"}, "B": {"A", "C"}, "C": {"B"}}

    def test_independent(self):
        mb = discover_markov_blankets(independent_table([[0.3, 0.7], [0.5, 0.5], [0.9, 0.1]]))
        assert all(not v for v in mb.values())

    def test_multiplicative_collider(self):
        dag = CausalDag("c", ("A", "C", "B"), (("A", "C"), ("B", "C")), "multiplicative")
        mb = discover_markov_blankets(exact_dag_table(dag))
        assert mb["A"] == {"B", "C"}

    def test_chain_samples(self, rng):
        mb = discover_markov_blankets(sample_table(chain_table(), 20_000, rng))
        assert mb["A"] == {"B"} and mb["C"] == {"B"}

    def test_no_testable_stratum_warns(self):
        s = SampleMatrix([[0, 0], [0, 0]], arities=(2, 2))
        with pytest.warns(UserWarning):
            mb = discover_markov_blankets(s)
        assert mb["0"] == {"1"}

    def test_too_many(self):
        with pytest.raises(InvalidArgumentError):
            discover_markov_blankets(SampleMatrix(np.zeros((2, 13), dtype=int)))

    def test_g_test_independent_counts(self):
        g, dof, p = g_test(np.array([[25, 25], [25, 25]]))
        assert g == pytest.approx(0.0) and dof == 1 and p == pytest.approx(1.0)


class TestPrune:
    def test_chain_order_three(self):
        mb = discover_markov_blankets(chain_table())
        assert prune_targets(mb, 3) == []
        assert prune_targets(mb, 2) == [("A", "B"), ("B", "C")]

    def test_complete(self):
        full = {"A": {"B", "C"}, "B": {"A", "C"}, "C": {"A", "B"}}
        assert prune_targets(full, 3) == [("A", "B", "C")]

    def test_empty(self):
        assert prune_targets({"A": set(), "B": set()}, 2) == []

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 10 ** 6), n=st.integers(2, 4))
    def test_soundness(self, seed, n):
        t = random_dag_table(np.random.default_rng(seed), n)
        mb = discover_markov_blankets(t)
        for r in range(2, n + 1):
            kept = set(prune_targets(mb, r))
            for sub in itertools.combinations(t.var_names, r):
                if sub not in kept:
                    assert abs(mfi(t, list(sub)).value) < 1e-9


class TestUnderconditioning:
    @staticmethod
    def direct(t, x, y, z):
        return mfi(t, x, universe=x + y + z).value - mfi(t, x, universe=x + z).value

    def test_random_tables(self):
        rng = np.random.default_rng(77)
        for _ in range(200):
            t = random_positive_table(rng, 3)
            x, y, z = [[0], [1], [2]] if rng.random() < 0.5 else [[0, 1], [2], []]
            assert underconditioning_bias(t, x, y, z) == pytest.approx(self.direct(t, x, y, z), abs=1e-9)

    def test_independent_omitted(self, rng):
        # Y independent of (X, Z)
        xz = random_positive_table(rng, 2)
        p = xz.probs[:, None, :] * np.array([0.3, 0.7])[None, :, None]
        t = JointTable(p)
        assert underconditioning_bias(t, [0], [1], [2]) == pytest.approx(0.0, abs=1e-12)

    def test_chain(self):
        t = chain_table()
        want = mfi(t, ["A"], universe=["A", "B"]).value - mfi(t, ["A"], universe=["A"]).value
        assert underconditioning_bias(t, ["A"], ["B"]) == pytest.approx(want, abs=1e-12)
        assert abs(want) > 0.1

    def test_disjoint(self, rng):
        with pytest.raises(InvalidArgumentError):
            underconditioning_bias(random_positive_table(rng, 3), [0], [0])

    def test_zero_context(self):
        t = JointTable([0.0, 0.5, 0.0, 0.5])
        with pytest.raises(UnestimableError):
            underconditioning_bias(t, [0], [1])
