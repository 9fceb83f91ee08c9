import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import chain_table
from mobint.errors import (
    DegenerateDistributionError,
    InvalidParamsError,
    InvalidTableError,
    ZeroProbabilityError,
)
from mobint.interactions import mfi
from mobint.table import (
    JointTable,
    condition,
    from_ising,
    independent_table,
    marginalize,
    normalize,
    random_table,
    surprisal,
)


class TestConstruction:
    def test_flat_binary_inference(self):
        t = JointTable([0.1, 0.2, 0.3, 0.4])
        assert t.arities == (2, 2) and t.var_names == ("0", "1")
        # last variable fastest
        assert t.prob((0, 1)) == 0.2 and t.prob((1, 0)) == 0.3

    @pytest.mark.parametrize("probs", [[0.5, 0.6], [-0.1, 1.1], [float("nan"), 1.0], [0.2, 0.2, 0.6]])
    def test_rejects_invalid(self, probs):
        with pytest.raises(InvalidTableError):
            JointTable(probs)

    def test_rejects_duplicate_names(self):
        with pytest.raises(InvalidTableError):
            JointTable([0.25] * 4, var_names=["A", "A"])

    def test_immutable(self):
        t = JointTable([0.5, 0.5])
        with pytest.raises(ValueError):
            t.probs[0] = 1.0

    def test_state_cap(self):
        with pytest.raises(InvalidTableError):
            JointTable(np.ones(1), arities=(2,) * 21)


class TestNormalize:
    @pytest.mark.parametrize(
        "weights,want",
        [([2, 2], [0.5, 0.5]), ([1, 1, 1, 1], [0.25] * 4), ([3, 1], [0.75, 0.25])],
    )
    def test_examples(self, weights, want):
        t = normalize(np.array(weights, dtype=float))
        np.testing.assert_allclose(t.flat(), want)

    def test_all_zero(self):
        with pytest.raises(DegenerateDistributionError):
            normalize([0.0, 0.0])


class TestMarginalize:
    def test_independent_bits(self):
        t = independent_table([[0.5, 0.5], [0.5, 0.5]], var_names=["X", "Y"])
        np.testing.assert_allclose(marginalize(t, ["X"]).flat(), [0.5, 0.5])

    def test_xor_pair_uniform(self):
        p = np.zeros((2, 2, 2))
        for a in (0, 1):
            for b in (0, 1):
                p[a, b, a ^ b] = 0.25
        t = JointTable(p, var_names="ABC")
        np.testing.assert_allclose(t.marginalize(["A", "B"]).flat(), [0.25] * 4)

    def test_identity_and_empty(self, rng):
        t = random_table(rng, (2, 3, 2))
        np.testing.assert_array_equal(t.marginalize(None).probs, t.probs)
        e = t.marginalize([])
        assert e.n == 0 and e.prob(()) == pytest.approx(1.0)

    def test_order_preserved(self, rng):
        t = random_table(rng, (2, 3, 4), var_names="XYZ")
        m = t.marginalize(["Z", "X"])
        assert m.var_names == ("Z", "X") and m.arities == (4, 2)
        np.testing.assert_allclose(m.probs, t.probs.sum(axis=1).T)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10 ** 6), keep1=st.sets(st.integers(0, 3)), keep2=st.sets(st.integers(0, 3)))
    def test_path_independence(self, seed, keep1, keep2):
        t = random_table(np.random.default_rng(seed), (2, 2, 3, 2), var_names="ABCD")
        names = "ABCD"
        k1 = [names[i] for i in sorted(keep1)]
        both = [names[i] for i in sorted(keep1 & keep2)]
        two_step = t.marginalize(k1).marginalize(both)
        np.testing.assert_allclose(two_step.probs, t.marginalize(both).probs, atol=1e-15)


class TestCondition:
    def test_chain_given_b(self):
        t = chain_table()
        c = condition(t, {"B": 0})
        p = t.probs[:, 0, :]
        np.testing.assert_allclose(c.probs, p / p.sum())
        assert c.var_names == ("A", "C")

    def test_identity(self):
        t = chain_table()
        assert condition(t, {}) is t

    def test_impossible(self):
        t = JointTable([0.5, 0.0, 0.0, 0.5])
        with pytest.raises(ZeroProbabilityError):
            t.condition({"0": 0, "1": 1})


class TestSurprisal:
    def test_uniform(self):
        t = JointTable([0.25] * 4)
        assert surprisal(t, (1, 0)) == pytest.approx(math.log(4))

    def test_certain(self):
        assert JointTable([1.0, 0.0]).surprisal((0,)) == 0.0

    def test_zero_policy(self):
        t = JointTable([1.0, 0.0])
        assert t.surprisal((1,)) == math.inf
        assert t.surprisal((1,), floor=1e-12) == pytest.approx(-math.log(1e-12))
        with pytest.raises(ZeroProbabilityError):
            t.log_prob((1,))


class TestIsing:
    def test_zero_couplings_uniform(self):
        np.testing.assert_allclose(from_ising({}, 3).flat(), [1 / 8] * 8)

    def test_single_field(self):
        t = from_ising({(0,): 0.9}, 1)
        assert t.prob((1,)) / t.prob((0,)) == pytest.approx(math.exp(0.9))

    def test_pair_coupling(self):
        t = from_ising({(0, 1): 0.7}, 2)
        assert mfi(t, [0, 1]).value == pytest.approx(0.7, abs=1e-12)

    def test_out_of_range(self):
        with pytest.raises(InvalidParamsError):
            from_ising({(0, 3): 1.0}, 3)
        with pytest.raises(InvalidParamsError):
            from_ising({(): 1.0}, 2)


class TestSerialisation:
    def test_round_trip_exact(self, rng, tmp_path):
        t = random_table(rng, (2, 3, 2), var_names=["a", "b", "c"])
        t2 = JointTable.from_json(t.to_json())
        np.testing.assert_array_equal(t.probs, t2.probs)
        assert t2.var_names == t.var_names and t2.arities == t.arities
        path = tmp_path / "t.json"
        t.save(path)
        np.testing.assert_array_equal(JointTable.load(path).probs, t.probs)

    @pytest.mark.parametrize("text", ["not json", "[1, 2]", '{"vars": ["a"]}', '{"probs": [0.3, 0.3]}'])
    def test_malformed(self, text):
        with pytest.raises(InvalidTableError):
            JointTable.from_json(text)
