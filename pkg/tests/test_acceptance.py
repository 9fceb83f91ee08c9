"""Acceptance suite: one test per criterion, each printing a single verdict line."""
import contextlib
import itertools
import math
import time

import numpy as np
import pytest

from conftest import boolean_difference_oracle, chain_table, random_positive_table, table_logp
from mobint.estimation import discover_markov_blankets, prune_targets, underconditioning_bias
from mobint.experiments import dags, dytri, gates, reproduce
from mobint.info import check_mi_bounds, entropy, entropy_from_mi
from mobint.interactions import mfi, surprisal_from_interactions
from mobint.table import from_ising, random_table

P, EPS = 0.23, 0.02
UNIT = 4 * math.log(P / EPS)


@pytest.fixture
def verdict(capsys):
    """Print ``PASS``/``FAIL`` for the criterion, then re-raise any failure."""

    @contextlib.contextmanager
    def check(number, title):
        start = time.perf_counter()
        state = {"detail": ""}
        try:
            yield state
        except BaseException as exc:
            reason = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
            with capsys.disabled():
                print(f"\n[criterion {number:2d}] FAIL  {title} ({time.perf_counter() - start:.2f} s): {reason}")
            raise
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] PASS  {title} ({time.perf_counter() - start:.2f} s) {state['detail']}")

    return check


def test_c01_gate_interactions(verdict):
    with verdict(1, "two-input gate I_ABC = {I, -I, I/2, -I/2, -I/2, I/2}") as v:
        want = dict(zip(gates.TWO_INPUT, (1, -1, 0.5, -0.5, -0.5, 0.5)))
        start = time.perf_counter()
        for g, coef in want.items():
            got = mfi(gates.gate_table(gates.GateSpec(g, P, EPS)), ["A", "B", "C"]).value
            assert abs(got - coef * UNIT) < 1e-9, f"{g}: {got} != {coef} I"
        elapsed = time.perf_counter() - start
        assert elapsed < 1.0, f"took {elapsed:.2f} s"
        v["detail"] = f"I = {UNIT:.6f}"


def test_c02_outeraction_columns(verdict):
    with verdict(2, "I*_A, J*_A, J*_C, J-bar* coefficient pattern") as v:
        expected = reproduce.load_expected()["gates"]["rows"]
        keys = ("Istar_A_over_I", "Jstar_A_over_I", "Jstar_C_over_I", "Jbar_over_I3")
        for g in gates.TWO_INPUT:
            row = gates.gate_row(g, P, EPS)
            for k in keys:
                assert abs(row[k] - expected[g][k]) < 1e-9, f"{g}.{k}: {row[k]} != {expected[g][k]}"
        # the OR row spelled out
        orow = gates.gate_row("OR", P, EPS)
        assert [round(orow[k], 12) for k in keys] == [0, -1, -0.75, -0.75]
        v["detail"] = f"{len(gates.TWO_INPUT) * len(keys)} coefficients"


def test_c03_gate_mutual_information(verdict):
    with verdict(3, "co-information at eps -> 0: -1 bit (XOR/XNOR), -0.189 bits (others)") as v:
        for g in gates.TWO_INPUT:
            got = gates.gate_row(g, P, EPS)["MI_ABC"]
            if g in ("XOR", "XNOR"):
                assert abs(got + 1.0) < 1e-9, f"{g}: {got}"
            else:
                assert abs(got + 0.189) <= 0.001, f"{g}: {got}"
        v["detail"] = f"AND: {gates.gate_row('AND', P, EPS)['MI_ABC']:.6f}"


def test_c04_ising_round_trip(verdict):
    with verdict(4, "Ising couplings recovered from Boltzmann tables, 200 sets") as v:
        start = time.perf_counter()
        worst = 0.0
        for k in range(200):
            rng = np.random.default_rng([4, k])
            n = int(rng.integers(1, 5))
            couplings = {sub: float(rng.uniform(-2, 2))
                         for r in range(1, n + 1) for sub in itertools.combinations(range(n), r)}
            t = from_ising(couplings, n)
            for sub, j in couplings.items():
                worst = max(worst, abs(mfi(t, sub).value - j))
        elapsed = time.perf_counter() - start
        assert worst < 1e-9, f"max error {worst:.3g}"
        assert elapsed < 10.0, f"took {elapsed:.2f} s"
        v["detail"] = f"max error {worst:.2g}"


def test_c05_mobius_vs_difference_oracle(verdict):
    with verdict(5, "Mobius-sum MFI equals iterated Boolean difference, 500 tables") as v:
        worst = 0.0
        for k in range(500):
            rng = np.random.default_rng([5, k])
            n = int(rng.integers(1, 5))
            t = random_positive_table(rng, n)
            logp = table_logp(t)
            for r in range(n + 1):
                for sub in itertools.combinations(range(n), r):
                    worst = max(worst, abs(mfi(t, sub).value - boolean_difference_oracle(logp, n, sub)))
        assert worst < 1e-9, f"max error {worst:.3g}"
        v["detail"] = f"max error {worst:.2g}"


def test_c06_inversion_round_trips(verdict):
    with verdict(6, "entropy-from-MI and log p from interactions, 500 tables") as v:
        worst_h = worst_s = 0.0
        for k in range(500):
            rng = np.random.default_rng([6, k])
            n = int(rng.integers(1, 5))
            t = random_positive_table(rng, n)
            for r in range(1, n + 1):
                for sub in itertools.combinations(range(n), r):
                    worst_h = max(worst_h, abs(entropy_from_mi(t, sub) - entropy(t, sub)))
            for r in range(n + 1):
                for sub in itertools.combinations(range(n), r):
                    state = tuple(int(i in sub) for i in range(n))
                    got = surprisal_from_interactions(t, sub)
                    worst_s = max(worst_s, abs(got - math.log(t.probs[state])))
        assert worst_h < 1e-9, f"entropy max error {worst_h:.3g}"
        assert worst_s < 1e-9, f"log p max error {worst_s:.3g}"
        v["detail"] = f"max errors {worst_h:.2g}, {worst_s:.2g}"


def test_c07_dyadic_triadic(verdict):
    with verdict(7, "dy/triadic sweep exponents (0,0), (-64,+64); Shannon measures equal") as v:
        start = time.perf_counter()
        rep = dytri.dytri_report(0.0)
        assert rep["dyadic"]["sweep_exponents"] == {"p": 0, "eps": 0}
        assert rep["triadic"]["sweep_exponents"] == {"p": -64, "eps": 64}
        assert rep["triadic"]["n_transitions"] == 216
        n_measures = 0
        for eps in (0.0, 1e-3):
            a = dytri.shannon_profile(dytri.dytri_table(dytri.DyTriSpec(dytri.DYADIC, eps)))
            b = dytri.shannon_profile(dytri.dytri_table(dytri.DyTriSpec(dytri.TRIADIC, eps)))
            assert a.keys() == b.keys()
            for key in a:
                assert abs(a[key] - b[key]) < 1e-9, f"{key} at eps={eps}: {a[key]} != {b[key]}"
            n_measures += len(a)
        numeric = dytri.dytri_report(1e-3)
        assert abs(numeric["triadic"]["sweep"] - 64 * numeric["log_eps_over_p"]) < 1e-9
        assert abs(numeric["dyadic"]["sweep"]) < 1e-9
        elapsed = time.perf_counter() - start
        assert elapsed < 5.0, f"took {elapsed:.2f} s"
        v["detail"] = f"{n_measures} Shannon measures compared"


def test_c08_markov_theory(verdict):
    with verdict(8, "pruned interactions vanish on exact DAG tables; bias identity on 200 tables") as v:
        tables = [chain_table()] + [dags.exact_dag_table(d) for d in dags.standard_dags().values()]
        n_pruned = 0
        for t in tables:
            mb = discover_markov_blankets(t)
            for r in (2, 3):
                kept = set(prune_targets(mb, r))
                for sub in itertools.combinations(t.var_names, r):
                    if sub not in kept:
                        n_pruned += 1
                        assert abs(mfi(t, list(sub)).value) < 1e-9, f"{sub}"
        assert n_pruned >= 4
        worst = 0.0
        for k in range(200):
            rng = np.random.default_rng([8, k])
            n = int(rng.integers(3, 5))
            t = random_positive_table(rng, n)
            perm = [int(i) for i in rng.permutation(n)]
            kx = int(rng.integers(1, n - 1))
            x, y, z = perm[:kx], perm[kx:kx + 1], perm[kx + 1:]
            direct = mfi(t, x, universe=x + y + z).value - mfi(t, x, universe=x + z).value
            worst = max(worst, abs(underconditioning_bias(t, x, y, z) - direct))
        assert worst < 1e-9, f"bias identity max error {worst:.3g}"
        v["detail"] = f"{n_pruned} pruned targets, bias max error {worst:.2g}"


def _sign(row):
    if row["F"] is None or row["F"] >= reproduce.SIGNIFICANCE:
        return "0"
    return "+" if row["interaction"] > 0 else "-"


def test_c09_dag_simulation(verdict):
    # seeds fixed before the first run
    seeds = (0, 1, 2)
    with verdict(9, "DAG estimates, M=100k, seeds 0-2: ranges and F<0.05 sign pattern") as v:
        start = time.perf_counter()
        expected = reproduce.load_expected()["dags"]["tables"]
        standard = dags.standard_dags()
        names = list(standard)
        summary = []
        for seed in seeds:
            for k, name in enumerate(names):
                rows = dags.dag_report(standard[name], m=100_000, n_boot=1000, seed=[seed, k])
                by = {"".join(map(str, r["genes"])): r for r in rows}
                if name == "chain":
                    i01 = by["01"]["interaction"]
                    assert 4.08 <= i01 <= 4.48, f"seed {seed}: chain I01 = {i01}"
                    summary.append(f"{i01:.3f}")
                if name == "multiplicative_collider":
                    i012 = by["012"]["interaction"]
                    assert 4.04 <= i012 <= 4.44, f"seed {seed}: multiplicative collider I012 = {i012}"
                    summary.append(f"{i012:.3f}")
                for ref in expected[name]:
                    if ref["F"] < reproduce.SIGNIFICANCE:
                        key = "".join(map(str, ref["genes"]))
                        want = "+" if ref["interaction"] > 0 else "-"
                        got = _sign(by[key])
                        assert got == want, f"seed {seed}: {name} {key} sign {got}, want {want}"
        elapsed = time.perf_counter() - start
        assert elapsed < 120.0, f"took {elapsed:.1f} s"
        v["detail"] = "chain/collider " + " ".join(summary)


def test_c10_mi_bounds(verdict):
    with verdict(10, "-min CMI <= MI(X,Y,Z) <= min MI(pair) on 1000 tables") as v:
        violations = 0
        for k in range(1000):
            rng = np.random.default_rng([10, k])
            arities = tuple(int(a) for a in rng.integers(2, 4, size=3))
            t = random_table(rng, arities, alpha=float(rng.choice([0.2, 1.0, 5.0])))
            violations += not check_mi_bounds(t, None).holds
        assert violations == 0, f"{violations} violations"
        v["detail"] = "0 violations"


def test_c11_determinism(verdict):
    with verdict(11, "reproduce output byte-identical across runs and thread counts") as v:
        runs = [reproduce.reproduce(seed=0, threads=t)["files"] for t in (1, 4, 1)]
        assert runs[0].keys() == runs[1].keys() == runs[2].keys()
        for name in runs[0]:
            assert runs[0][name] == runs[1][name] == runs[2][name], f"{name} differs"
        v["detail"] = f"{len(runs[0])} files x 3 runs"
