"""Command-line interface.

Every subcommand validates its inputs before computing anything and writes
JSON lines (one object per result) to stdout or ``--out``. Files are written
to a temporary name and renamed, so a failed run never leaves partial output.

Exit codes: 0 success, 1 acceptance/consistency failure, 2 malformed input,
3 zero-probability state or unestimable cell.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

from . import estimation, info, interactions
from .errors import (
    InconsistencyError,
    InvalidArgumentError,
    MobintError,
    SignificanceUnavailableError,
    UnestimableError,
    ZeroProbabilityError,
)
from .experiments import dags as dag_mod
from .experiments import dytri as dytri_mod
from .experiments import gates as gate_mod
from .experiments import reproduce as repro_mod
from .lattice import Lattice, indices_of, mask_of
from .table import JointTable

log = logging.getLogger("mobint")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_ZERO = 0, 1, 2, 3
SEED_ENV = "HOI_SEED"


# -- helpers --------------------------------------------------------------------


def parse_subset(text: str) -> list:
    """``"A,B,C"`` -> ``["A", "B", "C"]``; the empty string is the empty set."""
    text = text.strip()
    return [t.strip() for t in text.split(",")] if text else []


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def to_line(obj) -> str:
    # json uses repr for floats: shortest round-trip decimal
    return json.dumps(_clean(obj), allow_nan=False)


def atomic_write(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(args, records) -> None:
    text = "".join(to_line(r) + "\n" for r in records)
    if getattr(args, "out", None):
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        raise InvalidArgumentError(f"a seed is required: pass --seed or set {SEED_ENV}")
    try:
        return int(env)
    except ValueError:
        raise InvalidArgumentError(f"{SEED_ENV}={env!r} is not an integer") from None


def load_source(args):
    """Return ``(table, samples)``; exactly one of ``--dist`` / ``--samples`` is given."""
    if args.dist:
        return JointTable.load(args.dist), None
    samples = estimation.SampleMatrix.from_csv(args.samples)
    return samples.empirical_table(), samples


def _add_source(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--dist", help="JSON distribution file")
    g.add_argument("--samples", help="headered CSV/TSV of integer samples")


def _log_base(text: str) -> float:
    if text in ("e", "nat", "nats"):
        return math.e
    base = float(text)
    if base <= 0 or base == 1:
        raise argparse.ArgumentTypeError("log base must be positive and not 1")
    return base


# -- subcommands ----------------------------------------------------------------


def cmd_info(args) -> int:
    table, _ = load_source(args)
    base = args.log_base
    unit = info.unit_name(base)
    requests = (
        [("entropy", s) for s in args.entropy]
        + [("mi", s) for s in args.mi]
        + [("dual_mi", s) for s in args.dual_mi]
        + [("total_correlation", s) for s in args.tc]
    )
    if not requests:
        everything = ",".join(table.var_names)
        requests = [("entropy", everything), ("mi", everything)]
    universe = parse_subset(args.universe) if args.universe is not None else None
    # validate every subset before computing
    parsed = [(q, table.names(table.resolve(parse_subset(s)))) for q, s in requests]
    if universe is not None:
        table.resolve(universe)
    out = []
    for quantity, subset in parsed:
        context = None
        if quantity == "entropy":
            value = info.entropy(table, subset, base)
        elif quantity == "mi":
            value = info.mutual_information(table, subset, base)
        elif quantity == "dual_mi":
            value = info.dual_mutual_information(table, subset, universe, base)
            context = {"universe": universe or list(table.var_names)}
        else:
            value = info.total_correlation(table, subset, base)
        out.append(info.InfoReport(subset, quantity, value, unit, context).to_dict())
    emit(args, out)
    return EXIT_OK


def _targets(args, table):
    if args.target:
        return [parse_subset(t) for t in args.target], True
    if args.order is None:
        raise InvalidArgumentError("give --target or --order")
    import itertools

    pool = parse_subset(args.universe) if args.universe else list(table.var_names)
    return [list(c) for c in itertools.combinations(pool, args.order)], False


def cmd_mfi(args) -> int:
    table, samples = load_source(args)
    universe = parse_subset(args.universe) if args.universe is not None else None
    if args.cat:
        return _cmd_categorical(args, table, universe)
    targets, explicit = _targets(args, table)
    for t in targets:
        table.resolve(t)
    conditioning = parse_subset(args.conditioning) if args.conditioning is not None else None
    seed = resolve_seed(args) if (samples is not None and args.boot) else None
    pseudocount = 0.5 if args.jeffreys else args.pseudocount
    allowed = None
    if args.blankets:
        source = samples if samples is not None else table
        blankets = estimation.discover_markov_blankets(source, alpha=args.alpha)
        allowed = {frozenset(c) for k in {len(t) for t in targets}
                   for c in estimation.prune_targets(blankets, k)}
    out = []
    for target in targets:
        names = table.names(table.resolve(target))
        pruned = allowed is not None and len(names) > 1 and frozenset(names) not in allowed
        if pruned and not explicit:
            log.info("skipping %s: not Markov-connected", names)
            continue
        if samples is None:
            if args.outeraction:
                rep = interactions.outeraction(table, names, universe, eps=args.eps)
            else:
                rep = interactions.mfi(table, names, universe, eps=args.eps)
            if pruned:
                rep.annotation = "theorem-zero"
            out.append(rep.to_dict(breakdown=args.breakdown))
        else:
            est = estimation.estimate_mfi(samples, names, conditioning, pseudocount,
                                          n_boot=args.boot, seed=seed, threads=args.threads)
            if pruned:
                est.annotation = "theorem-zero"
            out.append(est.to_dict())
    emit(args, out)
    return EXIT_OK


def _cmd_categorical(args, table, universe):
    if args.samples:
        raise InvalidArgumentError("categorical interactions need --dist")
    uni = universe or list(table.var_names)
    if args.sweep:
        triple = parse_subset(args.target[0]) if args.target else uni
        res = interactions.categorical_sweep(table, triple, eps=args.eps)
        rec = {"quantity": "categorical_sweep", "target": table.names(table.resolve(triple)), "unit": "nats"}
        rec.update(res.to_dict())
        emit(args, [rec])
        return EXIT_OK
    if not args.transition:
        raise InvalidArgumentError("--cat needs --transition lo:hi,... or --sweep")
    pairs = []
    for part in parse_subset(args.transition):
        lo, _, hi = part.partition(":")
        try:
            pairs.append((int(lo), int(hi)))
        except ValueError:
            raise InvalidArgumentError(f"bad transition {part!r}, expected lo:hi") from None
    value = interactions.categorical_interaction(table, pairs, uni, eps=args.eps)
    emit(args, [{"quantity": "categorical_mfi", "target": uni, "transition": pairs,
                 "value": value, "unit": "nats"}])
    return EXIT_OK


def _dag_from_args(args):
    if args.edges:
        edges = []
        for part in parse_subset(args.edges):
            a, sep, b = part.partition(">")
            if not sep:
                raise InvalidArgumentError(f"bad edge {part!r}, expected parent>child")
            edges.append((int(a), int(b)))
        n = args.nodes or 1 + max(max(e) for e in edges)
        return dag_mod.CausalDag("custom", tuple(range(n)), tuple(edges), args.dynamics,
                                 args.p, args.sigma)
    dags = dag_mod.standard_dags(args.p, args.sigma)
    return dags[args.dag]


def cmd_simulate(args) -> int:
    dag = _dag_from_args(args)
    seed = resolve_seed(args)
    samples = dag_mod.simulate_dag(dag, args.m, seed)
    if args.out:
        fd, tmp = tempfile.mkstemp(dir=Path(args.out).resolve().parent, suffix=".tmp")
        os.close(fd)
        try:
            samples.to_csv(tmp)
            os.replace(tmp, args.out)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
    else:
        import csv

        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(samples.var_names)
        writer.writerows(samples.values.tolist())
    return EXIT_OK


def cmd_gates(args) -> int:
    gates = args.gate or list(gate_mod.GATES)
    for g in gates:
        if g not in gate_mod.GATES:
            raise InvalidArgumentError(f"unknown gate {g!r}")
    rows = gate_mod.gate_report(gates, args.p, args.eps, base=args.log_base)
    if args.format == "text":
        two = [r for r in rows if r["gate"] in gate_mod.TWO_INPUT]
        three = [r for r in rows if r["gate"] in gate_mod.THREE_INPUT]
        text = ""
        if two:
            text += repro_mod.render(two, ["gate", "MI_ABC", "I_ABC", "Istar_A", "Jstar_A", "Jstar_C", "Jbar"])
        if three:
            text += repro_mod.render(three, ["gate", "MI_ABCD", "I_ABCD"])
        _write_text(args, text)
    else:
        emit(args, rows)
    return EXIT_OK


def _write_text(args, text):
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def cmd_dytri(args) -> int:
    if args.emit_table:
        table = dytri_mod.dytri_table(dytri_mod.DyTriSpec(args.emit_table, args.eps))
        _write_text(args, table.to_json() + "\n")
        return EXIT_OK
    rep = dytri_mod.dytri_report(args.eps)
    if args.format == "text":
        rows = [{"distribution": w, "p_exp": rep[w]["sweep_exponents"]["p"],
                 "eps_exp": rep[w]["sweep_exponents"]["eps"], "corner": rep[w]["corner"],
                 "sweep": rep[w]["sweep"]} for w in (dytri_mod.DYADIC, dytri_mod.TRIADIC)]
        _write_text(args, repro_mod.render(rows, ["distribution", "p_exp", "eps_exp", "corner", "sweep"]))
    else:
        emit(args, [rep])
    return EXIT_OK


def cmd_blankets(args) -> int:
    if args.dist:
        source = JointTable.load(args.dist)
    else:
        source = estimation.SampleMatrix.from_csv(args.samples)
    blankets = estimation.discover_markov_blankets(source, alpha=args.alpha, max_vars=args.max_vars)
    out = [{"variable": v, "blanket": sorted(b)} for v, b in blankets.items()]
    if args.order:
        out.append({"order": args.order,
                    "targets": [list(t) for t in estimation.prune_targets(blankets, args.order)]})
    emit(args, out)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    seed = resolve_seed(args)
    if args.m < 10 or args.n_boot < 0:
        raise InvalidArgumentError("need --m >= 10 and --n-boot >= 0")
    result = repro_mod.reproduce(m=args.m, n_boot=args.n_boot, seed=seed,
                                 threads=args.threads, dytri_eps=args.dytri_eps)
    out = Path(args.out)
    for name, text in result["files"].items():
        atomic_write(out / name, text)
    failures = result["checks"].failures
    sys.stdout.write(result["files"]["fig4.txt"])
    n = len(result["checks"].entries)
    print(f"{n - len(failures)}/{n} checks passed; outputs in {out}")
    for f in failures:
        print(f"FAIL {f['check']}: got {f['got']!r}, want {f['want']!r} +/- {f['tol']}", file=sys.stderr)
    return EXIT_FAIL if failures else EXIT_OK


def _parse_element(lat: Lattice, text: str):
    parts = parse_subset(text)
    if lat.is_boolean_like:
        return mask_of(int(p) for p in parts)
    return tuple(int(p) for p in parts)


def _show_element(lat: Lattice, x):
    return list(indices_of(x)) if lat.is_boolean_like else list(x)


def cmd_mobius(args) -> int:
    if args.lattice == "chain":
        if not args.arities:
            raise InvalidArgumentError("chain lattices need --arities")
        lat = Lattice.chain_product(*[int(a) for a in parse_subset(args.arities)])
    else:
        if args.n is None:
            raise InvalidArgumentError(f"{args.lattice} lattices need --n")
        lat = Lattice.boolean(args.n) if args.lattice == "boolean" else Lattice.dual_boolean(args.n)
    top = lat.validate(_parse_element(lat, args.top)) if args.top is not None else lat.top
    if args.bottom is not None:
        x = lat.validate(_parse_element(lat, args.bottom))
        emit(args, [{"lattice": lat.kind, "x": _show_element(lat, x), "y": _show_element(lat, top),
                     "mu": lat.mobius(x, top)}])
        return EXIT_OK
    emit(args, [{"lattice": lat.kind, "x": _show_element(lat, x), "y": _show_element(lat, top),
                 "rank": lat.rank(x), "mu": lat.mobius(x, top)} for x in lat.downset(top)])
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mobint", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_help="write output here instead of stdout"):
        p.add_argument("--out", help=out_help)
        p.add_argument("--seed", type=int, help=f"random seed (falls back to ${SEED_ENV})")
        p.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
        p.add_argument("--log-base", type=_log_base, default=2.0,
                       help="logarithm base for entropy-type measures: 2 (bits), e, 10, ...")

    p = sub.add_parser("info", help="entropy, co-information, dual MI, total correlation")
    _add_source(p)
    p.add_argument("--entropy", action="append", default=[], metavar="VARS")
    p.add_argument("--mi", action="append", default=[], metavar="VARS")
    p.add_argument("--dual-mi", action="append", default=[], metavar="VARS")
    p.add_argument("--tc", action="append", default=[], metavar="VARS")
    p.add_argument("--universe", metavar="VARS", help="context for --dual-mi (default all)")
    common(p)
    p.set_defaults(func=cmd_info)

    p = sub.add_parser("mfi", help="model-free interactions, exact or estimated")
    _add_source(p)
    p.add_argument("--target", action="append", metavar="VARS")
    p.add_argument("--order", type=int, help="all targets of this size")
    p.add_argument("--universe", metavar="VARS")
    p.add_argument("--conditioning", metavar="VARS", help="samples only; default all other variables")
    p.add_argument("--eps", type=float, help="substitute probability for zero states (exact mode)")
    p.add_argument("--outeraction", action="store_true", help="compute the dual interaction")
    p.add_argument("--breakdown", action="store_true", help="include the signed log-probability terms")
    p.add_argument("--cat", action="store_true", help="categorical interaction (needs --transition or --sweep)")
    p.add_argument("--transition", help="per-variable lo:hi, e.g. 0:3,0:3,0:3")
    p.add_argument("--sweep", action="store_true", help="sum over all increasing transitions")
    p.add_argument("--boot", type=int, default=0, metavar="N", help="bootstrap resamples for F")
    p.add_argument("--pseudocount", type=float, default=0.0)
    p.add_argument("--jeffreys", action="store_true", help="shorthand for --pseudocount 0.5")
    p.add_argument("--blankets", action="store_true", help="prune targets by Markov blankets")
    p.add_argument("--alpha", type=float, default=0.01, help="CI-test level for --blankets")
    common(p)
    p.set_defaults(func=cmd_mfi)

    p = sub.add_parser("simulate", help="sample a binary causal DAG to CSV")
    p.add_argument("--dag", choices=list(dag_mod.standard_dags()), default="chain")
    p.add_argument("--edges", help="custom graph, e.g. 0>1,2>1 (overrides --dag)")
    p.add_argument("--nodes", type=int, help="node count for --edges")
    p.add_argument("--dynamics", choices=[dag_mod.ADDITIVE, dag_mod.MULTIPLICATIVE], default=dag_mod.ADDITIVE)
    p.add_argument("--m", type=int, default=100_000)
    p.add_argument("--p", type=float, default=0.5, help="root Bernoulli parameter")
    p.add_argument("--sigma", type=float, default=0.4)
    common(p, "CSV path (default stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gates", help="noisy logic-gate table")
    p.add_argument("--gate", action="append", choices=list(gate_mod.GATES))
    p.add_argument("--p", type=float, default=0.23)
    p.add_argument("--eps", type=float, default=0.02)
    p.add_argument("--format", choices=["json", "text"], default="json")
    common(p)
    p.set_defaults(func=cmd_gates)

    p = sub.add_parser("dytri", help="dyadic/triadic interactions")
    p.add_argument("--eps", type=float, default=0.0, help="off-support probability (0 = symbolic)")
    p.add_argument("--emit-table", choices=[dytri_mod.DYADIC, dytri_mod.TRIADIC],
                   help="write the distribution as JSON instead of the report")
    p.add_argument("--format", choices=["json", "text"], default="json")
    common(p)
    p.set_defaults(func=cmd_dytri)

    p = sub.add_parser("blankets", help="Markov blankets by exhaustive CI tests")
    _add_source(p)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--max-vars", type=int, default=12)
    p.add_argument("--order", type=int, help="also list Markov-connected targets of this size")
    common(p)
    p.set_defaults(func=cmd_blankets)

    p = sub.add_parser("reproduce", help="regenerate all reference tables and diff them")
    p.add_argument("--m", type=int, default=repro_mod.REFERENCE_M, help="samples per DAG")
    p.add_argument("--n-boot", type=int, default=1000)
    p.add_argument("--dytri-eps", type=float, default=1e-3)
    common(p, "output directory (required)")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("mobius", help="inspect a lattice's Möbius function")
    p.add_argument("--lattice", choices=["boolean", "dual", "chain"], default="boolean")
    p.add_argument("--n", type=int)
    p.add_argument("--arities", help="chain product arities, e.g. 2,3")
    p.add_argument("--top", help="element, e.g. 0,2 (subset) or 1,2 (levels); default the top")
    p.add_argument("--bottom", help="if given, print only mu(bottom, top)")
    common(p)
    p.set_defaults(func=cmd_mobius)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    if args.command == "reproduce" and not args.out:
        parser.error("reproduce needs --out DIR")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except (ZeroProbabilityError, UnestimableError, SignificanceUnavailableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ZERO
    except InconsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (MobintError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
