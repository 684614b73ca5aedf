"""Command-line interface: ``metabio <subcommand> [options]``.

Exit codes: 0 success, 1 usage error, 2 guard violation, 3 the oracle could
not decide a query.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import time
from pathlib import Path

import numpy as np

from metabio import analysis, toy_machine
from metabio.evolution import (GuardError, Mode, Scenario, ScenarioSpec, run_cumulative, run_exhaustive,
                               run_intelligent_design)
from metabio.netcomplexity import (StateVector, SynthesisConfig, censored_bound, classify_entanglement,
                                   encode_circuit, h_net_upper, haar_state, random_product_state,
                                   synthesize)
from metabio.oracle import EnumeratedOmegaOracle, OracleUnknown, RandomOmegaOracle, parse_seed
from metabio.quantum import QuantumRegime, run_q_cumulative, run_q_exhaustive, run_q_intelligent_design

EXIT_OK, EXIT_USAGE, EXIT_GUARD, EXIT_UNKNOWN = 0, 1, 2, 3
OUT_DIR_ENV = "METABIO_OUT_DIR"

_SCENARIOS = {"exhaustive": Scenario.EXHAUSTIVE, "id": Scenario.INTELLIGENT_DESIGN,
              "cumulative": Scenario.CUMULATIVE}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


# -- argument types ------------------------------------------------------------


def int_list(text: str) -> list[int]:
    """``"8,16,32"``, ``"4..18"`` or a mix such as ``"1,4..6"``."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def seed_list(text: str) -> list[int]:
    try:
        return [parse_seed(s.strip()) for s in str(text).split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def seeds_from(args) -> list[int]:
    if args.seed:
        return args.seed
    return list(range(1, args.seeds + 1))


# -- output ---------------------------------------------------------------------


def _resolve_out(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _table_text(header, rows, fmt: str, key: str) -> str:
    if fmt == "json":
        return analysis.dumps({key: [dict(zip(header, r)) for r in rows]})
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([analysis._fmt(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def _emit(text: str, args, echo: bool = True) -> None:
    out = _resolve_out(args.out)
    if out is not None:
        out.write_text(text)
    elif echo:
        sys.stdout.write(text)


def _progress(enabled: bool):
    if not enabled:
        return None

    def report(done: int, total: int):
        if done == total or done % max(1, total // 20) == 0:
            print(f"[{done}/{total}]", file=sys.stderr, flush=True)

    return report


# -- subcommands -----------------------------------------------------------------


def _regime(model: str) -> QuantumRegime | None:
    return {"classical": None, "q-sep": QuantumRegime.SEPARABLE, "q-ent": QuantumRegime.ENTANGLED}[model]


def _make_oracle(args, seed: int):
    if args.oracle == "enumerated":
        return EnumeratedOmegaOracle(args.oracle_max_len, args.oracle_budget)
    return RandomOmegaOracle(seed)


def _run_single(scenario: str, model: str, N: int, seed: int, mode: Mode, oracle):
    regime = _regime(model)
    accepted, analytic = "", False
    if scenario == "exhaustive":
        if regime is None:
            T = run_exhaustive(N, oracle)
        else:
            res = run_q_exhaustive(N, oracle)
            T, analytic = res.T, res.analytic
    elif scenario == "id":
        trace = (run_intelligent_design(N, oracle) if regime is None
                 else run_q_intelligent_design(N, regime, oracle))
        T, accepted = trace.T, trace.states[-1].accepted
    else:
        res = (run_cumulative(N, oracle, seed, mode) if regime is None
               else run_q_cumulative(N, regime, oracle, seed, mode))
        T, accepted = res.T, res.accepted
    return T, accepted, analytic


def cmd_evolve(args) -> int:
    mode = Mode(args.mode) if args.mode else (Mode.FAST_FORWARD if args.scenario == "cumulative"
                                              else Mode.SIMULATE)
    ScenarioSpec(_SCENARIOS[args.scenario], args.n, mode, args.model)
    header = ("run_id", "scenario", "model", "N", "seed", "T", "accepted", "analytic")
    rows, trace_rows = [], []
    for run_id, seed in enumerate(seeds_from(args), start=1):
        t0 = time.perf_counter()
        T, accepted, analytic = _run_single(args.scenario, args.model, args.n, seed, mode,
                                            _make_oracle(args, seed))
        wall_ms = (time.perf_counter() - t0) * 1e3
        print(f"T={T}" + (" (analytic)" if analytic else ""))
        rows.append((run_id, args.scenario, args.model, args.n, seed, T, accepted, analytic))
        regime = {"classical": "classical", "q-sep": "separable", "q-ent": "entangled"}[args.model]
        trace_rows.append((run_id, args.scenario, regime, args.n, seed, T, accepted, f"{wall_ms:.3f}"))
    if args.out:
        _emit(_table_text(header, rows, args.format, "runs"), args)
    if args.trace:
        th = ("run_id", "scenario", "regime", "N", "seed", "T", "accepted", "wall_ms")
        _resolve_out(args.trace).write_text(_table_text(th, trace_rows, "csv", "runs"))
    return EXIT_OK


def cmd_sweep(args) -> int:
    mode = Mode(args.mode) if args.mode else None
    spec = ScenarioSpec(_SCENARIOS[args.scenario], max(args.n), mode, args.model)
    samples = analysis.sweep(spec, args.n, seeds_from(args), jobs=args.jobs,
                             progress=_progress(not args.quiet))
    fit = analysis.fit_scaling(samples) if args.fit else None
    if args.format == "json":
        payload = analysis.samples_payload(samples)
        if fit is not None:
            payload.update(analysis.fit_payload(fit))
        text = analysis.dumps(payload)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(analysis.CSV_HEADER)
        for s in samples:
            w.writerow([s.N, s.trials, analysis._fmt(s.mean_T), analysis._fmt(s.std_T)])
        text = buf.getvalue()
    if fit is not None:
        sys.stdout.write(analysis.dumps(analysis.fit_payload(fit)))
        _emit(text, args, echo=False)
    else:
        _emit(text, args)
    return EXIT_OK


def cmd_omega(args) -> int:
    dom = toy_machine.enumerate_domain(args.max_len, args.budget, jobs=args.jobs)
    print(f"omega_lower_bound={dom.omega()}", file=sys.stderr)
    print(f"omega_lower_bound_float={float(dom.omega().to_fraction()):.17g}", file=sys.stderr)
    print(f"tail_bound={dom.tail()} programs={len(dom.programs)} censored={dom.censored} "
          f"frontier={dom.frontier} diverged={dom.diverged}", file=sys.stderr)
    rows = [(p.bits, p.output, p.steps) for p in dom.programs]
    _emit(_table_text(("bits", "output", "steps"), rows, args.format, "programs"), args)
    return EXIT_OK


def cmd_bb(args) -> int:
    rows = []
    for n in range(args.step, args.max_n + 1, args.step):
        try:
            rows.append((n, toy_machine.busy_beaver(n, args.budget)))
        except ValueError:
            continue
    _emit(_table_text(("N", "busy_beaver"), rows, args.format, "busy_beaver"), args)
    return EXIT_OK


def _named_state(name: str, n: int) -> StateVector:
    d = 1 << n
    if name == "zero":
        return StateVector.basis(n)
    if name == "plus":
        return StateVector(n, np.full(d, d ** -0.5, dtype=complex))
    if name in ("bell", "ghz"):
        a = np.zeros(d, dtype=complex)
        a[0] = a[-1] = 2 ** -0.5
        return StateVector(n, a)
    raise UsageError(f"unknown state {name!r}")


def cmd_netcomp(args) -> int:
    cfg = SynthesisConfig(args.qubits, args.epsilon, args.max_gates)
    targets: list[tuple[str, StateVector]] = []
    for name in args.states:
        if name in ("haar", "product"):
            rng = np.random.default_rng(np.random.SeedSequence([args.rng_seed, 0 if name == "haar" else 1]))
            draw = haar_state if name == "haar" else random_product_state
            targets += [(f"{name}-{i}", draw(args.qubits, rng)) for i in range(args.count)]
        else:
            targets.append((name, _named_state(name, args.qubits)))
    rows = []
    for sid, psi in targets:
        c = synthesize(psi, cfg)
        h = h_net_upper(psi, cfg)
        ranks = classify_entanglement(psi).ranks
        rank_text = ";".join(f"{''.join(map(str, cut))}:{r}" for cut, r in ranks.items())
        rows.append((sid, args.qubits, repr(args.epsilon), "" if c is None else len(c),
                     f">={censored_bound(cfg)}" if h is None else h, rank_text))
        if args.verbose and c is not None:
            print(f"{sid}: {encode_circuit(c, args.qubits)}", file=sys.stderr)
    header = ("state_id", "n", "epsilon", "circuit_len", "h_net_upper_bits", "schmidt_ranks")
    _emit(_table_text(header, rows, args.format, "states"), args)
    return EXIT_OK


def cmd_fit(args) -> int:
    src = Path(args.input)
    samples = analysis.import_json(src) if src.suffix == ".json" else analysis.import_csv(src)
    if isinstance(samples, analysis.FitResult):
        raise UsageError(f"{src} holds a fit, not samples")
    fit = analysis.fit_scaling(samples)
    if args.format == "json":
        text = analysis.dumps(analysis.fit_payload(fit))
    else:
        rows = [(m, f.slope, f.intercept, f.normalized_residual, int(m == fit.chosen))
                for m, f in fit.fits.items()]
        text = _table_text(analysis.FIT_HEADER, rows, "csv", "fit")
    _emit(text, args)
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="output file (relative paths honor $%s)" % OUT_DIR_ENV)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes")
    common.add_argument("--config", help="key = value file with defaults for these flags")
    common.add_argument("--quiet", action="store_true", help="no progress on stderr")

    def seeded(p):
        p.add_argument("--seed", type=seed_list, help="explicit seeds, e.g. 7,8,0x1f (wins over --seeds)")
        p.add_argument("--seeds", type=int, default=1, help="use seeds 1..K")

    def scenario(p):
        p.add_argument("--scenario", choices=tuple(_SCENARIOS), required=True)
        p.add_argument("--model", choices=("classical", "q-sep", "q-ent"), default="classical")
        p.add_argument("--mode", choices=("simulate", "fast_forward"))

    parser = _Parser(prog="metabio", description="Algorithmic and quantum metabiology experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    subs = {}

    p = subs["evolve"] = sub.add_parser("evolve", parents=[common], help="run one scenario per seed")
    scenario(p)
    seeded(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trace", help="also write a run trace with wall-clock times")
    p.add_argument("--oracle", choices=("random", "enumerated"), default="random",
                   help="seeded random Omega, or the toy machine's certified bracket")
    p.add_argument("--oracle-max-len", type=int, default=12)
    p.add_argument("--oracle-budget", type=int, default=10_000)
    p.set_defaults(func=cmd_evolve)

    p = subs["sweep"] = sub.add_parser("sweep", parents=[common], help="T over a range of N and seeds")
    scenario(p)
    seeded(p)
    p.add_argument("--n", type=int_list, required=True, help="e.g. 8,16,32 or 4..18")
    p.add_argument("--fit", action="store_true", help="fit scaling laws and print the result as JSON")
    p.set_defaults(func=cmd_sweep)

    p = subs["omega"] = sub.add_parser("omega", parents=[common], help="enumerate the toy machine")
    p.add_argument("--max-len", type=int, default=12)
    p.add_argument("--budget", type=int, default=10_000)
    p.set_defaults(func=cmd_omega)

    p = subs["bb"] = sub.add_parser("bb", parents=[common], help="Busy Beaver table of the toy machine")
    p.add_argument("--max-n", type=int, default=12)
    p.add_argument("--budget", type=int, default=100_000)
    p.add_argument("--step", type=int, default=3, help="table stride (instructions are 3 bits)")
    p.set_defaults(func=cmd_bb)

    p = subs["netcomp"] = sub.add_parser("netcomp", parents=[common], help="circuit synthesis report")
    p.add_argument("--qubits", type=int, default=2)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--max-gates", type=int)
    p.add_argument("--states", type=lambda s: s.split(","), default=["zero", "bell", "plus"],
                   help="comma list of zero, plus, bell, ghz, haar, product")
    p.add_argument("--count", type=int, default=20, help="samples per random family")
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_netcomp)

    p = subs["fit"] = sub.add_parser("fit", parents=[common], help="fit a samples CSV/JSON file")
    p.add_argument("input")
    p.set_defaults(func=cmd_fit)
    return parser, subs


def read_config(path: str) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (t.strip() for t in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def _apply_config(sub: _Parser, path: str) -> None:
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for key, value in read_config(path).items():
        action = known.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError(f"{path}: unknown key {key!r}")
        if action.nargs == 0:
            defaults[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            defaults[key] = action.type(value) if action.type else value
        action.required = False
    sub.set_defaults(**defaults)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser, subs = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        if "--config" not in argv:
            print(exc, file=sys.stderr)
            return EXIT_USAGE
        args = None
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        config = args.config if args is not None else argv[argv.index("--config") + 1]
        if config:
            command = args.command if args is not None else next(a for a in argv if a in subs)
            parser, subs = build_parser()
            _apply_config(subs[command], config)
            args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (StopIteration, IndexError, OSError) as exc:
        print(f"metabio: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OracleUnknown as exc:
        print(f"metabio: oracle could not decide: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    except (GuardError, ValueError, analysis.SweepError) as exc:
        print(f"metabio: {exc}", file=sys.stderr)
        return EXIT_GUARD


if __name__ == "__main__":
    sys.exit(main())
