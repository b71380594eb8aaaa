"""Command-line interface: ``seqport <command> ...``.

Exit codes: 0 success, 1 configuration error, 2 data error, 3 refusal
because a computation would exceed a resource cap.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .eaf import Grid, compute_eaf
from .errors import ConfigError, SeqportError
from .experiments import (METHODS, compare, eaf_summary, penalty_grid, per_function_table,
                          run_method, sweep)
from .greedy import PenaltyConfig
from .harness import builtin_functions, builtin_optimizers, run_experiment
from .perf import budget_cap, lower_baseline, make_report, upper_baseline
from .shapley import shapley_table
from .storage import (Config, atomic_write, format_portfolio, grid_from_spec, import_csv,
                      load_config, parse_portfolio, read_archive, write_archive,
                      write_table)

logger = logging.getLogger("seqport")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser, archive=True):
    if archive:
        p.add_argument("archive", help="archive file written by 'simulate' or 'import-csv'")
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("-T", "--total-budget", type=int, help="total evaluation budget")
    p.add_argument("--functions", help="comma-separated function subset")
    p.add_argument("--algorithms", help="comma-separated algorithm subset")
    p.add_argument("--seed", type=int, help="random seed (overrides config)")
    p.add_argument("-o", "--out", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="seqport", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="run the toy benchmark and write an archive")
    _common(p, archive=False)
    p.add_argument("--runs", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--optimizers", help="comma-separated subset of the built-in optimizers")
    p.add_argument("--jobs", type=int, help="worker processes")

    p = sub.add_parser("import-csv", help="convert a best-so-far CSV table to an archive")
    p.add_argument("csv")
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--f-opt", default="0",
                   help="optimum value for all functions, or a JSON file mapping function -> value")

    p = sub.add_parser("eaf", help="mean attainment per (function, algorithm, budget)")
    _common(p)

    p = sub.add_parser("baseline", help="lower/upper baselines")
    _common(p)

    p = sub.add_parser("build", help="construct a portfolio")
    _common(p)
    p.add_argument("--method", choices=METHODS, default="greedy")
    p.add_argument("--variant", help="GA 'mu+lambda' or continuous optimizer 'pattern'/'es'")
    p.add_argument("-w", "--weight", type=float, help="greedy penalty weight")
    p.add_argument("-p", "--power", type=float, help="greedy penalty power")
    p.add_argument("--eval-budget", type=int)
    p.add_argument("--per-function", help="also write the per-function comparison table here")

    p = sub.add_parser("shapley", help="Shapley attribution of a portfolio")
    _common(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--portfolio", help="'alg:budget:count;...'")
    group.add_argument("--portfolio-file", help="JSON report written by 'build'")
    p.add_argument("--per-pair", action="store_true", help="players are pairs, not algorithms")

    p = sub.add_parser("compare", help="all construction methods side by side")
    _common(p)
    p.add_argument("--eval-budget", type=int, help="default 1000 x number of algorithms")

    p = sub.add_parser("sweep", help="greedy portfolio versus total budget")
    _common(p)
    p.add_argument("--step", type=int, help="total budget increment (default: smallest budget)")
    p.add_argument("--count", type=int, help="number of totals (default: up to T)")
    p.add_argument("--incremental", action="store_true", help="add the incremental builder")

    p = sub.add_parser("penalty-grid", help="greedy relative improvement over (w, p)")
    _common(p)
    p.add_argument("--weights", default="0,0.05,0.1,0.2,0.5")
    p.add_argument("--powers", default="1,2,3")
    return parser


def _split(text):
    return [s.strip() for s in text.split(",") if s.strip()] if text else None


def _config(args) -> Config:
    cfg = load_config(args.config) if getattr(args, "config", None) else Config()
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    return cfg


def _load(args, cfg: Config):
    archive = read_archive(args.archive)
    grid_spec = dict(cfg.grid)
    if args.total_budget is not None:
        grid_spec["total_budget"] = args.total_budget
    elif "total_budget" not in grid_spec and "preset" not in grid_spec:
        grid_spec["total_budget"] = max(archive.checkpoints)
    grid = grid_from_spec(grid_spec, default_budgets=archive.checkpoints)
    tensor = compute_eaf(archive, grid)
    algorithms = _split(args.algorithms) or cfg.algorithms
    functions = _split(args.functions) or cfg.functions
    if algorithms or functions:
        tensor = tensor.subset(algorithms, functions)
    T = grid.total_budget
    if T < tensor.grid.budgets[-1]:
        tensor = tensor.with_total_budget(T)
    return tensor, T


def _emit(args, header, rows):
    if args.out:
        write_table(args.out, header, [[r[h] for h in header] for r in rows])
    else:
        print("\t".join(header))
        for r in rows:
            print("\t".join(_fmt(r[h]) for h in header))


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if hasattr(v, "key"):
        return format_portfolio(v)
    return str(v)


def cmd_simulate(args):
    if not args.out:
        raise ConfigError("simulate needs --out")
    cfg = _config(args)
    grid = cfg.make_grid(default_budgets=Grid.analysis().budgets)
    if args.total_budget is not None:
        grid = Grid(tuple(b for b in grid.budgets if b <= args.total_budget) or grid.budgets,
                    grid.precisions, args.total_budget)
    dim = args.dim or cfg.dim
    functions = builtin_functions(dim)
    optimizers = builtin_optimizers()
    wanted_f = _split(args.functions) or cfg.functions
    wanted_o = _split(args.optimizers) or cfg.optimizers
    if wanted_f:
        functions = [f for f in functions if f.name in wanted_f]
    if wanted_o:
        optimizers = [o for o in optimizers if o.name in wanted_o]
    if not functions or not optimizers:
        raise ConfigError("no functions or optimizers selected")
    archive = run_experiment(functions, optimizers, grid, args.runs or cfg.runs, cfg.seed,
                             n_jobs=args.jobs or cfg.jobs)
    write_archive(archive, args.out)
    print(f"wrote {args.out}: {len(archive.functions)} functions x "
          f"{len(archive.algorithms)} algorithms x {archive.runs} runs")


def cmd_import_csv(args):
    f_opt = args.f_opt
    if Path(f_opt).is_file():
        f_opt = json.loads(Path(f_opt).read_text())
    else:
        try:
            f_opt = float(f_opt)
        except ValueError:
            raise ConfigError(f"--f-opt is neither a number nor a file: {f_opt!r}") from None
    archive = import_csv(args.csv, f_opt)
    write_archive(archive, args.out)
    print(f"wrote {args.out}")


def cmd_eaf(args):
    tensor, _ = _load(args, _config(args))
    _emit(args, ["function", "algorithm", "budget", "mean_attainment"], eaf_summary(tensor))


def cmd_baseline(args):
    tensor, T = _load(args, _config(args))
    lb, sbs = lower_baseline(tensor, None, T)
    row = {"total_budget": T, "sbs": sbs, "sbs_budget": budget_cap(tensor, T), "lb": lb,
           "ub": upper_baseline(tensor, None)}
    _emit(args, list(row), [row])


def cmd_build(args):
    cfg = _config(args)
    if args.weight is not None or args.power is not None:
        cfg.penalty = PenaltyConfig(
            cfg.penalty.weight if args.weight is None else args.weight,
            cfg.penalty.power if args.power is None else args.power,
        )
    tensor, T = _load(args, cfg)
    res = run_method(tensor, None, T, args.method, cfg, args.variant, args.eval_budget)
    report = make_report(tensor, None, res.portfolio, T)
    doc = {"method": res.method, "total_budget": T, "evaluations": res.evaluations,
           **report.as_dict()}
    text = json.dumps(doc, indent=2) + "\n"
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    if args.per_function:
        rows = per_function_table(tensor, None, res.portfolio, T)
        write_table(args.per_function, list(rows[0]), [list(r.values()) for r in rows])


def cmd_shapley(args):
    tensor, _ = _load(args, _config(args))
    if args.portfolio:
        portfolio = parse_portfolio(args.portfolio)
    else:
        doc = json.loads(Path(args.portfolio_file).read_text())
        portfolio = parse_portfolio(";".join(f"{a}:{b}:{n}" for a, b, n in doc["portfolio"]))
    table = shapley_table(tensor, None, portfolio, per_pair=args.per_pair)
    rows = [{"function": f, "player": p if isinstance(p, str) else f"{p[0]}:{p[1]}",
             "raw": raw, "normalized": norm} for f, p, raw, norm in table.rows()]
    _emit(args, ["function", "player", "raw", "normalized"], rows)


def cmd_compare(args):
    cfg = _config(args)
    tensor, T = _load(args, cfg)
    rows = compare(tensor, None, T, cfg, args.eval_budget)
    header = ["method", "perf", "relative_improvement_pct", "size", "cost", "evaluations",
              "lb", "ub", "sbs", "seconds", "portfolio"]
    _emit(args, header, rows)


def cmd_sweep(args):
    cfg = _config(args)
    tensor, T = _load(args, cfg)
    step = args.step or tensor.grid.budgets[0]
    count = args.count or T // step
    totals = [step * k for k in range(1, count + 1)]
    rows = sweep(tensor, None, totals, cfg, incremental=args.incremental, granularity=step)
    header = ["total_budget", "lb", "sbs", "ub", "greedy_perf", "greedy_relative_improvement",
              "greedy_size", "greedy_portfolio"]
    if args.incremental:
        header += ["incremental_perf", "incremental_portfolio"]
    _emit(args, header, rows)


def cmd_penalty_grid(args):
    tensor, T = _load(args, _config(args))
    try:
        weights = [float(w) for w in _split(args.weights)]
        powers = [float(p) for p in _split(args.powers)]
    except (TypeError, ValueError):
        raise ConfigError("weights and powers must be comma-separated numbers") from None
    rows = penalty_grid(tensor, None, T, weights, powers)
    _emit(args, ["weight", "power", "perf", "relative_improvement", "size", "portfolio"], rows)


COMMANDS = {
    "simulate": cmd_simulate,
    "import-csv": cmd_import_csv,
    "eaf": cmd_eaf,
    "baseline": cmd_baseline,
    "build": cmd_build,
    "shapley": cmd_shapley,
    "compare": cmd_compare,
    "sweep": cmd_sweep,
    "penalty-grid": cmd_penalty_grid,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except SeqportError as exc:
        print(f"seqport {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
