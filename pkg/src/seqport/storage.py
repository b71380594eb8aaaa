"""Archive files, CSV import, configuration files and tabular reports.

Archive format (``seqport-archive``, version 1) is JSON lines. Line 1 is a
header::

    {"format": "seqport-archive", "version": 1, "algorithms": [...],
     "functions": [...], "f_opt": {...}, "runs": R, "checkpoints": [...]}

followed by one record per (function, algorithm, run), in that nesting order::

    {"function": "f", "algorithm": "a", "run": 0, "values": [...]}

``values[c]`` is the best-so-far objective value at ``checkpoints[c]``. A run
that stopped early simply has a shorter list. Floats are written with
``repr`` so reading and rewriting a file reproduces it byte for byte.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .eaf import Grid, RunArchive, log_precisions
from .errors import ArchiveParseError, ConfigError, DataError
from .greedy import PenaltyConfig
from .integer_space import GaConfig
from .perf import Portfolio

__all__ = ["ARCHIVE_FORMAT", "ARCHIVE_VERSION", "write_archive", "read_archive",
           "dumps_archive", "loads_archive", "import_csv", "atomic_write", "write_table",
           "Config", "load_config", "grid_from_spec", "parse_portfolio", "format_portfolio"]

ARCHIVE_FORMAT = "seqport-archive"
ARCHIVE_VERSION = 1


def atomic_write(path, text: str) -> None:
    """Write via a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dumps_archive(archive: RunArchive) -> str:
    header = {
        "format": ARCHIVE_FORMAT,
        "version": ARCHIVE_VERSION,
        "algorithms": list(archive.algorithms),
        "functions": list(archive.functions),
        "f_opt": {f: archive.f_opt[f] for f in archive.functions},
        "runs": archive.runs,
        "checkpoints": list(archive.checkpoints),
    }
    lines = [json.dumps(header)]
    for fi, f in enumerate(archive.functions):
        for ai, a in enumerate(archive.algorithms):
            for r in range(archive.runs):
                traj = archive.values[fi, ai, r]
                traj = traj[~np.isnan(traj)]
                lines.append(json.dumps({"function": f, "algorithm": a, "run": r,
                                         "values": [float(v) for v in traj]}))
    return "\n".join(lines) + "\n"


def write_archive(archive: RunArchive, path) -> None:
    atomic_write(path, dumps_archive(archive))


def _require(obj, key, kind, line):
    if key not in obj:
        raise ArchiveParseError(f"{kind} is missing field {key!r}", line)
    return obj[key]


def loads_archive(text: str) -> RunArchive:
    lines = text.splitlines()
    if not lines:
        raise ArchiveParseError("empty archive", 1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ArchiveParseError(f"header is not JSON: {exc.msg}", 1) from None
    if not isinstance(header, dict) or header.get("format") != ARCHIVE_FORMAT:
        raise ArchiveParseError(f"not a {ARCHIVE_FORMAT} file", 1)
    if header.get("version") != ARCHIVE_VERSION:
        raise ArchiveParseError(f"unsupported version {header.get('version')!r}", 1)
    algorithms = _require(header, "algorithms", "header", 1)
    functions = _require(header, "functions", "header", 1)
    f_opt = _require(header, "f_opt", "header", 1)
    runs = _require(header, "runs", "header", 1)
    checkpoints = _require(header, "checkpoints", "header", 1)
    if not isinstance(runs, int) or runs < 1:
        raise ArchiveParseError(f"runs must be a positive integer, got {runs!r}", 1)
    missing = [f for f in functions if f not in f_opt]
    if missing:
        raise ArchiveParseError(f"no f_opt for functions {missing}", 1)
    a_pos = {a: i for i, a in enumerate(algorithms)}
    f_pos = {f: i for i, f in enumerate(functions)}
    values = np.full((len(functions), len(algorithms), runs, len(checkpoints)), np.nan)
    seen = np.zeros(values.shape[:3], dtype=bool)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ArchiveParseError(f"record is not JSON: {exc.msg}", lineno) from None
        if not isinstance(rec, dict):
            raise ArchiveParseError("record must be an object", lineno)
        f = _require(rec, "function", "record", lineno)
        a = _require(rec, "algorithm", "record", lineno)
        r = _require(rec, "run", "record", lineno)
        vals = _require(rec, "values", "record", lineno)
        if f not in f_pos:
            raise ArchiveParseError(f"unknown function {f!r}", lineno)
        if a not in a_pos:
            raise ArchiveParseError(f"unknown algorithm {a!r}", lineno)
        if not isinstance(r, int) or not 0 <= r < runs:
            raise ArchiveParseError(f"run index {r!r} outside 0..{runs - 1}", lineno)
        if not isinstance(vals, list) or len(vals) > len(checkpoints) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
            for v in vals
        ):
            raise ArchiveParseError(
                f"values must be a list of at most {len(checkpoints)} finite numbers", lineno
            )
        key = (f_pos[f], a_pos[a], r)
        if seen[key]:
            raise ArchiveParseError(f"duplicate record ({f}, {a}, run {r})", lineno)
        seen[key] = True
        values[key][: len(vals)] = vals
    if not seen.all():
        fi, ai, r = np.argwhere(~seen)[0]
        raise ArchiveParseError(
            f"missing record ({functions[fi]}, {algorithms[ai]}, run {r})", len(lines)
        )
    try:
        return RunArchive(tuple(algorithms), tuple(functions), f_opt, tuple(checkpoints), values)
    except DataError as exc:
        raise ArchiveParseError(str(exc), 1) from None


def read_archive(path) -> RunArchive:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read archive {path}: {exc.strerror}") from None
    return loads_archive(text)


def import_csv(path, f_opt=0.0) -> RunArchive:
    """Read a long-format best-so-far table.

    Required columns: ``function, algorithm, run, budget, best_value``.
    ``f_opt`` is a number used for every function or a mapping per function.
    Values are turned into running minima per run; run identifiers are
    renumbered ``0..R-1`` in sorted order.
    """
    columns = ("function", "algorithm", "run", "budget", "best_value")
    data: dict = defaultdict(dict)
    budgets: set = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        absent = [c for c in columns if c not in (reader.fieldnames or [])]
        if absent:
            raise ArchiveParseError(f"CSV lacks columns {absent}", 1)
        for lineno, row in enumerate(reader, start=2):
            try:
                budget = int(row["budget"])
                value = float(row["best_value"])
            except (TypeError, ValueError):
                raise ArchiveParseError("budget/best_value not numeric", lineno) from None
            key = (row["function"], row["algorithm"], row["run"])
            if budget in data[key]:
                raise ArchiveParseError(f"duplicate budget {budget} for {key}", lineno)
            data[key][budget] = value
            budgets.add(budget)
    if not data:
        raise DataError(f"no rows in {path}")
    functions = sorted({k[0] for k in data})
    algorithms = sorted({k[1] for k in data})
    runs_per_pair = defaultdict(list)
    for f, a, r in data:
        runs_per_pair[(f, a)].append(r)
    counts = {len(v) for v in runs_per_pair.values()}
    if len(counts) != 1 or len(runs_per_pair) != len(functions) * len(algorithms):
        raise DataError("every (function, algorithm) pair needs the same number of runs")
    runs = counts.pop()
    checkpoints = sorted(budgets)
    values = np.full((len(functions), len(algorithms), runs, len(checkpoints)), np.nan)
    for (f, a), run_ids in runs_per_pair.items():
        for r, run_id in enumerate(sorted(run_ids, key=_natural)):
            series = data[(f, a, run_id)]
            traj = [series.get(c, np.nan) for c in checkpoints]
            n = len(traj)
            while n and np.isnan(traj[n - 1]):
                n -= 1
            if np.isnan(traj[:n]).any():
                raise DataError(f"run {run_id} of ({f}, {a}) skips a checkpoint")
            values[functions.index(f), algorithms.index(a), r, :n] = \
                np.minimum.accumulate(traj[:n]) if n else []
    if isinstance(f_opt, dict):
        missing = [f for f in functions if f not in f_opt]
        if missing:
            raise ConfigError(f"no f_opt given for {missing}")
        fopt = {f: float(f_opt[f]) for f in functions}
    else:
        fopt = {f: float(f_opt) for f in functions}
    return RunArchive(tuple(algorithms), tuple(functions), fopt, tuple(checkpoints), values)


def _natural(run_id: str):
    return (0, int(run_id), "") if run_id.strip().lstrip("-").isdigit() else (1, 0, run_id)


def write_table(path, header, rows, delimiter="\t") -> None:
    """Write a delimited table with a fixed column order."""
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    atomic_write(path, buf.getvalue())


def _cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Portfolio):
        return format_portfolio(v)
    return v


def format_portfolio(portfolio: Portfolio) -> str:
    """``alg:budget:count`` items joined by ``;``, canonical order."""
    return ";".join(f"{a}:{b}:{n}" for (a, b), n in portfolio.key)


def parse_portfolio(text: str) -> Portfolio:
    """Inverse of :func:`format_portfolio`; the count may be omitted."""
    counts: dict = {}
    for item in filter(None, (s.strip() for s in text.replace(",", ";").split(";"))):
        parts = item.rsplit(":", 2)
        try:
            if len(parts) == 3 and parts[2].isdigit() and parts[1].isdigit():
                alg, budget, n = parts[0], int(parts[1]), int(parts[2])
            else:
                alg, budget = item.rsplit(":", 1)
                budget, n = int(budget), 1
        except ValueError:
            raise ConfigError(f"cannot parse portfolio item {item!r}") from None
        counts[(alg, budget)] = counts.get((alg, budget), 0) + n
    return Portfolio(counts)


# -- configuration -----------------------------------------------------------

def grid_from_spec(spec: dict | None, default_budgets=None) -> Grid:
    """Build a grid from a config mapping.

    ``{"preset": "analysis"}`` or ``{"preset": "coco", "k": 20}`` select the
    published grids. Otherwise ``budgets`` is a list or ``{"step", "count"}``,
    ``precisions`` a list or ``{"divisor", "count", "top_exponent"}``, and
    ``total_budget`` an integer.
    """
    spec = dict(spec or {})
    preset = spec.pop("preset", None)
    if preset == "analysis":
        grid = Grid.analysis()
    elif preset == "coco":
        grid = Grid.coco(int(spec.pop("k", 40)))
    elif preset is None:
        grid = None
    else:
        raise ConfigError(f"unknown grid preset {preset!r}")
    budgets = spec.get("budgets")
    if isinstance(budgets, dict):
        budgets = [budgets["step"] * k for k in range(1, budgets["count"] + 1)]
    if budgets is None:
        budgets = grid.budgets if grid else default_budgets
    if budgets is None:
        raise ConfigError("grid needs budgets")
    precisions = spec.get("precisions")
    if isinstance(precisions, dict):
        precisions = log_precisions(precisions.get("divisor", 10), precisions.get("count", 101),
                                    precisions.get("top_exponent", 2.0))
    if precisions is None:
        precisions = grid.precisions if grid else log_precisions(10, 101)
    total = spec.get("total_budget")
    if total is None:
        total = grid.total_budget if grid else max(budgets)
    return Grid(tuple(budgets), tuple(precisions), int(total))


@dataclass
class Config:
    grid: dict = field(default_factory=dict)
    seed: int = 0
    runs: int = 20
    dim: int = 10
    optimizers: list | None = None
    functions: list | None = None
    algorithms: list | None = None
    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    k: int = 3
    projection: str = "dirichlet"
    cont_optimizer: str = "pattern"
    ga: dict = field(default_factory=dict)
    granularity: int | None = None
    enum_max_size: int | None = None
    enum_cap: int = 10_000_000
    eval_budget: int | None = None
    jobs: int = 1

    def make_grid(self, default_budgets=None) -> Grid:
        return grid_from_spec(self.grid, default_budgets)

    def ga_config(self, eval_budget: int, **overrides) -> GaConfig:
        params = {"seed": self.seed, **self.ga, **overrides}
        params["eval_budget"] = eval_budget
        return GaConfig(**params)


_CONFIG_KEYS = {f for f in Config.__dataclass_fields__}


def load_config(path=None, data: dict | None = None) -> Config:
    """Read a JSON config file (or take ``data``) into a :class:`Config`."""
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} line {exc.lineno}: {exc.msg}") from None
    data = dict(data or {})
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "penalty" in data:
        pen = data["penalty"]
        data["penalty"] = PenaltyConfig(pen.get("weight", 0.1), pen.get("power", 2.0))
    try:
        return Config(**data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
