"""Command-line front end.

Subcommands: beta, norms, embed, counterexample, app, expr-eval.

Settings come from an optional flat ``key = value`` config file
(``--config``) and are overridden by flags. Exit status: 0 success, 2
config or parse error, 3 computation error, 4 hypothesis violation without
``--allow-hypothesis-violation``.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from . import __version__
from .embedlab import (
    APPLICATIONS, FunctionFamily, HypothesisViolationError, application_preset,
    counterexample_preset, counterexample_run, embedding_survey,
)
from .exponents import (
    DegenerateDenominatorError, ExponentError, ExponentVectorField, HypothesisReport,
    beta_exponents, validate_hypotheses,
)
from .exprlang import (
    EvalDomainError, ExprSyntaxError, eval_expr, eval_predicate, max_variable,
    parse_expr, parse_predicate, unparse,
)
from .grid import EmptyDomainError, IsolatedCellError, build_grid, sample
from .hoelder import hoelder_norm
from .jsonio import dumps
from .norms import BracketError, sobolev_norm
from .pairs import EXHAUSTIVE_LIMIT, PairScanPolicy, pair_count

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_HYPOTHESIS = 0, 2, 3, 4

SUBCOMMANDS = ("beta", "norms", "embed", "counterexample", "app", "expr-eval")

COMPUTE_ERRORS = (
    EvalDomainError, DegenerateDenominatorError, BracketError, EmptyDomainError,
    IsolatedCellError, ExponentError, FloatingPointError,
)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str = ""
    box: Optional[str] = None
    resolutions: Optional[str] = None
    predicate: Optional[str] = None
    p: list = field(default_factory=list)
    u: list = field(default_factory=list)
    ladder: Optional[str] = None
    pairs: Optional[str] = None
    budget: Optional[int] = None
    seed: Optional[int] = None
    allow_hypothesis_violation: bool = False
    eq2_literal_p1: bool = False
    out: Optional[str] = None
    format: Optional[str] = None
    csv: Optional[str] = None
    threads: Optional[int] = None
    preset: Optional[str] = None
    alpha: Optional[float] = None
    count: Optional[int] = None
    max_frequency: Optional[int] = None
    terms: Optional[int] = None
    family_seed: Optional[int] = None
    expr: Optional[str] = None
    at: Optional[str] = None

    LISTS = ("p", "u")
    FLAGS = ("allow_hypothesis_violation", "eq2_literal_p1")
    INTS = ("budget", "seed", "threads", "count", "max_frequency", "terms", "family_seed")
    FLOATS = ("alpha",)

    @classmethod
    def keys(cls):
        return [f.name for f in fields(cls)]

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"config line {lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            cfg.set(key.replace("-", "_"), value, f"config line {lineno}")
        return cfg

    def set(self, key, value, where="config"):
        if key not in self.keys():
            raise ConfigError(f"{where}: unknown key {key!r}")
        if key in self.LISTS:
            getattr(self, key).append(value)
        elif key in self.FLAGS:
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"{where}: {key} must be true or false")
            setattr(self, key, value.lower() in ("true", "1", "yes"))
        elif key in self.INTS:
            try:
                setattr(self, key, int(value))
            except ValueError:
                raise ConfigError(f"{where}: {key} must be an integer") from None
        elif key in self.FLOATS:
            try:
                setattr(self, key, float(value))
            except ValueError:
                raise ConfigError(f"{where}: {key} must be a number") from None
        else:
            setattr(self, key, value)

    def to_text(self) -> str:
        lines = []
        for key in self.keys():
            value = getattr(self, key)
            if key in self.LISTS:
                lines += [f"{key} = {v}" for v in value]
            elif key in self.FLAGS:
                if value:
                    lines.append(f"{key} = true")
            elif value is not None and value != "":
                lines.append(f"{key} = {value!r}" if key in self.FLOATS else f"{key} = {value}")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.keys()}

    def merge(self, other: "RunConfig") -> "RunConfig":
        """Fields set in ``other`` win."""
        out = RunConfig(**{k: (list(v) if isinstance(v, list) else v) for k, v in self.to_dict().items()})
        for key in self.keys():
            v = getattr(other, key)
            if key in self.LISTS:
                if v:
                    setattr(out, key, list(v))
            elif key in self.FLAGS:
                if v:
                    setattr(out, key, True)
            elif v is not None and v != "":
                setattr(out, key, v)
        return out


# ---------------------------------------------------------------------------
# Argument parsing


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value config file")
    common.add_argument("--box", help="per-axis intervals, e.g. 0:1,0:3")
    common.add_argument("--resolutions", help="cells per axis, e.g. 64 or 64,128")
    common.add_argument("--predicate", help="domain membership predicate")
    common.add_argument("--p", action="append", default=[], help="exponent expression (one per direction, or one for all)")
    common.add_argument("--u", action="append", default=[], help="function expression")
    common.add_argument("--ladder", help="resolutions per level, e.g. 32,64,128")
    common.add_argument("--pairs", choices=("exhaustive", "sampled"))
    common.add_argument("--budget", type=int, help="sampled pair budget")
    common.add_argument("--seed", type=int)
    common.add_argument("--allow-hypothesis-violation", action="store_true")
    common.add_argument("--eq2-literal-p1", action="store_true",
                        help="use N/p_1 in every direction of the beta formula")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--csv", help="also write the CSV table here")
    common.add_argument("--threads", type=int, help="cap on internal threads")

    ap = argparse.ArgumentParser(prog="holderlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"holderlab {__version__}")
    sub = ap.add_subparsers(dest="subcommand", required=True)
    sub.add_parser("beta", parents=[common], help="Hölder exponent field")
    sub.add_parser("norms", parents=[common], help="Sobolev and Hölder norms of one function")
    emb = sub.add_parser("embed", parents=[common], help="embedding-constant survey")
    emb.add_argument("--count", type=int)
    emb.add_argument("--max-frequency", type=int)
    emb.add_argument("--terms", type=int)
    emb.add_argument("--family-seed", type=int)
    ce = sub.add_parser("counterexample", parents=[common], help="cusp refinement study")
    ce.add_argument("--preset", choices=("mild-cusp", "pronounced-cusp"))
    ce.add_argument("--alpha", type=float)
    app = sub.add_parser("app", parents=[common], help="application preset")
    app.add_argument("preset", nargs="?", choices=sorted(APPLICATIONS))
    ev = sub.add_parser("expr-eval", parents=[common], help="evaluate an expression at a point")
    ev.add_argument("--expr")
    ev.add_argument("--at", help="comma-separated point")
    return ap


def _config_from_args(ns) -> RunConfig:
    base = RunConfig()
    if ns.config:
        try:
            with open(ns.config) as fh:
                base = RunConfig.from_text(fh.read())
        except OSError as err:
            raise ConfigError(f"cannot read config: {err}") from None
    flags = RunConfig(subcommand=ns.subcommand)
    for key in RunConfig.keys():
        if key == "subcommand" or not hasattr(ns, key):
            continue
        v = getattr(ns, key)
        if v is not None:
            setattr(flags, key, v)
    cfg = base.merge(flags)
    if base.subcommand and base.subcommand != ns.subcommand:
        raise ConfigError(f"config is for {base.subcommand!r}, not {ns.subcommand!r}")
    cfg.subcommand = ns.subcommand
    return cfg


# ---------------------------------------------------------------------------
# Config resolution helpers


def _ints(text, what):
    try:
        vals = [int(s) for s in str(text).split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"{what} must be comma-separated integers, got {text!r}") from None
    if not vals:
        raise ConfigError(f"{what} is empty")
    return vals


def _box(cfg, default=None):
    text = cfg.box
    if text is None:
        if default is None:
            raise ConfigError("--box is required")
        return [tuple(ab) for ab in default]
    box = []
    for part in text.split(","):
        try:
            a, b = (float(s) for s in part.split(":"))
        except ValueError:
            raise ConfigError(f"box axis {part!r} must look like a:b") from None
        if not a < b:
            raise ConfigError(f"box axis {part!r} needs a < b")
        box.append((a, b))
    return box


def _resolution(text, N):
    vals = _ints(text, "resolutions")
    if len(vals) == 1:
        vals = vals * N
    if len(vals) != N:
        raise ConfigError(f"resolutions has {len(vals)} entries for {N} axes")
    if min(vals) < 2:
        raise ConfigError("resolutions must be >= 2")
    return tuple(vals)


def _exprs(texts, N, what):
    out = []
    for t in texts:
        try:
            e = parse_expr(t)
        except ExprSyntaxError as err:
            raise ConfigError(f"{what} {t!r}: {err}") from None
        if max_variable(e) > N:
            raise ConfigError(f"{what} {t!r} uses x{max_variable(e)} on a {N}-D domain")
        out.append(e)
    return out


def _p_exprs(cfg, N):
    if not cfg.p:
        raise ConfigError("at least one --p is required")
    ps = _exprs(cfg.p, N, "exponent")
    if len(ps) == 1:
        ps = ps * N
    if len(ps) != N:
        raise ConfigError(f"{len(ps)} exponent expressions for {N} directions")
    return ps


def _predicate(cfg, N):
    if not cfg.predicate:
        return None
    try:
        pred = parse_predicate(cfg.predicate)
    except ExprSyntaxError as err:
        raise ConfigError(f"predicate: {err}") from None
    if max_variable(pred) > N:
        raise ConfigError(f"predicate uses x{max_variable(pred)} on a {N}-D domain")
    return pred


def _policy(cfg, max_cells, default_seed=None):
    mode = cfg.pairs or "sampled"
    seed = cfg.seed if cfg.seed is not None else default_seed
    if mode == "sampled" and seed is None and pair_count(max_cells) > EXHAUSTIVE_LIMIT:
        raise ConfigError("--seed is required when sampled pair mode can trigger")
    return PairScanPolicy(mode, cfg.budget if cfg.budget is not None else 1_000_000, seed)


@contextmanager
def _threads(cfg):
    if cfg.threads is None:
        yield
        return
    if cfg.threads < 1:
        raise ConfigError("threads must be >= 1")
    old = os.environ.get("HOLDERLAB_THREADS")
    os.environ["HOLDERLAB_THREADS"] = str(cfg.threads)
    try:
        yield
    finally:
        if old is None:
            del os.environ["HOLDERLAB_THREADS"]
        else:
            os.environ["HOLDERLAB_THREADS"] = old


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, float):
        return format(v, ".17g")
    return "" if v is None else v


def _emit(cfg, payload: dict, rows=None, stdout=None):
    stdout = stdout or sys.stdout
    text = dumps(payload) + "\n"
    if cfg.format == "csv":
        if rows is None:
            raise ConfigError(f"{cfg.subcommand} has no CSV output")
        primary = _csv_text(rows)
    else:
        primary = text
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(primary)
        if cfg.format == "csv":
            stdout.write(text)
    else:
        stdout.write(primary)
    if cfg.csv and rows is not None:
        with open(cfg.csv, "w") as fh:
            fh.write(_csv_text(rows))


# ---------------------------------------------------------------------------
# Subcommands


def _check_hypotheses(cfg, hyp):
    if not hyp.satisfied and not cfg.allow_hypothesis_violation:
        raise HypothesisViolationError(hyp)


def cmd_beta(cfg: RunConfig, stdout=None) -> int:
    box = _box(cfg)
    N = len(box)
    ps = _p_exprs(cfg, N)
    pred = _predicate(cfg, N)
    res = _resolution(cfg.resolutions or "64", N)
    grid = build_grid(N, box, res, pred)
    p = ExponentVectorField([sample(grid, e) for e in ps])
    beta = beta_exponents(p, cfg.eq2_literal_p1)
    payload = {
        "config": cfg.to_dict(),
        "version": __version__,
        "grid": grid.describe(),
        "beta": beta.summary(),
        "hypothesis": validate_hypotheses(p).to_dict(),
    }
    rows = [[f"i{k + 1}" for k in range(N)] + [f"x{k + 1}" for k in range(N)] + ["value"]
            + [f"beta_{k + 1}" for k in range(N)]]
    pm = p.values.min(axis=1)
    for k in range(grid.size):
        rows.append([int(i) for i in grid.indices[k]] + [float(x) for x in grid.centers[k]]
                    + [float(pm[k])] + [float(b) for b in beta.values[k]])
    _emit(cfg, payload, rows, stdout)
    return EXIT_OK


def cmd_norms(cfg: RunConfig, stdout=None) -> int:
    box = _box(cfg)
    N = len(box)
    ps = _p_exprs(cfg, N)
    if len(cfg.u) != 1:
        raise ConfigError("norms needs exactly one --u")
    (u_expr,) = _exprs(cfg.u, N, "function")
    pred = _predicate(cfg, N)
    res = _resolution(cfg.resolutions or "64", N)
    policy = _policy(cfg, int(np.prod(res)))
    grid = build_grid(N, box, res, pred)
    p = ExponentVectorField([sample(grid, e) for e in ps])
    hyp = validate_hypotheses(p)
    _check_hypotheses(cfg, hyp)
    beta = beta_exponents(p, cfg.eq2_literal_p1)
    u = sample(grid, u_expr)
    s = sobolev_norm(u, p)
    h = hoelder_norm(u, beta, policy)
    payload = {
        "config": cfg.to_dict(),
        "version": __version__,
        "grid": grid.describe(),
        "hypothesis": hyp.to_dict(),
        "sobolev": s.to_dict(),
        "hoelder": h.to_dict(),
        "ratio": h.norm / s.value if s.value > 0 else None,
    }
    rows = [["sobolev", "hoelder", "ratio"], [s.value, h.norm, payload["ratio"]]]
    _emit(cfg, payload, rows, stdout)
    return EXIT_OK


def cmd_embed(cfg: RunConfig, stdout=None) -> int:
    box = _box(cfg)
    N = len(box)
    ps = _p_exprs(cfg, N)
    ladder = [_resolution(str(n), N) for n in _ints(cfg.ladder or "32,64,128", "ladder")]
    if cfg.u:
        family = FunctionFamily.explicit([unparse(e) for e in _exprs(cfg.u, N, "function")])
    else:
        family = FunctionFamily(
            "trig",
            count=cfg.count if cfg.count is not None else 20,
            max_frequency=cfg.max_frequency if cfg.max_frequency is not None else 3,
            terms=cfg.terms if cfg.terms is not None else 4,
            seed=cfg.family_seed if cfg.family_seed is not None else (cfg.seed or 0),
            dim=N,
        )
    policy = _policy(cfg, max(int(np.prod(r)) for r in ladder))
    report = embedding_survey(ps, family, box, ladder, policy,
                              cfg.allow_hypothesis_violation, cfg.eq2_literal_p1)
    payload = dict(report.to_dict(), config=cfg.to_dict())
    _emit(cfg, payload, list(report.csv_rows()), stdout)
    return EXIT_OK


def cmd_counterexample(cfg: RunConfig, stdout=None) -> int:
    ladder = _ints(cfg.ladder or "16,32,64", "ladder")
    if cfg.preset:
        if cfg.preset not in ("mild-cusp", "pronounced-cusp"):
            raise ConfigError(f"unknown counterexample preset {cfg.preset!r}")
        spec = counterexample_preset(cfg.preset, cfg.alpha if cfg.alpha is not None else 3.0)
        N = len(spec.box)
    else:
        box = _box(cfg)
        N = len(box)
        if not cfg.predicate or len(cfg.u) != 1:
            raise ConfigError("a custom counterexample needs --predicate, one --u and --p")
        _predicate(cfg, N)
        _exprs(cfg.u, N, "function")
        spec = {"id": "custom", "box": box, "predicate": cfg.predicate, "u": cfg.u[0],
                "p": [unparse(e) for e in _p_exprs(cfg, N)]}
    if len(ladder) < 3:
        raise ConfigError("counterexample ladder needs at least 3 levels")
    ladder = [_resolution(str(n), N) for n in ladder]
    policy = _policy(cfg, max(int(np.prod(r)) for r in ladder), default_seed=0)
    report = counterexample_run(spec, ladder, policy, cfg.eq2_literal_p1)
    payload = dict(report.to_dict(), config=cfg.to_dict())
    _emit(cfg, payload, list(report.csv_rows()), stdout)
    return EXIT_OK


def cmd_app(cfg: RunConfig, stdout=None) -> int:
    if cfg.preset not in APPLICATIONS:
        raise ConfigError(f"app needs a preset id from {sorted(APPLICATIONS)}")
    res = _resolution(cfg.resolutions or "64", 2)
    policy = _policy(cfg, int(np.prod(res)), default_seed=0)
    report = application_preset(cfg.preset, res, policy, allow_violation=True,
                                literal_p1=cfg.eq2_literal_p1)
    hyp = report.levels[0]["hypothesis"]
    if not hyp["satisfied"] and not cfg.allow_hypothesis_violation:
        raise HypothesisViolationError(HypothesisReport(**hyp))
    payload = dict(report.to_dict(), config=cfg.to_dict())
    _emit(cfg, payload, list(report.csv_rows()), stdout)
    return EXIT_OK


def cmd_expr_eval(cfg: RunConfig, stdout=None) -> int:
    if cfg.at is None or (cfg.expr is None and not cfg.predicate):
        raise ConfigError("expr-eval needs --at and --expr or --predicate")
    try:
        point = [float(s) for s in cfg.at.split(",")]
    except ValueError:
        raise ConfigError(f"--at must be comma-separated numbers, got {cfg.at!r}") from None
    payload = {"point": point}
    e = pred = None
    try:
        if cfg.expr is not None:
            e = parse_expr(cfg.expr)
        if cfg.predicate:
            pred = parse_predicate(cfg.predicate)
    except ExprSyntaxError as err:
        raise ConfigError(str(err)) from None
    for tree in (e, pred):
        if tree is not None and max_variable(tree) > len(point):
            raise ConfigError(f"expression uses x{max_variable(tree)} on a {len(point)}-D point")
    if e is not None:
        payload.update(expr=cfg.expr, canonical=unparse(e), value=eval_expr(e, point))
    if pred is not None:
        payload.update(predicate=cfg.predicate, canonical_predicate=unparse(pred),
                       holds=eval_predicate(pred, point))
    _emit(cfg, payload, None, stdout)
    return EXIT_OK


COMMANDS = {
    "beta": cmd_beta,
    "norms": cmd_norms,
    "embed": cmd_embed,
    "counterexample": cmd_counterexample,
    "app": cmd_app,
    "expr-eval": cmd_expr_eval,
}


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    """Execute a resolved config and map failures to exit codes."""
    stderr = stderr or sys.stderr
    try:
        with _threads(cfg):
            return COMMANDS[cfg.subcommand](cfg, stdout)
    except ConfigError as err:
        print(f"holderlab: config error: {err}", file=stderr)
        return EXIT_CONFIG
    except HypothesisViolationError as err:
        print(f"holderlab: hypothesis violation: {err} "
              f"(violating_cells={err.report.violating_cells}); "
              "pass --allow-hypothesis-violation to proceed", file=stderr)
        return EXIT_HYPOTHESIS
    except COMPUTE_ERRORS as err:
        print(f"holderlab: computation error: {err}", file=stderr)
        return EXIT_COMPUTE


def main(argv=None) -> int:
    ns = _parser().parse_args(argv)
    try:
        cfg = _config_from_args(ns)
    except ConfigError as err:
        print(f"holderlab: config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
