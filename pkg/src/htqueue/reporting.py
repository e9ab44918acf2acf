"""Run configuration, per-cell computation and table rendering.

A configuration is a JSON document. Keys at the top level act as defaults
for every entry of ``runs``::

    {
      "service": {"kind": "gamma", "scale": "1/2"},
      "arrival": {"kind": "gamma", "scale": "5/2"},
      "K": 5,
      "runs": [
        {"regime": "classical", "alpha": ["1/10", "1/100"], "columns": ["exact", "asymp"]},
        {"regime": "nd_gaussian", "beta": 1, "n": [10, 100],
         "columns": ["exact", "asymp", "asymp_refined"]}
      ]
    }

Optional sections ``quadrature``, ``euler`` and ``sim`` override the
numerical settings, and ``t`` (a list, or ``{"start", "stop", "num"}``)
fixes the CDF grid.
"""
from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from importlib import resources

import numpy as np

from .approximations import (classical_kingman, nd_gaussian_refined,
                             nd_gaussian_standard, nd_kingman)
from .distributions import DistributionSpec, from_dict
from .errors import ConfigError, HTQueueError
from .lst_inversion import EulerConfig
from .moments import K_MAX, exact_scaled_moments
from .quadrature import QuadratureConfig
from .simulation import SimConfig, simulate_waiting
from .transform import QueueInstance, ThinnedQueueInstance, gaussian_regime_params

REGIMES = ("classical", "nd_kingman", "nd_gaussian")
COLUMNS = ("exact", "asymp", "asymp_refined", "simulation")
DECIMALS = {"classical": 3, "nd_kingman": 3, "nd_gaussian": 4}


def _num(v, key):
    if isinstance(v, str):
        try:
            return float(Fraction(v))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{key}: cannot parse {v!r}") from exc
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {v!r}")
    return float(v)


def _override(cls, doc, key):
    if doc is None:
        return cls()
    if not isinstance(doc, dict):
        raise ConfigError(f"{key} must be an object")
    names = {f.name: f for f in fields(cls)}
    bad = set(doc) - set(names)
    if bad:
        raise ConfigError(f"{key}: unknown keys {sorted(bad)}")
    kw = {}
    for k, v in doc.items():
        kw[k] = v if isinstance(v, str) and names[k].type == "str" else (
            int(v) if names[k].type == "int" else _num(v, f"{key}.{k}"))
    return cls(**kw)


@dataclass(frozen=True)
class RunSpec:
    """One table: a queue, a regime and a parameter grid."""

    service: DistributionSpec
    arrival: DistributionSpec
    regime: str
    params: tuple
    beta: float | None = None
    K: int = 5
    columns: tuple = ("exact", "asymp")
    title: str = ""
    walk_method: str = "integral"
    t_grid: tuple | None = None

    @property
    def param_name(self) -> str:
        return "alpha" if self.regime == "classical" else "n"

    def instance(self, p):
        if self.regime == "classical":
            return QueueInstance.from_gap(self.service, self.arrival, p)
        return ThinnedQueueInstance(self.service, self.arrival, int(p), self.beta, self.regime)


@dataclass(frozen=True)
class RunConfig:
    runs: tuple
    quadrature: QuadratureConfig = QuadratureConfig()
    euler: EulerConfig = EulerConfig()
    sim: dict = field(default_factory=dict)
    name: str = ""


def _t_grid(doc):
    if doc is None:
        return None
    if isinstance(doc, dict):
        try:
            g = np.linspace(_num(doc["start"], "t.start"), _num(doc["stop"], "t.stop"),
                            int(doc["num"]))
        except KeyError as exc:
            raise ConfigError(f"t grid needs start, stop and num; missing {exc}") from exc
    else:
        g = np.array([_num(v, "t") for v in doc])
    if g.size == 0 or np.any(g <= 0):
        raise ConfigError("t grid must be nonempty and positive")
    return tuple(float(v) for v in g)


def parse_run(doc: dict, index: int = 0) -> RunSpec:
    where = f"runs[{index}]"
    for key in ("service", "arrival", "regime"):
        if key not in doc:
            raise ConfigError(f"{where}: missing {key!r}")
    regime = doc["regime"]
    if regime not in REGIMES:
        raise ConfigError(f"{where}: regime must be one of {REGIMES}, got {regime!r}")
    pkey = "alpha" if regime == "classical" else "n"
    raw = doc.get(pkey)
    if raw is None:
        raise ConfigError(f"{where}: missing {pkey!r} list")
    raw = raw if isinstance(raw, list) else [raw]
    if not raw:
        raise ConfigError(f"{where}: {pkey} list is empty")
    params = tuple(_num(v, pkey) for v in raw)
    if regime != "classical" and any(p != int(p) or p < 1 for p in params):
        raise ConfigError(f"{where}: n must be positive integers")
    beta = None
    if regime != "classical":
        beta = _num(doc.get("beta", 1.0), "beta")
    cols = doc.get("columns", ["exact", "asymp"])
    if isinstance(cols, str):
        cols = [cols]
    if not cols:
        raise ConfigError(f"{where}: at least one column must be requested")
    bad = [c for c in cols if c not in COLUMNS]
    if bad:
        raise ConfigError(f"{where}: unknown columns {bad}; choose from {COLUMNS}")
    if "asymp_refined" in cols and regime != "nd_gaussian":
        raise ConfigError(f"{where}: asymp_refined exists only for nd_gaussian")
    K = doc.get("K", 5)
    if not isinstance(K, int) or not 1 <= K <= K_MAX:
        raise ConfigError(f"{where}: K must be an integer in 1..{K_MAX}")
    method = doc.get("walk_method", "integral")
    if method not in ("integral", "zeta"):
        raise ConfigError(f"{where}: walk_method must be 'integral' or 'zeta'")
    return RunSpec(from_dict(doc["service"]), from_dict(doc["arrival"]), regime, params,
                   beta, K, tuple(cols), str(doc.get("title", "")), method,
                   _t_grid(doc.get("t")))


_SHARED = ("quadrature", "euler", "sim", "runs", "name", "description")


def parse_config(doc: dict, precision: str | None = None) -> RunConfig:
    """Validate a configuration document.

    Raises
    ------
    ConfigError
        On any structural or value problem.
    """
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    base = {k: v for k, v in doc.items() if k not in _SHARED}
    runs_doc = doc.get("runs", [{}] if base else [])
    if not isinstance(runs_doc, list) or not runs_doc:
        raise ConfigError("configuration needs a nonempty 'runs' list")
    runs = tuple(parse_run({**base, **r}, i) for i, r in enumerate(runs_doc))
    quad = dict(doc.get("quadrature") or {})
    if precision:
        quad["precision"] = precision
    if quad.get("precision", "double") not in ("double", "extended"):
        raise ConfigError("precision must be 'double' or 'extended'")
    sim = doc.get("sim") or {}
    if not isinstance(sim, dict):
        raise ConfigError("sim must be an object")
    bad = set(sim) - {"customers", "replications", "seed", "warmup"}
    if bad or not all(isinstance(v, int) and not isinstance(v, bool) for v in sim.values()):
        raise ConfigError(f"sim: integer keys customers, replications, seed, warmup only; got {sim}")
    try:
        return RunConfig(runs, _override(QuadratureConfig, quad, "quadrature"),
                         _override(EulerConfig, doc.get("euler"), "euler"), sim,
                         str(doc.get("name", "")))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path=None, preset=None, precision=None) -> RunConfig:
    if (path is None) == (preset is None):
        raise ConfigError("give exactly one of --config and --preset")
    try:
        if preset is not None:
            ref = resources.files("htqueue") / "presets" / f"{preset}.json"
            if not ref.is_file():
                raise ConfigError(f"unknown preset {preset!r}; available: {list_presets()}")
            text = ref.read_text()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        doc = json.loads(text)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read configuration: {exc}") from exc
    return parse_config(doc, precision)


def list_presets():
    d = resources.files("htqueue") / "presets"
    return sorted(p.name[:-5] for p in d.iterdir() if p.name.endswith(".json"))


# cells ----------------------------------------------------------------------

def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, float) and not np.isfinite(v):
        return None
    return v


def compute_cell(run: RunSpec, p: float, column: str, cfg: RunConfig) -> dict:
    """One (parameter, column) cell; errors are captured, not raised."""
    t0 = time.perf_counter()
    cell = {"param": p, "column": column, "status": "ok", "values": None, "errors": None,
            "path": "", "meta": {}}
    try:
        inst = run.instance(p)
        K, q = run.K, cfg.quadrature
        if column == "exact":
            mv = exact_scaled_moments(inst, K, q)
            vals, errs, path = mv.values[1:], mv.errors[1:], mv.source
            cell["meta"] = {k: v for k, v in mv.info.items() if k != "saddle"}
        elif column == "simulation":
            sim = SimConfig(inst, K=K, **cfg.sim)
            res = simulate_waiting(sim)
            vals, errs, path = res.moments, (res.ci_high - res.ci_low) / 2, "simulation"
            cell["meta"] = {"p_zero": res.p_zero, "customers": sim.customers,
                            "replications": sim.replications, "seed": sim.seed}
        elif run.regime == "classical":
            mv = classical_kingman(inst, K)
            vals, errs, path = mv.values[1:], mv.errors[1:], mv.source
        elif run.regime == "nd_kingman":
            mv = nd_kingman(inst, K)
            vals, errs, path = mv.values[1:], mv.errors[1:], mv.source
        else:
            fn = nd_gaussian_refined if column == "asymp_refined" else nd_gaussian_standard
            mv = fn(inst, K, run.walk_method, q)
            vals, errs, path = mv.values[1:], mv.errors[1:], mv.source
        if run.regime == "nd_gaussian":
            cell["meta"]["saddle"] = asdict(gaussian_regime_params(inst))
        cell.update(values=[float(v) for v in vals], errors=[float(e) for e in errs], path=path)
    except (HTQueueError, ArithmeticError, ValueError) as exc:
        cell.update(status="FAILED", error=f"{type(exc).__name__}: {exc}")
    cell["seconds"] = time.perf_counter() - t0
    return _jsonable(cell)


def _map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            return list(ex.map(fn, items))
    return [fn(i) for i in items]


def moments_report(cfg: RunConfig, threads: int = 1) -> dict:
    """Compute every cell of every run; output order is fixed by the config."""
    jobs = [(ri, p, c) for ri, run in enumerate(cfg.runs) for p in run.params
            for c in run.columns]
    cells = _map(lambda j: compute_cell(cfg.runs[j[0]], j[1], j[2], cfg), jobs, threads)
    tables = []
    for ri, run in enumerate(cfg.runs):
        tables.append({
            "title": run.title or f"{run.regime}: V={_label(run.service)}, U={_label(run.arrival)}",
            "regime": run.regime, "param_name": run.param_name, "beta": run.beta,
            "params": list(run.params), "columns": list(run.columns), "K": run.K,
            "decimals": DECIMALS[run.regime],
            "cells": [c for j, c in zip(jobs, cells) if j[0] == ri]})
    return {"command": "moments", "name": cfg.name, "tables": tables}


def _label(spec):
    from .distributions import describe
    return describe(spec)


def failed_cells(report: dict) -> int:
    return sum(c["status"] != "ok" for t in report.get("tables", []) for c in t["cells"])


# rendering ------------------------------------------------------------------

def _plabel(name, p):
    if name == "n":
        return f"n={int(p)}"
    return f"alpha={p:g}"


def render_markdown(report: dict) -> str:
    """Tables with rows ``k`` and a column pair (or triple) per parameter value."""
    out = []
    for t in report["tables"]:
        out.append(f"### {t['title']}")
        out.append("")
        cells = {(c["param"], c["column"]): c for c in t["cells"]}
        head = ["k"] + [f"{_plabel(t['param_name'], p)} {c}"
                        for p in t["params"] for c in t["columns"]]
        out.append("| " + " | ".join(head) + " |")
        out.append("|" + "---|" * len(head))
        d = t["decimals"]
        for k in range(1, t["K"] + 1):
            row = [str(k)]
            for p in t["params"]:
                for c in t["columns"]:
                    cell = cells[(p, c)]
                    row.append("FAILED" if cell["status"] != "ok"
                               else f"{cell['values'][k - 1]:.{d}f}")
            out.append("| " + " | ".join(row) + " |")
        fails = [c for c in t["cells"] if c["status"] != "ok"]
        for c in fails:
            out.append(f"\nFAILED {_plabel(t['param_name'], c['param'])} {c['column']}: "
                       f"{c.get('error', '')}")
        out.append("")
    return "\n".join(out)


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(v):
    return "" if v is None else repr(float(v))


def render_csv(report: dict) -> str:
    """Long format: one line per (table, parameter, column, k)."""
    rows = []
    for ti, t in enumerate(report["tables"]):
        for c in t["cells"]:
            for k in range(1, t["K"] + 1):
                ok = c["status"] == "ok"
                rows.append([ti, t["regime"], t["param_name"], _fmt(c["param"]), c["column"], k,
                             _fmt(c["values"][k - 1]) if ok else "",
                             _fmt(c["errors"][k - 1]) if ok else "", c["status"]])
    return _csv(rows, ["table", "regime", "param_name", "param", "column", "k", "value",
                       "error", "status"])


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


# error scan -----------------------------------------------------------------

def loglog_slope(x, y):
    """Least-squares slope of ``log y`` on ``log x``; ``None`` below two usable points."""
    x, y = np.asarray(x, float), np.abs(np.asarray(y, float))
    ok = (x > 0) & (y > 0) & np.isfinite(y)
    if ok.sum() < 2:
        return None
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def error_scan(report: dict) -> dict:
    """Signed and absolute errors of every approximation against the exact column."""
    rows, slopes = [], []
    for ti, t in enumerate(report["tables"]):
        cells = {(c["param"], c["column"]): c for c in t["cells"]}
        approx = [c for c in t["columns"] if c != "exact"]
        for col in approx:
            for k in range(1, t["K"] + 1):
                xs, errs = [], []
                for p in t["params"]:
                    ex, ap = cells.get((p, "exact")), cells.get((p, col))
                    if not ex or not ap or ex["status"] != "ok" or ap["status"] != "ok":
                        rows.append([ti, t["regime"], p, k, col, None, "FAILED"])
                        continue
                    e = ap["values"][k - 1] - ex["values"][k - 1]
                    xs.append(p)
                    errs.append(e)
                    rows.append([ti, t["regime"], p, k, col, e, "ok"])
                slopes.append([ti, t["regime"], k, col, loglog_slope(xs, errs)])
    return {"command": "error-scan", "rows": rows, "slopes": slopes}


def render_error_scan_csv(scan: dict) -> str:
    """One line per (table, parameter, k, column); ``slope`` is empty below two points."""
    slope = {(ti, k, c): s for ti, _, k, c, s in scan["slopes"]}
    rows = []
    for ti, reg, p, k, col, e, status in scan["rows"]:
        s = slope[(ti, k, col)]
        rows.append([ti, reg, _fmt(p), k, col, _fmt(e), "" if e is None else _fmt(abs(e)),
                     status, "" if s is None else repr(s)])
    return _csv(rows, ["table", "regime", "param", "k", "column", "error", "abs_error",
                       "status", "slope"])


def render_error_scan_md(scan: dict) -> str:
    out = ["| table | regime | k | column | log-log slope |", "|---|---|---|---|---|"]
    for ti, r, k, c, s in scan["slopes"]:
        out.append(f"| {ti} | {r} | {k} | {c} | {'' if s is None else f'{s:.3f}'} |")
    return "\n".join(out) + "\n"


# CDF scan -------------------------------------------------------------------

def compute_cdf_cell(run: RunSpec, p: float, column: str, cfg: RunConfig, t_grid) -> dict:
    from .lst_inversion import atom_at_zero, invert_cdf, make_approx_lst, make_exact_lst
    t0 = time.perf_counter()
    cell = {"param": p, "column": column, "status": "ok", "t": list(t_grid)}
    try:
        inst = run.instance(p)
        if column == "exact":
            h = make_exact_lst(inst, cfg.quadrature)
        else:
            kind = "refined" if column == "asymp_refined" else "standard"
            h = make_approx_lst(inst, kind, cfg.quadrature)
        m1 = _approx_mean(run, inst)
        res = invert_cdf(h, t_grid, cfg.euler)
        cell.update(values=[float(v) for v in res.values], p_zero=atom_at_zero(h, m1, cfg.euler),
                    clamped=res.clamped, path=h.label)
    except (HTQueueError, ArithmeticError, ValueError) as exc:
        cell.update(status="FAILED", error=f"{type(exc).__name__}: {exc}")
    cell["seconds"] = time.perf_counter() - t0
    return _jsonable(cell)


def _approx_mean(run, inst) -> float:
    if run.regime == "classical":
        return classical_kingman(inst, 1)[1]
    if run.regime == "nd_kingman":
        return nd_kingman(inst, 1)[1]
    return nd_gaussian_standard(inst, 1, run.walk_method)[1]


def default_t_grid(run: RunSpec, p: float, num: int = 80):
    m1 = _approx_mean(run, run.instance(p))
    return tuple(float(v) for v in np.linspace(8 * m1 / num, 8 * m1, num))


def cdf_report(cfg: RunConfig, threads: int = 1) -> dict:
    """Inverted CDFs of the scaled waiting time on a shared grid per parameter."""
    tables = []
    for run in cfg.runs:
        cols = [c for c in run.columns if c != "simulation"]
        if not cols:
            raise ConfigError("cdf needs at least one of exact, asymp, asymp_refined")
        blocks = []
        for p in run.params:
            try:
                grid = run.t_grid or default_t_grid(run, p)
            except HTQueueError as exc:
                raise ConfigError(f"cannot build a default t grid: {exc}") from exc
            cells = _map(lambda c: compute_cdf_cell(run, p, c, cfg, grid), cols, threads)
            blocks.append({"param": p, "t": list(grid), "cells": cells})
        tables.append({"regime": run.regime, "param_name": run.param_name,
                       "columns": cols, "blocks": blocks})
    return {"command": "cdf", "name": cfg.name, "tables": tables}


def cdf_failed(report: dict) -> int:
    return sum(c["status"] != "ok" for t in report["tables"] for b in t["blocks"]
               for c in b["cells"])


def render_cdf_csv(report: dict) -> str:
    """Columns ``F_<col>`` per grid point plus constant ``p0_<col>`` atoms."""
    cols = sorted({c for t in report["tables"] for c in t["columns"]}, key=COLUMNS.index)
    header = ["regime", "param", "t"] + [f"F_{c}" for c in cols] + [f"p0_{c}" for c in cols]
    rows = []
    for t in report["tables"]:
        for b in t["blocks"]:
            by = {c["column"]: c for c in b["cells"]}
            for i, tv in enumerate(b["t"]):
                F, P = [], []
                for c in cols:
                    cell = by.get(c)
                    ok = cell is not None and cell["status"] == "ok"
                    F.append(_fmt(cell["values"][i]) if ok else ("FAILED" if cell else ""))
                    P.append(_fmt(cell["p_zero"]) if ok else ("FAILED" if cell else ""))
                rows.append([t["regime"], _fmt(b["param"]), _fmt(tv)] + F + P)
    return _csv(rows, header)


def render_cdf_md(report: dict) -> str:
    out = []
    for t in report["tables"]:
        for b in t["blocks"]:
            out.append(f"### {t['regime']} {_plabel(t['param_name'], b['param'])}")
            out.append("")
            for c in b["cells"]:
                if c["status"] == "ok":
                    out.append(f"- {c['column']}: P(W=0) = {c['p_zero']:.4f}")
                else:
                    out.append(f"- {c['column']}: FAILED {c.get('error', '')}")
            out.append("")
    return "\n".join(out)
