"""Config-driven experiment runs producing CSV/JSON reports."""
from __future__ import annotations

import csv
import datetime as _dt
import io as _io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bounds import upper_bound_log, verify_claim2
from .construction import build_L, derive_params, relaxed_params, special_transversals
from .counting import count_exact, enumerate_transversals, estimate_sis, has_transversal, sample_transversal
from .errors import ConfigError
from .hypercube import from_square, transversal_from_square
from .latin import _mix, cyclic_square, uniform_random_square, validate_latin

FORMAT_VERSION = 1
COLUMNS = [
    "pipeline", "instance", "source", "scope", "order", "b", "k", "seed",
    "exact_count", "sis_log_estimate", "sis_stderr", "sis_successes",
    "log_lower_target", "log_upper", "claims_checked", "claims_ok", "invariants_ok",
]

_SOURCES = ("generate", "construct")
_MEASURES = ("count", "estimate", "none")


@dataclass
class ExperimentReport:
    rows: list[dict]
    config: dict
    generated_at: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat())

    @property
    def ok(self) -> bool:
        return all(r["invariants_ok"] for r in self.rows)

    def to_csv(self) -> str:
        buf = _io.StringIO()
        buf.write(f"# latrans-report format={FORMAT_VERSION}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([_fmt(r[c]) for c in COLUMNS])
        return buf.getvalue()

    def to_json(self, *, timestamp: bool = True) -> str:
        obj = {
            "format_version": FORMAT_VERSION,
            "columns": COLUMNS,
            "config": self.config,
            "ok": self.ok,
            "rows": [{c: _json_val(r[c]) for c in COLUMNS} for r in self.rows],
        }
        if timestamp:
            obj["generated_at"] = self.generated_at
        return json.dumps(obj, indent=2, sort_keys=True)

    def write(self, out_dir: str | Path, stem: str = "report") -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = out / f"{stem}.csv", out / f"{stem}.json"
        csv_path.write_text(self.to_csv())
        json_path.write_text(self.to_json() + "\n")
        return csv_path, json_path


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_val(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def _get(d: dict, key: str, path: str, kind, default=None, choices=None):
    if key not in d:
        if default is None:
            raise ConfigError(f"{path}.{key}", "missing required key")
        return default
    v = d[key]
    if kind is int and (not isinstance(v, int) or isinstance(v, bool)):
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v!r}")
    if kind is bool and not isinstance(v, bool):
        raise ConfigError(f"{path}.{key}", f"expected true/false, got {v!r}")
    if kind is str and not isinstance(v, str):
        raise ConfigError(f"{path}.{key}", f"expected a string, got {v!r}")
    if choices is not None and v not in choices:
        raise ConfigError(f"{path}.{key}", f"must be one of {list(choices)}, got {v!r}")
    return v


def normalize_config(config: dict) -> dict:
    """Fill defaults and validate; errors name the offending key path."""
    if not isinstance(config, dict):
        raise ConfigError("$", "config must be a mapping")
    seed = _get(config, "seed", "$", int, 0)
    pipes = config.get("pipelines")
    if not isinstance(pipes, list) or not pipes:
        raise ConfigError("$.pipelines", "expected a non-empty list")
    out = []
    for i, p in enumerate(pipes):
        path = f"$.pipelines[{i}]"
        if not isinstance(p, dict):
            raise ConfigError(path, "expected a mapping")
        source = _get(p, "source", path, str, choices=_SOURCES)
        q = {
            "name": _get(p, "name", path, str, f"p{i}"),
            "source": source,
            "measure": _get(p, "measure", path, str, "count" if source == "generate" else "estimate",
                            choices=_MEASURES),
            "samples": _get(p, "samples", path, int, 10_000),
            "row_order": _get(p, "row_order", path, str, "fixed" if source == "generate" else "mrv",
                              choices=("fixed", "mrv")),
            "bounds": _get(p, "bounds", path, bool, True),
            "claims": _get(p, "claims", path, bool, False),
        }
        ct = p.get("claim_transversals", 1)
        if ct != "all" and (not isinstance(ct, int) or isinstance(ct, bool) or ct < 1):
            raise ConfigError(f"{path}.claim_transversals", "expected a positive integer or 'all'")
        q["claim_transversals"] = ct
        if q["samples"] < 2:
            raise ConfigError(f"{path}.samples", "must be >= 2")
        if source == "generate":
            q["generator"] = _get(p, "generator", path, str, choices=("cyclic", "random"))
            orders = p.get("orders")
            if not isinstance(orders, list) or not orders or not all(
                isinstance(o, int) and not isinstance(o, bool) and o >= 1 for o in orders
            ):
                raise ConfigError(f"{path}.orders", "expected a non-empty list of positive integers")
            q["orders"] = orders
            q["squares_per_order"] = _get(p, "squares_per_order", path, int, 1)
        else:
            q["b"] = _get(p, "b", path, int)
            if "k" in p:
                q["k"] = _get(p, "k", path, int)
            scopes = p.get("scopes", ["all"])
            if not isinstance(scopes, list) or not scopes or any(s not in ("all", "nonspecial") for s in scopes):
                raise ConfigError(f"{path}.scopes", "expected a list drawn from ['all', 'nonspecial']")
            q["scopes"] = scopes
            if q["measure"] == "count":
                raise ConfigError(f"{path}.measure", "constructed squares are too large to count exactly")
        out.append(q)
    return {"seed": seed, "pipelines": out}


def _claims(square, how, seed):
    """(pairs checked, pairs passing) over chosen transversals."""
    n = square.order
    if n <= 2:
        return 0, 0
    if how == "all":
        ts = enumerate_transversals(square) if n <= 14 else []
    else:
        ts = []
        if n > 14 or has_transversal(square):
            for j in range(how):
                t = sample_transversal(square, _mix(seed, 0xC1A1, j), max_walks=200_000)
                if t is not None:
                    ts.append(t)
    h = from_square(square)
    ok = 0
    for t in ts:
        x = transversal_from_square(square, t)
        reps = [verify_claim2(h, x, i) for i in range(n)]
        ok += all(r.claim1_ok and r.claim2_ok for r in reps)
    return len(ts), ok


def _bound_fields(n):
    if n <= 4:
        return None, None
    bv = upper_bound_log(2, n)
    return bv.log_lower_target, bv.log_upper


def _square_row(p, label, square, seed, extra, scope="all", allowed=None):
    n = square.order
    row = dict.fromkeys(COLUMNS)
    row.update(pipeline=p["name"], instance=label, source=p["source"], scope=scope,
               order=n, seed=seed, **extra)
    ok = validate_latin(square).valid
    lower, upper = _bound_fields(n) if p["bounds"] else (None, None)
    row["log_lower_target"], row["log_upper"] = lower, upper
    if p["measure"] == "count":
        c = count_exact(square).count
        row["exact_count"] = c
        if upper is not None and c > 0:
            ok &= math.log(c) <= upper
    elif p["measure"] == "estimate":
        est = estimate_sis(square, p["samples"], seed, row_order=p["row_order"], allowed=allowed)
        row["sis_log_estimate"] = est.log_mean
        row["sis_stderr"] = est.log_stderr
        row["sis_successes"] = est.successes
        if upper is not None and math.isfinite(est.log_mean):
            ok &= est.log_mean - 3 * est.log_stderr <= upper
    if p["claims"] and scope == "all":
        checked, good = _claims(square, p["claim_transversals"], seed)
        row["claims_checked"], row["claims_ok"] = checked, good
        ok &= checked == good
    row["invariants_ok"] = bool(ok)
    return row


def _tasks(cfg):
    """Yield zero-argument callables, one per report row group, in config order."""
    master = cfg["seed"]
    for pi, p in enumerate(cfg["pipelines"]):
        if p["source"] == "generate":
            idx = 0
            for n in p["orders"]:
                reps = 1 if p["generator"] == "cyclic" else p["squares_per_order"]
                for r in range(reps):
                    seed = _mix(master, pi, idx)
                    idx += 1

                    def task(p=p, n=n, r=r, seed=seed):
                        if p["generator"] == "cyclic":
                            sq, label = cyclic_square(n), f"C{n}"
                        else:
                            sq, label = uniform_random_square(n, seed), f"R{n}.{r}"
                        return [_square_row(p, label, sq, seed, {})]

                    yield task
        else:
            seed = _mix(master, pi, 0)

            def task(p=p, seed=seed):
                params = derive_params(p["b"]) if "k" not in p else relaxed_params(p["b"], p["k"])
                bs = build_L(params, seed)
                extra = {"b": params.b, "k": params.k}
                st = special_transversals(bs)
                structure_ok = (
                    len(st) == params.max_padding
                    and st.pairwise_disjoint()
                    and bool(np.all(bs.special_cell_mask[np.arange(params.N)[None, :], st.columns]))
                )
                rows = []
                for scope in p["scopes"]:
                    allowed = None if scope == "all" else ~bs.special_cell_mask
                    row = _square_row(p, f"L(b={params.b},k={params.k})", bs.L, seed, extra, scope, allowed)
                    row["invariants_ok"] = bool(row["invariants_ok"] and structure_ok)
                    rows.append(row)
                return rows

            yield task


def run_experiment(config: dict, *, workers: int = 1) -> ExperimentReport:
    """Run every pipeline in `config`; rows keep config order whatever `workers` is."""
    cfg = normalize_config(config)
    tasks = list(_tasks(cfg))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            groups = list(ex.map(lambda t: t(), tasks))
    else:
        groups = [t() for t in tasks]
    return ExperimentReport([row for g in groups for row in g], cfg)


def load_config(path: str | Path) -> dict:
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc.msg} (line {exc.lineno})") from None


__all__ = ["ExperimentReport", "run_experiment", "normalize_config", "load_config", "COLUMNS", "FORMAT_VERSION"]
