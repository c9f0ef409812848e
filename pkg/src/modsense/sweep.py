"""Sweep execution: config parsing, grid evaluation, caching, result tables.

A sweep is described by a JSON config (one file per figure/run) holding the
task name, the model parameters, up to two swept axes, and execution options.
Grid points are evaluated by a worker pool and merged by grid index, so the
output is independent of the worker count. Each evaluated point is cached on
disk under a hash of (task, model, options, point); reruns recompute nothing.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .errors import ValidationError, NumericalError

TASKS = (
    "qfi-scan",
    "phase-diagram",
    "collapse",
    "global-opt",
    "ssh-bands",
    "ssh-qfi",
    "ssh-winding",
    "oracle-check",
)

XY_TASKS = {"qfi-scan", "phase-diagram", "collapse", "global-opt", "oracle-check"}
AXIS_NAMES = {
    "qfi-scan": {"h", "J", "gamma", "n_sites"},
    "phase-diagram": {"h", "J", "gamma"},
    "collapse": {"h", "n_sites"},
    "global-opt": {"n_sites"},
    "oracle-check": {"h", "n_sites"},
    "ssh-bands": {"p"},
    "ssh-qfi": {"j2", "J", "n_cells"},
    "ssh-winding": {"j2", "J"},
}


@dataclass(frozen=True)
class SweepConfig:
    """Parsed and validated sweep description."""

    task: str
    model: dict
    axes: tuple = ()
    out_dir: str = "."
    workers: int = 1
    seed: int = 0
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ValidationError(f"unknown task {self.task!r}; choose from {TASKS}")
        if self.workers < 1:
            raise ValidationError("workers must be >= 1")
        if len(self.axes) > 2:
            raise ValidationError("at most 2 swept axes are supported")
        allowed = AXIS_NAMES[self.task]
        for axis in self.axes:
            if axis["name"] not in allowed:
                raise ValidationError(
                    f"axis {axis['name']!r} not valid for task {self.task!r} "
                    f"(allowed: {sorted(allowed)})"
                )

    @classmethod
    def from_dict(cls, raw: dict) -> "SweepConfig":
        if not isinstance(raw, dict):
            raise ValidationError("config root must be a JSON object")
        unknown = set(raw) - {"task", "model", "axes", "out_dir", "workers", "seed", "options"}
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        if "task" not in raw:
            raise ValidationError("config is missing the 'task' field")
        axes = tuple(_parse_axis(a) for a in raw.get("axes", []))
        return cls(
            task=str(raw["task"]),
            model=dict(raw.get("model", {})),
            axes=axes,
            out_dir=str(raw.get("out_dir", ".")),
            workers=int(raw.get("workers", 1)),
            seed=int(raw.get("seed", 0)),
            options=dict(raw.get("options", {})),
        )

    @classmethod
    def from_json(cls, path: str) -> "SweepConfig":
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def with_overrides(self, assignments) -> "SweepConfig":
        """Apply ``key=value`` overrides with dotted paths into the raw config."""
        raw = {
            "task": self.task,
            "model": dict(self.model),
            "axes": [dict(a) for a in self.axes],
            "out_dir": self.out_dir,
            "workers": self.workers,
            "seed": self.seed,
            "options": dict(self.options),
        }
        for item in assignments:
            if "=" not in item:
                raise ValidationError(f"override {item!r} is not of the form key=value")
            key, text = item.split("=", 1)
            try:
                value = json.loads(text)
            except json.JSONDecodeError:
                value = text
            node = raw
            parts = key.split(".")
            for part in parts[:-1]:
                if isinstance(node, list):
                    node = node[int(part)]
                else:
                    node = node.setdefault(part, {})
            leaf = parts[-1]
            if isinstance(node, list):
                node[int(leaf)] = value
            else:
                node[leaf] = value
        return SweepConfig.from_dict(raw)

    def config_hash(self) -> str:
        """Provenance hash of everything that affects the computed values.

        Output location and worker count are excluded: they must not change
        the result bytes.
        """
        payload = {
            "task": self.task,
            "model": self.model,
            "axes": [dict(a) for a in self.axes],
            "seed": self.seed,
            "options": self.options,
        }
        return _sha256_of(payload)[:16]


@dataclass(frozen=True)
class ResultTable:
    """Row-major sweep results with provenance metadata."""

    columns: tuple
    rows: tuple  # tuples aligned with columns
    metadata: dict

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise ValidationError(f"no column {name!r} in table (have {self.columns})")
        i = self.columns.index(name)
        values = [row[i] for row in self.rows]
        if all(isinstance(v, (int, float)) or v is None for v in values):
            return np.array([np.nan if v is None else v for v in values], dtype=float)
        return np.array(values, dtype=object)

    @property
    def axis_columns(self) -> tuple:
        names = self.metadata.get("axis_columns", "")
        return tuple(n for n in names.split(",") if n)


def _parse_axis(raw: dict) -> dict:
    if "name" not in raw:
        raise ValidationError("axis entry is missing 'name'")
    axis = {"name": str(raw["name"])}
    if "values" in raw:
        values = list(raw["values"])
        if not values:
            raise ValidationError(f"axis {axis['name']!r} has an empty values list")
        axis["values"] = values
        return axis
    for key in ("min", "max", "count"):
        if key not in raw:
            raise ValidationError(f"axis {axis['name']!r} needs min/max/count or values")
    if int(raw["count"]) < 1:
        raise ValidationError("axis count must be >= 1")
    axis.update(min=float(raw["min"]), max=float(raw["max"]), count=int(raw["count"]))
    return axis


def axis_values(axis: dict) -> list:
    if "values" in axis:
        if axis["name"] in ("n_sites", "n_cells"):
            return [int(v) for v in axis["values"]]
        return [float(v) for v in axis["values"]]
    if axis["count"] == 1:
        vals = [axis["min"]]
    else:
        vals = list(np.linspace(axis["min"], axis["max"], axis["count"]))
    if axis["name"] in ("n_sites", "n_cells"):
        return [int(round(v)) for v in vals]
    return [float(v) for v in vals]


def grid_points(config: SweepConfig) -> list:
    """Axis-ordered list of point dicts; the last axis varies fastest."""
    if not config.axes:
        return [{}]
    values = [axis_values(a) for a in config.axes]
    names = [a["name"] for a in config.axes]
    points = []
    if len(names) == 1:
        for v in values[0]:
            points.append({names[0]: v})
    else:
        for v1 in values[0]:
            for v2 in values[1]:
                points.append({names[0]: v1, names[1]: v2})
    return points


def _sha256_of(payload) -> str:
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=repr)
    return hashlib.sha256(text.encode()).hexdigest()


def resolve_cache_dir(out_dir: str = ".") -> str:
    return os.environ.get("SENSOR_CACHE_DIR") or os.path.join(out_dir, ".sensor_cache")


def _cache_path(cache_dir: str, key: str) -> str:
    return os.path.join(cache_dir, key[:2], key + ".json")


def _cache_read(cache_dir: str, key: str):
    path = _cache_path(cache_dir, key)
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError):
        return None


def _cache_write(cache_dir: str, key: str, record: dict) -> None:
    path = _cache_path(cache_dir, key)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(record, fh, sort_keys=True)
    os.replace(tmp, path)


def _xy_spec(model: dict, point: dict):
    from .xy_chain import XYChainSpec

    merged = dict(model)
    for name, value in point.items():
        if name == "h":
            merged["field"] = value
        elif name == "J":
            merged["inter_coupling"] = value
        elif name == "gamma":
            merged["anisotropy"] = value
        else:
            merged[name] = value
    return XYChainSpec(**merged)


def _ssh_spec(model: dict, point: dict):
    from .ssh import SSHChainSpec

    merged = dict(model)
    for name, value in point.items():
        if name == "J":
            merged["inter_coupling"] = value
        elif name != "p":
            merged[name] = value
    return SSHChainSpec(**merged)


def evaluate_point(task: str, model: dict, options: dict, point: dict) -> dict:
    """Compute the result columns of one grid point (pure function)."""
    if task in ("qfi-scan", "collapse"):
        from .qfi import qfi_finite_difference

        spec = _xy_spec(model, point)
        parameter = options.get("parameter", "h")
        result = qfi_finite_difference(
            spec,
            parameter,
            step=options.get("step"),
            richardson=bool(options.get("richardson", True)),
        )
        return {"qfi": result.value, "gap_closed": int(result.gap_closed)}

    if task == "phase-diagram":
        from .phase_boundary import boundary_determinant, ISING_GUARD

        h = point.get("h", model.get("h", 0.0))
        j = point.get("J", model.get("J", model.get("inter_coupling", 1.0)))
        gamma = point.get("gamma", model.get("gamma", model.get("anisotropy", 0.5)))
        gamma = min(gamma, 1.0 - ISING_GUARD)
        r = int(model.get("r", model.get("cell_size", 1)))
        det_plus = boundary_determinant(h, j, gamma, r, 1)
        det_minus = boundary_determinant(h, j, gamma, r, -1)
        return {
            "det_plus": det_plus,
            "det_minus": det_minus,
            "phase_sign": float(np.sign(det_plus) * np.sign(det_minus)),
        }

    if task == "global-opt":
        from .global_sensing import GlobalSensingProblem, optimize_control_field

        spec = _xy_spec(model, point)
        problem = GlobalSensingProblem(
            spec=spec,
            h0=float(options.get("h0", 0.0)),
            width=float(options.get("width", 0.1)),
            n_points=int(options.get("n_points", 51)),
        )
        search = tuple(options.get("search_range", (-1.5, 1.5)))
        result = optimize_control_field(
            problem, search_range=search, n_scan=int(options.get("n_scan", 301))
        )
        return {
            "h_ctr_opt": result.h_ctr_opt,
            "g_opt": result.g_opt,
            "effective_center": result.effective_center,
        }

    if task == "oracle-check":
        from .qfi import qfi_finite_difference
        from .ed import qfi_ed

        spec = _xy_spec(model, point)
        step = float(options.get("step", 1e-4))
        ff = qfi_finite_difference(spec, "h", step=step, richardson=False)
        ed = qfi_ed(spec, "h", step=step)
        rel = abs(ff.value - ed.value) / max(abs(ed.value), 1e-300)
        return {"qfi_ff": ff.value, "qfi_ed": ed.value, "rel_diff": rel}

    if task == "ssh-bands":
        from .ssh import band_structure

        spec = _ssh_spec(model, point)
        p = float(point["p"])
        bands = band_structure(spec, [p])
        return {f"energy_{i}": float(e) for i, e in enumerate(bands.energies[0])}

    if task == "ssh-qfi":
        from .ssh import half_filling_qfi

        spec = _ssh_spec(model, point)
        result = half_filling_qfi(spec, step=options.get("step"))
        return {"q_total": result.total, "diverged": int(result.diverged)}

    if task == "ssh-winding":
        from .ssh import winding_number

        spec = _ssh_spec(model, point)
        result = winding_number(spec, n_samples=int(options.get("n_samples", 401)))
        return {"index": float(result.index), "max_residual": result.max_residual}

    raise ValidationError(f"unknown task {task!r}")  # pragma: no cover


def _worker(args):
    task, model, options, point = args
    try:
        return evaluate_point(task, model, options, point), ""
    except Exception as exc:  # recorded per row, not fatal
        return {}, f"{type(exc).__name__}: {exc}"


def _result_columns(task: str, config: SweepConfig) -> list:
    if task in ("qfi-scan", "collapse"):
        return ["qfi", "gap_closed"]
    if task == "phase-diagram":
        return ["det_plus", "det_minus", "phase_sign"]
    if task == "global-opt":
        return ["h_ctr_opt", "g_opt", "effective_center"]
    if task == "oracle-check":
        return ["qfi_ff", "qfi_ed", "rel_diff"]
    if task == "ssh-bands":
        r = int(config.model.get("dimers_per_cell", 1))
        return [f"energy_{i}" for i in range(2 * r)]
    if task == "ssh-qfi":
        return ["q_total", "diverged"]
    if task == "ssh-winding":
        return ["index", "max_residual"]
    raise ValidationError(f"unknown task {task!r}")  # pragma: no cover


def run_sweep(config: SweepConfig, cache_dir: str | None = None) -> ResultTable:
    """Evaluate the task over the configured grid.

    Rows follow the grid order (last axis fastest) regardless of worker
    count. Per-point failures are recorded in the ``status`` column with NaN
    results; the sweep only fails when every point fails.
    """
    if cache_dir is None:
        cache_dir = resolve_cache_dir(config.out_dir)
    points = grid_points(config)
    keys = [
        _sha256_of({"task": config.task, "model": config.model,
                    "options": config.options, "point": point})
        for point in points
    ]
    results: list = [None] * len(points)
    pending = []
    for i, key in enumerate(keys):
        cached = _cache_read(cache_dir, key)
        if cached is not None:
            results[i] = (cached.get("values", {}), cached.get("status", ""))
        else:
            pending.append(i)

    if pending:
        jobs = [(config.task, config.model, config.options, points[i]) for i in pending]
        if config.workers > 1 and len(jobs) > 1:
            import multiprocessing

            with multiprocessing.Pool(config.workers) as pool:
                outcomes = pool.map(_worker, jobs)
        else:
            outcomes = [_worker(job) for job in jobs]
        for i, outcome in zip(pending, outcomes):
            results[i] = outcome
            _cache_write(
                cache_dir, keys[i], {"values": outcome[0], "status": outcome[1]}
            )

    axis_names = [a["name"] for a in config.axes]
    value_names = _result_columns(config.task, config)
    columns = tuple(axis_names + value_names + ["status"])
    rows = []
    n_failed = 0
    for point, (values, status) in zip(points, results):
        row = [point[name] for name in axis_names]
        for name in value_names:
            v = values.get(name)
            row.append(float("nan") if v is None else v)
        row.append(status if status else "ok")
        if status:
            n_failed += 1
        rows.append(tuple(row))
    if rows and n_failed == len(rows):
        raise NumericalError(
            f"all {len(rows)} grid points failed; first error: {results[0][1]}"
        )
    metadata = {
        "task": config.task,
        "config_hash": config.config_hash(),
        "version": __version__,
        "axis_columns": ",".join(axis_names),
        "n_failed": str(n_failed),
    }
    table = ResultTable(columns=columns, rows=tuple(rows), metadata=metadata)
    return _postprocess(config, table)


def _postprocess(config: SweepConfig, table: ResultTable) -> ResultTable:
    """Attach task-level fit summaries to the table metadata."""
    metadata = dict(table.metadata)
    if config.task == "collapse" and "n_sites" in table.axis_columns:
        from .scaling import ScalingDataset, fit_collapse

        h_c = config.options.get("h_c")
        if h_c is not None:
            records = [
                (row[table.columns.index("n_sites")],
                 row[table.columns.index("h")],
                 row[table.columns.index("qfi")])
                for row in table.rows
                if row[table.columns.index("status")] == "ok"
                and row[table.columns.index("qfi")] > 0
            ]
            fit = fit_collapse(
                ScalingDataset.from_records(records),
                float(h_c),
                window=float(config.options.get("window", 0.1)),
            )
            metadata.update(
                beta=f"{fit.beta:.6f}",
                nu=f"{fit.nu:.6f}",
                h_c=f"{fit.h_c:.6f}",
                collapse_cost=f"{fit.collapse_cost:.6e}",
            )
    if config.task == "global-opt" and "n_sites" in table.axis_columns:
        from .scaling import loglog_slope

        ok = [
            (row[table.columns.index("n_sites")], row[table.columns.index("g_opt")])
            for row in table.rows
            if row[table.columns.index("status")] == "ok"
        ]
        if len(ok) >= 3:
            slope, err = loglog_slope(ok)
            metadata.update(exponent_b=f"{-slope:.6f}", exponent_b_err=f"{err:.6f}")
    return replace(table, metadata=metadata)
