"""Sweep orchestration over media and gap distances, plus all file output.

For every ``(medium, distance)`` the closed-form row is always produced; a
field-solver row follows when the ``field`` stage is on, and the circuit
stage fills the resonance and power columns of whichever rows exist.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from .analytic import ideal_pi, main_capacitance
from .circuit import CircuitParams, max_feasible_distance, operating_point, total_capacitance
from .errors import ConfigError, CPTError, EmptySweep, MissingStage, UnknownMaterial
from .field_solver import CapMatrix, Network, PiModel, extract_geometry, reduce_pi
from .geometry import CouplerGeometry, standard_geometry
from .materials import Material, MaterialRegistry, default_registry

log = logging.getLogger(__name__)

STAGES = ("analytic", "field", "circuit")
FIGURES = {"fig5": "c_m_f", "fig7": "k_c", "fig9": "p_out_w"}
CSV_COLUMNS = (
    "medium", "distance_m", "source",
    "c13_f", "c24_f", "c12_f", "c34_f", "c14_f", "c23_f",
    "c_p_f", "c_s_f", "c_m_f", "k_c", "f_res_hz", "feasible", "p_out_w",
)
DEFAULT_DISTANCES = {"start_m": 0.001, "stop_m": 0.20, "points": 25, "spacing": "log"}


# ---------------------------------------------------------------- config


@dataclass(frozen=True)
class GeometryConfig:
    plate_side_m: float = 0.30
    side_spacing_m: float | None = None
    slab_margin_m: float | None = None
    slab_enabled: bool = True
    refinement: int = 16
    ambient: str = "air"

    def at(self, distance: float) -> CouplerGeometry:
        return standard_geometry(
            self.plate_side_m, distance,
            side_spacing=self.side_spacing_m,
            slab_margin=self.slab_margin_m,
            slab_enabled=self.slab_enabled,
        )


@dataclass(frozen=True)
class SweepConfig:
    media: tuple[str, ...]
    distances: tuple[float, ...]
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    circuit: CircuitParams = field(default_factory=CircuitParams)
    stages: frozenset[str] = frozenset(STAGES)
    output_dir: str | None = None
    figures: tuple[str, ...] = ()
    dump_matrices: bool = False
    workers: int = 1


def parse_distances(spec) -> tuple[float, ...]:
    """Distances from a list, a range dict, or ``"start:stop:points[:log|linear]"``."""
    if isinstance(spec, str):
        parts = spec.split(":")
        if len(parts) not in (3, 4):
            raise ConfigError(f"distance range {spec!r} must be start:stop:points[:spacing]")
        try:
            spec = {"start_m": float(parts[0]), "stop_m": float(parts[1]),
                    "points": int(parts[2]), "spacing": parts[3] if len(parts) == 4 else "linear"}
        except ValueError as exc:
            raise ConfigError(f"bad distance range {spec!r}: {exc}") from None
    if isinstance(spec, dict):
        try:
            start, stop = float(spec["start_m"]), float(spec["stop_m"])
            points = int(spec["points"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"distance range needs start_m, stop_m, points: {exc}") from None
        spacing = spec.get("spacing", "linear")
        if points < 1:
            raise ConfigError("distance range needs at least one point")
        if not (start > 0 and stop > 0):
            raise ConfigError("distances must be positive")
        if spacing == "log":
            values = np.geomspace(start, stop, points)
        elif spacing == "linear":
            values = np.linspace(start, stop, points)
        else:
            raise ConfigError(f"spacing must be 'log' or 'linear', got {spacing!r}")
        out = tuple(float(x) for x in values)
    elif isinstance(spec, (list, tuple)):
        try:
            out = tuple(float(x) for x in spec)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"distances must be numbers: {exc}") from None
    else:
        raise ConfigError(f"cannot interpret distances {spec!r}")
    if not out:
        raise ConfigError("distance list is empty")
    if any(not (math.isfinite(d) and d > 0) for d in out):
        raise ConfigError("distances must be positive")
    return out


_GEOMETRY_KEYS = {f.name for f in fields(GeometryConfig)}
_CIRCUIT_KEYS = {"v_in_v": "v_in", "l_p_h": "l_p", "r_load_ohm": "r_load", "f_max_hz": "f_max"}


def config_from_dict(data: dict, registry: MaterialRegistry | None = None) -> SweepConfig:
    registry = registry or default_registry()
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    media = data.get("media")
    if not media or not isinstance(media, list):
        raise ConfigError("config needs a non-empty 'media' list")
    for name in media:
        try:
            registry.lookup(name)
        except UnknownMaterial as exc:
            raise ConfigError(str(exc)) from None
    geo = dict(data.get("geometry", {}))
    gap = geo.pop("gap_m", None)  # a lone gap stands in for a one-point sweep
    default = [gap] if gap is not None else DEFAULT_DISTANCES
    distances = parse_distances(data.get("distances", default))
    unknown = set(geo) - _GEOMETRY_KEYS
    if unknown:
        raise ConfigError(f"unknown geometry keys: {sorted(unknown)}")
    try:
        geometry = GeometryConfig(**geo)
        if geometry.refinement < 1 or int(geometry.refinement) != geometry.refinement:
            raise ConfigError("geometry.refinement must be a positive integer")
        geometry.at(distances[0])
        registry.lookup(geometry.ambient)
    except CPTError as exc:
        raise ConfigError(f"invalid geometry: {exc}") from None
    except TypeError as exc:
        raise ConfigError(f"invalid geometry: {exc}") from None

    circ = data.get("circuit", {})
    unknown = set(circ) - set(_CIRCUIT_KEYS)
    if unknown:
        raise ConfigError(f"unknown circuit keys: {sorted(unknown)}")
    try:
        circuit = CircuitParams(**{_CIRCUIT_KEYS[k]: float(v) for k, v in circ.items()})
    except (CPTError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid circuit block: {exc}") from None

    stages = data.get("stages", list(STAGES))
    bad = set(stages) - set(STAGES)
    if bad:
        raise ConfigError(f"unknown stages: {sorted(bad)}")
    stages = frozenset(stages) | {"analytic"}

    out = data.get("output", {}) or {}
    figures = tuple(out.get("figures", ()))
    bad = set(figures) - set(FIGURES)
    if bad:
        raise ConfigError(f"unknown figures: {sorted(bad)}")
    workers = int(data.get("workers", 1))
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return SweepConfig(
        media=tuple(media), distances=distances, geometry=geometry, circuit=circuit,
        stages=stages, output_dir=out.get("dir"), figures=figures,
        dump_matrices=bool(out.get("dump_matrices", False)), workers=workers,
    )


def load_config(path, registry: MaterialRegistry | None = None) -> SweepConfig:
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    return config_from_dict(data, registry)


# ---------------------------------------------------------------- rows


@dataclass
class SweepRow:
    medium: str
    distance_m: float
    source: str
    c13_f: float | None = None
    c24_f: float | None = None
    c12_f: float | None = None
    c34_f: float | None = None
    c14_f: float | None = None
    c23_f: float | None = None
    c_p_f: float | None = None
    c_s_f: float | None = None
    c_m_f: float | None = None
    k_c: float | None = None
    f_res_hz: float | None = None
    feasible: bool | None = None
    p_out_w: float | None = None
    error: str | None = None

    @property
    def network(self) -> Network:
        return Network(self.c12_f, self.c13_f, self.c14_f, self.c23_f, self.c24_f, self.c34_f)


@dataclass
class SweepResult:
    rows: list[SweepRow]
    summary: dict
    matrices: list[dict]

    @property
    def failed(self) -> int:
        return sum(r.error is not None for r in self.rows)


def analytic_row(material: Material, plate_side: float, distance: float) -> SweepRow:
    c_main = main_capacitance(material, plate_side * plate_side, distance)
    pi = ideal_pi(c_main)
    return SweepRow(
        material.name, distance, "analytic",
        c13_f=c_main, c24_f=c_main, c12_f=0.0, c34_f=0.0, c14_f=0.0, c23_f=0.0,
        c_p_f=pi.c_p, c_s_f=pi.c_s, c_m_f=pi.c_m, k_c=1.0,
    )


def _field_task(args):
    geometry, medium, refinement, ambient = args
    try:
        return extract_geometry(geometry, medium, refinement, ambient), None
    except (CPTError, np.linalg.LinAlgError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def field_row(material: Material, distance: float, cap: CapMatrix | None, error: str | None) -> SweepRow:
    if cap is None:
        return SweepRow(material.name, distance, "field", error=error or "extraction failed")
    net = cap.network
    try:
        pi = reduce_pi(net)
    except CPTError as exc:
        return SweepRow(material.name, distance, "field", error=f"{type(exc).__name__}: {exc}")
    return SweepRow(
        material.name, distance, "field",
        c13_f=net.c13, c24_f=net.c24, c12_f=net.c12, c34_f=net.c34, c14_f=net.c14, c23_f=net.c23,
        c_p_f=pi.c_p, c_s_f=pi.c_s, c_m_f=pi.c_m, k_c=pi.k_c,
    )


def apply_circuit(row: SweepRow, params: CircuitParams) -> SweepRow:
    if row.error is not None:
        return row
    pi = PiModel(row.c_p_f, row.c_s_f, row.c_m_f, row.k_c)
    try:
        op = operating_point(params, pi, (row.c13_f, row.c24_f))
    except CPTError as exc:
        row.error = f"{type(exc).__name__}: {exc}"
        return row
    row.f_res_hz, row.feasible, row.p_out_w = op.f_res, op.feasible, op.p_out
    return row


def _summarise(rows: Sequence[SweepRow], config: SweepConfig, registry: MaterialRegistry) -> dict:
    summary: dict[str, Any] = {"media": {}}
    d_lo, d_hi = min(config.distances), max(config.distances)
    area = config.geometry.plate_side_m ** 2
    for name in config.media:
        entry = {}
        for source in ("analytic", "field"):
            sel = [r for r in rows if r.medium == name and r.source == source and r.error is None]
            if not sel:
                continue
            info: dict[str, Any] = {"rows": len(sel), "failed": sum(
                1 for r in rows if r.medium == name and r.source == source and r.error is not None)}
            if "circuit" in config.stages:
                feas = [r for r in sel if r.feasible]
                info["max_feasible_grid_m"] = max((r.distance_m for r in feas), default=None)
                peak = max(sel, key=lambda r: r.p_out_w)
                info["peak_p_out_w"] = peak.p_out_w
                info["peak_distance_m"] = peak.distance_m
                if source == "analytic":
                    mat = registry.lookup(name)
                    horizon = max_feasible_distance(
                        lambda d: total_capacitance((main_capacitance(mat, area, d),) * 2),
                        config.circuit, d_lo, d_hi)
                else:
                    horizon = _interpolated_horizon(sel, config.circuit.f_max)
                info["max_feasible_distance_m"] = None if horizon is None or math.isnan(horizon) else horizon
            entry[source] = info
        summary["media"][name] = entry
    summary["rows"] = len(rows)
    summary["failed_rows"] = sum(r.error is not None for r in rows)
    return summary


def _interpolated_horizon(rows: Sequence[SweepRow], f_max: float) -> float | None:
    """Feasibility boundary between grid points, interpolating ``log f`` in ``log d``."""
    pts = sorted((r.distance_m, r.f_res_hz) for r in rows)
    if not pts or pts[0][1] > f_max:
        return None
    for (d0, f0), (d1, f1) in zip(pts, pts[1:]):
        if f0 <= f_max < f1:
            t = (math.log(f_max) - math.log(f0)) / (math.log(f1) - math.log(f0))
            return math.exp(math.log(d0) + t * (math.log(d1) - math.log(d0)))
    return pts[-1][0]


def run(config: SweepConfig, registry: MaterialRegistry | None = None) -> SweepResult:
    registry = registry or default_registry()
    media = [registry.lookup(name) for name in config.media]
    ambient = registry.lookup(config.geometry.ambient)
    plate = config.geometry.plate_side_m

    field_results: dict[tuple[int, int], tuple[CapMatrix | None, str | None]] = {}
    if "field" in config.stages:
        keys, tasks = [], []
        for i, mat in enumerate(media):
            for j, d in enumerate(config.distances):
                try:
                    geom = config.geometry.at(d)
                except CPTError as exc:
                    field_results[i, j] = (None, f"{type(exc).__name__}: {exc}")
                    continue
                keys.append((i, j))
                tasks.append((geom, mat, config.geometry.refinement, ambient))
        if config.workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=config.workers) as pool:
                results = list(pool.map(_field_task, tasks))
        else:
            results = [_field_task(t) for t in tasks]
        field_results.update(zip(keys, results))

    rows: list[SweepRow] = []
    matrices: list[dict] = []
    for i, mat in enumerate(media):
        for j, d in enumerate(config.distances):
            group = [analytic_row(mat, plate, d)]
            if "field" in config.stages:
                cap, err = field_results[i, j]
                group.append(field_row(mat, d, cap, err))
                if cap is not None:
                    matrices.append({"medium": mat.name, "distance_m": d, **cap.to_json()})
            if "circuit" in config.stages:
                group = [apply_circuit(r, config.circuit) for r in group]
            rows.extend(group)
    return SweepResult(rows, _summarise(rows, config, registry), matrices)


# ---------------------------------------------------------------- output


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    return f"{float(value):.8e}"


def format_csv(rows: Sequence[SweepRow]) -> str:
    if not rows:
        raise EmptySweep("no rows to write")
    with_error = any(r.error is not None for r in rows)
    header = list(CSV_COLUMNS) + (["error"] if with_error else [])
    lines = [",".join(header)]
    for r in rows:
        cells = [_fmt(getattr(r, c)) for c in CSV_COLUMNS]
        if with_error:
            cells.append((r.error or "").replace(",", ";").replace("\n", " "))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_csv(rows: Sequence[SweepRow], path) -> Path:
    path = Path(path)
    _write(path, format_csv(rows))
    return path


def emit_figure_data(rows: Sequence[SweepRow], figure: str, out_dir) -> list[Path]:
    """Write one ``distance, value`` CSV per medium and row source for a figure."""
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; choose from {sorted(FIGURES)}")
    column = FIGURES[figure]
    ok = [r for r in rows if r.error is None]
    if figure == "fig7" and not any(r.source == "field" for r in ok):
        raise MissingStage("fig7 needs field-solver rows")
    if figure == "fig9" and not any(r.p_out_w is not None for r in ok):
        raise MissingStage("fig9 needs the circuit stage")
    sources = ("field",) if figure == "fig7" else ("analytic", "field")
    out_dir = Path(out_dir)
    written = []
    media = list(dict.fromkeys(r.medium for r in ok))
    for medium in media:
        for source in sources:
            sel = [r for r in ok if r.medium == medium and r.source == source
                   and getattr(r, column) is not None]
            if not sel:
                continue
            lines = [f"distance_m,{column}"]
            lines += [f"{_fmt(r.distance_m)},{_fmt(getattr(r, column))}" for r in sel]
            path = out_dir / f"{figure}_{medium}_{source}.csv"
            _write(path, "\n".join(lines) + "\n")
            written.append(path)
    if not written:
        raise MissingStage(f"no rows carry the {column} column needed by {figure}")
    return written


def emit_summary(summary: dict, path) -> Path:
    path = Path(path)
    _write(path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return path


def emit_matrices(matrices: Iterable[dict], path) -> Path:
    path = Path(path)
    _write(path, json.dumps(list(matrices), indent=2) + "\n")
    return path


def write_outputs(result: SweepResult, config: SweepConfig, out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    paths = [emit_csv(result.rows, out_dir / "sweep.csv"),
             emit_summary(result.summary, out_dir / "summary.json")]
    for fig in config.figures:
        paths += emit_figure_data(result.rows, fig, out_dir)
    if config.dump_matrices:
        paths.append(emit_matrices(result.matrices, out_dir / "matrices.json"))
    return paths

