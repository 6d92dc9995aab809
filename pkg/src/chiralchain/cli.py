"""Experiment runner: JSON configs, parameter scans, CSV and SVG emission.

One experiment per config file, exactly one scan axis (length, delta, switch
position, or none).  Output tables carry a provenance comment block and are
byte-identical across runs for a fixed config and seed; a timestamp comment
is added unless rendering in reproducible mode.

Exit codes: 0 success, 1 config error, 2 numerical failure, 3 self-check
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    BOUND_CSV_HEADER,
    BoundCertificate,
    anticommutator_trace_norms,
    edge_filter_decay_check,
    lieb_robinson_check,
)
from .hamiltonian import (
    CouplingProfile,
    apply_defect,
    apply_disorder,
    build_ssh,
    bulk_gap,
    short_range_constant,
    verify_chiral,
)
from .indices import (
    INDEX_CSV_HEADER,
    DeltaMode,
    DeltaPolicy,
    IndexKind,
    IndexReport,
    index_density,
    index_report,
    resolve_delta,
)
from .lattice import Convention, SwitchError, make_geometry, switch_function
from .spectral import FilterParams, NumericalError, gap_filter
from .svgplot import PlotKind, emit_plot

DENSITY_CSV_HEADER = ["cell", "value", "kind"]

FIG3_LENGTHS = list(range(10, 101, 10))

# Times probed by the propagator certificate pipeline.
BOUNDS_TIMES = (0.1, 0.5, 1.0)


class ConfigError(ValueError):
    """Invalid experiment configuration; the message carries the field path."""


class ScanAxis(Enum):
    LENGTH = "length"
    DELTA = "delta"
    SWITCH = "switch"
    NONE = "none"


# ---------------------------------------------------------------------------
# Configuration schema
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DisorderConfig:
    amplitude: float = 0.0
    seed: int | None = None


@dataclass(frozen=True)
class DefectConfig:
    height: float = 0.0
    center_frac: float = 0.5
    width: float = 1.0


@dataclass(frozen=True)
class ModelConfig:
    t1: float | tuple
    t2: float | tuple
    disorder: DisorderConfig = DisorderConfig()
    defect: DefectConfig = DefectConfig()
    boundary_potential: tuple = ()


@dataclass(frozen=True)
class DeltaConfig:
    mode: DeltaMode = DeltaMode.EMPIRICAL
    value: float | None = None
    decay_length: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelConfig
    length: int | tuple
    convention: Convention = Convention.CELL_C2
    delta: DeltaConfig = DeltaConfig()
    switch: int | str | tuple = "middle"
    seed: int | None = None
    scan: ScanAxis = ScanAxis.NONE
    delta_values: tuple = ()
    output: str | None = None

    def to_dict(self) -> dict:
        """Canonical plain-dict form; parse(to_dict()) round-trips."""
        model = {"t1": _plain(self.model.t1), "t2": _plain(self.model.t2)}
        if self.model.disorder.amplitude or self.model.disorder.seed is not None:
            d = {"amplitude": self.model.disorder.amplitude}
            if self.model.disorder.seed is not None:
                d["seed"] = self.model.disorder.seed
            model["disorder"] = d
        if self.model.defect.height:
            model["defect"] = {
                "height": self.model.defect.height,
                "center_frac": self.model.defect.center_frac,
                "width": self.model.defect.width,
            }
        if self.model.boundary_potential:
            model["boundary_potential"] = [list(p) for p in self.model.boundary_potential]
        out = {
            "model": model,
            "geometry": {
                "length": _plain(self.length),
                "convention": self.convention.value,
            },
            "switch": _plain(self.switch),
            "scan": self.scan.value,
        }
        if self.scan is ScanAxis.DELTA:
            out["delta_values"] = list(self.delta_values)
        else:
            delta = {"mode": self.delta.mode.value}
            if self.delta.mode is DeltaMode.MANUAL:
                delta["value"] = self.delta.value
            if self.delta.mode is DeltaMode.THEOREM:
                delta["decay_length"] = self.delta.decay_length
            out["delta"] = delta
        if self.seed is not None:
            out["seed"] = self.seed
        if self.output is not None:
            out["output"] = self.output
        return out

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _plain(v):
    if isinstance(v, tuple):
        return list(v)
    return v


def _expect(cond: bool, path: str, message: str):
    if not cond:
        raise ConfigError(f"{path}: {message}")


def _get_number(d: dict, key: str, path: str, default=None, required=False):
    if key not in d:
        _expect(not required, f"{path}.{key}", "is required")
        return default
    v = d[key]
    _expect(isinstance(v, (int, float)) and not isinstance(v, bool), f"{path}.{key}", "must be a number")
    return float(v)


def _get_int(d: dict, key: str, path: str, default=None, required=False):
    if key not in d:
        _expect(not required, f"{path}.{key}", "is required")
        return default
    v = d[key]
    _expect(isinstance(v, int) and not isinstance(v, bool), f"{path}.{key}", "must be an integer")
    return int(v)


def _coupling_field(d: dict, key: str, path: str):
    _expect(key in d, f"{path}.{key}", "is required")
    v = d[key]
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return float(v)
    if isinstance(v, list):
        _expect(
            all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v),
            f"{path}.{key}",
            "must be a number or a list of numbers",
        )
        return tuple(float(x) for x in v)
    raise ConfigError(f"{path}.{key}: must be a number or a list of numbers")


def parse_config(raw: dict) -> ExperimentConfig:
    """Validate a raw JSON object into an ExperimentConfig; errors carry field paths."""
    _expect(isinstance(raw, dict), "config", "must be a JSON object")
    unknown = set(raw) - {
        "model", "geometry", "delta", "switch", "seed", "scan", "delta_values", "output",
    }
    _expect(not unknown, "config", f"unknown keys {sorted(unknown)}")

    model_raw = raw.get("model")
    _expect(isinstance(model_raw, dict), "model", "must be an object")
    t1 = _coupling_field(model_raw, "t1", "model")
    t2 = _coupling_field(model_raw, "t2", "model")

    disorder = DisorderConfig()
    if "disorder" in model_raw:
        d = model_raw["disorder"]
        _expect(isinstance(d, dict), "model.disorder", "must be an object")
        amplitude = _get_number(d, "amplitude", "model.disorder", required=True)
        _expect(amplitude >= 0, "model.disorder.amplitude", "must be >= 0")
        disorder = DisorderConfig(amplitude, _get_int(d, "seed", "model.disorder"))

    defect = DefectConfig()
    if "defect" in model_raw:
        d = model_raw["defect"]
        _expect(isinstance(d, dict), "model.defect", "must be an object")
        width = _get_number(d, "width", "model.defect", default=1.0)
        _expect(width > 0, "model.defect.width", "must be > 0")
        defect = DefectConfig(
            _get_number(d, "height", "model.defect", required=True),
            _get_number(d, "center_frac", "model.defect", default=0.5),
            width,
        )

    boundary = ()
    if "boundary_potential" in model_raw:
        bp = model_raw["boundary_potential"]
        _expect(isinstance(bp, list), "model.boundary_potential", "must be a list of [cell, value] pairs")
        pairs = []
        for i, item in enumerate(bp):
            _expect(
                isinstance(item, list) and len(item) == 2,
                f"model.boundary_potential[{i}]",
                "must be a [cell, value] pair",
            )
            cell, value = item
            _expect(isinstance(cell, int) and not isinstance(cell, bool),
                    f"model.boundary_potential[{i}]", "cell must be an integer")
            _expect(isinstance(value, (int, float)) and not isinstance(value, bool),
                    f"model.boundary_potential[{i}]", "value must be a number")
            pairs.append((int(cell), float(value)))
        boundary = tuple(pairs)

    model = ModelConfig(t1, t2, disorder, defect, boundary)

    geom_raw = raw.get("geometry")
    _expect(isinstance(geom_raw, dict), "geometry", "must be an object")
    length_raw = geom_raw.get("length")
    if isinstance(length_raw, list):
        _expect(
            all(isinstance(x, int) and not isinstance(x, bool) for x in length_raw) and length_raw,
            "geometry.length", "must be an integer or a non-empty list of integers",
        )
        length = tuple(int(x) for x in length_raw)
    elif isinstance(length_raw, int) and not isinstance(length_raw, bool):
        length = int(length_raw)
    else:
        raise ConfigError("geometry.length: must be an integer or a non-empty list of integers")
    conv_raw = geom_raw.get("convention", "cell")
    try:
        convention = Convention(conv_raw)
    except ValueError:
        raise ConfigError(
            f"geometry.convention: must be one of {[c.value for c in Convention]}, got {conv_raw!r}"
        ) from None

    scan_raw = raw.get("scan", "none")
    try:
        scan = ScanAxis(scan_raw)
    except ValueError:
        raise ConfigError(
            f"scan: must be one of {[a.value for a in ScanAxis]}, got {scan_raw!r}"
        ) from None

    switch_raw = raw.get("switch", "middle")
    if isinstance(switch_raw, list):
        _expect(
            all(isinstance(x, int) and not isinstance(x, bool) for x in switch_raw) and switch_raw,
            "switch", "must be 'middle', an integer, or a non-empty list of integers",
        )
        switch = tuple(int(x) for x in switch_raw)
    elif switch_raw == "middle" or (isinstance(switch_raw, int) and not isinstance(switch_raw, bool)):
        switch = switch_raw if switch_raw == "middle" else int(switch_raw)
    else:
        raise ConfigError("switch: must be 'middle', an integer, or a non-empty list of integers")

    delta_values = ()
    if "delta_values" in raw:
        dv = raw["delta_values"]
        _expect(isinstance(dv, list) and dv, "delta_values", "must be a non-empty list of numbers")
        _expect(
            all(isinstance(x, (int, float)) and not isinstance(x, bool) and x > 0 for x in dv),
            "delta_values", "entries must be positive numbers",
        )
        delta_values = tuple(float(x) for x in dv)

    delta = DeltaConfig()
    if "delta" in raw:
        d = raw["delta"]
        _expect(isinstance(d, dict), "delta", "must be an object")
        mode_raw = d.get("mode", "empirical")
        try:
            mode = DeltaMode(mode_raw)
        except ValueError:
            raise ConfigError(
                f"delta.mode: must be one of {[m.value for m in DeltaMode]}, got {mode_raw!r}"
            ) from None
        value = _get_number(d, "value", "delta")
        if mode is DeltaMode.MANUAL:
            _expect(value is not None and value > 0, "delta.value", "must be > 0 for manual mode")
        decay_length = _get_number(d, "decay_length", "delta", default=1.0)
        _expect(decay_length > 0, "delta.decay_length", "must be > 0")
        delta = DeltaConfig(mode, value, decay_length)

    seed = _get_int(raw, "seed", "config")
    output = raw.get("output")
    if output is not None:
        _expect(isinstance(output, str), "output", "must be a string path")

    config = ExperimentConfig(
        model=model,
        length=length,
        convention=convention,
        delta=delta,
        switch=switch,
        seed=seed,
        scan=scan,
        delta_values=delta_values,
        output=output,
    )
    _validate_scan_shape(config)
    return config


def _validate_scan_shape(config: ExperimentConfig) -> None:
    length_is_list = isinstance(config.length, tuple)
    switch_is_list = isinstance(config.switch, tuple)
    _expect(
        length_is_list == (config.scan is ScanAxis.LENGTH),
        "geometry.length",
        "must be a list exactly when scan is 'length'",
    )
    _expect(
        switch_is_list == (config.scan is ScanAxis.SWITCH),
        "switch",
        "must be a list exactly when scan is 'switch'",
    )
    _expect(
        bool(config.delta_values) == (config.scan is ScanAxis.DELTA),
        "delta_values",
        "must be present exactly when scan is 'delta'",
    )
    if config.model.disorder.amplitude > 0:
        _expect(
            config.seed is not None or config.model.disorder.seed is not None,
            "seed",
            "a seed is required when disorder amplitude is > 0",
        )
    lengths = config.length if length_is_list else (config.length,)
    for v in lengths:
        _expect(v >= 2, "geometry.length", f"lengths must be >= 2, got {v}")
    if isinstance(config.model.t1, tuple) or isinstance(config.model.t2, tuple):
        _expect(
            not length_is_list,
            "model.t1",
            "per-cell coupling lists cannot be combined with a length scan",
        )


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON in {path}: {exc}") from exc
    return parse_config(raw)


# ---------------------------------------------------------------------------
# Result tables
# ---------------------------------------------------------------------------


@dataclass
class ResultTable:
    """Ordered CSV rows with a '#'-comment provenance block."""

    header: list
    rows: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def render(self, reproducible: bool = False) -> str:
        lines = [f"# {k}: {v}" for k, v in self.provenance.items()]
        if not reproducible:
            lines.append(f"# generated: {datetime.now(timezone.utc).isoformat()}")
        lines.append(",".join(self.header))
        for row in self.rows:
            lines.append(",".join(_format_cell(v) for v in row))
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path, reproducible: bool = False) -> None:
        Path(path).write_text(self.render(reproducible=reproducible))


def _format_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _provenance(config: ExperimentConfig, seed: int | None) -> dict:
    return {
        "config_hash": config.config_hash(),
        "seed": "" if seed is None else seed,
        "version": __version__,
    }


# ---------------------------------------------------------------------------
# Experiment runner
# ---------------------------------------------------------------------------


def build_profile(model: ModelConfig, length: int, seed: int | None) -> CouplingProfile:
    """Coupling profile for one scan point (base values, then disorder, then defect)."""
    t1 = _as_cells(model.t1, length, "model.t1")
    t2 = _as_cells(model.t2, length, "model.t2")
    boundary = None
    if model.boundary_potential:
        boundary = np.zeros(length)
        for cell, value in model.boundary_potential:
            _expect(0 <= cell < length, "model.boundary_potential",
                    f"cell {cell} outside [0, {length})")
            boundary[cell] += value
    try:
        profile = CouplingProfile(t1, t2, boundary=boundary)
    except ValueError as exc:
        raise ConfigError(f"model: {exc}") from exc
    if model.disorder.amplitude > 0:
        disorder_seed = model.disorder.seed if model.disorder.seed is not None else seed
        profile = apply_disorder(profile, disorder_seed, model.disorder.amplitude)
    if model.defect.height:
        profile = apply_defect(
            profile, model.defect.height, model.defect.center_frac, model.defect.width
        )
    return profile


def _as_cells(value, length: int, path: str) -> np.ndarray:
    if isinstance(value, tuple):
        _expect(len(value) == length, path, f"needs {length} entries, got {len(value)}")
        return np.asarray(value, dtype=float)
    return np.full(length, float(value))


def _profile_cells(config: ExperimentConfig, length: int) -> int:
    if config.convention is Convention.ALTERNATING_SITES:
        return (length + 1) // 2
    return length


def _delta_policy_for(config: ExperimentConfig, profile, H) -> DeltaPolicy:
    mode = config.delta.mode
    if mode is DeltaMode.MANUAL:
        return DeltaPolicy.manual(config.delta.value)
    if mode is DeltaMode.EMPIRICAL:
        return DeltaPolicy.empirical()
    d = config.delta.decay_length
    return DeltaPolicy.theorem(
        half_gap=bulk_gap(profile),
        decay_length=d,
        coupling_norm=short_range_constant(H, d),
    )


def _scan_points(config: ExperimentConfig) -> list[dict]:
    # Rows are emitted scan-axis ascending regardless of the config's order.
    if config.scan is ScanAxis.LENGTH:
        return [{"length": L} for L in sorted(config.length)]
    if config.scan is ScanAxis.DELTA:
        return [{"delta": d} for d in sorted(config.delta_values)]
    if config.scan is ScanAxis.SWITCH:
        return [{"switch": s} for s in sorted(config.switch)]
    return [{}]


def _evaluate_point(config: ExperimentConfig, point: dict, seed: int | None) -> IndexReport:
    length = point.get("length", config.length)
    profile = build_profile(config.model, _profile_cells(config, length), seed)
    geom = make_geometry(length, config.convention)
    H = build_ssh(geom, profile)
    if "delta" in point:
        policy: DeltaPolicy | float = float(point["delta"])
    else:
        policy = _delta_policy_for(config, profile, H)
    transition = point.get("switch", config.switch)
    try:
        return index_report(H, policy, transition)
    except SwitchError as exc:
        raise ConfigError(f"switch: {exc}") from exc


def run(config: ExperimentConfig, threads: int = 1) -> ResultTable:
    """Evaluate every scan point into one CSV row, in scan-axis order."""
    seed = config.seed
    points = _scan_points(config)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            reports = list(pool.map(lambda p: _evaluate_point(config, p, seed), points))
    else:
        reports = [_evaluate_point(config, p, seed) for p in points]
    table = ResultTable(list(INDEX_CSV_HEADER), provenance=_provenance(config, seed))
    for point, report in zip(points, reports):
        # The finite-size correspondence is exact algebra; a visible residual
        # means the numerics are broken and the row must not be emitted.
        if report.correspondence_residual >= 1e-10:
            raise NumericalError(
                f"bulk-edge identity violated at scan point {point or 'single'}: "
                f"residual {report.correspondence_residual:.3e}"
            )
        table.rows.append(report.csv_row(seed))
    return table


# ---------------------------------------------------------------------------
# Figure reproduction pipelines
# ---------------------------------------------------------------------------


def disordered_defect_model(seed: int) -> ModelConfig:
    """Disordered SSH chain with a mid-chain Gaussian defect.

    t1 = 0.5 and t2 = 1.0 plus independent uniform noise in [-0.1, 0.1] on
    both couplings, and a bump of height 0.2 on t1 centered at mid-chain.
    """
    return ModelConfig(
        t1=0.5,
        t2=1.0,
        disorder=DisorderConfig(amplitude=0.1, seed=seed),
        defect=DefectConfig(height=0.2, center_frac=0.5, width=1.0),
    )


def _density_table(config: ExperimentConfig, length: int, delta: float, seed: int) -> ResultTable:
    profile = build_profile(config.model, length, seed)
    geom = make_geometry(length, Convention.CELL_C2)
    H = build_ssh(geom, profile)
    switch = switch_function(geom, "middle")
    table = ResultTable(list(DENSITY_CSV_HEADER), provenance=_provenance(config, seed))
    table.provenance["delta"] = repr(float(delta))
    for kind in (IndexKind.EDGE, IndexKind.BULK):
        density = index_density(H, delta, switch, kind)
        for cell, value in enumerate(density):
            table.rows.append([cell, float(value), kind.value])
    return table


def reproduce_fig3(seed: int = 1) -> tuple[ResultTable, ResultTable]:
    """Length scan of the disordered-defect chain plus per-cell index densities.

    Table A: edge/bulk indices for L in 10..100 with delta = 1/sqrt(2L).
    Table B: per-cell diagonals of both index expressions at L = 30,
    delta = 1/20.  Deterministic for a fixed seed.
    """
    model = disordered_defect_model(seed)
    scan_config = ExperimentConfig(
        model=model,
        length=tuple(FIG3_LENGTHS),
        delta=DeltaConfig(DeltaMode.EMPIRICAL),
        switch="middle",
        seed=seed,
        scan=ScanAxis.LENGTH,
    )
    table_a = run(scan_config)
    density_config = ExperimentConfig(model=model, length=30, seed=seed)
    table_b = _density_table(density_config, 30, 1.0 / 20.0, seed)
    return table_a, table_b


def reproduce_fig4(seed: int = 1) -> tuple[ResultTable, ResultTable]:
    """Switch-position scan and delta scan of the disordered-defect chain at L = 30.

    Table A sweeps the switch transition over every interior cell at
    delta = 1/20.  Table B sweeps delta log-spaced over [1e-9, 1]; the wide
    range makes both failure modes visible (delta below the edge-mode
    splitting, delta at the bulk-gap scale).
    """
    model = disordered_defect_model(seed)
    switch_config = ExperimentConfig(
        model=model,
        length=30,
        delta=DeltaConfig(DeltaMode.MANUAL, value=1.0 / 20.0),
        switch=tuple(range(1, 30)),
        seed=seed,
        scan=ScanAxis.SWITCH,
    )
    table_a = run(switch_config)
    delta_grid = tuple(float(d) for d in np.geomspace(1e-9, 1.0, 46))
    delta_config = ExperimentConfig(
        model=model,
        length=30,
        switch="middle",
        seed=seed,
        scan=ScanAxis.DELTA,
        delta_values=delta_grid,
    )
    table_b = run(delta_config)
    return table_a, table_b


# ---------------------------------------------------------------------------
# Bound certificate pipeline
# ---------------------------------------------------------------------------


def bound_table(config: ExperimentConfig) -> ResultTable:
    """Certificates for one scan point: propagator bound, filter decay, trace norms."""
    seed = config.seed
    point = _scan_points(config)[0]
    length = point.get("length", config.length)
    profile = build_profile(config.model, _profile_cells(config, length), seed)
    geom = make_geometry(length, config.convention)
    H = build_ssh(geom, profile)
    if "delta" in point:
        delta = float(point["delta"])
    else:
        delta = resolve_delta(_delta_policy_for(config, profile, H), geom.length)

    d = config.delta.decay_length
    coupling_norm = short_range_constant(H, d)
    half_gap = bulk_gap(profile)
    params = FilterParams(delta, decay_length=d, coupling_norm=coupling_norm)
    corr_len = params.correlation_length

    table = ResultTable(list(BOUND_CSV_HEADER), provenance=_provenance(config, seed))
    for t in BOUNDS_TIMES:
        cert = lieb_robinson_check(H, t, d, coupling_norm)
        cert = BoundCertificate(
            f"lieb_robinson_t{t:g}", cert.lhs, cert.rhs, cert.margin, cert.passed,
            noise_floor=cert.noise_floor,
        )
        table.rows.append(cert.csv_row(length, delta))
    table.rows.append(
        edge_filter_decay_check(H, delta, half_gap, corr_len).csv_row(length, delta)
    )

    switch = switch_function(geom, config.switch if not isinstance(config.switch, tuple) else "middle")
    norm_anti, norm_comm = anticommutator_trace_norms(H, delta, switch)
    envelope = float(np.exp(-2.0 * half_gap / delta) + np.exp(-length / (48.0 * corr_len)))
    threshold = 10.0 * length * length
    for name, value in (
        ("anticommutator_trace_norm", norm_anti),
        ("filter_switch_commutator_trace_norm", norm_comm),
    ):
        gamma = value / max(envelope, 1e-300)
        margin = threshold - gamma
        table.rows.append([name, length, delta, margin, gamma, margin >= 0.0])
    return table


# ---------------------------------------------------------------------------
# Self checks
# ---------------------------------------------------------------------------


def self_check(config: ExperimentConfig) -> list[tuple[str, bool, str]]:
    """Structural checks on the configured model at its first scan point."""
    seed = config.seed
    point = _scan_points(config)[0]
    length = point.get("length", config.length)
    profile = build_profile(config.model, _profile_cells(config, length), seed)
    geom = make_geometry(length, config.convention)
    H = build_ssh(geom, profile)

    results = []
    herm = float(np.abs(H.matrix - H.matrix.conj().T).max())
    results.append(("hermiticity", herm == 0.0, f"max |H - H^dag| = {herm:.3e}"))
    chir = verify_chiral(H)
    results.append(("chirality", chir == 0.0, f"max |HC + CH| = {chir:.3e}"))

    report = _evaluate_point(config, point, seed)
    results.append((
        "bulk_edge_identity",
        report.correspondence_residual < 1e-10,
        f"|edge - bulk - imbalance| = {report.correspondence_residual:.3e}",
    ))
    G = gap_filter(H, report.delta)
    min_eig = float(np.linalg.eigvalsh(G).min())
    results.append(("gap_filter_psd", min_eig >= -1e-12, f"min eigenvalue = {min_eig:.3e}"))
    return results


# ---------------------------------------------------------------------------
# Command line interface
# ---------------------------------------------------------------------------


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="experiment config (JSON)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--out", default=None, help="output CSV path (default: config output or stdout)")
    parser.add_argument("--reproducible", action="store_true",
                        help="suppress the timestamp comment for byte-stable output")
    parser.add_argument("--threads", type=int, default=1, help="concurrent scan-point evaluations")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chiralchain",
        description="Finite-size bulk/edge indices and locality certificates for chiral chains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="evaluate a single index report")
    _add_common(p_index)
    p_scan = sub.add_parser("scan", help="run the config's parameter scan")
    _add_common(p_scan)
    p_bounds = sub.add_parser("bounds", help="emit bound certificates for the configured model")
    _add_common(p_bounds)
    p_check = sub.add_parser("check", help="run structural self-tests on the configured model")
    _add_common(p_check)

    p_rep = sub.add_parser("reproduce", help="figure-reproduction pipelines")
    p_rep.add_argument("figure", choices=["fig3", "fig4"])
    p_rep.add_argument("--seed", type=int, default=1)
    p_rep.add_argument("--out", default=".", help="output directory")
    p_rep.add_argument("--reproducible", action="store_true")
    p_rep.add_argument("--threads", type=int, default=1)
    return parser


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["output"] = args.out
    if updates:
        config = dataclasses.replace(config, **updates)
        _validate_scan_shape(config)
    return config


def _emit(table: ResultTable, path: str | None, reproducible: bool) -> None:
    text = table.render(reproducible=reproducible)
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _cmd_index_or_scan(args, want_scan: bool) -> int:
    config = _apply_overrides(load_config(args.config), args)
    if want_scan and config.scan is ScanAxis.NONE:
        raise ConfigError("scan: 'scan' command needs a config with a scan axis")
    if not want_scan and config.scan is not ScanAxis.NONE:
        raise ConfigError("scan: 'index' command needs a config without a scan axis")
    table = run(config, threads=args.threads)
    _emit(table, config.output, args.reproducible)
    return 0


def _cmd_bounds(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    table = bound_table(config)
    # The config's output path belongs to the index scan; certificates go to
    # stdout unless --out says otherwise.
    _emit(table, args.out, args.reproducible)
    return 0


def _cmd_check(args) -> int:
    config = _apply_overrides(load_config(args.config), args)
    results = self_check(config)
    ok = True
    for name, passed, detail in results:
        print(f"check {name}: {'ok' if passed else 'FAIL'} ({detail})")
        ok = ok and passed
    return 0 if ok else 3


def _cmd_reproduce(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.figure == "fig3":
        table_a, table_b = reproduce_fig3(args.seed)
        names = ("fig3_length_scan", "fig3_density")
        plots = (
            emit_plot(table_a, PlotKind.LINE, y_column="q_error", log_y=True),
            emit_plot(table_b, PlotKind.PER_SITE),
        )
    else:
        table_a, table_b = reproduce_fig4(args.seed)
        names = ("fig4_switch_scan", "fig4_delta_scan")
        plots = (
            emit_plot(table_a, PlotKind.LINE, x_column="ell", y_column="I_edge"),
            emit_plot(table_b, PlotKind.LINE, x_column="delta", y_column="q_error",
                      log_x=True, log_y=True),
        )
    for table, name, svg in zip((table_a, table_b), names, plots):
        table.write(out_dir / f"{name}.csv", reproducible=args.reproducible)
        (out_dir / f"{name}.svg").write_text(svg)
        print(f"wrote {out_dir / name}.csv and .svg")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        if args.command == "index":
            return _cmd_index_or_scan(args, want_scan=False)
        if args.command == "scan":
            return _cmd_index_or_scan(args, want_scan=True)
        if args.command == "bounds":
            return _cmd_bounds(args)
        if args.command == "check":
            return _cmd_check(args)
        if args.command == "reproduce":
            return _cmd_reproduce(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
