"""Parameter-sweep engine: grids over the gate knobs, optima, robustness.

A sweep is a cartesian grid over at most two of (t, delta_over_g, ly_over_g,
phs) on top of fixed base parameters.  Each grid point runs the full array
once and yields one record; point failures are recorded, never fatal.
Results serialize to CSV plus a JSON manifest, both byte-deterministic for
identical specs (wall-clock timing is kept out of the files for that reason
and lives on the in-memory records).
"""

from __future__ import annotations

import concurrent.futures
import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import circuit, fock
from .errors import PhysicsValidationError

AXIS_NAMES = ("t", "delta_over_g", "ly_over_g", "phs")
AXIS_DOMAINS = {
    "t": (0.0, 200.0),
    "delta_over_g": (-10.0, 10.0),
    "ly_over_g": (0.0, 1.0),
    "phs": (0.0, 1.0),
}


@dataclass(frozen=True)
class Axis:
    """One swept parameter with its explicit grid values."""

    name: str
    values: tuple[float, ...]

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise PhysicsValidationError(f"unknown sweep axis {self.name!r}")
        lo, hi = AXIS_DOMAINS[self.name]
        for v in self.values:
            if not (lo <= v <= hi):
                raise PhysicsValidationError(
                    f"axis {self.name}: value {v} outside [{lo}, {hi}]")
        if self.name == "phs" and any(v not in (0.0, 1.0) for v in self.values):
            raise PhysicsValidationError("phs axis values must be 0 or 1")

    @classmethod
    def from_range(cls, name: str, start: float, stop: float, step: float) -> "Axis":
        if step <= 0:
            raise PhysicsValidationError(f"axis {name}: step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return cls(name, tuple(start + k * step for k in range(max(n, 0))))


@dataclass(frozen=True)
class SweepSpec:
    """Grid axes, fixed base parameters, and the input-state selector."""

    axes: tuple[Axis, ...]
    base: circuit.SimParams
    input_state: str = "p_test"
    seed: int = 0

    def __post_init__(self):
        if len(self.axes) > 2:
            raise PhysicsValidationError("at most 2 swept axes per run")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise PhysicsValidationError(f"duplicate sweep axes: {names}")
        if self.input_state not in ("p_test", "random"):
            raise PhysicsValidationError(
                f"input selector must be p_test or random, got {self.input_state!r}")

    def grid(self) -> list[dict]:
        """Grid points in row-major axis order; empty axes give no points."""
        points = [{}]
        for axis in self.axes:
            points = [dict(p, **{axis.name: v}) for p in points for v in axis.values]
        if not self.axes:
            return []
        return points if all(a.values for a in self.axes) else []

    def as_dict(self) -> dict:
        return {
            "axes": [{"name": a.name, "values": list(a.values)} for a in self.axes],
            "base": self.base.as_dict(),
            "input_state": self.input_state,
            "seed": self.seed,
        }

    def sha256(self) -> str:
        canonical = json.dumps(self.as_dict(), sort_keys=True)
        return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass
class SweepRecord:
    """One (parameters -> error) evaluation."""

    t: float
    delta_over_g: float
    ly_over_g: float
    phs: int
    error: float
    trace_drift: float
    atom_residual: float
    wall_ms: float
    status: str = "ok"
    message: str = ""

    CSV_FIELDS = ("t", "delta_over_g", "ly_over_g", "phs", "error", "trace_drift")

    def csv_row(self) -> str:
        return ",".join([repr(float(self.t)), repr(float(self.delta_over_g)),
                         repr(float(self.ly_over_g)), str(int(self.phs)),
                         "nan" if self.status != "ok" else repr(float(self.error)),
                         repr(float(self.trace_drift))])


def _apply_point(base: circuit.SimParams, point: dict) -> circuit.SimParams:
    values = {k: v for k, v in point.items()}
    if "phs" in values:
        values["phs"] = int(values["phs"])
    return replace(base, **values)


def _input_state(spec: SweepSpec, space: fock.StateSpace) -> fock.DensityMatrix:
    if spec.input_state == "p_test":
        return circuit.p_test(space)
    rng = np.random.default_rng(spec.seed)
    return circuit.random_valid_input(space, rng)


def evaluate_point(spec: SweepSpec, point: dict) -> SweepRecord:
    """Run one grid point; failures come back as a failed record."""
    params = _apply_point(spec.base, point)
    try:
        space = fock.default_state_space()
        report = circuit.run_array(_input_state(spec, space), params, space)
        return SweepRecord(t=params.t, delta_over_g=params.delta_over_g,
                           ly_over_g=params.ly_over_g, phs=params.phs,
                           error=report.error, trace_drift=report.trace_drift,
                           atom_residual=report.atom_residual,
                           wall_ms=report.wall_ms)
    except Exception as exc:  # per-point isolation: the sweep must not abort
        return SweepRecord(t=params.t, delta_over_g=params.delta_over_g,
                           ly_over_g=params.ly_over_g, phs=params.phs,
                           error=float("nan"), trace_drift=float("nan"),
                           atom_residual=float("nan"), wall_ms=0.0,
                           status="failed", message=f"{type(exc).__name__}: {exc}")


def run_sweep(spec: SweepSpec, workers: int = 1) -> list[SweepRecord]:
    """Evaluate every grid point, in deterministic grid order.

    Workers > 1 fan grid points over processes; each worker owns its buffers
    and the records are reassembled in grid order, so the output is
    independent of the worker count.
    """
    points = spec.grid()
    if not points:
        return []
    if workers <= 1:
        return [evaluate_point(spec, p) for p in points]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        chunk = max(1, len(points) // (8 * workers))
        return list(pool.map(_eval_star, [(spec, p) for p in points], chunksize=chunk))


def _eval_star(args) -> SweepRecord:
    return evaluate_point(*args)


@dataclass(frozen=True)
class OptimalSet:
    """Strictly-improving (t, delta_over_g, error) entries, increasing in t."""

    entries: tuple[tuple[float, float, float], ...]

    def t_values(self) -> tuple[float, ...]:
        return tuple(e[0] for e in self.entries)


def extract_optimal_set(records: Sequence[SweepRecord],
                        keep_first: bool = True) -> OptimalSet:
    """Running-minimum filter over t: keep records beating every earlier keep.

    Records sharing a duration (e.g. a detuning axis) are first reduced to
    their per-duration best, so the result is strictly increasing in t.
    With ``keep_first`` the smallest-t record opens the set unconditionally;
    without it that record only seeds the baseline, matching the reading
    that an "optimal" duration must lower the error against a shorter one.
    Failed records are skipped.  Input order does not matter.
    """
    per_t = {}
    for rec in records:
        if rec.status != "ok" or math.isnan(rec.error):
            continue
        if rec.t not in per_t or rec.error < per_t[rec.t].error:
            per_t[rec.t] = rec
    entries = []
    best = math.inf
    for i, t in enumerate(sorted(per_t)):
        rec = per_t[t]
        if rec.error < best:
            if i > 0 or keep_first:
                entries.append((rec.t, rec.delta_over_g, rec.error))
            best = rec.error
    return OptimalSet(tuple(entries))


def _best_record(records: Sequence[SweepRecord]) -> SweepRecord:
    ok = [r for r in records if r.status == "ok" and not math.isnan(r.error)]
    if not ok:
        raise PhysicsValidationError("no successful records to optimize over")
    return min(ok, key=lambda r: r.error)


def find_detuned_optimum(t_values: Sequence[float], delta_values: Sequence[float],
                         base: circuit.SimParams, rounds: int = 3,
                         shrink: float = 10.0, workers: int = 1
                         ) -> tuple[float, float, float]:
    """Best (t, delta_over_g, error) over a 2-D grid plus local refinement.

    Coordinate descent around the coarse winner: each round shrinks both
    resolutions by ``shrink`` and rescans a local window, one coordinate at
    a time.  Degenerate axes (single value) are held fixed.
    """
    t_values = tuple(float(v) for v in t_values)
    delta_values = tuple(float(v) for v in delta_values)
    axes = [Axis("t", t_values), Axis("delta_over_g", delta_values)]
    spec = SweepSpec(axes=tuple(axes), base=base)
    records = run_sweep(spec, workers=workers)
    best = _best_record(records)
    t_star, d_star, err_star = best.t, best.delta_over_g, best.error

    t_step = min(np.diff(sorted(set(t_values)))) if len(set(t_values)) > 1 else 0.0
    d_step = min(np.diff(sorted(set(delta_values)))) if len(set(delta_values)) > 1 else 0.0
    for _ in range(rounds):
        t_step /= shrink
        d_step /= shrink
        for coord, step in (("t", t_step), ("delta_over_g", d_step)):
            if step == 0.0:
                continue
            center = t_star if coord == "t" else d_star
            lo, hi = AXIS_DOMAINS[coord]
            values = tuple(float(np.clip(center + k * step, lo, hi))
                           for k in range(-12, 13))
            fixed = {"t": (t_star,), "delta_over_g": (d_star,)}
            fixed[coord] = values
            local = SweepSpec(axes=(Axis("t", fixed["t"]),
                                    Axis("delta_over_g", fixed["delta_over_g"])),
                              base=base)
            best = _best_record(run_sweep(local, workers=workers))
            if best.error < err_star:
                t_star, d_star, err_star = best.t, best.delta_over_g, best.error
    return t_star, d_star, err_star


def robustness_profile(t: float, delta_opt: float, base: circuit.SimParams,
                       delta_offsets: Sequence[float] = (),
                       ly_values: Sequence[float] = (),
                       workers: int = 1) -> list[SweepRecord]:
    """Error around one optimum: detuning offsets at fixed leak, then leak
    values at the optimal detuning.  Offsets are relative to the optimum."""
    records = []
    base_at = replace(base, t=t)
    if delta_offsets:
        axis = Axis("delta_over_g", tuple(delta_opt + off for off in delta_offsets))
        records += run_sweep(SweepSpec(axes=(axis,), base=base_at), workers=workers)
    if ly_values:
        axis = Axis("ly_over_g", tuple(ly_values))
        records += run_sweep(
            SweepSpec(axes=(axis,), base=replace(base_at, delta_over_g=delta_opt)),
            workers=workers)
    return records


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_records_csv(records: Sequence[SweepRecord], path: str):
    """One row per record, atomically; columns are stable and deterministic."""
    lines = [",".join(SweepRecord.CSV_FIELDS)]
    lines += [r.csv_row() for r in records]
    _atomic_write(path, "\n".join(lines) + "\n")


def write_optimal_csv(optimal: OptimalSet, path: str):
    """The strictly-improving (t, delta_over_g, error) table, atomically."""
    lines = ["t,delta_over_g,error"]
    lines += [f"{t!r},{d!r},{e!r}" for t, d, e in optimal.entries]
    _atomic_write(path, "\n".join(lines) + "\n")


def write_manifest(spec: SweepSpec, path: str, engine_version: str,
                   csv_paths: Sequence[str] = ()):
    payload = {
        "spec": spec.as_dict(),
        "spec_sha256": spec.sha256(),
        "engine_version": engine_version,
        "outputs": [os.path.basename(p) for p in csv_paths],
    }
    _atomic_write(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
