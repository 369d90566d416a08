"""Run records, sweep specifications and their CSV / JSON encodings."""
from __future__ import annotations

import concurrent.futures
import dataclasses
import datetime
import io
import json
from typing import Sequence

import numpy as np

from . import __version__
from .core import ALL_GAUGES, DomainError, PseudoGauge, SystemParams
from .kernels import sigma_normalized

CSV_SCHEMA = 1
CSV_COLUMNS = ("a", "m", "T", "gauge", "epsilon", "sigma2", "sigma_n", "sigma2_err",
               "converged", "config_digest", "tool_version")
SWEEPABLE = ("radius_a", "mass", "temperature")


@dataclasses.dataclass(frozen=True)
class RunRecord:
    params: SystemParams
    gauge: PseudoGauge
    result: object
    config_digest: str
    tool_version: str = __version__
    timestamp: str = ""

    @classmethod
    def compute(cls, gauge, params, cfg):
        gauge = PseudoGauge.parse(gauge)
        result = sigma_normalized(gauge, params, cfg)
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        return cls(params, gauge, result, cfg.digest(), __version__, stamp)

    def flat(self):
        out = {"gauge": self.gauge.value}
        out.update(dataclasses.asdict(self.params))
        out.update(self.result.as_dict())
        out.update(config_digest=self.config_digest, tool_version=self.tool_version,
                   timestamp=self.timestamp)
        return out

    def to_json(self):
        return json.dumps(self.flat())

    def csv_row(self):
        r, p = self.result, self.params
        fields = (p.radius_a, p.mass, p.temperature, self.gauge.value, r.epsilon, r.sigma2,
                  r.sigma_n, r.sigma2_err, str(r.converged).lower(), self.config_digest,
                  self.tool_version)
        return ",".join(repr(f) if isinstance(f, float) else str(f) for f in fields)


def csv_preamble():
    return f"# schema={CSV_SCHEMA}\n" + ",".join(CSV_COLUMNS) + "\n"


@dataclasses.dataclass(frozen=True)
class SweepSpec:
    """One swept parameter over a 1D grid, the rest held fixed."""

    swept_parameter: str
    start: float
    stop: float
    points: int
    spacing: str = "log"
    gauges: Sequence[PseudoGauge] = ALL_GAUGES
    fixed: SystemParams = SystemParams(1.0, 1.0, 1.0)

    def __post_init__(self):
        if self.swept_parameter not in SWEEPABLE:
            raise DomainError(f"swept parameter must be one of {SWEEPABLE}")
        if not self.start < self.stop:
            raise DomainError("sweep needs from < to")
        if self.points < 2:
            raise DomainError("sweep needs at least 2 points")
        if self.spacing not in ("linear", "log"):
            raise DomainError("spacing must be 'linear' or 'log'")
        if self.spacing == "log" and self.start <= 0:
            raise DomainError("log spacing needs from > 0")
        if self.swept_parameter != "mass" and self.start <= 0:
            raise DomainError(f"{self.swept_parameter} must stay positive")
        if self.swept_parameter == "mass" and self.start < 0:
            raise DomainError("mass must stay non-negative")
        gauges = tuple(PseudoGauge.parse(g) for g in self.gauges)
        if not gauges:
            raise DomainError("select at least one gauge")
        object.__setattr__(self, "gauges", gauges)
        masses = self.values() if self.swept_parameter == "mass" else [self.fixed.mass]
        for g in gauges:
            if g.needs_mass and min(masses) <= 0:
                raise DomainError(f"gauge {g.value} needs mass > 0 at every point "
                                  "(its variance has a 1/m^2 prefactor)")

    def values(self):
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)

    def tasks(self):
        out = []
        for v in self.values():
            params = dataclasses.replace(self.fixed, **{self.swept_parameter: float(v)})
            for g in self.gauges:
                out.append((g, params))
        return out


def _run_task(task):
    gauge, params, cfg = task
    return RunRecord.compute(gauge, params, cfg)


def run_sweep(spec, cfg, jobs=1):
    """Evaluate every (point, gauge) pair; records come back in task order."""
    tasks = [(g, p, cfg) for g, p in spec.tasks()]
    if jobs <= 1:
        return [_run_task(t) for t in tasks]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_task, tasks))


def write_sweep_csv(records, stream):
    stream.write(csv_preamble())
    for rec in records:
        stream.write(rec.csv_row() + "\n")


class MalformedCSV(ValueError):
    pass


def read_sweep_csv(text):
    """Parse sweep CSV text into (header, rows, line numbers), keeping raw fields."""
    header = None
    rows, lines = [], []
    for lineno, line in enumerate(io.StringIO(text), start=1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split(",")
        if header is None:
            header = fields
            continue
        if len(fields) != len(header):
            raise MalformedCSV(f"line {lineno}: expected {len(header)} fields, got {len(fields)}")
        rows.append(fields)
        lines.append(lineno)
    if header is None:
        raise MalformedCSV("empty CSV: no header row")
    return header, rows, lines
