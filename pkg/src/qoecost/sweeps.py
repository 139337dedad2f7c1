"""Tabulate PLP and MOS along a bandwidth, cost or buffer-length axis.

Rows come out ordered by axis value and render to CSV or JSON with
round-trip-exact floats, so identical specs always give identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, fields, replace
from typing import Optional, Sequence

from .errors import DomainError
from .pricing import CostModel, bandwidth_from_cost, cost_from_bandwidth
from .tcp_qoe import BITS_PER_PACKET, TcpScenario, mos_from_plp, plp

AXES = ("bandwidth", "cost", "buffer")
FORMATS = ("csv", "json")

# Buffer lengths of the multi-Q curves; the grid is not a uniform step.
DEFAULT_BUFFER_VALUES = (10.0, 100.0, 200.0, 400.0, 600.0, 800.0, 1000.0)


@dataclass(frozen=True)
class SweepSpec:
    """Inclusive grid ``start + i*step`` along ``axis``, or explicit ``values``.

    For the buffer axis the scenario's ``capacity`` stays fixed; for the other
    axes it is derived from the bandwidth at each grid point.
    """

    axis: str
    start: float = 0.0
    stop: float = 0.0
    step: float = 1.0
    scenario: TcpScenario = TcpScenario()
    cost_model: Optional[CostModel] = None
    clamp_mos: bool = False
    values: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise DomainError(f"axis must be one of {AXES}, got {self.axis!r}")
        if self.axis == "cost" and self.cost_model is None:
            raise DomainError("cost axis requires a cost model")
        if self.values is not None:
            vals = tuple(float(v) for v in self.values)
            if not vals:
                raise DomainError("explicit sweep values must not be empty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise DomainError("explicit sweep values must be strictly increasing")
            object.__setattr__(self, "values", vals)
            return
        for name in ("start", "stop", "step"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise DomainError(f"{name} must be finite")
        if self.step <= 0:
            raise DomainError("step must be positive")
        if self.start > self.stop:
            raise DomainError("start must not exceed stop")

    def grid(self) -> list[float]:
        if self.values is not None:
            return list(self.values)
        count = math.floor((self.stop - self.start) / self.step + 1e-9) + 1
        return [self.start + i * self.step for i in range(count)]


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    bandwidth_mbps: float
    buffer_len: float
    capacity_pps: float
    plp: float
    mos_raw: float
    mos_clamped: float
    mos: float
    cost: Optional[float] = None


def _row(spec: SweepSpec, value: float) -> SweepRow:
    s = spec.scenario
    cost = None
    if spec.axis == "buffer":
        s = replace(s, buffer_len=value)
        mbps = s.capacity * BITS_PER_PACKET / 1_000_000
    elif spec.axis == "cost":
        cost = value
        mbps = bandwidth_from_cost(spec.cost_model, value)
    else:
        mbps = value
    if spec.axis != "buffer":
        s = replace(s, capacity=mbps * 1_000_000 / BITS_PER_PACKET)
    if cost is None and spec.cost_model is not None:
        cost = cost_from_bandwidth(spec.cost_model, mbps)
    p = plp(s)
    mos = mos_from_plp(p)
    return SweepRow(
        axis_value=value,
        bandwidth_mbps=mbps,
        buffer_len=s.buffer_len,
        capacity_pps=s.capacity,
        plp=p.value,
        mos_raw=mos.value,
        mos_clamped=mos.clamped_value,
        mos=mos.clamped_value if spec.clamp_mos else mos.value,
        cost=cost,
    )


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    rows = []
    for value in spec.grid():
        try:
            rows.append(_row(spec, value))
        except DomainError as exc:
            raise DomainError(f"{spec.axis}={value!r}: {exc}") from exc
    return rows


def columns(rows: Sequence[SweepRow]) -> list[str]:
    names = [f.name for f in fields(SweepRow)]
    if all(r.cost is None for r in rows):
        names.remove("cost")
    return names


def emit(rows: Sequence[SweepRow], fmt: str = "csv") -> str:
    """Render rows as CSV (header + one line per row) or a JSON array of records.

    Floats use ``repr`` so they parse back to the identical double.
    """
    if not rows:
        raise DomainError("nothing to emit: no rows")
    if fmt not in FORMATS:
        raise DomainError(f"format must be one of {FORMATS}, got {fmt!r}")
    names = columns(rows)
    if fmt == "json":
        records = [{n: getattr(r, n) for n in names} for r in rows]
        return json.dumps(records, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    for r in rows:
        writer.writerow(["" if getattr(r, n) is None else repr(float(getattr(r, n))) for n in names])
    return buf.getvalue()


def parse_csv(text: str) -> list[SweepRow]:
    """Inverse of ``emit(rows, "csv")``."""
    reader = csv.DictReader(io.StringIO(text))
    out = []
    for rec in reader:
        kw = {k: (float(v) if v != "" else None) for k, v in rec.items()}
        out.append(SweepRow(**kw))
    return out
