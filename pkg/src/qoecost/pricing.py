"""Tariff data, the power-law cost model and MOS as a function of monthly cost."""
from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass
from importlib import resources
from typing import IO, Union

from .errors import DomainError, PricingFormatError
from .power_fit import DataSet, PowerLaw
from .tcp_qoe import MosScore, TcpScenario, mos_from_bandwidth

PRICING_HEADER = ("bandwidth_mbps", "cost")
PROVENANCES = ("fitted", "paper_eq4", "user_supplied")

UK_BANDWIDTH_MBPS = (10, 30, 50, 100, 200, 400, 600, 800, 1000)
UK_MONTHLY_COST = (20, 37, 40, 42, 43, 45, 46, 46, 46)


@dataclass(frozen=True)
class PricingTable:
    samples: tuple[tuple[float, float], ...]
    currency_label: str = ""

    def __post_init__(self) -> None:
        samples = tuple((float(bw), float(c)) for bw, c in self.samples)
        if len(samples) < 2:
            raise PricingFormatError("need at least 2 samples")
        prev = None
        for i, (bw, cost) in enumerate(samples, start=1):
            if not (math.isfinite(bw) and math.isfinite(cost)):
                raise PricingFormatError(f"sample {i}: non-finite value")
            if bw <= 0:
                raise PricingFormatError(f"sample {i}: bandwidth must be positive, got {bw:g}")
            if cost <= 0:
                raise PricingFormatError(f"sample {i}: cost must be positive, got {cost:g}")
            if prev is not None and bw <= prev:
                raise PricingFormatError(
                    f"sample {i}: bandwidth {bw:g} is not greater than previous {prev:g}"
                )
            prev = bw
        object.__setattr__(self, "samples", samples)

    @property
    def n(self) -> int:
        return len(self.samples)

    def to_dataset(self) -> DataSet:
        return DataSet.from_points(self.samples)


UK_PRICING = PricingTable(tuple(zip(UK_BANDWIDTH_MBPS, UK_MONTHLY_COST)), currency_label="GBP")


@dataclass(frozen=True)
class CostModel:
    """Monthly cost ``a * bandwidth**b`` with bandwidth in Mbps."""

    law: PowerLaw
    provenance: str = "user_supplied"

    def __post_init__(self) -> None:
        if self.provenance not in PROVENANCES:
            raise DomainError(f"unknown provenance {self.provenance!r}")
        if not self.law.a > 0:
            raise DomainError(f"cost model needs a > 0, got {self.law.a!r}")
        if self.law.b == 0:
            raise DomainError("cost model with b = 0 is not invertible")


PUBLISHED_COST_MODEL = CostModel(PowerLaw(27.13, 0.0986), provenance="paper_eq4")


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be a positive finite number, got {value!r}")
    return value


def cost_from_bandwidth(m: CostModel, mbps: float) -> float:
    mbps = _positive("bandwidth", mbps)
    return m.law.a * mbps**m.law.b


def bandwidth_from_cost(m: CostModel, cost: float) -> float:
    """Bandwidth (Mbps) that the model prices at ``cost``."""
    cost = _positive("cost", cost)
    try:
        mbps = (cost / m.law.a) ** (1.0 / m.law.b)
    except OverflowError:
        mbps = math.inf
    if not math.isfinite(mbps) or mbps <= 0:
        raise DomainError(f"cost {cost:g} maps outside the representable bandwidth range")
    return mbps


def mos_from_cost(cost: float, m: CostModel, base: TcpScenario) -> MosScore:
    return mos_from_bandwidth(bandwidth_from_cost(m, cost), base)


def load_pricing(source: Union[str, os.PathLike, IO[str]], currency_label: str = "") -> PricingTable:
    """Read a ``bandwidth_mbps,cost`` CSV from a path or an open text stream."""
    if hasattr(source, "read"):
        text = source.read()
        name = getattr(source, "name", "<stream>")
    else:
        name = os.fspath(source)
        try:
            with open(name, encoding="utf-8", newline="") as fh:
                text = fh.read()
        except OSError as exc:
            raise PricingFormatError(f"{name}: {exc.strerror or exc}") from exc

    rows = [(i, row) for i, row in enumerate(csv.reader(io.StringIO(text)), start=1) if row and any(c.strip() for c in row)]
    if not rows:
        raise PricingFormatError("need at least 2 samples")
    line, header = rows[0]
    if tuple(c.strip() for c in header) != PRICING_HEADER:
        raise PricingFormatError(f"{name}: line {line}: expected header 'bandwidth_mbps,cost'")

    samples = []
    prev = None
    for line, row in rows[1:]:
        if len(row) != 2:
            raise PricingFormatError(f"{name}: line {line}: expected 2 columns, got {len(row)}")
        try:
            bw, cost = float(row[0]), float(row[1])
        except ValueError:
            raise PricingFormatError(f"{name}: line {line}: not a number: {','.join(row)!r}") from None
        if not (math.isfinite(bw) and math.isfinite(cost)):
            raise PricingFormatError(f"{name}: line {line}: non-finite value")
        if bw <= 0:
            raise PricingFormatError(f"{name}: line {line}: bandwidth must be positive, got {bw:g}")
        if cost <= 0:
            raise PricingFormatError(f"{name}: line {line}: cost must be positive, got {cost:g}")
        if prev is not None and bw <= prev:
            raise PricingFormatError(
                f"{name}: line {line}: bandwidth {bw:g} is not greater than previous {prev:g}"
            )
        prev = bw
        samples.append((bw, cost))
    if len(samples) < 2:
        raise PricingFormatError("need at least 2 samples")
    return PricingTable(tuple(samples), currency_label=currency_label)


def uk_pricing_path():
    """Path to the bundled UK tariff CSV."""
    return resources.files("qoecost").joinpath("data/pricing_uk.csv")
