"""Closed-form TCP packet loss and its mapping to Mean Opinion Score.

The loss model treats ``N`` long-lived TCP sources sharing a bottleneck of
``C`` packets/second with a buffer of ``Q`` packets::

    P = 32 N^2 / (3 b (m + 1)^2 (C * RTT + Q)^2)

and MOS follows from loss as::

    MOS = 1.46 exp(-44 P) + 4.14 exp(-2.9 P)

The MOS mapping is sometimes printed with a nested ``exp(exp(-44 P))`` in the
first term. That form does not reproduce the published PLP/MOS tables; the
single exponential above does, so it is the one implemented here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DomainError

BITS_PER_PACKET = 12_000

MOS_LABELS = {5: "Excellent", 4: "Good", 3: "Fair", 2: "Poor", 1: "Bad"}


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class TcpScenario:
    """Parameters of the TCP loss model.

    ``buffer_len`` is counted in packets and ``capacity`` in packets/second.
    """

    n_sources: int = 50
    ack_ratio: int = 1
    rate_reduction: float = 0.5
    rtt: float = 0.1
    buffer_len: float = 10.0
    capacity: float = 12_500.0

    def __post_init__(self) -> None:
        for name in ("rate_reduction", "rtt", "buffer_len", "capacity"):
            _finite(name, getattr(self, name))
        if int(self.n_sources) != self.n_sources or self.n_sources < 0:
            raise DomainError(f"n_sources must be a non-negative integer, got {self.n_sources!r}")
        if int(self.ack_ratio) != self.ack_ratio or self.ack_ratio < 1:
            raise DomainError(f"ack_ratio must be an integer >= 1, got {self.ack_ratio!r}")
        if not 0.0 < self.rate_reduction <= 1.0:
            raise DomainError(f"rate_reduction must lie in (0, 1], got {self.rate_reduction!r}")
        if self.rtt <= 0:
            raise DomainError(f"rtt must be positive, got {self.rtt!r}")
        if self.capacity <= 0:
            raise DomainError(f"capacity must be positive, got {self.capacity!r}")
        if self.buffer_len < 0:
            raise DomainError(f"buffer_len must be non-negative, got {self.buffer_len!r}")


@dataclass(frozen=True)
class Plp:
    value: float
    saturated: bool = False


@dataclass(frozen=True)
class MosScore:
    value: float

    @property
    def clamped_value(self) -> float:
        return min(5.0, max(1.0, self.value))


def plp(s: TcpScenario) -> Plp:
    """Packet loss probability for scenario ``s``.

    Values above 1 (tiny bandwidth-delay product plus buffer) are clamped to 1
    and flagged ``saturated``.
    """
    if s.n_sources == 0:
        return Plp(0.0)
    pipe = s.capacity * s.rtt + s.buffer_len
    if pipe == 0:
        raise DomainError("C*RTT + Q is zero")
    m1 = s.rate_reduction + 1.0
    p = 32.0 * s.n_sources**2 / (3.0 * s.ack_ratio * m1 * m1 * pipe * pipe)
    if p > 1.0:
        return Plp(1.0, saturated=True)
    return Plp(p)


def mos_from_plp(p: Plp | float) -> MosScore:
    value = _finite("plp", p.value if isinstance(p, Plp) else p)
    if not 0.0 <= value <= 1.0:
        raise DomainError(f"plp must lie in [0, 1], got {value!r}")
    return MosScore(1.46 * math.exp(-44.0 * value) + 4.14 * math.exp(-2.9 * value))


def capacity_from_bandwidth(mbps: float) -> float:
    """Bottleneck capacity in packets/second for a link of ``mbps`` megabits/second."""
    mbps = _finite("bandwidth", mbps)
    if mbps <= 0:
        raise DomainError(f"bandwidth must be positive, got {mbps!r}")
    return mbps * 1_000_000 / BITS_PER_PACKET


def mos_from_bandwidth(mbps: float, base: TcpScenario) -> MosScore:
    """MOS with the scenario's capacity replaced by the one implied by ``mbps``."""
    scenario = replace(base, capacity=capacity_from_bandwidth(mbps))
    return mos_from_plp(plp(scenario))


def mos_label(m: MosScore | float) -> str:
    """Five-point label for a score; rounds to nearest integer, halves go up."""
    value = m.clamped_value if isinstance(m, MosScore) else min(5.0, max(1.0, _finite("mos", m)))
    return MOS_LABELS[int(math.floor(value + 0.5))]
