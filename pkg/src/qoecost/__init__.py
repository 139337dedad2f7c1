"""Quality of Experience (MOS) versus bandwidth and bandwidth cost for TCP internet access."""

__version__ = "0.1.0"

from .errors import DomainError, PricingFormatError
from .power_fit import (
    DataSet,
    FitDiagnostics,
    FitOptions,
    FitResult,
    PowerLaw,
    confidence_bounds,
    finite_diff_jacobian,
    fit_power_law,
    goodness_of_fit,
    grid_oracle,
)
from .pricing import (
    PUBLISHED_COST_MODEL,
    UK_PRICING,
    CostModel,
    PricingTable,
    bandwidth_from_cost,
    cost_from_bandwidth,
    load_pricing,
    mos_from_cost,
)
from .sweeps import SweepRow, SweepSpec, emit, run_sweep
from .tcp_qoe import (
    MosScore,
    Plp,
    TcpScenario,
    capacity_from_bandwidth,
    mos_from_bandwidth,
    mos_from_plp,
    mos_label,
    plp,
)
