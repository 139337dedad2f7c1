"""Nonlinear least-squares fitting of the one-term power law ``y = a * x**b``.

The solver is a damped Gauss-Newton (Levenberg-Marquardt) iteration on the
two coefficients with a forward-difference Jacobian. Least Absolute Residuals
fits wrap it in iteratively reweighted least squares.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError
from .tdist import t_quantile

N_COEFF = 2
ROBUST_MODES = ("none", "lar", "bisquare")
TERMINATIONS = ("tol_fun", "tol_x", "max_iter", "max_fun_evals")

_SQRT_EPS = math.sqrt(np.finfo(float).eps)
_MAX_REWEIGHT_ROUNDS = 50


@dataclass(frozen=True, eq=False)
class DataSet:
    """Paired samples with strictly positive ``x``."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        x = np.array(self.x, dtype=float).ravel()
        y = np.array(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise DomainError(f"x and y lengths differ ({x.size} vs {y.size})")
        if x.size < 2:
            raise DomainError("need at least 2 points")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DomainError("data contain non-finite values")
        if np.any(x <= 0):
            bad = float(x[x <= 0][0])
            raise DomainError(f"power model needs x > 0, got {bad!r}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]]) -> "DataSet":
        pts = list(points)
        return cls([p[0] for p in pts], [p[1] for p in pts])

    @property
    def n(self) -> int:
        return int(self.x.size)


@dataclass(frozen=True)
class PowerLaw:
    a: float
    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise DomainError(f"coefficients must be finite, got a={self.a!r}, b={self.b!r}")

    def __call__(self, x):
        return self.a * np.power(x, self.b)

    def jacobian(self, x) -> np.ndarray:
        """Analytic derivatives of the model with respect to ``(a, b)``."""
        x = np.asarray(x, dtype=float)
        xb = np.power(x, self.b)
        return np.column_stack([xb, self.a * xb * np.log(x)])


@dataclass(frozen=True)
class FitOptions:
    robust: str = "none"
    start: Optional[tuple[float, float]] = None
    tol_fun: float = 1e-6
    tol_x: float = 1e-6
    max_iter: int = 400
    max_fun_evals: int = 600
    diff_min_change: float = 1e-8
    diff_max_change: float = 0.1

    def __post_init__(self) -> None:
        if self.robust not in ROBUST_MODES:
            raise DomainError(f"robust must be one of {ROBUST_MODES}, got {self.robust!r}")
        if self.tol_fun <= 0 or self.tol_x <= 0:
            raise DomainError("tolerances must be positive")
        if self.max_iter < 1 or self.max_fun_evals < 1:
            raise DomainError("iteration caps must be >= 1")
        if not 0 < self.diff_min_change <= self.diff_max_change:
            raise DomainError("need 0 < diff_min_change <= diff_max_change")
        if self.start is not None:
            a0, b0 = (float(v) for v in self.start)
            if not (math.isfinite(a0) and math.isfinite(b0)):
                raise DomainError("start point must be finite")
            object.__setattr__(self, "start", (a0, b0))


@dataclass(frozen=True)
class FitDiagnostics:
    """Goodness-of-fit summary. Entries that are undefined for the data are ``None``."""

    sse: float
    sst: float
    r_square: Optional[float]
    adj_r_square: Optional[float]
    rmse: Optional[float]
    dfe: int
    n_coeff: int = N_COEFF


@dataclass(frozen=True)
class CoefficientBounds:
    a: tuple[float, float]
    b: tuple[float, float]
    level: float = 0.95
    singular: bool = False

    def width(self, name: str) -> float:
        lo, hi = getattr(self, name)
        return hi - lo


@dataclass(frozen=True)
class FitResult:
    model: PowerLaw
    diagnostics: FitDiagnostics
    confidence: Optional[CoefficientBounds]
    converged: bool
    iterations: int
    termination: str
    robust: str = "none"
    function_evals: int = 0
    reweight_rounds: int = 0
    sum_abs_residuals: float = field(default=float("nan"))

    def to_dict(self) -> dict:
        d = self.diagnostics
        conf = None
        if self.confidence is not None:
            conf = {
                "level": self.confidence.level,
                "singular": self.confidence.singular,
                "a": list(self.confidence.a),
                "b": list(self.confidence.b),
            }
        return {
            "model": "power1",
            "a": self.model.a,
            "b": self.model.b,
            "robust": self.robust,
            "confidence": conf,
            "diagnostics": {
                "sse": d.sse,
                "sst": d.sst,
                "r_square": d.r_square,
                "adj_r_square": d.adj_r_square,
                "rmse": d.rmse,
                "dfe": d.dfe,
                "n_coeff": d.n_coeff,
            },
            "sum_abs_residuals": self.sum_abs_residuals,
            "converged": self.converged,
            "iterations": self.iterations,
            "function_evals": self.function_evals,
            "reweight_rounds": self.reweight_rounds,
            "termination": self.termination,
        }


def residuals(data: DataSet, model: PowerLaw) -> np.ndarray:
    """``y - f(x)`` for every point."""
    return data.y - model(data.x)


def sum_squared_error(data: DataSet, model: PowerLaw) -> float:
    r = residuals(data, model)
    return float(r @ r)


def sum_abs_residuals(data: DataSet, model: PowerLaw) -> float:
    return float(np.abs(residuals(data, model)).sum())


def rmse_from_sse(sse: float, dfe: int) -> Optional[float]:
    return math.sqrt(sse / dfe) if dfe > 0 else None


def adjusted_r_square(r_square: Optional[float], n: int, dfe: int) -> Optional[float]:
    if r_square is None or dfe <= 0:
        return None
    return 1.0 - (1.0 - r_square) * (n - 1) / dfe


def goodness_of_fit(data: DataSet, model: PowerLaw) -> FitDiagnostics:
    """Unweighted SSE, R-square, adjusted R-square and RMSE of ``model`` on ``data``.

    With two points (no error degrees of freedom) only SSE and SST are
    reported; constant ``y`` leaves R-square undefined.
    """
    sse = sum_squared_error(data, model)
    dev = data.y - data.y.mean()
    sst = float(dev @ dev)
    dfe = data.n - N_COEFF
    r_square = 1.0 - sse / sst if sst > 0 else None
    return FitDiagnostics(
        sse=sse,
        sst=sst,
        r_square=r_square,
        adj_r_square=adjusted_r_square(r_square, data.n, dfe),
        rmse=rmse_from_sse(sse, dfe),
        dfe=dfe,
    )


def confidence_bounds(
    data: DataSet,
    model: PowerLaw,
    level: float = 0.95,
    weights: Optional[np.ndarray] = None,
) -> Optional[CoefficientBounds]:
    """Coefficient +/- t * standard error, with covariance ``s^2 (J^T J)^-1``.

    ``weights`` switch to the weighted residuals and Jacobian (used after a
    robust fit). Returns ``None`` when there are no error degrees of freedom.
    """
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level!r}")
    dfe = data.n - N_COEFF
    if dfe <= 0:
        return None
    sw = np.ones(data.n) if weights is None else np.sqrt(np.asarray(weights, dtype=float))
    r = sw * residuals(data, model)
    J = sw[:, None] * model.jacobian(data.x)
    s2 = float(r @ r) / dfe
    coef = (model.a, model.b)
    try:
        cov = s2 * np.linalg.inv(J.T @ J)
        se = np.sqrt(np.diag(cov))
        if not np.all(np.isfinite(se)):
            raise np.linalg.LinAlgError
    except np.linalg.LinAlgError:
        inf = (-math.inf, math.inf)
        return CoefficientBounds(a=inf, b=inf, level=level, singular=True)
    t = t_quantile(1.0 - (1.0 - level) / 2.0, dfe)
    lo_hi = [(float(c - t * e), float(c + t * e)) for c, e in zip(coef, se)]
    return CoefficientBounds(a=lo_hi[0], b=lo_hi[1], level=level)


def difference_step(value: float, opts: FitOptions) -> float:
    """Forward-difference step for one coefficient, clamped to the option limits."""
    h = _SQRT_EPS * abs(value)
    return min(max(h, opts.diff_min_change), opts.diff_max_change)


def finite_diff_jacobian(data: DataSet, model: PowerLaw, opts: Optional[FitOptions] = None) -> np.ndarray:
    """Forward-difference Jacobian of the model values, shape ``(n, 2)``."""
    opts = opts or FitOptions()
    base = model(data.x)
    ha = difference_step(model.a, opts)
    hb = difference_step(model.b, opts)
    da = (PowerLaw(model.a + ha, model.b)(data.x) - base) / ha
    db = (PowerLaw(model.a, model.b + hb)(data.x) - base) / hb
    return np.column_stack([da, db])


def grid_oracle(
    data: DataSet,
    a_range: tuple[float, float],
    b_range: tuple[float, float],
    resolution: int = 1000,
) -> PowerLaw:
    """Exhaustive grid minimiser of the unweighted SSE. Meant as a test oracle."""
    if resolution < 100:
        raise DomainError("resolution must be at least 100 per axis")
    bounds = (*a_range, *b_range)
    if not all(math.isfinite(v) for v in bounds) or a_range[0] > a_range[1] or b_range[0] > b_range[1]:
        raise DomainError("grid ranges must be finite and ordered")
    a_grid = np.linspace(a_range[0], a_range[1], resolution)
    b_grid = np.linspace(b_range[0], b_range[1], resolution)
    best = (math.inf, a_grid[0], b_grid[0])
    for b in b_grid:
        pred = a_grid[:, None] * np.power(data.x, b)[None, :]
        sse = ((data.y[None, :] - pred) ** 2).sum(axis=1)
        i = int(np.argmin(sse))
        if sse[i] < best[0]:
            best = (float(sse[i]), a_grid[i], b)
    return PowerLaw(float(best[1]), float(best[2]))


def default_start(data: DataSet) -> tuple[float, float]:
    """Start point from a straight-line fit of ln y on ln x.

    Falls back to ``(mean(y), 0)`` if any ``y <= 0`` or the regression is degenerate.
    """
    if np.all(data.y > 0):
        lx, ly = np.log(data.x), np.log(data.y)
        dx = lx - lx.mean()
        sxx = float(dx @ dx)
        if sxx > 0:
            b = float(dx @ (ly - ly.mean())) / sxx
            a = math.exp(ly.mean() - b * lx.mean())
            if math.isfinite(a) and math.isfinite(b):
                return a, b
    return float(data.y.mean()), 0.0


@dataclass
class _Solve:
    params: np.ndarray
    iterations: int
    function_evals: int
    termination: str
    converged: bool


def _levenberg_marquardt(data: DataSet, sw: np.ndarray, start, opts: FitOptions) -> _Solve:
    # minimises ||sw * (f(x; p) - y)||^2
    def resid(p):
        with np.errstate(over="ignore", invalid="ignore"):
            return sw * (p[0] * np.power(data.x, p[1]) - data.y)

    def jac(p):
        with np.errstate(over="ignore", invalid="ignore"):
            return sw[:, None] * finite_diff_jacobian(data, PowerLaw(*p), opts)

    p = np.array(start, dtype=float)
    r = resid(p)
    J = jac(p)
    fevals = 3
    sse = float(r @ r)
    A, g = J.T @ J, J.T @ r
    lam = 1e-3
    iterations = 0
    while True:
        # first-order optimality as |cos(J_j, r)|, which is invariant to rescaling y
        col_norms = np.linalg.norm(J, axis=0) * math.sqrt(sse)
        if np.all(np.abs(g) <= opts.tol_fun * col_norms):
            return _Solve(p, iterations, fevals, "tol_fun", True)
        if iterations >= opts.max_iter:
            return _Solve(p, iterations, fevals, "max_iter", False)
        if fevals >= opts.max_fun_evals:
            return _Solve(p, iterations, fevals, "max_fun_evals", False)
        iterations += 1
        try:
            # Marquardt scaling keeps the damping independent of coefficient units
            scale = np.maximum(np.diag(A), 1e-300)
            step = np.linalg.solve(A + lam * np.diag(scale), -g)
            if not np.all(np.isfinite(step)):
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            step = -g / max(lam, float(np.max(np.abs(g))))
        trial = p + step
        r_new = resid(trial)
        fevals += 1
        sse_new = float(r_new @ r_new)
        predicted = -2.0 * float(g @ step) - float(step @ A @ step)
        gain = (sse - sse_new) / predicted if predicted > 0 and math.isfinite(sse_new) else -1.0
        small_step = bool(np.all(np.abs(step) <= opts.tol_x * (opts.tol_x + np.abs(p))))
        if gain > 0:
            p, r, sse = trial, r_new, sse_new
            J = jac(p)
            fevals += 2
            A, g = J.T @ J, J.T @ r
        if small_step:
            return _Solve(p, iterations, fevals, "tol_x", True)
        if gain > 0.75:
            lam *= 0.5
        elif gain < 0.25:
            lam *= 4.0


def fit_power_law(data: DataSet, opts: Optional[FitOptions] = None) -> FitResult:
    """Fit ``y = a * x**b`` by nonlinear least squares, optionally LAR-robust.

    Diagnostics are always the unweighted ones. Confidence bounds use the
    final weights for LAR fits.
    """
    opts = opts or FitOptions()
    if opts.robust == "bisquare":
        raise NotImplementedError("bisquare robust fitting is not implemented")
    if opts.robust == "lar" and data.n < 3:
        raise DomainError("LAR fitting needs at least 3 points")
    start = opts.start if opts.start is not None else default_start(data)

    solve = _levenberg_marquardt(data, np.ones(data.n), start, opts)
    weights = None
    rounds = 0
    converged = solve.converged
    if opts.robust == "lar":
        p = solve.params
        for rounds in range(1, _MAX_REWEIGHT_ROUNDS + 1):
            abs_r = np.abs(residuals(data, PowerLaw(*p)))
            floor = 1e-6 * (1.0 + float(np.median(abs_r)))
            weights = 1.0 / np.maximum(abs_r, floor)
            solve = _levenberg_marquardt(data, np.sqrt(weights), p, opts)
            settled = np.all(np.abs(solve.params - p) < opts.tol_x * (opts.tol_x + np.abs(p)))
            p = solve.params
            if settled:
                break
        converged = solve.converged

    model = PowerLaw(float(solve.params[0]), float(solve.params[1]))
    return FitResult(
        model=model,
        diagnostics=goodness_of_fit(data, model),
        confidence=confidence_bounds(data, model, weights=weights),
        converged=converged,
        iterations=solve.iterations,
        termination=solve.termination,
        robust=opts.robust,
        function_evals=solve.function_evals,
        reweight_rounds=rounds,
        sum_abs_residuals=sum_abs_residuals(data, model),
    )
