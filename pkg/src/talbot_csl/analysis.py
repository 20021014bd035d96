"""The aleph distinguishability measure and (r_c, lambda) exclusion scans."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .csl import CslParams, csl_kernel_ln
from .errors import NumericIntegrityError, TalbotError
from .pattern import ExperimentConfig, KernelTable, PatternResult, assemble, derived_scales, kernel_table, screen_grid

MIN_ALEPH_POINTS = 2001
BISECTION_STEPS = 20
MAX_FAILED_FRACTION = 0.01


@dataclass(frozen=True)
class AlephResult:
    value: float
    threshold: float = 0.05
    excluded: bool = False


@dataclass(frozen=True)
class ExclusionGrid:
    r_c: np.ndarray
    rate: np.ndarray
    aleph: np.ndarray  # shape (len(r_c), len(rate)); NaN marks a failed point
    boundary: list[tuple[float, float]]
    threshold: float = 0.05
    meta: dict = field(default_factory=dict)


def aleph_value(x: np.ndarray, p_a: np.ndarray, p_b: np.ndarray, window: float) -> float:
    """(1/L) int |P_a - P_b| / (P_a + P_b) dx over [-L/2, L/2] by the trapezoid rule."""
    x = np.asarray(x, dtype=float)
    half = window / 2
    inside = (x >= -half * (1 + 1e-12)) & (x <= half * (1 + 1e-12))
    if np.count_nonzero(inside) < MIN_ALEPH_POINTS:
        raise ValueError(f"aleph needs >= {MIN_ALEPH_POINTS} grid points across the window")
    xs = x[inside]
    if xs[0] > -half * (1 - 1e-9) or xs[-1] < half * (1 - 1e-9):
        raise ValueError("pattern grid does not cover the aleph window")
    a, b = np.asarray(p_a)[inside], np.asarray(p_b)[inside]
    ratio = np.abs(a - b) / np.abs(a + b)
    return float(trapezoid(ratio, xs) / (xs[-1] - xs[0]))


def aleph(p_qm: PatternResult, p_csl: PatternResult, window: float = 1e-7, threshold: float = 0.05) -> AlephResult:
    if p_qm.x.shape != p_csl.x.shape or not np.array_equal(p_qm.x, p_csl.x):
        raise ValueError("patterns are sampled on different grids")
    value = aleph_value(p_qm.x, p_qm.P, p_csl.P, window)
    return AlephResult(value, threshold, value >= threshold)


def csl_unit_log_kernel(config: ExperimentConfig, table: KernelTable, r_c: float,
                        convention: str = "path-averaged") -> np.ndarray:
    """ln R_n^CSL per unit collapse rate; the kernel exponent is linear in lambda."""
    return csl_kernel_ln(table.n, (config.t1, config.t2), (config.mass, config.grating.period),
                         CslParams(1.0, r_c, convention), config.radius, config.particle.density)


def aleph_point(config: ExperimentConfig, csl: CslParams, table: KernelTable | None = None) -> AlephResult:
    """aleph between the CSL-free pattern of ``config`` and its CSL(lambda, r_c) variant."""
    base = config.with_csl(None)
    table = kernel_table(base) if table is None else table
    scales = derived_scales(base)
    x = screen_grid(base)
    p_qm = assemble(table, scales, x)
    unit = csl_unit_log_kernel(base, table, csl.r_c, csl.kernel_convention)
    p_csl = assemble(table, scales, x, csl_ln=csl.rate * unit)
    return aleph(p_qm, p_csl, base.screen_window, base.aleph_threshold)


def default_axes(n_rc: int = 60, n_rate: int = 60):
    return np.logspace(-9, -4, n_rc), np.logspace(-20, -6, n_rate)


def _column(args):
    config, table, scales, x, p_qm, r_c, rates, convention = args
    values = np.full(len(rates), np.nan)
    reasons = []
    try:
        unit = csl_unit_log_kernel(config, table, r_c, convention)
    except TalbotError as exc:
        return values, [f"r_c={r_c!r}: {exc}"] * len(rates), None

    def value_at(rate):
        p = assemble(table, scales, x, csl_ln=rate * unit)
        return aleph_value(x, p_qm.P, p.P, config.screen_window)

    for j, rate in enumerate(rates):
        try:
            values[j] = value_at(rate)
        except (TalbotError, ValueError) as exc:
            reasons.append(f"r_c={r_c!r}, lambda={rate!r}: {exc}")
    return values, reasons, value_at


def _bisect_boundary(value_at, lo: float, hi: float, threshold: float) -> float:
    """Bisection in log(lambda) for aleph = threshold between a passing ``lo`` and excluded ``hi``."""
    a, b = math.log(lo), math.log(hi)
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (a + b)
        if value_at(math.exp(mid)) >= threshold:
            b = mid
        else:
            a = mid
    return math.exp(0.5 * (a + b))


def exclusion_scan(base: ExperimentConfig, r_c_axis=None, rate_axis=None, threads: int = 1,
                   convention: str = "path-averaged") -> ExclusionGrid:
    """aleph on a (r_c, lambda) grid plus the exclusion boundary lambda(r_c).

    Output is independent of ``threads``: columns are evaluated independently
    and collected in order.
    """
    default_rc, default_rate = default_axes()
    r_c_axis = np.asarray(default_rc if r_c_axis is None else r_c_axis, dtype=float)
    rate_axis = np.asarray(default_rate if rate_axis is None else rate_axis, dtype=float)
    if np.any(r_c_axis <= 0) or np.any(rate_axis <= 0):
        raise ValueError("scan axes must be positive")
    if np.any(np.diff(rate_axis) <= 0) or np.any(np.diff(r_c_axis) <= 0):
        raise ValueError("scan axes must be strictly increasing")
    config = base.with_csl(None)
    table = kernel_table(config)
    scales = derived_scales(config)
    x = screen_grid(config)
    p_qm = assemble(table, scales, x)
    threshold = config.aleph_threshold
    jobs = [(config, table, scales, x, p_qm, float(rc), rate_axis, convention) for rc in r_c_axis]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            columns = list(pool.map(_column, jobs))
    else:
        columns = [_column(job) for job in jobs]
    grid = np.vstack([c[0] for c in columns])
    failures = [r for c in columns for r in c[1]]
    meta = {"failed_points": failures, "monotonicity_violations": [], "n_max": int(table.n[-1]) if table.n.size else 0,
            "warnings": list(table.warnings)}
    if len(failures) > MAX_FAILED_FRACTION * grid.size:
        raise NumericIntegrityError(f"{len(failures)} of {grid.size} scan points failed; scan aborted")
    boundary = []
    for i, rc in enumerate(r_c_axis):
        col = grid[i]
        ok = np.isfinite(col)
        diffs = np.diff(col[ok])
        if np.any(diffs < -1e-12):
            meta["monotonicity_violations"].append(float(rc))
        excluded = np.flatnonzero(ok & (col >= threshold))
        if excluded.size == 0:
            continue
        first = int(excluded[0])
        if first == 0:
            # excluded across the whole window: boundary lies below the axis
            continue
        value_at = columns[i][2]
        boundary.append((float(rc), _bisect_boundary(value_at, rate_axis[first - 1], rate_axis[first], threshold)))
    return ExclusionGrid(r_c_axis, rate_axis, grid, boundary, threshold, meta)
