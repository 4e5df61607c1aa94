"""Parameter sweeps, log-log slope fits and machine-readable result tables.

Each driver returns an ``ExperimentResult`` holding a deterministic
``SweepTable`` (identical configuration gives bit-identical rows), the
least-squares slope fits of every error series, and the count of points
excluded from each fit because they sat at the round-off floor.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import quantize as qz
from .errors import TooFewPoints, Unreachable, ValidationError
from .evolve import (
    ROUNDOFF_FLOOR_PER_DIM,
    EvolutionPlan,
    SplittingScheme,
    exact_unitary,
    expectation_error,
    gaussian_wavepacket,
    observable_error,
    unitary_error,
)
from .hamiltonian import (
    GridSpec,
    build_pair,
    cosine_observable,
    momentum_fd_observable,
    momentum_observable,
)
from .numkit import spectral_norm
from .quantize import QuantizationContext
from .symbols import cosine_x, cosine_xi

__all__ = [
    "FitReport",
    "SweepTable",
    "ExperimentResult",
    "fit_loglog_slope",
    "roundoff_floor",
    "sweep_timestep",
    "sweep_h",
    "commutator_scan",
    "calculus_suite",
    "query_count",
    "query_count_study",
    "SWEEP_COLUMNS",
    "FIT_WINDOW_LOCAL_S",
    "FIT_WINDOW_H",
]

DEFAULT_DOMAIN = (-math.pi, math.pi)
WAVEPACKET_X0 = 0.0
WAVEPACKET_P0 = 0.5

# Local single-step fits drop the two coarsest steps of the canonical
# s = 2^-4 .. 2^-11 ladder, where the asymptotic regime may not hold yet.
FIT_WINDOW_LOCAL_S = (2.0**-11, 2.0**-6)

# Planck-constant fits and flatness ratios likewise drop the two coarsest
# grids of the canonical h = 2^-3 .. 2^-10 ladder: at N = 8 and N = 16 the
# dynamics is under-resolved and observable errors sit well below their
# h -> 0 plateau, which would read as spurious growth.
FIT_WINDOW_H = (0.0, 2.0**-5)

SWEEP_COLUMNS = ("s", "h", "N", "scheme", "observable", "metric", "value")

POTENTIALS: dict[str, Callable] = {
    "cos": np.cos,
    "zero": lambda x: np.zeros_like(np.asarray(x, dtype=np.float64)),
}

# The default momentum entry is the central-difference realization: its
# symbol is smooth on the frequency torus, so the uniform-in-h observable
# bounds cover it and the flat h-sweep curves are reproduced. The spectral
# realization has a sawtooth symbol whose Nyquist jump makes worst-case
# errors grow like 1/h; it stays available for side-by-side runs.
OBSERVABLES: dict[str, Callable[[GridSpec], np.ndarray]] = {
    "cos_x": cosine_observable,
    "cos_3x": lambda grid: cosine_observable(grid, harmonic=3),
    "momentum_fd": momentum_fd_observable,
    "momentum_spectral": momentum_observable,
}


def roundoff_floor(n: int) -> float:
    """Error level below which dense-algebra results are pure round-off."""
    return ROUNDOFF_FLOOR_PER_DIM * n


@dataclass(frozen=True)
class FitReport:
    """Ordinary least squares on (log x, log y)."""

    slope: float
    intercept: float
    r_squared: float
    points_used: int
    window: tuple[float, float]


@dataclass(frozen=True)
class SweepTable:
    """Tabulated sweep results: named columns, sorted rows, run metadata."""

    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    metadata: tuple[tuple[str, str], ...] = ()

    @staticmethod
    def build(columns: Sequence[str], rows: Iterable[tuple],
              metadata: dict[str, str] | None = None) -> "SweepTable":
        ordered = tuple(sorted(rows))
        meta = tuple(sorted((metadata or {}).items()))
        return SweepTable(tuple(columns), ordered, meta)

    def select(self, **filters) -> list[tuple]:
        idx = {name: self.columns.index(name) for name in filters}
        return [row for row in self.rows
                if all(row[idx[name]] == value for name, value in filters.items())]

    def series(self, x: str, y: str = "value", **filters) -> list[tuple[float, float]]:
        xi, yi = self.columns.index(x), self.columns.index(y)
        return [(row[xi], row[yi]) for row in self.select(**filters)]

    def csv_text(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_format_cell(cell) for cell in row))
        return "\n".join(lines) + "\n"


def _format_cell(cell) -> str:
    if isinstance(cell, bool):
        return str(cell)
    if isinstance(cell, (int, np.integer)):
        return str(int(cell))
    if isinstance(cell, (float, np.floating)):
        return f"{float(cell):.17g}"
    return str(cell)


@dataclass(frozen=True)
class ExperimentResult:
    table: SweepTable
    fits: dict[str, FitReport] = field(default_factory=dict)
    excluded: dict[str, int] = field(default_factory=dict)


def fit_loglog_slope(points: Iterable[tuple[float, float]],
                     window: tuple[float, float] | None = None) -> FitReport:
    """Fit log y = slope * log x + intercept over the points inside the window.

    Points with y <= 0 cannot enter the log fit and are skipped; at least
    three usable points are required.
    """
    usable = [(x, y) for x, y in points
              if y > 0 and (window is None or window[0] <= x <= window[1])]
    if len(usable) < 3:
        raise TooFewPoints(f"slope fit needs >= 3 positive points, got {len(usable)}")
    lx = np.log(np.array([p[0] for p in usable]))
    ly = np.log(np.array([p[1] for p in usable]))
    design = np.vstack([lx, np.ones_like(lx)]).T
    (slope, intercept), *_ = np.linalg.lstsq(design, ly, rcond=None)
    fitted = design @ np.array([slope, intercept])
    ss_res = float(np.sum((ly - fitted) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else max(0.0, 1.0 - ss_res / ss_tot)
    used_x = [p[0] for p in usable]
    return FitReport(slope=float(slope), intercept=float(intercept), r_squared=r2,
                     points_used=len(usable), window=(min(used_x), max(used_x)))


def _fit_series(points, window, floor):
    """Fit a series after dropping round-off-floor points; report exclusions.

    Series whose usable points shrink below three (everything at the
    floor, e.g. expectation errors of a high-order scheme) yield no fit
    instead of failing the whole sweep.
    """
    points = list(points)
    kept = [(x, y) for x, y in points if y > floor]
    try:
        report = fit_loglog_slope(kept, window=window)
    except TooFewPoints:
        report = None
    return report, len(points) - len(kept)


def _map_ordered(fn, items, threads: int):
    if threads <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _scheme(obj) -> SplittingScheme:
    return obj if isinstance(obj, SplittingScheme) else SplittingScheme(obj)


def _build_setup(h: float, domain, potential_id: str, observable_ids):
    grid = GridSpec.canonical(domain[0], domain[1], h)
    pair = build_pair(grid, potential=POTENTIALS[potential_id])
    observables = {name: OBSERVABLES[name](grid) for name in observable_ids}
    packet = gaussian_wavepacket(grid, WAVEPACKET_X0, WAVEPACKET_P0, h)
    return grid, pair, observables, packet


def sweep_timestep(*, s_values: Sequence[float], h: float,
                   mode: str = "local", t_total: float = 1.0,
                   domain=DEFAULT_DOMAIN, potential_id: str = "cos",
                   observable_ids: Sequence[str] = ("cos_x", "momentum_fd"),
                   schemes: Sequence = ("Lie1", "Strang2"),
                   threads: int = 1) -> ExperimentResult:
    """Observable and expectation errors versus the step size s.

    ``local`` mode runs a single step of size s (short-time error);
    ``global`` mode runs to t_total with n = t_total / s steps, which must
    be integral.
    """
    schemes = [_scheme(s) for s in schemes]
    grid, pair, observables, packet = _build_setup(h, domain, potential_id, observable_ids)
    hamiltonian = pair.total

    def rows_for(s: float) -> list[tuple]:
        if mode == "local":
            n = 1
        else:
            n = round(t_total / s)
            if n < 1 or abs(n * s - t_total) > 1e-9 * t_total:
                raise ValidationError("s_values", f"step {s} does not divide t={t_total}")
        out = []
        for scheme in schemes:
            plan = EvolutionPlan(scheme, s, n, h)
            u = exact_unitary(hamiltonian, plan.t, h)
            for name, obs in observables.items():
                err = observable_error(obs, pair, plan, exact_u=u)
                exp_err = expectation_error(obs, pair, plan, packet, exact_u=u)
                out.append((s, h, grid.N, scheme.value, name, "observable_error", err))
                out.append((s, h, grid.N, scheme.value, name, "expectation_error", exp_err))
        return out

    rows = [row for chunk in _map_ordered(rows_for, sorted(s_values), threads) for row in chunk]
    table = SweepTable.build(SWEEP_COLUMNS, rows, {
        "mode": mode, "grid_relation": "N=(b-a)/(2*pi*h)", "potential": potential_id,
        "t_total": "" if mode == "local" else f"{t_total:.17g}",
    })

    window = FIT_WINDOW_LOCAL_S if mode == "local" else None
    fits, excluded = {}, {}
    for scheme in schemes:
        for name in observables:
            for metric in ("observable_error", "expectation_error"):
                key = f"{scheme.value}/{name}/{metric}"
                pts = table.series("s", scheme=scheme.value, observable=name, metric=metric)
                report, excluded[key] = _fit_series(pts, window, roundoff_floor(grid.N))
                if report is not None:
                    fits[key] = report
    return ExperimentResult(table, fits, excluded)


def sweep_h(*, h_values: Sequence[float], s_fixed: float,
            mode: str = "local", t_total: float = 1.0,
            domain=DEFAULT_DOMAIN, potential_id: str = "cos",
            observable_ids: Sequence[str] = ("cos_x", "momentum_fd"),
            schemes: Sequence = ("Lie1", "Strang2"),
            threads: int = 1) -> ExperimentResult:
    """Unitary, observable and expectation errors versus the Planck constant.

    The grid follows the canonical relation N = (b-a)/(2 pi h) at every h.
    ``local`` runs one step of size s_fixed; ``global`` runs to t_total.
    """
    schemes = [_scheme(s) for s in schemes]

    def rows_for(h: float) -> list[tuple]:
        grid, pair, observables, packet = _build_setup(h, domain, potential_id, observable_ids)
        if mode == "local":
            n = 1
        else:
            n = round(t_total / s_fixed)
            if n < 1:
                raise ValidationError("s_fixed", f"step {s_fixed} exceeds t={t_total}")
        out = []
        for scheme in schemes:
            plan = EvolutionPlan(scheme, s_fixed, n, h)
            u = exact_unitary(pair.total, plan.t, h)
            out.append((s_fixed, h, grid.N, scheme.value, "-", "unitary_error",
                        unitary_error(pair, plan, exact_u=u)))
            for name, obs in observables.items():
                err = observable_error(obs, pair, plan, exact_u=u)
                exp_err = expectation_error(obs, pair, plan, packet, exact_u=u)
                out.append((s_fixed, h, grid.N, scheme.value, name, "observable_error", err))
                out.append((s_fixed, h, grid.N, scheme.value, name, "expectation_error", exp_err))
        return out

    rows = [row for chunk in _map_ordered(rows_for, sorted(h_values), threads) for row in chunk]
    n_max = max(row[2] for row in rows)
    table = SweepTable.build(SWEEP_COLUMNS, rows, {
        "mode": mode, "grid_relation": "N=(b-a)/(2*pi*h)", "potential": potential_id,
        "s_fixed": f"{s_fixed:.17g}",
        "t_total": "" if mode == "local" else f"{t_total:.17g}",
    })

    fits, excluded = {}, {}
    for scheme in schemes:
        key = f"{scheme.value}/unitary_error"
        pts = table.series("h", scheme=scheme.value, observable="-", metric="unitary_error")
        report, excluded[key] = _fit_series(pts, FIT_WINDOW_H, roundoff_floor(n_max))
        if report is not None:
            fits[key] = report
        for name in observable_ids:
            for metric in ("observable_error", "expectation_error"):
                key = f"{scheme.value}/{name}/{metric}"
                pts = table.series("h", scheme=scheme.value, observable=name, metric=metric)
                report, excluded[key] = _fit_series(pts, FIT_WINDOW_H, roundoff_floor(n_max))
                if report is not None:
                    fits[key] = report
    return ExperimentResult(table, fits, excluded)


def commutator_scan(h_values: Sequence[float], domain=DEFAULT_DOMAIN,
                    potential_id: str = "cos", threads: int = 1) -> ExperimentResult:
    """Norms of the h-scaled split operators and their nested commutators.

    With A and B the kinetic/potential discretizations, tabulates the
    spectral norms of A/h, B/h, [A/h, B/h] and both nested commutators;
    each is expected to scale like 1/h under the canonical meshing.
    """
    metrics = ("norm_A_over_h", "norm_B_over_h", "norm_comm_AB",
               "norm_comm_A_AB", "norm_comm_B_AB")

    def rows_for(h: float) -> list[tuple]:
        grid = GridSpec.canonical(domain[0], domain[1], h)
        pair = build_pair(grid, potential=POTENTIALS[potential_id])
        a, b = pair.kinetic.dense / h, pair.potential.dense / h
        comm = a @ b - b @ a
        values = (
            spectral_norm(a),
            spectral_norm(b),
            spectral_norm(comm),
            spectral_norm(a @ comm - comm @ a),
            spectral_norm(b @ comm - comm @ b),
        )
        return [(h, grid.N, metric, val) for metric, val in zip(metrics, values)]

    rows = [row for chunk in _map_ordered(rows_for, sorted(h_values), threads) for row in chunk]
    table = SweepTable.build(("h", "N", "metric", "value"), rows, {
        "grid_relation": "N=(b-a)/(2*pi*h)", "potential": potential_id,
    })
    fits = {m: fit_loglog_slope(table.series("h", metric=m)) for m in metrics}
    return ExperimentResult(table, fits, {m: 0 for m in metrics})


def calculus_suite(n_values: Sequence[int], t_flow: float = 0.5,
                   threads: int = 1) -> ExperimentResult:
    """Composition, commutator, sup-norm and flow-conjugation defects over N.

    Runs the canonical pair a = cos(2 pi x), b = cos(2 pi xi) through the
    quantization remainders at each N and fits the h-scaling of each.
    """
    a, b = cosine_x(), cosine_xi()

    def rows_for(n: int) -> list[tuple]:
        ctx = QuantizationContext(n)
        h = ctx.h
        gap = qz.cv_gap(a + b, ctx)
        return [
            (n, h, "composition_remainder", qz.composition_remainder(a, b, ctx)),
            (n, h, "commutator_remainder", qz.commutator_remainder(a, b, ctx)),
            (n, h, "cv_gap", gap),
            (n, h, "cv_gap_over_h", gap / h),
            (n, h, "egorov_remainder", qz.egorov_remainder(a, b, t_flow, ctx)),
        ]

    rows = [row for chunk in _map_ordered(rows_for, sorted(n_values), threads) for row in chunk]
    table = SweepTable.build(("N", "h", "metric", "value"), rows,
                             {"pair": "cos_x/cos_xi", "t_flow": f"{t_flow:.17g}"})
    fits, excluded = {}, {}
    for metric in ("composition_remainder", "commutator_remainder", "egorov_remainder"):
        report, excluded[metric] = _fit_series(table.series("h", metric=metric), None, 0.0)
        if report is not None:
            fits[metric] = report
    return ExperimentResult(table, fits, excluded)


def query_count(epsilon: float, scheme, h: float, *,
                domain=DEFAULT_DOMAIN, potential_id: str = "cos",
                observable_id: str = "cos_3x", t_total: float = 1.0,
                cap: int = 2**15) -> int:
    """Smallest step count n with observable error at most epsilon at t_total.

    Doubling search for an upper bound, then bisection on the (empirically
    monotone) error-versus-n curve. Raises Unreachable past ``cap`` steps.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    scheme = _scheme(scheme)
    grid = GridSpec.canonical(domain[0], domain[1], h)
    pair = build_pair(grid, potential=POTENTIALS[potential_id])
    obs = OBSERVABLES[observable_id](grid)

    def error_at(n: int) -> float:
        plan = EvolutionPlan(scheme, t_total / n, n, h)
        return observable_error(obs, pair, plan)

    if error_at(1) <= epsilon:
        return 1
    low, high = 1, 2
    while error_at(high) > epsilon:
        low, high = high, high * 2
        if high > cap:
            raise Unreachable(f"no step count up to {cap} reaches error {epsilon}")
    while high - low > 1:
        mid = (low + high) // 2
        if error_at(mid) <= epsilon:
            high = mid
        else:
            low = mid
    return high


def query_count_study(*, epsilons: Sequence[float], h_values: Sequence[float],
                      schemes: Sequence = ("Strang2",), domain=DEFAULT_DOMAIN,
                      potential_id: str = "cos", observable_id: str = "cos_3x",
                      t_total: float = 1.0, threads: int = 1) -> ExperimentResult:
    """Step counts over epsilon and h, including each epsilon / 4 companion.

    The companion points make the epsilon -> epsilon/4 count ratio and a
    slope fit of count versus 1/epsilon available from one table.
    """
    schemes = [_scheme(s) for s in schemes]
    eps_all = sorted({float(e) for e in epsilons} | {float(e) / 4.0 for e in epsilons})
    tasks = [(scheme, h, eps) for scheme in schemes for h in sorted(h_values)
             for eps in eps_all]

    def row_for(task):
        scheme, h, eps = task
        steps = query_count(eps, scheme, h, domain=domain, potential_id=potential_id,
                            observable_id=observable_id, t_total=t_total)
        return (eps, h, scheme.value, "steps", steps)

    rows = _map_ordered(row_for, tasks, threads)
    table = SweepTable.build(("epsilon", "h", "scheme", "metric", "value"), rows, {
        "observable": observable_id, "potential": potential_id,
        "t_total": f"{t_total:.17g}",
    })
    fits = {}
    for scheme in schemes:
        for h in sorted(h_values):
            pts = [(1.0 / eps, n) for eps, n in
                   table.series("epsilon", scheme=scheme.value, h=h, metric="steps")]
            if len(pts) >= 3:
                fits[f"{scheme.value}/h={h:.17g}/steps_vs_inv_eps"] = fit_loglog_slope(pts)
    return ExperimentResult(table, fits, {})
