"""Acceptance gate: one test per shipped criterion, at stated tolerances.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one pass/fail
line per criterion. The heavy sweeps (criteria 1-3) are computed once in
module-scoped fixtures and reused by the domination check (criterion 7).
"""

import time

import numpy as np
import pytest

from trotterlab.evolve import SplittingScheme, trotter_step_unitary
from trotterlab.experiments import (
    FIT_WINDOW_H,
    calculus_suite,
    commutator_scan,
    query_count,
    sweep_h,
    sweep_timestep,
)
from trotterlab.fourier import dft_matrix
from trotterlab.hamiltonian import GridSpec, build_pair
from trotterlab.numkit import expm_hermitian, hermitian_eig, spectral_norm
from trotterlab.quantize import QuantizationContext, quantize
from trotterlab.symbols import cosine_x, cosine_xi, product, sine_x

S_LADDER = [2.0**-k for k in range(4, 12)]
H_LADDER = [2.0**-k for k in range(3, 11)]


def report(num, name, passed, detail, seconds=None):
    stamp = "" if seconds is None else f"; {seconds:.1f}s"
    line = f"ACCEPTANCE {num} {name}: {'PASS' if passed else 'FAIL'} ({detail}{stamp})"
    print(line)
    assert passed, line


def timed(fn):
    t0 = time.time()
    out = fn()
    return out, time.time() - t0


@pytest.fixture(scope="module")
def local_s():
    return timed(lambda: sweep_timestep(
        s_values=S_LADDER, h=2.0**-6, mode="local",
        observable_ids=("cos_x", "momentum_fd", "momentum_spectral")))


@pytest.fixture(scope="module")
def global_s():
    return timed(lambda: sweep_timestep(
        s_values=S_LADDER, h=2.0**-8, mode="global", t_total=1.0))


@pytest.fixture(scope="module")
def h_local():
    return timed(lambda: sweep_h(h_values=H_LADDER, s_fixed=0.1, mode="local"))


@pytest.fixture(scope="module")
def h_global():
    return timed(lambda: sweep_h(h_values=H_LADDER, s_fixed=0.02, mode="global",
                                 t_total=1.0))


def test_criterion_1_local_s_order(local_s):
    result, seconds = local_s
    ranges = {"Lie1": (1.8, 2.2), "Strang2": (2.7, 3.3)}
    details = []
    ok = True
    for scheme, (lo, hi) in ranges.items():
        for obs in ("cos_x", "momentum_fd", "momentum_spectral"):
            slope = result.fits[f"{scheme}/{obs}/observable_error"].slope
            details.append(f"{scheme}/{obs}={slope:.3f}")
            ok &= lo <= slope <= hi
    ok &= seconds < 10.0
    report(1, "local-s-order", ok, " ".join(details), seconds)


def test_criterion_2_global_s_order(global_s):
    result, seconds = global_s
    ranges = {"Lie1": (0.8, 1.2), "Strang2": (1.8, 2.2)}
    details = []
    ok = True
    for scheme, (lo, hi) in ranges.items():
        for obs in ("cos_x", "momentum_fd"):
            slope = result.fits[f"{scheme}/{obs}/observable_error"].slope
            details.append(f"{scheme}/{obs}={slope:.3f}")
            ok &= lo <= slope <= hi
    ok &= seconds < 300.0
    report(2, "global-s-order", ok, " ".join(details), seconds)


def test_criterion_3_h_uniformity(h_local, h_global):
    details = []
    ok = True
    seconds = h_local[1] + h_global[1]
    for label, (result, _) in (("local", h_local), ("global", h_global)):
        for scheme in ("Lie1", "Strang2"):
            u_slope = result.fits[f"{scheme}/unitary_error"].slope
            details.append(f"{label}/{scheme}/unitary={u_slope:.2f}")
            ok &= -1.3 <= u_slope <= -0.7
            for obs in ("cos_x", "momentum_fd"):
                slope = result.fits[f"{scheme}/{obs}/observable_error"].slope
                vals = [v for h, v in result.table.series(
                    "h", scheme=scheme, observable=obs, metric="observable_error")
                    if h <= FIT_WINDOW_H[1]]
                ratio = max(vals) / min(vals)
                details.append(f"{label}/{scheme}/{obs}=({slope:.2f},x{ratio:.2f})")
                ok &= -0.25 <= slope <= 0.25 and ratio <= 3.0
    ok &= seconds < 900.0
    report(3, "h-uniformity", ok, " ".join(details), seconds)


def test_criterion_4_norm_scalings():
    result, seconds = timed(lambda: commutator_scan([2.0**-k for k in range(3, 9)]))
    details = []
    ok = True
    for metric, fit in sorted(result.fits.items()):
        details.append(f"{metric}={fit.slope:.3f}")
        ok &= -1.3 <= fit.slope <= -0.7
    ok &= seconds < 120.0
    report(4, "norm-scalings", ok, " ".join(details), seconds)


def test_criterion_5_calculus_suite():
    result, seconds = timed(lambda: calculus_suite([16, 32, 64, 128, 256], t_flow=0.5))
    comp = result.fits["composition_remainder"].slope
    comm = result.fits["commutator_remainder"].slope
    ego = result.fits["egorov_remainder"].slope
    ratios = [v for _, v in result.table.series("N", metric="cv_gap_over_h")]
    cv_ok = all(np.isfinite(r) for r in ratios) and ratios[-1] <= ratios[0] + 1e-9
    ok = comp >= 1.8 and comm >= 2.7 and ego >= 1.8 and cv_ok and seconds < 120.0
    report(5, "calculus-suite", ok,
           f"comp={comp:.2f} comm={comm:.2f} egorov={ego:.2f} "
           f"cv_ratios={[round(r, 2) for r in ratios]}", seconds)


def brute_force_quantize(symbol, n):
    kx, kxi = symbol.order_x, symbol.order_xi
    out = np.zeros((n, n), dtype=complex)
    for m in range(n):
        for j in range(n):
            acc = 0j
            for k in range(-kx, kx + 1):
                for l in range(-8, 9):
                    kap = j - m - l * n
                    if abs(kap) > kxi:
                        continue
                    acc += (symbol.coefficient(k, kap) * (-1.0) ** (k * l)
                            * np.exp(1j * np.pi * (j + m) * k / n))
            out[m, j] = acc
    return out


def test_criterion_6_quantization_specializations():
    def check():
        # x-only: exact position diagonal
        sym_x = cosine_x() + 0.5 * sine_x(2)
        err_x = 0.0
        for n in (4, 8, 16, 64):
            mat = quantize(sym_x, QuantizationContext(n))
            nodes = np.arange(n) / n
            err_x = max(err_x, float(np.abs(mat - np.diag(sym_x.evaluate(nodes, 0.0))).max()))
        # xi-only: DFT-conjugated diagonal
        err_xi = 0.0
        for n in (8, 16, 64):
            sym_xi = cosine_xi(2)
            mat = quantize(sym_xi, QuantizationContext(n))
            f = dft_matrix(n)
            target = np.linalg.inv(f) @ np.diag(sym_xi.evaluate(0.0, np.arange(n) / n)) @ f
            err_xi = max(err_xi, float(np.abs(mat - target).max()) / n)
        # mixed at N = 8 against the brute-force sum
        mixed = product(cosine_x(), cosine_xi())
        err_mixed = float(np.abs(quantize(mixed, QuantizationContext(8))
                                 - brute_force_quantize(mixed, 8)).max())
        return err_x, err_xi, err_mixed

    (err_x, err_xi, err_mixed), seconds = timed(check)
    ok = err_x <= 1e-12 and err_xi <= 1e-10 and err_mixed <= 1e-10 and seconds < 10.0
    report(6, "quantization-specializations", ok,
           f"x_diag={err_x:.1e} xi_circulant={err_xi:.1e} mixed_bruteforce={err_mixed:.1e}",
           seconds)


def test_criterion_7_expectation_domination(local_s, global_s, h_local, h_global):
    worst = -np.inf
    rows = 0
    for result in (local_s[0], global_s[0], h_local[0], h_global[0]):
        table = result.table
        idx = {name: table.columns.index(name) for name in table.columns}
        exp_rows = {}
        obs_rows = {}
        for row in table.rows:
            key = (row[idx["s"]], row[idx["h"]], row[idx["scheme"]], row[idx["observable"]])
            if row[idx["metric"]] == "expectation_error":
                exp_rows[key] = row[idx["value"]]
            elif row[idx["metric"]] == "observable_error":
                obs_rows[key] = row[idx["value"]]
        for key, exp_err in exp_rows.items():
            rows += 1
            worst = max(worst, exp_err - obs_rows[key])
    ok = rows > 0 and worst <= 1e-12
    report(7, "expectation-domination", ok, f"rows={rows} max(exp-obs)={worst:.2e}")


def test_criterion_8_query_count_h_independence():
    def check():
        out = {}
        for eps in (3e-2, 1e-2):
            for h in (2.0**-6, 2.0**-8):
                out[(eps, h)] = (query_count(eps, "Strang2", h),
                                 query_count(eps / 4.0, "Strang2", h))
        return out

    counts, seconds = timed(check)
    details = []
    ok = True
    for eps in (3e-2, 1e-2):
        n_coarse = counts[(eps, 2.0**-6)][0]
        n_fine = counts[(eps, 2.0**-8)][0]
        ok &= abs(n_coarse - n_fine) <= 1
        details.append(f"eps={eps:g}: n(2^-6)={n_coarse} n(2^-8)={n_fine}")
        for h in (2.0**-6, 2.0**-8):
            n0, n4 = counts[(eps, h)]
            ratio = n4 / n0
            ok &= 1.5 <= ratio <= 2.7
            details.append(f"ratio(eps={eps:g},h={h:g})={ratio:.2f}")
    ok &= seconds < 300.0
    report(8, "query-count-h-independence", ok, " ".join(details), seconds)


def test_criterion_9_oracle_equivalence():
    def check():
        worst_step = 0.0
        for h in (2.0**-4, 2.0**-6):   # N = 16 and N = 64
            grid = GridSpec.canonical(-np.pi, np.pi, h)
            pair = build_pair(grid)
            s = 0.21
            for scheme in SplittingScheme:
                fast = trotter_step_unitary(pair, scheme, s, h)
                ua = expm_hermitian(pair.kinetic.dense, -s / h)
                ub = expm_hermitian(pair.potential.dense, -s / h)
                if scheme is SplittingScheme.LIE1:
                    dense = ub @ ua
                else:
                    ub2 = expm_hermitian(pair.potential.dense, -s / (2 * h))
                    dense = ub2 @ ua @ ub2
                worst_step = max(worst_step, spectral_norm(fast - dense) / grid.N)
        rng = np.random.default_rng(90)
        worst_norm = 0.0
        for _ in range(20):
            m = rng.standard_normal((24, 24)) + 1j * rng.standard_normal((24, 24))
            oracle = float(np.sqrt(hermitian_eig(m.conj().T @ m).eigenvalues[-1]))
            worst_norm = max(worst_norm, abs(spectral_norm(m) - oracle) / oracle)
        return worst_step, worst_norm

    (worst_step, worst_norm), seconds = timed(check)
    ok = worst_step <= 1e-9 and worst_norm <= 1e-9
    report(9, "oracle-equivalence", ok,
           f"step_vs_dense={worst_step:.2e}/N norm_vs_gram={worst_norm:.2e}", seconds)
