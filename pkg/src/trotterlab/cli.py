"""Command-line entry point: configuration, dispatch, CSV emission.

Commands
--------
sweep-s          single-step observable error versus the step size s
long-time        fixed-horizon observable error versus s
sweep-h          unitary/observable errors versus the Planck constant
commutator-scan  norms of the h-scaled split operators and nested commutators
calculus-check   quantization calculus defects versus N
query-count      smallest step counts reaching a target error

Configuration is a JSON object; unknown keys are rejected. Every command
understands ``domain``, ``potential``, ``observables``, ``schemes``,
``out`` and ``seed`` plus its own parameter lists (see COMMAND_DEFAULTS).
Output is a deterministic CSV (17 significant digits, LF line endings);
fit reports go to standard output. With ``--assert`` the command's
acceptance criteria are evaluated and a failing run exits with code 2,
while crashes and invalid input exit with code 1.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields, replace

from . import experiments as xp
from .errors import ParseError, TrotterlabError, ValidationError

__all__ = ["RunConfig", "parse_config", "run", "main"]

_S_LADDER = tuple(2.0**-k for k in range(4, 12))
_H_LADDER_WIDE = tuple(2.0**-k for k in range(3, 11))
_H_LADDER_SCAN = tuple(2.0**-k for k in range(3, 9))

COMMANDS = ("sweep-s", "sweep-h", "long-time", "commutator-scan",
            "calculus-check", "query-count")

COMMAND_DEFAULTS: dict[str, dict] = {
    "sweep-s": {"s_values": _S_LADDER, "h": 2.0**-6, "mode": "local"},
    "long-time": {"s_values": _S_LADDER, "h": 2.0**-8, "mode": "global", "t_total": 1.0},
    "sweep-h": {"h_values": _H_LADDER_WIDE, "mode": "local", "s_fixed": 0.1, "t_total": 1.0},
    "commutator-scan": {"h_values": _H_LADDER_SCAN},
    "calculus-check": {"N_values": (16, 32, 64, 128, 256)},
    "query-count": {"epsilons": (3e-2, 1e-2), "h_values": (2.0**-6, 2.0**-8),
                    "schemes": ("Strang2",), "observables": ("cos_3x",)},
}

# sweep-h global mode defaults to the long-horizon step size when the
# user does not set one explicitly.
_S_FIXED_GLOBAL = 0.02


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one experiment invocation.

    ``seed`` is reserved for synthetic test-data generation and does not
    influence the (deterministic) experiments themselves.
    """

    command: str
    domain: tuple[float, float] = xp.DEFAULT_DOMAIN
    potential: str = "cos"
    observables: tuple[str, ...] = ("cos_x", "momentum_fd")
    schemes: tuple[str, ...] = ("Lie1", "Strang2")
    s_values: tuple[float, ...] = _S_LADDER
    h: float = 2.0**-6
    h_values: tuple[float, ...] = _H_LADDER_WIDE
    mode: str = "local"
    t_total: float = 1.0
    s_fixed: float = 0.1
    N_values: tuple[int, ...] = (16, 32, 64, 128, 256)
    epsilons: tuple[float, ...] = (3e-2, 1e-2)
    out: str | None = None
    seed: int = 0


def _check(condition: bool, field: str, message: str) -> None:
    if not condition:
        raise ValidationError(field, message)


def _float_tuple(value, field: str) -> tuple[float, ...]:
    _check(isinstance(value, (list, tuple)) and len(value) > 0, field, "needs a nonempty list")
    out = []
    for item in value:
        _check(isinstance(item, (int, float)) and not isinstance(item, bool),
               field, f"non-numeric entry {item!r}")
        out.append(float(item))
    return tuple(out)


def parse_config(text: str, command: str | None = None) -> RunConfig:
    """Parse and validate a JSON configuration document.

    ``command`` supplies the command when the document omits it (the CLI
    passes the subcommand); a command present in both must agree.
    """
    try:
        doc = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as err:
        raise ParseError(f"line {err.lineno}, column {err.colno}: {err.msg}") from err
    if not isinstance(doc, dict):
        raise ParseError("configuration must be a JSON object")

    doc = dict(doc)
    doc_command = doc.pop("command", None)
    if doc_command is not None and command is not None and doc_command != command:
        raise ValidationError("command", f"document says {doc_command!r}, invocation says {command!r}")
    cmd = doc_command or command
    _check(cmd is not None, "command", "missing")
    _check(cmd in COMMANDS, "command", f"unknown command {cmd!r}")

    cfg = replace(RunConfig(command=cmd), **COMMAND_DEFAULTS[cmd])
    if cmd == "sweep-h" and doc.get("mode") == "global" and "s_fixed" not in doc:
        cfg = replace(cfg, s_fixed=_S_FIXED_GLOBAL)

    known = {f.name for f in fields(RunConfig)} - {"command"}
    updates = {}
    for key, value in sorted(doc.items()):
        _check(key in known, key, "unknown key")
        if key == "domain":
            vals = _float_tuple(value, key)
            _check(len(vals) == 2 and vals[1] > vals[0], key, "needs [a, b] with b > a")
            updates[key] = (vals[0], vals[1])
        elif key in ("observables", "schemes"):
            _check(isinstance(value, (list, tuple)) and value, key, "needs a nonempty list")
            updates[key] = tuple(str(v) for v in value)
        elif key in ("s_values", "h_values", "epsilons"):
            updates[key] = _float_tuple(value, key)
        elif key == "N_values":
            vals = _float_tuple(value, key)
            _check(all(v == int(v) for v in vals), key, "entries must be integers")
            updates[key] = tuple(int(v) for v in vals)
        elif key in ("h", "t_total", "s_fixed"):
            _check(isinstance(value, (int, float)) and not isinstance(value, bool),
                   key, "needs a number")
            updates[key] = float(value)
        elif key == "mode":
            updates[key] = str(value)
        elif key == "out":
            _check(value is None or isinstance(value, str), key, "needs a string path")
            updates[key] = value
        elif key == "seed":
            _check(isinstance(value, int) and not isinstance(value, bool) and value >= 0,
                   key, "needs a nonnegative integer")
            updates[key] = value
    cfg = replace(cfg, **updates)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    _check(cfg.potential in xp.POTENTIALS, "potential",
           f"unknown id {cfg.potential!r}; choose from {sorted(xp.POTENTIALS)}")
    for name in cfg.observables:
        _check(name in xp.OBSERVABLES, "observables",
               f"unknown id {name!r}; choose from {sorted(xp.OBSERVABLES)}")
    for name in cfg.schemes:
        _check(name in ("Lie1", "Strang2"), "schemes", f"unknown scheme {name!r}")
    _check(cfg.mode in ("local", "global"), "mode", "must be 'local' or 'global'")
    if cfg.command == "sweep-s":
        _check(cfg.mode == "local", "mode", "sweep-s is single-step; use long-time for global runs")
    if cfg.command == "long-time":
        _check(cfg.mode == "global", "mode", "long-time is a fixed-horizon run")
    _check(all(s > 0 for s in cfg.s_values), "s_values", "entries must be positive")
    _check(0.0 < cfg.h <= 1.0, "h", "must lie in (0, 1]")
    _check(all(0.0 < h <= 1.0 for h in cfg.h_values), "h_values", "entries must lie in (0, 1]")
    _check(cfg.t_total > 0, "t_total", "must be positive")
    _check(cfg.s_fixed > 0, "s_fixed", "must be positive")
    _check(all(n >= 16 and (n & (n - 1)) == 0 for n in cfg.N_values), "N_values",
           "entries must be powers of two >= 16")
    _check(all(0.0 < e < 1.0 for e in cfg.epsilons), "epsilons", "entries must lie in (0, 1)")


@dataclass(frozen=True)
class CriterionCheck:
    name: str
    passed: bool
    detail: str


def _in_range(name: str, value: float, lo: float, hi: float) -> CriterionCheck:
    return CriterionCheck(name, lo <= value <= hi,
                          f"value={value:.6g} target=[{lo:g}, {hi:g}]")


def _slope_check(name, fits, key, lo, hi) -> CriterionCheck:
    fit = fits.get(key)
    if fit is None:
        return CriterionCheck(name, False, "no usable fit (series at round-off floor)")
    return _in_range(name, fit.slope, lo, hi)


def _at_least(name: str, value: float, lo: float) -> CriterionCheck:
    return CriterionCheck(name, value >= lo, f"value={value:.6g} target>={lo:g}")


def evaluate_criteria(cfg: RunConfig, result: xp.ExperimentResult) -> list[CriterionCheck]:
    """Acceptance checks for one command's result."""
    checks: list[CriterionCheck] = []
    if cfg.command in ("sweep-s", "long-time"):
        ranges = ({"Lie1": (1.8, 2.2), "Strang2": (2.7, 3.3)} if cfg.mode == "local"
                  else {"Lie1": (0.8, 1.2), "Strang2": (1.8, 2.2)})
        for scheme in cfg.schemes:
            for obs in cfg.observables:
                checks.append(_slope_check(f"s-order/{scheme}/{obs}", result.fits,
                                           f"{scheme}/{obs}/observable_error", *ranges[scheme]))
    elif cfg.command == "sweep-h":
        for scheme in cfg.schemes:
            checks.append(_slope_check(f"unitary-growth/{scheme}", result.fits,
                                       f"{scheme}/unitary_error", -1.3, -0.7))
            for obs in cfg.observables:
                checks.append(_slope_check(f"h-flat-slope/{scheme}/{obs}", result.fits,
                                           f"{scheme}/{obs}/observable_error", -0.25, 0.25))
                values = [v for hval, v in result.table.series(
                    "h", scheme=scheme, observable=obs, metric="observable_error")
                    if hval <= xp.FIT_WINDOW_H[1]]
                ratio = max(values) / min(values)
                checks.append(CriterionCheck(f"h-flat-ratio/{scheme}/{obs}", ratio <= 3.0,
                                             f"max/min={ratio:.6g} target<=3"))
    elif cfg.command == "commutator-scan":
        for metric, fit in sorted(result.fits.items()):
            checks.append(_in_range(f"norm-scaling/{metric}", fit.slope, -1.3, -0.7))
    elif cfg.command == "calculus-check":
        checks.append(_at_least("composition-order", result.fits["composition_remainder"].slope, 1.8))
        checks.append(_at_least("commutator-order", result.fits["commutator_remainder"].slope, 2.7))
        checks.append(_at_least("egorov-order", result.fits["egorov_remainder"].slope, 1.8))
        ratios = [v for _, v in result.table.series("N", metric="cv_gap_over_h")]
        finite = all(math.isfinite(r) for r in ratios)
        trend = ratios[-1] <= ratios[0] + 1e-9 * max(1.0, abs(ratios[0]))
        checks.append(CriterionCheck("cv-gap-bounded", finite and trend,
                                     f"ratios={['%.4g' % r for r in ratios]}"))
    elif cfg.command == "query-count":
        hs = sorted(cfg.h_values)
        for scheme in cfg.schemes:
            for eps in sorted(cfg.epsilons):
                counts = {h: result.table.select(scheme=scheme, h=h, epsilon=eps)[0][-1]
                          for h in hs}
                quarter = {h: result.table.select(scheme=scheme, h=h, epsilon=eps / 4.0)[0][-1]
                           for h in hs}
                if len(hs) >= 2:
                    spread = max(counts.values()) - min(counts.values())
                    checks.append(CriterionCheck(
                        f"h-independent/{scheme}/eps={eps:g}", spread <= 1,
                        f"counts={counts} spread={spread} target<=1"))
                for h in hs:
                    ratio = quarter[h] / counts[h]
                    checks.append(CriterionCheck(
                        f"quarter-eps-ratio/{scheme}/eps={eps:g}/h={h:g}",
                        1.5 <= ratio <= 2.7, f"ratio={ratio:.6g} target=[1.5, 2.7]"))
    return checks


def _dispatch(cfg: RunConfig, threads: int) -> xp.ExperimentResult:
    if cfg.command == "sweep-s":
        return xp.sweep_timestep(s_values=cfg.s_values, h=cfg.h, mode="local",
                                 domain=cfg.domain, potential_id=cfg.potential,
                                 observable_ids=cfg.observables, schemes=cfg.schemes,
                                 threads=threads)
    if cfg.command == "long-time":
        return xp.sweep_timestep(s_values=cfg.s_values, h=cfg.h, mode="global",
                                 t_total=cfg.t_total, domain=cfg.domain,
                                 potential_id=cfg.potential, observable_ids=cfg.observables,
                                 schemes=cfg.schemes, threads=threads)
    if cfg.command == "sweep-h":
        return xp.sweep_h(h_values=cfg.h_values, s_fixed=cfg.s_fixed, mode=cfg.mode,
                          t_total=cfg.t_total, domain=cfg.domain,
                          potential_id=cfg.potential, observable_ids=cfg.observables,
                          schemes=cfg.schemes, threads=threads)
    if cfg.command == "commutator-scan":
        return xp.commutator_scan(cfg.h_values, domain=cfg.domain,
                                  potential_id=cfg.potential, threads=threads)
    if cfg.command == "calculus-check":
        return xp.calculus_suite(cfg.N_values, threads=threads)
    if cfg.command == "query-count":
        return xp.query_count_study(epsilons=cfg.epsilons, h_values=cfg.h_values,
                                    schemes=cfg.schemes, domain=cfg.domain,
                                    potential_id=cfg.potential,
                                    observable_id=cfg.observables[0],
                                    t_total=cfg.t_total, threads=threads)
    raise ValidationError("command", f"unknown command {cfg.command!r}")


def run(cfg: RunConfig, assert_criteria: bool = False, out: str | None = None,
        threads: int = 1, stream=None) -> int:
    """Execute a configuration; write CSV; return the process exit code."""
    stream = stream if stream is not None else sys.stdout
    result = _dispatch(cfg, threads)
    path = out or cfg.out or f"{cfg.command}.csv"
    try:
        with open(path, "w", newline="") as fh:
            fh.write(result.table.csv_text())
    except OSError as err:
        print(f"error: cannot write {path}: {err}", file=sys.stderr)
        return 1
    print(f"wrote {len(result.table.rows)} rows to {path}", file=stream)
    for key in sorted(result.fits):
        fit = result.fits[key]
        excl = result.excluded.get(key, 0)
        print(f"fit {key}: slope={fit.slope:.6g} intercept={fit.intercept:.6g} "
              f"r2={fit.r_squared:.6g} points={fit.points_used} "
              f"window=[{fit.window[0]:.6g}, {fit.window[1]:.6g}] excluded={excl}",
              file=stream)
    if not assert_criteria:
        return 0
    checks = evaluate_criteria(cfg, result)
    failed = [c for c in checks if not c.passed]
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"criterion {check.name}: {status} ({check.detail})", file=stream)
    return 2 if failed else 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trotterlab",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    help_text = {
        "sweep-s": "single-step observable error versus step size (keys: s_values, h)",
        "sweep-h": "errors versus Planck constant (keys: h_values, s_fixed, mode, t_total)",
        "long-time": "fixed-horizon error versus step size (keys: s_values, h, t_total)",
        "commutator-scan": "scaled operator/commutator norms (keys: h_values)",
        "calculus-check": "quantization calculus defects (keys: N_values)",
        "query-count": "step counts to target error (keys: epsilons, h_values, schemes)",
    }
    for name in COMMANDS:
        cmd = sub.add_parser(name, help=help_text[name])
        cmd.add_argument("--config", help="JSON configuration file (defaults used when omitted)")
        cmd.add_argument("--assert", dest="assert_criteria", action="store_true",
                         help="evaluate acceptance criteria; exit 2 on failure")
        cmd.add_argument("--out", help="CSV output path (default <command>.csv)")
        cmd.add_argument("--threads", type=int, default=1,
                         help="worker threads for independent sweep points")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.config:
            with open(args.config) as fh:
                text = fh.read()
        else:
            text = "{}"
        cfg = parse_config(text, command=args.command)
        return run(cfg, assert_criteria=args.assert_criteria, out=args.out,
                   threads=max(1, args.threads))
    except (TrotterlabError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
