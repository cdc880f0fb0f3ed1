"""``gasflex`` command line.

Exit codes: 0 success, 1 invalid data, 2 I/O error, 3 infeasible, 4 solver error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import yaml

from .analysis import approximation_error_delta, compare_runs, verify_directions
from .formulation import FormulationConfig, FormulationError, derive_big_m
from .network import IntegratedSystem, SystemLoadError, load_system_file, validate_system
from .reports import write_comparison, write_run_reports, write_summary
from .runs import SolveFailed, solve_split, windows
from .solver import BackendUnavailable, CbcFileBackend, SolveOptions, Status, get_backend

log = logging.getLogger("gasflex")

EXIT_OK, EXIT_DATA, EXIT_IO, EXIT_INFEASIBLE, EXIT_SOLVER = range(5)


@dataclass
class RunConfig:
    system: str = ""
    mode: str = "both"
    points: int = 5
    eps_pr: float = 0.1
    m_flow: float | None = None
    m_pressure: float | None = None
    m_slope: float | None = None
    mip_gap: float = 1e-6
    time_limit: float = 3600.0
    threads: int | None = None
    seed: int | None = None
    split: list[int] = field(default_factory=list)
    tightening: bool = True
    backend: str = "highs"
    solver: str | None = None
    out: str = "gasflex-out"

    def __post_init__(self):
        if self.mode not in ("uni", "bi", "both"):
            raise ValueError(f"mode must be uni, bi or both, got {self.mode!r}")
        if self.points < 1:
            raise ValueError("point count must be >= 1")
        if any(b <= a for a, b in zip(self.split, self.split[1:])):
            raise ValueError("split points must be strictly increasing")

    def formulation(self) -> FormulationConfig:
        return FormulationConfig(
            points=self.points, eps_pr=self.eps_pr, tightening=self.tightening,
            m_flow=self.m_flow, m_pressure=self.m_pressure, m_slope=self.m_slope,
        )

    def solve_options(self) -> SolveOptions:
        return SolveOptions(mip_gap=self.mip_gap, time_limit=self.time_limit, threads=self.threads, seed=self.seed)

    def make_backend(self):
        if self.backend == "cbc":
            return CbcFileBackend(self.solver)
        return get_backend(self.backend)


def _split_arg(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated hours, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gasflex", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="check a system file")
    p_val.add_argument("file")

    def run_opts(p):
        p.add_argument("file")
        p.add_argument("--config", help="YAML file with run settings (command-line flags win)")
        p.add_argument("--split", type=_split_arg, help="first hours of later windows, e.g. 13")
        p.add_argument("--points", type=int, help="expansion points per pipeline and direction")
        p.add_argument("--eps-pr", type=float, dest="eps_pr", help="pressure resolution in bar")
        p.add_argument("--no-tightening", dest="tightening", action="store_const", const=False)
        p.add_argument("--m-flow", type=float, dest="m_flow")
        p.add_argument("--m-pressure", type=float, dest="m_pressure")
        p.add_argument("--m-slope", type=float, dest="m_slope")
        p.add_argument("--gap", type=float, dest="mip_gap")
        p.add_argument("--time-limit", type=float, dest="time_limit")
        p.add_argument("--threads", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--backend", choices=["highs", "cbc"])
        p.add_argument("--solver", help="path of the external solver executable (cbc backend)")
        p.add_argument("-o", "--out", help="output directory")

    p_solve = sub.add_parser("solve", help="solve one model variant")
    run_opts(p_solve)
    p_solve.add_argument("--mode", choices=["uni", "bi"], required=True)

    p_cmp = sub.add_parser("compare", help="solve both variants and write comparison reports")
    run_opts(p_cmp)
    return parser


def make_config(args: argparse.Namespace, mode: str) -> RunConfig:
    settings: dict = {}
    if getattr(args, "config", None):
        settings.update(yaml.safe_load(Path(args.config).read_text()) or {})
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(settings) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    for name in known:
        val = getattr(args, name, None)
        if val is not None:
            settings[name] = val
    settings["system"] = args.file
    settings["mode"] = mode
    return RunConfig(**settings)


def _load(path: str) -> tuple[IntegratedSystem | None, int]:
    try:
        system = load_system_file(path)
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        return None, EXIT_IO
    except SystemLoadError as exc:
        for problem in exc.problems:
            print(f"invalid: {problem}", file=sys.stderr)
        return None, EXIT_DATA
    violations = validate_system(system)
    if violations:
        for v in violations:
            print(f"invalid: {v}", file=sys.stderr)
        return None, EXIT_DATA
    return system, EXIT_OK


def cmd_validate(path: str) -> int:
    system, code = _load(path)
    if system is not None:
        print(
            f"{path}: ok ({len(system.power.nodes)} power nodes, {len(system.gas.nodes)} gas nodes, "
            f"{len(system.gas.pipelines)} pipelines, {system.hours} hours)"
        )
    return code


def _check_split(system: IntegratedSystem, cfg: RunConfig) -> bool:
    try:
        windows(system.hours, cfg.split)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return False
    return True


def _exit_for(exc: SolveFailed) -> int:
    return EXIT_INFEASIBLE if exc.status == Status.INFEASIBLE else EXIT_SOLVER


def _run_mode(system, cfg: RunConfig, mode: str):
    sched = solve_split(system, mode, cfg.split, cfg.formulation(), cfg.solve_options(), cfg.make_backend())
    bigm = derive_big_m(system, cfg.formulation())
    return sched, approximation_error_delta(sched, system), verify_directions(sched, system, bigm=bigm)


def cmd_solve(cfg: RunConfig) -> int:
    system, code = _load(cfg.system)
    if system is None:
        return code
    if not _check_split(system, cfg):
        return EXIT_DATA
    try:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create {cfg.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        sched, err, dirs = _run_mode(system, cfg, cfg.mode)
    except SolveFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_for(exc)
    except (BackendUnavailable, FormulationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER if isinstance(exc, BackendUnavailable) else EXIT_DATA
    summary = write_run_reports(out, sched, err, dirs)
    write_summary(out / f"summary_{cfg.mode}.json", {"system": system.name, "split": cfg.split, **summary})
    print(f"{cfg.mode}: objective {sched.objective:.6f}, xi {err.xi:.4f}, "
          f"{len(dirs.changes)} direction change(s); reports in {out}")
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    system, code = _load(cfg.system)
    if system is None:
        return code
    if not _check_split(system, cfg):
        return EXIT_DATA
    try:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create {cfg.out}: {exc}", file=sys.stderr)
        return EXIT_IO

    results, summary, failures = {}, {"system": system.name, "split": cfg.split, "runs": {}}, {}
    for mode in ("uni", "bi"):
        try:
            results[mode] = _run_mode(system, cfg, mode)
        except SolveFailed as exc:
            failures[mode] = exc
            summary["runs"][mode] = {"mode": mode, "status": exc.status.value, "error": str(exc)}
            print(f"error: {mode}: {exc}", file=sys.stderr)
        except (BackendUnavailable, FormulationError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_SOLVER if isinstance(exc, BackendUnavailable) else EXIT_DATA
    for mode, (sched, err, dirs) in results.items():
        summary["runs"][mode] = write_run_reports(out, sched, err, dirs)
    if len(results) == 2:
        (su, eu, _), (sb, eb, _) = results["uni"], results["bi"]
        cmp = compare_runs(su, sb, system)
        summary["comparison"] = write_comparison(out, system, cmp, su, sb, eu, eb)
        print(f"cost uni {cmp.cost_uni:.6f}, bi {cmp.cost_bi:.6f}, savings {cmp.savings_pct:.2f}%; "
              f"GFPP share {cmp.gfpp_share['uni']:.1f}% -> {cmp.gfpp_share['bi']:.1f}%")
    write_summary(out / "summary.json", summary)
    if failures:
        return max(_exit_for(exc) for exc in failures.values())
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "validate":
        return cmd_validate(args.file)
    try:
        cfg = make_config(args, args.mode if args.command == "solve" else "both")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, TypeError) as exc:
        print(f"error: bad configuration: {exc}", file=sys.stderr)
        return EXIT_DATA
    if args.command == "solve":
        return cmd_solve(cfg)
    return cmd_compare(cfg)


if __name__ == "__main__":
    sys.exit(main())
