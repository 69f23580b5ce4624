"""``fflab`` command line: verification suites, sharp constructions, sweeps and reports.

Exit codes: 0 when no check failed, 1 when some check failed, 2 on bad usage.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field as dc_field, replace

import numpy as np

from . import distance as dist
from .energy import DEFAULT_C_TEST
from .errors import FflabError, HypothesisViolation
from .field import field_of_order
from .suites import SKIPPABLE, SUITES, CheckRecord, Params, decimal, sharp_checks

SHARP_ALIASES = {
    "para": "para-3",
    "sphere": "sphere-c-1",
    "sphere-even": "sphere-c-3",
    "zero-sphere": "sphere-c-3-2",
}
CHECK_FIELDS = ("name", "status", "lhs", "rhs", "tolerance", "elapsed_ms", "detail")


class UsageError(Exception):
    """Invalid parameters: reported with exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    target: str | None = None
    params: Params = dc_field(default_factory=Params)
    seed: int = 0
    fmt: str = "json"
    out: str | None = None
    jobs: int = 1
    qs: tuple[int, ...] = ()
    ds: tuple[int, ...] = ()
    timing: bool = True
    paths: tuple[str, ...] = ()


def _summary(checks: list[CheckRecord]) -> dict:
    return {s: sum(c.status == s for c in checks) for s in ("pass", "fail", "skip")}


def _document(cfg: RunConfig, checks: list[CheckRecord], extra: dict | None = None) -> dict:
    if not cfg.timing:
        checks = [replace(c, elapsed_ms=0.0) for c in checks]
    params = {k: v for k, v in asdict(cfg.params).items() if v is not None}
    params["ctest"] = decimal(params["ctest"])
    doc = {
        "command": cfg.command if cfg.target is None else f"{cfg.command} {cfg.target}",
        "params": {**params, "seed": cfg.seed},
        "constants": {"C_test": decimal(cfg.params.ctest)},
        "checks": [c.as_dict() for c in checks],
        "summary": _summary(checks),
    }
    if extra:
        doc.update(extra)
    return doc


def job_rng(seed: int, job: int) -> np.random.Generator:
    """Independent stream for each job, fixed by (seed, job index)."""
    return np.random.default_rng(np.random.SeedSequence([seed, job]))


def _validate(params: Params) -> None:
    if params.q is not None:
        try:
            field_of_order(params.q)
        except FflabError as exc:
            raise UsageError(str(exc)) from exc
    for name in ("d", "m", "rsize"):
        value = getattr(params, name)
        if value is not None and value < 1:
            raise UsageError(f"--{name} must be positive")
    if params.trials < 1:
        raise UsageError("--trials must be positive")
    if params.j is not None and params.q is not None and not 0 <= params.j < params.q:
        raise UsageError("--j must be a field element code in [0, q)")


def run_suite(name: str, params: Params, seed: int, job: int = 0) -> list[CheckRecord]:
    _validate(params)
    try:
        return SUITES[name](params, job_rng(seed, job))
    except SKIPPABLE as exc:
        return [CheckRecord(f"{name}-suite", "skip", detail=str(exc))]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _sweep_job(args) -> list[CheckRecord]:
    suite, params, seed, job = args
    try:
        records = run_suite(suite, params, seed, job)
    except (UsageError, HypothesisViolation) as exc:
        records = [CheckRecord(f"{suite}-suite", "skip", detail=str(exc))]
    tag = f"[q={params.q},d={params.d}]"
    return [replace(r, name=r.name + tag) for r in records]


def run(cfg: RunConfig) -> tuple[dict, int]:
    """Execute one configuration; returns the report document and the exit code."""
    extra = None
    if cfg.command == "verify":
        checks = run_suite(cfg.target, cfg.params, cfg.seed)
    elif cfg.command == "construct":
        checks, extra = _construct(cfg)
    elif cfg.command == "sweep":
        checks = _sweep(cfg)
    elif cfg.command == "report":
        return _report(cfg)
    else:
        raise UsageError(f"unknown command {cfg.command!r}")
    doc = _document(cfg, checks, extra)
    return doc, 1 if doc["summary"]["fail"] else 0


def _construct(cfg: RunConfig):
    p = cfg.params
    if p.q is None or p.d is None or p.kind is None:
        raise UsageError("construct sharp needs --kind, --q and --d")
    _validate(p)
    kind = SHARP_ALIASES.get(p.kind, p.kind)
    if kind not in dist.SHARP_KINDS:
        raise UsageError(f"unknown kind {p.kind!r}; choose from {sorted(dist.SHARP_KINDS + tuple(SHARP_ALIASES))}")
    try:
        c = dist.sharp_construction(kind, field_of_order(p.q), p.d, p.rsize or 1, p.j)
    except SKIPPABLE as exc:
        return [CheckRecord("sharp-construction", "skip", detail=str(exc))], None
    extra = {"construction": {
        "kind": c.kind, "case": c.case, "j": c.j, "radii": sorted(int(r) for r in c.radii),
        "size_a": len(c.A), "size_b": len(c.B), "epsilon": decimal(c.epsilon),
        "A": [list(map(int, x)) for x in c.A.coords], "delta": sorted(int(r) for r in c.delta),
    }}
    return sharp_checks(c), extra


def _sweep(cfg: RunConfig) -> list[CheckRecord]:
    if not cfg.qs or not cfg.ds:
        raise UsageError("sweep needs --qs and --ds")
    suite = cfg.target or "distance"
    jobs = [(suite, replace(cfg.params, q=q, d=d), cfg.seed, i)
            for i, (q, d) in enumerate((q, d) for q in cfg.qs for d in cfg.ds)]
    for _, params, _, _ in jobs:
        _validate(params)
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            parts = list(pool.map(_sweep_job, jobs))  # map keeps job-index order
    else:
        parts = [_sweep_job(j) for j in jobs]
    return [r for part in parts for r in part]


def _report(cfg: RunConfig) -> tuple[dict, int]:
    """Merge saved JSON reports into one summary."""
    if not cfg.paths:
        raise UsageError("report needs at least one PATH")
    checks, sources = [], []
    for path in cfg.paths:
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read report {path}: {exc}") from exc
        sources.append(doc.get("command", "?"))
        checks += [CheckRecord(**{k: c.get(k, "") for k in CHECK_FIELDS}) for c in doc.get("checks", [])]
    doc = {"command": "report", "sources": sources, "checks": [c.as_dict() for c in checks],
           "summary": _summary(checks)}
    return doc, 1 if doc["summary"]["fail"] else 0


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CHECK_FIELDS, lineterminator="\n")
    writer.writeheader()
    for c in doc["checks"]:
        writer.writerow({k: c.get(k, "") for k in CHECK_FIELDS})
    return buf.getvalue()


# -- argument parsing -----------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q", type=int, help="field order (odd prime power)")
    p.add_argument("--d", type=int, help="dimension")
    p.add_argument("--m", type=int, help="scheme rank; ambient dimension is 2m + 1")
    p.add_argument("--j", type=int, help="sphere radius (field element code)")
    p.add_argument("--kind", help="variety (paraboloid|sphere) or sharp construction kind")
    p.add_argument("--rsize", type=int, help="number of radii for sharp constructions")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ctest", type=float, default=DEFAULT_C_TEST, help="configured constant for << bounds")
    p.add_argument("--qmax", type=int, default=121)
    p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    p.add_argument("--out", metavar="PATH")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-timing", dest="timing", action="store_false",
                   help="zero elapsed_ms so reports are byte-stable")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fflab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    verify = sub.add_parser("verify", help="run one verification suite")
    verify.add_argument("target", choices=sorted(SUITES))
    _common(verify)
    construct = sub.add_parser("construct", help="build a distance-sharpness construction")
    construct.add_argument("target", choices=("sharp",))
    _common(construct)
    sweep = sub.add_parser("sweep", help="run a suite over a (q, d) grid")
    sweep.add_argument("--suite", dest="target", choices=sorted(SUITES), default="distance")
    sweep.add_argument("--qs", type=int, nargs="+", default=[])
    sweep.add_argument("--ds", type=int, nargs="+", default=[])
    _common(sweep)
    report = sub.add_parser("report", help="merge saved JSON reports")
    report.add_argument("paths", nargs="+")
    report.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")
    report.add_argument("--out", metavar="PATH")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    if ns.command == "report":
        return RunConfig("report", fmt=ns.fmt, out=ns.out, paths=tuple(ns.paths))
    params = Params(q=ns.q, d=ns.d, m=ns.m, j=ns.j, kind=ns.kind, rsize=ns.rsize,
                    trials=ns.trials, ctest=ns.ctest, qmax=ns.qmax)
    return RunConfig(ns.command, ns.target, params, seed=ns.seed, fmt=ns.fmt, out=ns.out,
                     jobs=max(1, ns.jobs), qs=tuple(getattr(ns, "qs", ())),
                     ds=tuple(getattr(ns, "ds", ())), timing=ns.timing)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(ns)
        doc, code = run(cfg)
    except UsageError as exc:
        print(f"fflab: error: {exc}", file=sys.stderr)
        return 2
    text = render(doc, cfg.fmt)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
