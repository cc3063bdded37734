"""Command-line pipeline: tune -> renorm -> fixedpoint -> verify -> presentation -> dimension.

Every stage writes flat files under the output directory:

    tuned.json                  omega* per (kind, l)
    renorm.json                 scaling sequences and extrapolated tau per (kind, l)
    fixedpoints/<kind>/<l>.json solved fixed points
    constants.csv / .json       dynamical and Newton tau per l, common limit
    verify.json                 identity reports
    presentation.json           return system and orbit/preimage checks
    dimension.csv               dimension brackets

Exit codes: 0 success, 1 some l failed, 2 verification failure.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import datetime as _dt
import hashlib
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import mpmath as mp

from . import __version__
from .precision import decimal_str, workdps

log = logging.getLogger("fibrenorm")

EXIT_OK, EXIT_PARTIAL, EXIT_VERIFY = 0, 1, 2
KINDS = {"homeo": "pair", "cover": "cover"}


@dataclass
class ExperimentConfig:
    kind: str = "both"
    ell_list: list = field(default_factory=lambda: list(range(3, 22, 2)))
    precision: int = 60
    renorm_depth: int = 14
    solver_basis: int = 48
    ifs_index_set: list = field(default_factory=lambda: [0, 1, 2, 3])
    ifs_depth: int = 8
    output_dir: str = "fibrenorm-out"
    seed_mode: str = "dynamical"
    tune_precision: int = 30
    workers: int = 1
    presentation_ell: int = 3

    def __post_init__(self):
        if self.kind not in ("homeo", "cover", "both"):
            raise ValueError(f"kind must be homeo, cover or both, not {self.kind!r}")
        bad = [e for e in self.ell_list if e < 3 or e % 2 == 0]
        if bad:
            raise ValueError(f"exponents must be odd and >= 3: {bad}")
        if self.seed_mode not in ("dynamical", "resume"):
            raise ValueError("seed_mode must be dynamical or resume")
        if self.ifs_depth < 1 or self.renorm_depth < 6:
            raise ValueError("ifs_depth >= 1 and renorm_depth >= 6 required")

    @property
    def kinds(self) -> list:
        return ["homeo", "cover"] if self.kind == "both" else [self.kind]

    @property
    def out(self) -> Path:
        return Path(self.output_dir)

    def digest(self) -> str:
        body = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(body).hexdigest()[:16]


def _int_list(text: str, step: int = 2) -> list:
    """'3,5,9' or '3..21'; ranges step by 2 (odd exponents) unless told otherwise."""
    out = []
    for part in str(text).replace(" ", "").split(","):
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1, step))
        else:
            out.append(int(part))
    return out


def load_config(path: str | None, overrides: dict) -> ExperimentConfig:
    """key=value file (no section header needed) with CLI overrides on top."""
    values = {}
    if path:
        parser = configparser.ConfigParser()
        with open(path) as fh:
            parser.read_string("[run]\n" + fh.read())
        values.update(parser["run"])
    values.update({k: v for k, v in overrides.items() if v is not None})
    kw = {}
    for key, val in values.items():
        if key in ("ell_list", "ifs_index_set"):
            kw[key] = val if isinstance(val, list) else _int_list(val, 2 if key == "ell_list" else 1)
        elif key in ("precision", "renorm_depth", "solver_basis", "ifs_depth", "tune_precision",
                     "workers", "presentation_ell"):
            kw[key] = int(val)
        elif key in ("kind", "output_dir", "seed_mode"):
            kw[key] = str(val)
        else:
            raise ValueError(f"unknown config key {key!r}")
    return ExperimentConfig(**kw)


# --------------------------------------------------------------------------
# file helpers


def _read_json(path: Path):
    with open(path) as fh:
        return json.load(fh)


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _write_csv(path: Path, header: list, rows: list) -> None:
    """CSV with a leading '# generated' comment line; the body is deterministic."""
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    stamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    buf.write(f"# fibrenorm {__version__} generated {stamp}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


def read_csv(path: Path) -> list:
    """Rows of a CSV written by this tool, as dicts (comment line skipped)."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def _key(kind: str, ell: int) -> str:
    return f"{kind}:{ell}"


def _isolated(fn, tasks: list, workers: int) -> list:
    """Run fn(*task) per task; an exception becomes {'error': ...} for that task only."""
    if workers <= 1 or len(tasks) <= 1:
        return [_guard(fn, t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(_guard, fn, t) for t in tasks]
        return [f.result() for f in futures]


def _guard(fn, task):
    try:
        return fn(*task)
    except Exception as exc:  # per-l isolation
        return {"error": f"{type(exc).__name__}: {exc}"}


def _header(cfg: ExperimentConfig, schema: str) -> dict:
    return {"schema": schema, "version": __version__, "config_hash": cfg.digest(),
            "precision": cfg.precision}


# --------------------------------------------------------------------------
# tune


def _tune_one(kind: str, ell: int, precision: int, depth: int) -> dict:
    from .circlemap import critical_orbit, fibonacci, make_family, order_conjugacy_check, tune_fibonacci_cover, tune_rotation

    if kind == "homeo":
        res = tune_rotation(ell, precision=precision, max_return_time=max(20000, 2 * fibonacci(depth)))
    else:
        res = tune_fibonacci_cover(ell, depth=depth, precision=precision)
    lift = make_family(kind, ell, res.omega, precision)
    n_check = min(depth, 15)
    check = order_conjugacy_check(critical_orbit(lift, fibonacci(n_check) + 1))
    return {
        "kind": kind, "ell": ell,
        "omega": decimal_str(res.omega, precision),
        "lower": decimal_str(res.lower, precision),
        "upper": decimal_str(res.upper, precision),
        "depth": depth, "precision": precision,
        "check_depth": n_check, "check_passed": bool(check.passed),
    }


def cmd_tune(cfg: ExperimentConfig, resume: bool = False) -> int:
    path = cfg.out / "tuned.json"
    old = _read_json(path) if (resume and path.exists()) else {}
    records = dict(old.get("records", {})) if old.get("renorm_depth") == cfg.renorm_depth else {}
    tasks = [(k, e, cfg.tune_precision, cfg.renorm_depth) for k in cfg.kinds for e in cfg.ell_list
             if _key(k, e) not in records]
    failures = {}
    for task, res in zip(tasks, _isolated(_tune_one, tasks, cfg.workers)):
        if "error" in res:
            failures[_key(task[0], task[1])] = res["error"]
            log.warning("tune %s l=%d failed: %s", task[0], task[1], res["error"])
        else:
            records[_key(task[0], task[1])] = res
            log.info("tuned %s l=%d omega=%s", task[0], task[1], res["omega"][:20])
    doc = _header(cfg, "fibrenorm.tuned/1")
    doc.update(precision=cfg.tune_precision, renorm_depth=cfg.renorm_depth,
               records=dict(sorted(records.items())), failures=failures)
    _write_json(path, doc)
    return EXIT_PARTIAL if failures else EXIT_OK


def _require_tuned(cfg: ExperimentConfig) -> dict:
    path = cfg.out / "tuned.json"
    if not path.exists():
        raise PipelineError("tuning records missing; run 'fibrenorm tune' first")
    doc = _read_json(path)
    if doc.get("renorm_depth") != cfg.renorm_depth:
        raise PipelineError(f"tuning records were made for depth {doc.get('renorm_depth')}, "
                            f"config asks for {cfg.renorm_depth}")
    return doc


class PipelineError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# renorm


def _renorm_one(kind: str, ell: int, omega: str, precision: int, depth: int) -> dict:
    from .circlemap import make_family
    from .renorm import check_tau_bound, scaling_sequence

    with workdps(precision):
        lift = make_family(kind, ell, mp.mpf(omega), precision)
        ser = scaling_sequence(lift, n_max=depth)
        return {
            "kind": kind, "ell": ell, "depth": depth,
            "values": [decimal_str(v, 20) for v in ser.values],
            "tau": decimal_str(ser.extrapolated, 20),
            "error_estimate": decimal_str(ser.error_estimate, 6),
            "flagged": bool(ser.flagged),
            "bound_ok": check_tau_bound(ser.extrapolated, ell),
        }


def cmd_renorm(cfg: ExperimentConfig, resume: bool = False) -> int:
    tuned = _require_tuned(cfg)
    path = cfg.out / "renorm.json"
    old = _read_json(path) if (resume and path.exists()) else {}
    records = dict(old.get("records", {})) if old.get("renorm_depth") == cfg.renorm_depth else {}
    tasks = []
    for k in cfg.kinds:
        for e in cfg.ell_list:
            rec = tuned["records"].get(_key(k, e))
            if rec is not None and _key(k, e) not in records:
                tasks.append((k, e, rec["omega"], rec["precision"], cfg.renorm_depth))
    missing = [_key(k, e) for k in cfg.kinds for e in cfg.ell_list if _key(k, e) not in tuned["records"]]
    failures = {m: "not tuned" for m in missing}
    for task, res in zip(tasks, _isolated(_renorm_one, tasks, cfg.workers)):
        if "error" in res:
            failures[_key(task[0], task[1])] = res["error"]
        else:
            records[_key(task[0], task[1])] = res
    doc = _header(cfg, "fibrenorm.renorm/1")
    doc.update(renorm_depth=cfg.renorm_depth, records=dict(sorted(records.items())), failures=failures)
    _write_json(path, doc)
    return EXIT_PARTIAL if failures else EXIT_OK


# --------------------------------------------------------------------------
# fixed points


def _fp_path(cfg: ExperimentConfig, kind: str, ell: int) -> Path:
    return cfg.out / "fixedpoints" / kind / f"{ell}.json"


def load_fixed_point(path: Path):
    from .fixedpoint import FixedPointMap

    return FixedPointMap.from_dict(_read_json(path))


def _dynamical_anchor(cfg: ExperimentConfig, level: int = 12):
    """l = 3 pair solved from a renormalized level of the tuned map; None if unavailable.

    Only the homeomorphism class has a first-return construction here, so
    covers always start from the two-term seed.
    """
    from .circlemap import make_family
    from .errors import FibrenormError
    from .fixedpoint import junction_points, seed_from_dynamics, solve_from_seed
    from .renorm import first_return, renormalize, return_data

    path = cfg.out / "tuned.json"
    rec = _read_json(path)["records"].get(_key("homeo", 3)) if path.exists() else None
    if rec is None:
        return None
    try:
        with workdps(30):
            lift = make_family("homeo", 3, mp.mpf(rec["omega"]), 30)
            pair = renormalize(first_return(lift, level, data=return_data(lift, level + 1)))
            cand, dom, x_c = seed_from_dynamics(pair, 3, "pair", basis=24)
            fp = solve_from_seed("pair", 3, cand, dom, x_c, 24, 30, "exact")
    except (FibrenormError, ValueError, ZeroDivisionError) as exc:
        log.warning("dynamical seed unavailable, using the two-term seed: %s", exc)
        return None
    log.info("pair l=3 seeded from renormalization level %d", level)
    return fp


def cmd_fixedpoint(cfg: ExperimentConfig, resume: bool = False) -> int:
    from .fixedpoint import polish, sweep

    resume = resume or cfg.seed_mode == "resume"
    failed = False
    for kind in cfg.kinds:
        fpkind = KINDS[kind]
        todo = [e for e in sorted(cfg.ell_list) if not (resume and _fp_path(cfg, fpkind, e).exists())]
        if not todo:
            continue
        start = None
        if resume:
            have = [e for e in sorted(cfg.ell_list) if e < todo[0] and _fp_path(cfg, fpkind, e).exists()]
            if have:
                # the saved solution is at the final resolution; the path runs at the coarse one
                start = polish(load_fixed_point(_fp_path(cfg, fpkind, have[-1])), 24, 30)
        if start is None and kind == "homeo" and cfg.seed_mode == "dynamical" and todo[0] == 3:
            start = _dynamical_anchor(cfg)
        failures = {}

        def save(fp, fpkind=fpkind):
            _write_json(_fp_path(cfg, fpkind, int(fp.exponent)), fp.to_dict())
            log.info("solved %s l=%s tau=%s", fpkind, fp.exponent, mp.nstr(fp.tau, 15))

        try:
            sweep(fpkind, todo, start=start, final_basis=cfg.solver_basis, final_precision=cfg.precision,
                  progress=save, failures=failures)
        except Exception as exc:
            failures = {e: f"{type(exc).__name__}: {exc}" for e in todo}
        for e, msg in sorted(failures.items()):
            log.warning("fixed point %s l=%d failed: %s", fpkind, e, msg)
        failed = failed or bool(failures)
    return EXIT_PARTIAL if failed else EXIT_OK


# --------------------------------------------------------------------------
# constants


CONSTANTS_HEADER = ["ell", "tau_cover_dynamical", "tau_cover_newton", "cover_discrepancy",
                    "tau_homeo_dynamical", "tau_homeo_newton", "homeo_discrepancy", "class_gap", "bound_ok"]


def _collect_newton(cfg: ExperimentConfig) -> dict:
    out = {"cover": {}, "homeo": {}}
    for kind in ("cover", "homeo"):
        for e in cfg.ell_list:
            p = _fp_path(cfg, KINDS[kind], e)
            if p.exists():
                out[kind][e] = mp.mpf(_read_json(p)["tau"])
    return out


def cmd_constants(cfg: ExperimentConfig, resume: bool = False) -> int:
    from .limits import common_limit
    from .renorm import check_tau_bound

    _require_tuned(cfg)
    status = EXIT_OK
    rpath = cfg.out / "renorm.json"
    if not rpath.exists() or _read_json(rpath).get("renorm_depth") != cfg.renorm_depth:
        status = max(status, cmd_renorm(cfg, resume))
    dyn = _read_json(rpath)["records"]
    if any(not _fp_path(cfg, KINDS[k], e).exists() for k in cfg.kinds for e in cfg.ell_list):
        status = max(status, cmd_fixedpoint(cfg, resume=True))
    newton = _collect_newton(cfg)
    rows = []
    for e in sorted(cfg.ell_list):
        row = [e]
        taus = {}
        for kind in ("cover", "homeo"):
            d = dyn.get(_key(kind, e))
            n = newton[kind].get(e)
            dv = mp.mpf(d["tau"]) if d else None
            row += [decimal_str(dv, 12) if dv is not None else "",
                    decimal_str(n, 20) if n is not None else "",
                    decimal_str(abs(dv - n), 3) if (dv is not None and n is not None) else ""]
            taus[kind] = n
        both = taus["cover"] is not None and taus["homeo"] is not None
        row.append(decimal_str(abs(taus["cover"] - taus["homeo"]), 12) if both else "")
        known = [t for t in taus.values() if t is not None]
        row.append(str(all(check_tau_bound(t, e) and abs(t) > 1.05 for t in known)).lower() if known else "")
        rows.append(row)
    fit = None
    try:
        fit = common_limit({e: float(t) for e, t in newton["cover"].items()},
                           {e: float(t) for e, t in newton["homeo"].items()})
        rows.append(["inf", "", f"{fit.limit:.6f}", "", "", f"{fit.limit:.6f}", "", "0", ""])
    except ValueError as exc:
        log.info("no common-limit fit: %s", exc)
    _write_csv(cfg.out / "constants.csv", CONSTANTS_HEADER, rows)
    doc = _header(cfg, "fibrenorm.constants/1")
    doc.update(rows=[dict(zip(CONSTANTS_HEADER, map(str, r))) for r in rows],
               limit=fit.to_dict() if fit else None)
    _write_json(cfg.out / "constants.json", doc)
    cols = [2] * ("cover" in cfg.kinds) + [5] * ("homeo" in cfg.kinds)
    if any(r[c] == "" for r in rows if r[0] != "inf" for c in cols):
        status = max(status, EXIT_PARTIAL)
    return status


# --------------------------------------------------------------------------
# verify


def cmd_verify(cfg: ExperimentConfig, resume: bool = False, tol: float = 1e-8) -> int:
    from .errors import FibrenormError
    from .fixedpoint import multipliers_ok, verify_identities
    from .renorm import check_tau_bound

    report = {}
    failing = []
    missing = []
    for kind in cfg.kinds:
        fpkind = KINDS[kind]
        for e in sorted(cfg.ell_list):
            path = _fp_path(cfg, fpkind, e)
            if not path.exists():
                missing.append(_key(fpkind, e))
                continue
            try:
                fp = load_fixed_point(path)
                rep = verify_identities(fp, tol=tol)
            except (FibrenormError, ValueError, KeyError, ZeroDivisionError) as exc:
                failing.append(f"{_key(fpkind, e)}: unreadable or unsolvable ({exc})")
                continue
            bad = [name for name, err in rep.errors.items() if not err < tol]
            if not rep.ordering:
                bad.append("ordering 1 < tau*x_c < tau^2")
            entry = {
                "worst": decimal_str(rep.worst(), 4),
                "errors": {k: decimal_str(v, 4) for k, v in rep.errors.items()},
                "ordering": bool(rep.ordering),
                "schwarzian_max": decimal_str(rep.schwarzian_max, 4),
                "bound_ok": check_tau_bound(fp.tau, e) and abs(fp.tau) > 1.05,
                "multipliers_ok": bool(multipliers_ok(fp)),
                "failing": bad,
            }
            report[_key(fpkind, e)] = entry
            failing += [f"{_key(fpkind, e)}: {name}" for name in bad]
            print(f"{fpkind:5s} l={e:<3d} worst={entry['worst']:>10s} bound={entry['bound_ok']} "
                  f"{'ok' if not bad else 'FAIL ' + ', '.join(bad)}")
    doc = _header(cfg, "fibrenorm.verify/1")
    doc.update(threshold=repr(tol), reports=report, failing=failing, missing=missing)
    _write_json(cfg.out / "verify.json", doc)
    for f in failing:
        print(f"failing identity: {f}", file=sys.stderr)
    if failing:
        return EXIT_VERIFY
    return EXIT_PARTIAL if missing else EXIT_OK


# --------------------------------------------------------------------------
# presentation


def cmd_presentation(cfg: ExperimentConfig, resume: bool = False) -> int:
    from .presentation import build_return_system, golden_order_check, max_gap_profile, orbit_preimage_correspondence

    e = cfg.presentation_ell
    path = _fp_path(cfg, "cover", e)
    if not path.exists():
        print(f"no cover fixed point for l={e}; run 'fibrenorm fixedpoint --kind cover'", file=sys.stderr)
        return EXIT_PARTIAL
    fp = load_fixed_point(path)
    system = build_return_system(fp, N=8)
    corr = orbit_preimage_correspondence(fp, j_max=50, depth=25)
    profile = max_gap_profile(fp, range(5, 16))
    order = golden_order_check(fp, 100)
    doc = _header(cfg, "fibrenorm.presentation/1")
    doc.update(
        ell=e,
        return_system={k: (decimal_str(v, 6) if not isinstance(v, bool) else v) for k, v in system.checks.items()},
        K=[[decimal_str(br.K[0], 20), decimal_str(br.K[1], 20)] for br in system.branches],
        correspondence={k: (v if isinstance(v, (bool, int, list)) else repr(float(v)))
                        for k, v in asdict(corr).items()},
        max_gap=[[d, repr(float(g))] for d, g in profile],
        golden_order={k: bool(v.passed) for k, v in order.items()},
    )
    _write_json(cfg.out / "presentation.json", doc)
    gaps = [g for _, g in profile]
    ok = corr.bijective and all(b <= a for a, b in zip(gaps, gaps[1:]))
    print(f"l={e} correspondence bijective={corr.bijective} max_err={corr.max_error:.2e} "
          f"gaps {gaps[0]:.5f} -> {gaps[-1]:.5f}")
    return EXIT_OK if ok else EXIT_VERIFY


# --------------------------------------------------------------------------
# dimension


def _dimension_one(path: str, A: list, depth: int) -> dict:
    from .dimension import FiniteIFS, dimension_estimate

    fp = load_fixed_point(Path(path))
    est = dimension_estimate(FiniteIFS.from_fixed_point(fp, A), depth)
    return {"s_lo": est.s_lo, "s_hi": est.s_hi, "D": est.distortion_bound, "count": est.cylinder_count}


def cmd_dimension(cfg: ExperimentConfig, resume: bool = False) -> int:
    from .dimension import CSV_HEADER

    ells = sorted(cfg.ell_list)
    A = list(cfg.ifs_index_set)
    tasks = [(str(_fp_path(cfg, "cover", e)), A, cfg.ifs_depth) for e in ells]
    results = _isolated(_dimension_one, tasks, cfg.workers)
    rows, solved = [], []
    for e, res in zip(ells, results):
        if "error" in res:
            log.warning("dimension l=%d failed: %s", e, res["error"])
            rows.append([e, len(A), cfg.ifs_depth, "", ""])
        else:
            rows.append([e, len(A), cfg.ifs_depth, f"{res['s_lo']:.9f}", f"{res['s_hi']:.9f}"])
            solved.append(res["s_lo"])
    verdict = None
    if len(solved) >= 2:
        verdict = all(b >= a - 1e-6 for a, b in zip(solved, solved[1:]))
        rows.append(["trend", len(A), cfg.ifs_depth, "PASS" if verdict else "FAIL", ""])
    _write_csv(cfg.out / "dimension.csv", CSV_HEADER, rows)
    for r in rows:
        print(",".join(map(str, r)))
    if len(solved) < len(ells):
        return EXIT_PARTIAL
    return EXIT_OK if verdict in (None, True) else EXIT_VERIFY


# --------------------------------------------------------------------------
# report


def cmd_report(cfg: ExperimentConfig, resume: bool = False) -> int:
    out = cfg.out
    record = {"schema": "fibrenorm.report/1", "version": __version__, "config_hash": cfg.digest(),
              "config": asdict(cfg),
              "generated": _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")}
    for name in ("tuned", "renorm", "constants", "verify", "presentation"):
        p = out / f"{name}.json"
        record[name] = _read_json(p) if p.exists() else None
    dp = out / "dimension.csv"
    record["dimension"] = read_csv(dp) if dp.exists() else None
    _write_json(out / "report.json", record)
    lim = (record["constants"] or {}).get("limit")
    print(f"config {cfg.digest()}  output {out}")
    if lim:
        print(f"common limit tau = {float(lim['limit']):.4f} (cut spread {float(lim['spread']):.3f})")
    if record["verify"]:
        print(f"identity failures: {len(record['verify']['failing'])}")
    if record["dimension"]:
        for row in record["dimension"]:
            print("dimension " + ", ".join(f"{k}={v}" for k, v in row.items()))
    return EXIT_OK


COMMANDS = {
    "tune": cmd_tune,
    "renorm": cmd_renorm,
    "fixedpoint": cmd_fixedpoint,
    "constants": cmd_constants,
    "verify": cmd_verify,
    "presentation": cmd_presentation,
    "dimension": cmd_dimension,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fibrenorm", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key=value config file")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--kind", choices=["homeo", "cover", "both"])
        sp.add_argument("--ell", help="comma list or range, e.g. 3,5,7 or 3..21")
        sp.add_argument("--precision", type=int)
        sp.add_argument("--depth", type=int, help="renormalization depth")
        sp.add_argument("--basis", type=int, help="Chebyshev basis size")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--resume", action="store_true", help="reuse existing stage files")
        sp.add_argument("--workers", type=int)
        if name == "dimension":
            sp.add_argument("--index-set", help="IFS branch indices, e.g. 0,1,2,3")
            sp.add_argument("--ifs-depth", type=int)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    overrides = {
        "kind": args.kind,
        "ell_list": _int_list(args.ell) if args.ell else None,
        "precision": args.precision,
        "renorm_depth": args.depth,
        "solver_basis": args.basis,
        "output_dir": args.out,
        "workers": args.workers,
    }
    if args.command == "dimension":
        overrides["ifs_index_set"] = _int_list(args.index_set, 1) if args.index_set else None
        overrides["ifs_depth"] = args.ifs_depth
    try:
        cfg = load_config(args.config, overrides)
        return COMMANDS[args.command](cfg, resume=args.resume)
    except (PipelineError, ValueError, OSError) as exc:
        print(f"fibrenorm {args.command}: {exc}", file=sys.stderr)
        return EXIT_VERIFY if isinstance(exc, PipelineError) else EXIT_PARTIAL


if __name__ == "__main__":
    sys.exit(main())
