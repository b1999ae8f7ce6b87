"""Command-line driver.

Every subcommand prints one JSON object.  ``sweep`` writes one JSON record
per task to a line-delimited log, can resume an interrupted run, and sorts
the log canonically when it finishes.

Exit codes: 0 all verdicts positive, 1 some task needs attention,
2 usage or configuration error, 3 precision exhausted on some task.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from fractions import Fraction
from pathlib import Path

from .bounds import (
    HypergeometricInapplicable,
    alg_ctx,
    hg_K_check,
    laurent_A_bound,
    matveev_m_bound,
    nu_floor,
    precision_for,
    rickert,
    rickert_applicable,
    rickert_refined,
)
from .exact import DEFAULT_PREC, InsufficientPrecision
from .pell import classify_fundamentals, mixed_parity_witnesses, pell_extensions
from .reduction import verify_pair, verify_prop_delta
from .tuples import (
    SieveStatus,
    brute_force_extensions,
    d_minus,
    d_plus,
    family_triple,
    make_triple,
    quintuple_scan_b4a,
    quintuple_scan_regular,
    verify_dtuple,
)

EXIT_OK, EXIT_ATTENTION, EXIT_USAGE, EXIT_PRECISION = 0, 1, 2, 3

RECORD_FIELDS = (
    "id",
    "verdict",
    "d_plus",
    "nu_floor",
    "new_bound",
    "lambda",
    "check",
    "precision",
    "wall_time",
)
POSITIVE = {"unique-extension", "nu-excluded", "eliminated", "valid"}
JOBS_ENV = "DTRIPLES_JOBS"
REGION_RULES = ("paper-bound", "region-bound")


class ConfigError(ValueError):
    pass


# -- parsing helpers ------------------------------------------------------------------


def parse_range(text: str) -> tuple[int, int]:
    """``"2..39"`` or ``"7"`` to an inclusive pair."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise ConfigError(f"bad range {text!r}; expected LO..HI") from None
    if lo > hi:
        raise ConfigError(f"empty range {text!r}")
    return lo, hi


def parse_eps_list(text: str) -> list[int]:
    try:
        out = sorted({int(x) for x in text.replace(" ", "").split(",") if x})
    except ValueError:
        raise ConfigError(f"bad eps list {text!r}") from None
    if not out or any(e not in (-2, -1, 1, 2) for e in out):
        raise ConfigError(f"eps values must come from -2,-1,1,2; got {text!r}")
    return out


def effective_precision(requested: int | None, A: int | None = None) -> int:
    """The precision policy, with a floor of 180 digits on overrides."""
    if requested is not None:
        return max(DEFAULT_PREC, requested)
    return precision_for(A) if A is not None else DEFAULT_PREC


def load_config(path: str) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment; keys use underscores."""
    out = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key=value")
        k, v = (x.strip() for x in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def region_K_max(A: int) -> int:
    """Largest ``K`` in the admissible region for ``A`` (0 if ``A`` is outside it)."""
    if 2 <= A <= 39:
        bound = Fraction("240.24") * (A + 1) + 740
    elif 40 <= A <= 2810:
        bound = Fraction("237.05") * (A + 1)
    else:
        return 0
    k = bound.numerator // bound.denominator
    return k - 1 if k == bound else k


# -- task ids ---------------------------------------------------------------------------


def family_id(eps: int, A: int, K: int) -> str:
    return f"{eps}:{A}:{K}"


def sort_key(task_id: str) -> tuple:
    head, *rest = task_id.split(":")
    if head == "delta":
        return (1, int(rest[0]))
    if head == "a":
        return (2, *(int(x) for x in rest))
    return (0, int(head), *(int(x) for x in rest))


# -- records ----------------------------------------------------------------------------


def make_record(**kw) -> dict:
    rec = {k: kw.get(k) for k in RECORD_FIELDS}
    unknown = set(kw) - set(RECORD_FIELDS)
    if unknown:
        raise KeyError(f"unknown record fields {sorted(unknown)}")
    return rec


def dump_record(rec: dict) -> str:
    return json.dumps({k: rec[k] for k in RECORD_FIELDS}, ensure_ascii=False)


def read_records(path: Path) -> list[dict]:
    """Parse a record log, dropping a torn final line from an interrupted write."""
    if not path.exists():
        return []
    out = []
    for line in path.read_text(encoding="utf-8").splitlines():
        try:
            rec = json.loads(line)
        except json.JSONDecodeError:
            continue
        if isinstance(rec, dict) and "id" in rec:
            out.append(rec)
    return out


def _lambda_of(A: int, K: int, eps: int) -> float | None:
    try:
        res = rickert(A, K, eps) if rickert_applicable(A, K, eps) else rickert_refined(A, K, eps)
    except HypergeometricInapplicable:
        return None
    return round(float(res.lam), 6)


def run_task(task_id: str, opts: dict) -> dict:
    """Execute one sweep task; safe to call in a worker process."""
    t0 = time.perf_counter()
    head, *rest = task_id.split(":")
    prec = None
    try:
        if head == "delta":
            D = int(rest[0])
            prec = effective_precision(opts.get("precision") or 200)
            v = verify_prop_delta(D, prec=prec)
            return make_record(
                id=task_id, verdict=v.verdict, d_plus=v.d_plus, new_bound=v.new_bound,
                check="prop-delta-reduction", precision=v.prec,
                wall_time=round(time.perf_counter() - t0, 4),
            )
        if head == "a":
            a, dmax = int(rest[0]), int(opts.get("delta_max") or 10)
            verdicts = quintuple_scan_regular((a, a), dmax)
            survivors = [v for v in verdicts if v.status is SieveStatus.SURVIVOR]
            statuses = sorted({v.status.value for v in verdicts})
            return make_record(
                id=task_id, verdict="survivor" if survivors else "eliminated",
                check="quintuple-sieve:" + ",".join(statuses),
                wall_time=round(time.perf_counter() - t0, 4),
            )
        eps, A, K = int(head), int(rest[0]), int(rest[1])
        tr = family_triple(A, K, eps)
        # D(1) triples are treated through their doubled D(4) triple
        A4, K4, e4 = (A, 2 * K, 2 * eps) if abs(eps) == 1 else (A, K, eps)
        prec = effective_precision(opts.get("precision"), A4)
        nu_max = opts.get("nu_max")
        nu = nu_floor(A4, K4, e4, nu_max, prec) if nu_max else None
        rec = dict(
            id=task_id, d_plus=d_plus(tr), nu_floor=nu, lambda_=_lambda_of(A, K, eps),
            precision=prec,
        )
        if opts.get("reduce"):
            v = verify_pair(A, K, eps, prec=prec)
            rec.update(verdict=v.verdict, new_bound=v.new_bound, check="reduction", precision=v.prec)
        else:
            ok = nu is not None and nu > nu_max
            rec.update(verdict="nu-excluded" if ok else "needs-attention", check="nu-exclusion")
        rec["lambda"] = rec.pop("lambda_")
        rec["wall_time"] = round(time.perf_counter() - t0, 4)
        return make_record(**rec)
    except InsufficientPrecision as exc:
        return make_record(
            id=task_id, verdict="precision-exhausted", check=str(exc)[:200], precision=prec,
            wall_time=round(time.perf_counter() - t0, 4),
        )


# -- sweep ---------------------------------------------------------------------------------


def build_tasks(cfg: dict) -> list[str]:
    tasks = []
    if cfg.get("A"):
        lo, hi = parse_range(cfg["A"])
        k_rule = cfg.get("K") or "region-bound"
        sample = cfg.get("K_sample")
        seed = int(cfg.get("seed") or 0)
        for eps in parse_eps_list(cfg.get("eps") or "-2,-1,1,2"):
            for A in range(lo, hi + 1):
                if k_rule in REGION_RULES:
                    ks = range(1, region_K_max(A) + 1)
                else:
                    klo, khi = parse_range(k_rule)
                    ks = range(klo, khi + 1)
                ks = list(ks)
                if sample and len(ks) > int(sample):
                    ks = sorted(random.Random(f"{seed}:{eps}:{A}").sample(ks, int(sample)))
                for K in ks:
                    try:
                        family_triple(A, K, eps)
                    except ValueError:
                        continue
                    tasks.append(family_id(eps, A, K))
    if cfg.get("delta"):
        lo, hi = parse_range(cfg["delta"])
        if lo < 6 or hi > 60:
            raise ConfigError("delta range must lie within 6..60")
        tasks += [f"delta:{D}" for D in range(lo, hi + 1)]
    if cfg.get("a_range"):
        lo, hi = parse_range(cfg["a_range"])
        if lo < 16 or hi > 10**4:
            raise ConfigError("a range must lie within 16..10000")
        tasks += [f"a:{a}" for a in range(lo, hi + 1)]
    if not tasks:
        raise ConfigError("no tasks: give --A, --delta or --a-range")
    return sorted(set(tasks), key=sort_key)


def finalize(path: Path) -> list[dict]:
    """Rewrite the log with one record per id in canonical order."""
    seen: dict[str, dict] = {}
    for rec in read_records(path):
        seen.setdefault(rec["id"], rec)
    recs = [seen[k] for k in sorted(seen, key=sort_key)]
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        for rec in recs:
            fh.write(dump_record(make_record(**{k: rec.get(k) for k in RECORD_FIELDS})) + "\n")
    os.replace(tmp, path)
    return recs


def write_csv(recs: list[dict], path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_FIELDS)
        for rec in recs:
            w.writerow(["" if rec.get(k) is None else rec[k] for k in RECORD_FIELDS])


def _drop_torn_tail(path: Path) -> None:
    """Cut a partial last line so appended records start on a fresh line."""
    if not path.exists():
        return
    data = path.read_bytes()
    if data and not data.endswith(b"\n"):
        with open(path, "r+b") as fh:
            fh.truncate(data.rfind(b"\n") + 1)


def run_sweep(cfg: dict) -> tuple[int, list[dict]]:
    tasks = build_tasks(cfg)
    out = Path(cfg.get("out") or "sweep.jsonl")
    resume = str(cfg.get("resume", "")).lower() in ("1", "true", "yes")
    if out.exists() and not resume:
        out.unlink()
    _drop_torn_tail(out)
    done = {r["id"] for r in read_records(out)}
    todo = [t for t in tasks if t not in done]
    jobs = int(cfg.get("jobs") or os.environ.get(JOBS_ENV) or 1)
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")
    opts = {
        "nu_max": int(cfg["nu_max"]) if cfg.get("nu_max") else None,
        "precision": int(cfg["precision"]) if cfg.get("precision") else None,
        "reduce": str(cfg.get("reduce", "")).lower() in ("1", "true", "yes"),
        "delta_max": int(cfg.get("delta_max") or 10),
    }
    out.parent.mkdir(parents=True, exist_ok=True)
    # the parent process is the only writer; workers just return records
    with open(out, "a", encoding="utf-8", newline="\n") as fh:
        if jobs == 1:
            for t in todo:
                fh.write(dump_record(run_task(t, opts)) + "\n")
                fh.flush()
        else:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futs = [pool.submit(run_task, t, opts) for t in todo]
                for fut in as_completed(futs):
                    fh.write(dump_record(fut.result()) + "\n")
                    fh.flush()
    recs = [r for r in finalize(out) if r["id"] in set(tasks)]
    if cfg.get("csv"):
        write_csv(recs, Path(cfg["csv"]))
    return _exit_code(recs), recs


def _exit_code(recs: list[dict]) -> int:
    verdicts = [r["verdict"] for r in recs]
    if "precision-exhausted" in verdicts:
        bad = [r["id"] for r in recs if r["verdict"] == "precision-exhausted"]
        print("precision exhausted on: " + " ".join(bad), file=sys.stderr)
        return EXIT_PRECISION
    return EXIT_OK if all(v in POSITIVE for v in verdicts) else EXIT_ATTENTION


# -- single-shot subcommands -----------------------------------------------------------------


def _emit(obj: dict) -> None:
    print(json.dumps(obj, default=str))


def cmd_family(args) -> int:
    tr = family_triple(args.A, args.K, args.eps)
    _emit({
        "id": family_id(args.eps, args.A, args.K), "triple": list(tr.elems), "sigma": tr.sigma,
        "r": tr.r, "s": tr.s, "t": tr.t, "d_plus": d_plus(tr), "d_minus": d_minus(tr),
    })
    return EXIT_OK


def cmd_verify(args) -> int:
    res = verify_dtuple(args.elems, args.n)
    _emit({"elems": list(res.elems), "n": res.n, "valid": res.valid,
           "failing_pair": res.failing_pair})
    return EXIT_OK if res.valid else EXIT_ATTENTION


def _triple_from_args(args):
    if args.A is not None:
        return family_triple(args.A, args.K, args.eps)
    if None in (args.a, args.b, args.c):
        raise ConfigError("give --A/--K/--eps or --a/--b/--c")
    return make_triple(args.a, args.b, args.c, args.sigma)


def cmd_extend(args) -> int:
    tr = _triple_from_args(args)
    dp = d_plus(tr)
    d_max = args.d_max or 2 * dp
    ds = pell_extensions(tr, d_max) if args.method == "pell" else brute_force_extensions(tr, d_max)
    _emit({"triple": list(tr.elems), "sigma": tr.sigma, "d_max": d_max, "extensions": ds,
           "d_plus": dp})
    return EXIT_OK if set(ds) <= {dp} else EXIT_ATTENTION


def cmd_pell(args) -> int:
    tr = _triple_from_args(args)
    if tr.sigma == 1 and args.double:
        tr = make_triple(2 * tr.a, 2 * tr.b, 2 * tr.c, 4)
    rep = classify_fundamentals(tr)
    mixed = mixed_parity_witnesses(tr)
    _emit({
        "triple": list(tr.elems),
        "z0_solutions": [(f.z0, f.x0, f.cls.value) for f in rep.z0_solutions],
        "z1_solutions": [(f.z0, f.x0, f.cls.value) for f in rep.z1_solutions],
        "admissible_z0": [(f.z0, f.x0) for f in rep.admissible_z0],
        "possible_cases": list(rep.possible_cases), "conclusion": rep.conclusion,
        "mixed_parity_witnesses": mixed,
    })
    return EXIT_OK if rep.only_trivial and not mixed else EXIT_ATTENTION


def cmd_bounds(args) -> int:
    if args.laurent:
        _emit({"eps": args.eps, "nu": args.nu, "A_bound": laurent_A_bound(args.eps, args.nu)})
        return EXIT_OK
    A, K, eps = args.A, args.K, args.eps
    if A is None or K is None:
        raise ConfigError("bounds needs --A and --K (or --laurent)")
    A4, K4, e4 = (A, 2 * K, 2 * eps) if abs(eps) == 1 else (A, K, eps)
    prec = effective_precision(args.precision, A4)
    out = {"id": family_id(eps, A, K), "precision": prec, "lambda": _lambda_of(A, K, eps),
           "rickert_applicable": rickert_applicable(A, K, eps)}
    try:
        out["hg_possible_nu1"] = hg_K_check(A4, K4, e4, 1, prec=prec)
    except HypergeometricInapplicable:
        out["hg_possible_nu1"] = None
    out["nu_floor"] = nu_floor(A4, K4, e4, args.nu_max, prec)
    out["m_bound"] = matveev_m_bound(alg_ctx(family_triple(A4, K4, e4), 50))
    _emit(out)
    return EXIT_OK


def cmd_reduce(args) -> int:
    if args.delta is not None:
        v = verify_prop_delta(args.delta, prec=effective_precision(args.precision or 200))
    else:
        prec = None if args.precision is None else effective_precision(args.precision)
        v = verify_pair(args.A, args.K, args.eps, prec=prec)
    _emit({
        "id": v.task, "verdict": v.verdict, "d_plus": v.d_plus, "M": v.M,
        "new_bound": v.new_bound, "residual": list(v.residual), "precision": v.prec,
        "rounds": {str(b): [(h.M, h.Q, h.new_bound) for h in hs] for b, hs in v.rounds.items()},
        "detail": v.detail,
    })
    return EXIT_OK if v.ok else EXIT_ATTENTION


def cmd_quintuple(args) -> int:
    lo, hi = parse_range(args.a_range)
    if args.mode == "regular":
        res = quintuple_scan_regular((lo, hi), args.delta_max)
    else:
        res = quintuple_scan_b4a((lo, hi), args.delta_max)
    survivors = [v.triple for v in res if v.status is SieveStatus.SURVIVOR]
    _emit({
        "mode": args.mode,
        "verdicts": [
            {"id": f"a:{v.a}", "delta": v.delta, "triple": list(v.triple),
             "status": v.status.value, "reason": v.reason}
            for v in res
        ],
        "survivors": survivors,
    })
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config) if args.config else {}
    for key in ("eps", "A", "K", "K_sample", "seed", "nu_max", "precision", "jobs", "out",
                "delta", "a_range", "delta_max", "csv"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = str(val)
    if args.resume:
        cfg["resume"] = "true"
    if args.reduce:
        cfg["reduce"] = "true"
    code, recs = run_sweep(cfg)
    _emit({"records": len(recs), "exit": code,
           "verdicts": {v: sum(r["verdict"] == v for r in recs) for v in sorted({r["verdict"] for r in recs})}})
    return code


# -- parser ----------------------------------------------------------------------------------


def _add_triple_args(p: argparse.ArgumentParser, required: bool = False) -> None:
    p.add_argument("--A", type=int, required=required)
    p.add_argument("--K", type=int, required=required)
    p.add_argument("--eps", type=int, choices=(-2, -1, 1, 2), default=-2)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dtriples", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("family", help="family triple and its regular extensions")
    _add_triple_args(p, required=True)
    p.set_defaults(fn=cmd_family)

    p = sub.add_parser("verify", help="check a D(n)-tuple")
    p.add_argument("elems", type=int, nargs="+")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(fn=cmd_verify)

    for name, fn, hlp in (("extend", cmd_extend, "list extensions up to d_max"),
                          ("pell", cmd_pell, "window solutions and parity checks")):
        p = sub.add_parser(name, help=hlp)
        _add_triple_args(p)
        p.add_argument("--a", type=int)
        p.add_argument("--b", type=int)
        p.add_argument("--c", type=int)
        p.add_argument("--sigma", type=int, choices=(1, 4), default=4)
        if name == "extend":
            p.add_argument("--d-max", dest="d_max", type=int)
            p.add_argument("--method", choices=("brute", "pell"), default="brute")
        else:
            p.add_argument("--double", action="store_true", help="double a D(1) triple first")
        p.set_defaults(fn=fn)

    p = sub.add_parser("bounds", help="approximation exponent, nu-floor, three-log bound")
    _add_triple_args(p)
    p.add_argument("--nu-max", dest="nu_max", type=int, default=30)
    p.add_argument("--nu", type=int, default=1)
    p.add_argument("--laurent", action="store_true", help="only the two-log bound on A")
    p.add_argument("--precision", type=int)
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("reduce", help="Baker-Davenport reduction for one pair or Delta")
    _add_triple_args(p)
    p.add_argument("--delta", type=int)
    p.add_argument("--precision", type=int)
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("quintuple", help="quintuple candidate sieve")
    p.add_argument("--mode", choices=("regular", "b4a"), default="regular")
    p.add_argument("--delta-max", dest="delta_max", type=int, default=10)
    p.add_argument("--a-range", dest="a_range", default="16..10000")
    p.set_defaults(fn=cmd_quintuple)

    p = sub.add_parser("sweep", help="resumable parallel grid sweep")
    p.add_argument("--config")
    p.add_argument("--eps")
    p.add_argument("--A")
    p.add_argument("--K", help='"LO..HI", "region-bound" or its alias "paper-bound"')
    p.add_argument("--K-sample", dest="K_sample", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--nu-max", dest="nu_max", type=int)
    p.add_argument("--delta")
    p.add_argument("--a-range", dest="a_range")
    p.add_argument("--delta-max", dest="delta_max", type=int)
    p.add_argument("--precision", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out")
    p.add_argument("--csv")
    p.add_argument("--resume", action="store_true")
    p.add_argument("--reduce", action="store_true", help="also run the reduction per pair")
    p.set_defaults(fn=cmd_sweep)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except InsufficientPrecision as exc:
        print(f"precision exhausted: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
