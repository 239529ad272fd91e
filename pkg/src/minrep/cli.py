"""Command-line front end: verify, synth, constants, plot-data."""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import checks
from . import cone_model as co
from . import flat_model as fm
from . import quadrature as qd
from . import specfun as sf
from .geometry import Signature, SignatureError

OUT_ENV = "MINREP_OUT"


class UsageError(Exception):
    pass


def _signature(args) -> Signature:
    try:
        return Signature(args.p, args.q)
    except SignatureError as exc:
        raise UsageError(str(exc)) from None


def _out_dir(args, default="minrep-out") -> str:
    return args.out or os.environ.get(OUT_ENV) or default


# ---------------------------------------------------------------------------
# verify


def build_config(args) -> checks.RunConfig:
    pairs = {}
    if args.config:
        with open(args.config) as fh:
            pairs.update(checks.parse_config_text(fh.read()))
    for key in ("p", "q", "seed", "tol_scale"):
        v = getattr(args, key)
        if v is not None:
            pairs[key] = v
    if args.suite:
        pairs["suites"] = ",".join(s for item in args.suite for s in item.split(","))
    out = args.out or os.environ.get(OUT_ENV)
    if out:
        pairs["out"] = out
    try:
        return checks.config_from_pairs(pairs)
    except (ValueError, SignatureError) as exc:
        raise UsageError(str(exc)) from None


def report_dict(cfg: checks.RunConfig, records, with_runtime=False) -> dict:
    return {
        "schema_version": checks.SCHEMA_VERSION,
        "config": cfg.as_dict(),
        "summary": checks.summarize(records),
        "records": [r.as_dict(with_runtime) for r in records],
    }


def write_report(path: str, cfg, records, with_runtime=False) -> None:
    with open(path, "w") as fh:
        json.dump(report_dict(cfg, records, with_runtime), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_checks_csv(path: str, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["check_id", "criterion", "signature", "passed", "informational", "residual",
                    "comparison", "tolerance"])
        for r in records:
            w.writerow([r.check_id, r.criterion if r.criterion is not None else "", r.signature, int(r.passed),
                        int(r.informational), f"{r.residual:.6g}", r.comparison, f"{r.tolerance:g}"])


def cmd_verify(args) -> int:
    cfg = build_config(args)
    if args.show_config:
        for k, v in cfg.as_dict().items():
            if k == "tolerances":
                for cid in sorted(checks.DEFAULT_TOLERANCES):
                    print(f"tol.{cid} = {cfg.tolerances.get(cid, checks.DEFAULT_TOLERANCES[cid]):g}")
            elif k == "suites":
                print(f"suites = {','.join(v)}")
            else:
                print(f"{k} = {v}")
        return 0
    os.makedirs(cfg.out, exist_ok=True)
    records = []
    report = os.path.join(cfg.out, "report.json")

    def progress(r):
        records.append(r)
        if not args.quiet:
            tag = "PASS" if r.passed else ("INFO" if r.informational else "FAIL")
            print(f"{tag:4s} {r.check_id:36s} residual={r.residual:.3e} ({r.comparison} {r.tolerance:g})",
                  flush=True)
        # keep a partial report on disk in case a later check takes the process down
        write_report(report, cfg, records)

    checks.run_suites(cfg, progress)
    write_report(report, cfg, records)
    write_checks_csv(os.path.join(cfg.out, "checks.csv"), records)
    if args.timings:
        with open(os.path.join(cfg.out, "timings.csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["check_id", "runtime_s"])
            for r in records:
                w.writerow([r.check_id, f"{r.runtime:.3f}"])
    s = checks.summarize(records)
    if not args.quiet:
        print(f"{s['hard'] - s['hard_failed']}/{s['hard']} checks passed; "
              f"{s['informational_mismatch']} informational mismatches; report: {report}")
    return 0 if s["hard_failed"] == 0 else 1


# ---------------------------------------------------------------------------
# synth


def parse_line(spec: str, n: int) -> np.ndarray:
    """AXIS:START:STOP:COUNT -> points START..STOP along axis AXIS (1-based)."""
    try:
        axis, a, b, count = spec.split(":")
        axis, count = int(axis), int(count)
        a, b = float(a), float(b)
    except ValueError:
        raise UsageError("--line expects AXIS:START:STOP:COUNT") from None
    if not 1 <= axis <= n or count < 0:
        raise UsageError(f"--line axis must be in 1..{n} and count >= 0")
    z = np.zeros((count, n))
    z[:, axis - 1] = np.linspace(a, b, count)
    return z


def read_probes(path: str, n: int) -> np.ndarray:
    rows = []
    with open(path, newline="") as fh:
        for k, row in enumerate(csv.reader(fh)):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                vals = [float(x) for x in row]
            except ValueError:
                if k == 0:
                    continue  # header
                raise UsageError(f"probe file row {k + 1} is not numeric") from None
            if len(vals) != n:
                raise UsageError(f"probe file row {k + 1} has {len(vals)} entries, expected {n}")
            rows.append(vals)
    return np.array(rows, dtype=float).reshape(-1, n)


def synth_data(sig: Signature, kind: str, center: float, width: float) -> co.ConeFunction:
    if kind == "bessel":
        return co.psi_0(sig)
    if kind == "gaussian":
        return co.radial_function(sig, lambda s: np.exp(-(s / width) ** 2), label="gaussian")
    if kind == "bump":
        return co.radial_function(sig, lambda s: fm.smooth_bump((s - center) / width), label="bump")
    raise UsageError(f"unknown cone data {kind!r}")


def cmd_synth(args) -> int:
    sig = _signature(args)
    if args.width <= 0:
        raise UsageError("--width must be positive")
    if args.compare_f0 and args.data != "bessel":
        raise UsageError("--compare-f0 needs --data bessel")
    if args.compare_f0 and sig.p < sig.q:
        raise UsageError("f0 is defined for p >= q")
    if args.line and args.probes:
        raise UsageError("give either --line or --probes")
    if args.line:
        z = parse_line(args.line, sig.n)
    elif args.probes:
        z = read_probes(args.probes, sig.n)
    else:
        z = np.zeros((0, sig.n))
    phi = synth_data(sig, args.data, args.center, args.width)
    order = 24 if sig.n <= 4 else 12
    rule = qd.cone_rule(sig, args.radial_nodes, order, 1e-7, 22.0)
    vals = qd.inverse_synthesis(rule, phi, z) if len(z) else np.zeros(0, dtype=complex)
    header = [f"z{j + 1}" for j in range(sig.n)] + ["re", "im"]
    if args.compare_f0:
        header += ["closed_form"]
        ref = sf.constants(sig).synthesis_const_derived * sf.generating_f0(sig, z) if len(z) else np.zeros(0)
    out = args.output or os.path.join(_out_dir(args), "synth.csv")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for k in range(len(z)):
            row = [f"{x:.17g}" for x in z[k]] + [f"{vals[k].real:.17g}", f"{vals[k].imag:.17g}"]
            if args.compare_f0:
                row.append(f"{ref[k]:.17g}")
            w.writerow(row)
    print(out)
    return 0


# ---------------------------------------------------------------------------
# constants, plot-data


def cmd_constants(args) -> int:
    sig = _signature(args)
    C = sf.constants(sig)
    doc = {"schema_version": checks.SCHEMA_VERSION, "signature": [sig.p, sig.q], "n": sig.n,
           "values": {k: v for k, v in C.as_dict().items() if k not in ("p", "q", "n")},
           "expressions": sf.EXPRESSIONS}
    print(json.dumps(doc, indent=2, sort_keys=True))
    return 0


def cmd_plot_data(args) -> int:
    from .plotting import write_plot_data
    sig = _signature(args)
    out = _out_dir(args, "minrep-plots")
    for f in write_plot_data(sig, out, args.seed or 0):
        print(os.path.join(out, f))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="minrep", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, sig_default=True):
        p.add_argument("--p", type=int, default=3 if sig_default else None)
        p.add_argument("--q", type=int, default=3 if sig_default else None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help=f"output directory (env {OUT_ENV} also works)")

    v = sub.add_parser("verify", help="run the verification suites and write report.json")
    common(v, sig_default=False)
    v.add_argument("--suite", action="append", help="suite name(s), comma separated; repeatable")
    v.add_argument("--tol-scale", dest="tol_scale", type=float, default=None)
    v.add_argument("--config", help="key=value configuration file; flags override it")
    v.add_argument("--show-config", action="store_true", help="print the effective configuration and exit")
    v.add_argument("--timings", action="store_true", help="also write per-check runtimes to timings.csv")
    v.add_argument("--quiet", action="store_true")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("synth", help="synthesize a solution from cone data at probe points")
    common(s)
    s.add_argument("--data", choices=("bessel", "gaussian", "bump"), default="bessel")
    s.add_argument("--center", type=float, default=2.0, help="radial center of the bump")
    s.add_argument("--width", type=float, default=1.0)
    s.add_argument("--line", help="probes along an axis: AXIS:START:STOP:COUNT")
    s.add_argument("--probes", help="CSV file with one probe point per row")
    s.add_argument("--compare-f0", action="store_true", help="add the closed-form column (bessel data)")
    s.add_argument("--radial-nodes", dest="radial_nodes", type=int, default=96)
    s.add_argument("-o", "--output", help="CSV path (default OUT/synth.csv)")
    s.set_defaults(func=cmd_synth)

    c = sub.add_parser("constants", help="print the normalizing constants as JSON")
    c.add_argument("--p", type=int, default=3)
    c.add_argument("--q", type=int, default=3)
    c.set_defaults(func=cmd_constants)

    pl = sub.add_parser("plot-data", help="write plot-ready CSV tables and PNG figures")
    common(pl)
    pl.set_defaults(func=cmd_plot_data)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        ap.error(str(exc))


if __name__ == "__main__":
    sys.exit(main())
