"""Command-line front end: ``pathpresence {table,fringe,presence-scan,ozawa,verify}``.

Every command writes its outputs plus a ``manifest.json`` into ``--out-dir``.
Passing a manifest back through ``--config`` reproduces the outputs exactly.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, acceptance, analytic, estimator, simkit
from . import config as cfgmod
from .analytic import DivergentWeakValueError

log = logging.getLogger("pathpresence")

MANIFEST_VERSION = 1
DEFAULT_SEED = 20231016


def format_number(x: float) -> str:
    """Exact rational when the value is one (to 1e-12), always with 12 decimals."""
    x = 0.0 if abs(x) < 5e-16 else float(x)
    frac = Fraction(x).limit_denominator(1000)
    dec = f"{x:.12f}"
    if abs(float(frac) - x) < 1e-12:
        return f"{frac} ({dec})"
    return dec


def _write(out_dir: Path, name: str, text: str) -> Path:
    path = out_dir / name
    path.write_text(text)
    return path


def _write_manifest(out_dir: Path, command: str, data: dict, seed: int, resolved: dict, outputs) -> Path:
    manifest = {
        "manifest_version": MANIFEST_VERSION,
        "command": command,
        "tool_version": __version__,
        "seed": seed,
        "config": {**data, "seed": seed},
        "resolved": resolved,
        "outputs": sorted(p.name for p in outputs),
    }
    return _write(out_dir, "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# --- table ------------------------------------------------------------------------


def table_records(cfg) -> dict:
    """Both context tables as plain records; dark ports are labeled, not raised."""
    inter_rows, divergent = [], []
    for port in "+-":
        p = analytic.port_probability(port, cfg)
        try:
            w1 = analytic.weak_value(1, port, cfg).value.real
            inter_rows.append({"outcome": port, "probability": p, "presence_path1": w1, "presence_path2": 1 - w1})
        except DivergentWeakValueError:
            divergent.append(port)
            inter_rows.append({"outcome": port, "probability": p, "presence_path1": "divergent", "presence_path2": "divergent"})
    ww = analytic.presence_table(cfg, "whichway")
    out = {
        "initial": {"a1": cfg.a1, "a2": cfg.a2, "p1": cfg.p1, "p2": cfg.p2},
        "interference": {"rows": inter_rows, "divergent_ports": divergent},
        "whichway": {
            "rows": [r.__dict__ for r in ww.rows],
            "average_path1": ww.average_path1,
            "average_path2": ww.average_path2,
            "std_path1": ww.std_path1,
            "std_path2": ww.std_path2,
            "degenerate": bool(min(cfg.p1, cfg.p2) < cfg.atol),
        },
    }
    if not divergent:
        t = analytic.presence_table(cfg, "interference")
        out["interference"].update(
            average_path1=t.average_path1, average_path2=t.average_path2, std_path1=t.std_path1, std_path2=t.std_path2
        )
    return out


def render_table(rec: dict) -> str:
    f = format_number
    ini = rec["initial"]
    lines = [
        "(a) initial preparation",
        f"  amplitudes      a1 = {f(ini['a1'])}   a2 = {f(ini['a2'])}",
        f"  probabilities   p1 = {f(ini['p1'])}   p2 = {f(ini['p2'])}",
        "",
    ]
    for tag, key, title in (("(b)", "interference", "interference context"), ("(c)", "whichway", "which-way context")):
        sec = rec[key]
        lines.append(f"{tag} {title}")
        lines.append("  outcome  probability  presence_path1  presence_path2")
        for r in sec["rows"]:
            cells = [r["presence_path1"], r["presence_path2"]]
            cells = [c if isinstance(c, str) else f(c) for c in cells]
            lines.append(f"  {r['outcome']:<7}  {f(r['probability'])}  {cells[0]}  {cells[1]}")
        if "average_path1" in sec:
            lines.append(f"  average  path1 = {f(sec['average_path1'])}  path2 = {f(sec['average_path2'])}")
            lines.append(f"  std dev  path1 = {f(sec['std_path1'])}  path2 = {f(sec['std_path2'])}")
        if sec.get("divergent_ports"):
            lines.append(f"  divergent weak values at port(s): {', '.join(sec['divergent_ports'])}")
        if sec.get("degenerate"):
            lines.append("  degenerate: one path carries no amplitude")
        lines.append("")
    return "\n".join(lines)


def cmd_table(data: dict, seed: int, out_dir: Path) -> int:
    cfg = cfgmod.beam_config(data)
    rec = table_records(cfg)
    text = render_table(rec)
    print(text)
    outs = [
        _write(out_dir, "table.txt", text),
        _write(out_dir, "table.json", json.dumps(rec, indent=2) + "\n"),
    ]
    _write_manifest(out_dir, "table", data, seed, {"a1": cfg.a1, "a2": cfg.a2, "chi": cfg.chi}, outs)
    return 0


# --- fringe -----------------------------------------------------------------------


def cmd_fringe(data: dict, seed: int, out_dir: Path) -> int:
    exp = cfgmod.experiment(data, seed)
    selection = data.get("selection", exp.default_selection)
    dataset = simkit.sample_run(exp)
    fit = estimator.fit_fringe(dataset, selection)
    if exp.context == "whichway":
        theory = exp.alpha if exp.measured_path == 1 else 0.0
    else:
        theory = analytic.compensation_solution(exp.selected_port, exp.alpha, exp.cfg).beta0.real
    grid = np.linspace(-np.pi, np.pi, int(data.get("overlay_points", 181)))
    overlay = [(repr(float(b)), repr(float(np.cos(b - theory)))) for b in grid]
    fit_rec = {
        **fit.to_dict(),
        "selection": selection,
        "theory_beta0": theory,
        "deviation_sigmas": abs(np.remainder(fit.beta0 - theory + np.pi, 2 * np.pi) - np.pi) / fit.beta0_std,
    }
    outs = [
        _write(out_dir, "dataset.csv", dataset.to_csv(selection)),
        _write(out_dir, "dataset.json", dataset.to_json() + "\n"),
        _write(out_dir, "fit.json", json.dumps(fit_rec, indent=2) + "\n"),
        _write(out_dir, "overlay.csv", _csv(("beta_rad", "sigma_x_theory"), overlay)),
    ]
    _write_manifest(out_dir, "fringe", data, seed, exp.to_dict(), outs)
    print(
        f"beta0 = {fit.beta0 / np.pi:.4f}({fit.beta0_std / np.pi:.4f}) pi, "
        f"visibility = {fit.visibility:.4f}({fit.visibility_std:.4f}), "
        f"theory = {theory / np.pi:.4f} pi"
    )
    return 0


# --- presence-scan ----------------------------------------------------------------

PRESENCE_FIELDS = (
    "alpha", "label", "presence", "presence_std", "theory_exact", "theory_weak", "beta0", "beta0_std", "visibility",
)


def cmd_presence_scan(data: dict, seed: int, out_dir: Path) -> int:
    alphas = [cfgmod.parse_angle(a) for a in data.get("alphas", ["pi/4", "pi/8", "pi/16"])]
    if any(a == 0 for a in alphas):
        raise cfgmod.ConfigError("invalid config: alphas must be nonzero (presence divides by alpha)")
    cfg = cfgmod.beam_config(data)
    context = data.get("context", "interference")
    points = estimator.presence_scan(
        alphas,
        cfg,
        context,
        counts=int(data.get("shots", 10_000)),
        schedule=cfgmod.schedule(data),
        seed=seed,
        poisson_totals=bool(data.get("poisson_totals", True)),
    )
    records = [p.to_dict() for p in points]
    rows = [[repr(r[k]) if isinstance(r[k], float) else r[k] for k in PRESENCE_FIELDS] for r in records]
    outs = [
        _write(out_dir, "presence.json", json.dumps(records, indent=2) + "\n"),
        _write(out_dir, "presence.csv", _csv(PRESENCE_FIELDS, rows)),
    ]
    _write_manifest(out_dir, "presence-scan", data, seed, {"alphas": alphas, "context": context}, outs)
    for r in records:
        print(
            f"alpha = {r['alpha'] / np.pi:.4f} pi  {r['label']:<6} presence = {r['presence']:.4f} +- "
            f"{r['presence_std']:.4f}  exact = {r['theory_exact']:.4f}  weak = {r['theory_weak']:.4f}"
        )
    return 0


# --- ozawa ------------------------------------------------------------------------


def cmd_ozawa(data: dict, seed: int, out_dir: Path) -> int:
    cfg = cfgmod.beam_config(data)
    alpha = cfgmod.parse_angle(data.get("alpha", "pi/16"))
    grid = data.get("grid", {})
    lo_p, hi_p, n_p = grid.get("plus", [-1.0, 3.0, 401])
    lo_m, hi_m, n_m = grid.get("minus", [-1.0, 3.0, 401])
    est_p = np.linspace(lo_p, hi_p, int(n_p))
    est_m = np.linspace(lo_m, hi_m, int(n_m))
    summary = {"alpha": alpha, "divergent_ports": []}
    for port in "+-":
        try:
            analytic.weak_value(1, port, cfg)
        except DivergentWeakValueError:
            summary["divergent_ports"].append(port)
    rows = []
    surface = np.empty((len(est_p), len(est_m)))
    for i, ep in enumerate(est_p):
        for j, em in enumerate(est_m):
            e2 = analytic.ozawa_error(alpha, analytic.EstimateAssignment(ep, em), cfg)
            surface[i, j] = e2
            rows.append((repr(float(ep)), repr(float(em)), repr(e2)))
    i, j = np.unravel_index(np.argmin(surface), surface.shape)
    summary["grid_minimum"] = {"est_plus": float(est_p[i]), "est_minus": float(est_m[j]), "eps2": float(surface[i, j])}
    common = np.array(
        [analytic.ozawa_error(alpha, analytic.EstimateAssignment(e, e), cfg) for e in est_p]
    )
    k = int(np.argmin(common))
    summary["common_estimate_minimum"] = {"estimate": float(est_p[k]), "eps2": float(common[k])}
    if not summary["divergent_ports"]:
        summary["weak_values"] = {
            "est_plus": analytic.weak_value(1, "+", cfg).value.real,
            "est_minus": analytic.weak_value(1, "-", cfg).value.real,
        }
        summary["path_uncertainty_p1p2"] = cfg.p1 * cfg.p2
    summary["max_sigma_x_at_grid_minimum"] = analytic.max_sigma_x_from_error(alpha, float(surface[i, j]))
    outs = [
        _write(out_dir, "ozawa.csv", _csv(("est_plus", "est_minus", "eps2"), rows)),
        _write(out_dir, "ozawa.json", json.dumps(summary, indent=2) + "\n"),
    ]
    _write_manifest(out_dir, "ozawa", data, seed, {"a1": cfg.a1, "a2": cfg.a2, "chi": cfg.chi, "alpha": alpha}, outs)
    print(json.dumps(summary, indent=2))
    return 0


# --- verify -----------------------------------------------------------------------


def cmd_verify(seed: int, out_dir: Path, only=None) -> int:
    results = acceptance.run_all(seed, only)
    for r in results:
        print(r.line())
    report = {
        "seed": seed,
        "tool_version": __version__,
        "passed": all(r.passed and r.runtime_ok for r in results),
        "criteria": [r.to_dict() for r in results],
    }
    _write(out_dir, "verify.json", json.dumps(report, indent=2) + "\n")
    return 0 if report["passed"] else 1


# --- entry point ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed (default: config value or %d)" % DEFAULT_SEED)
    common.add_argument("--out-dir", type=Path, help="output directory (default: out/<command>)")
    common.add_argument("--config", type=Path, help="JSON config file or run manifest")

    parser = argparse.ArgumentParser(prog="pathpresence", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    beam = argparse.ArgumentParser(add_help=False)
    beam.add_argument("--a1", type=float)
    beam.add_argument("--a2", type=float)
    beam.add_argument("--chi", help="interferometer phase, e.g. 'pi'")

    sim = argparse.ArgumentParser(add_help=False)
    sim.add_argument("--alpha", help="coupling angle, e.g. 'pi/16'")
    sim.add_argument("--shots", type=int, help="shots per compensation setting")

    sub.add_parser("table", parents=[common, beam], help="path-presence tables for both contexts")
    fr = sub.add_parser("fringe", parents=[common, beam, sim], help="simulate and fit one compensation fringe")
    fr.add_argument("--context", choices=["whichway", "interference"])
    fr.add_argument("--port", choices=["+", "-"], dest="selected_port")
    fr.add_argument("--blocked-path", type=int, choices=[1, 2])
    sub.add_parser("presence-scan", parents=[common, beam, sim], help="beta0/alpha versus alpha")
    sub.add_parser("ozawa", parents=[common, beam, sim], help="measurement-error landscape")
    ver = sub.add_parser("verify", parents=[common], help="run the acceptance criteria")
    ver.add_argument("--only", type=lambda s: [int(x) for x in s.split(",")], help="comma-separated criteria")
    return parser


def _overrides(args, data: dict) -> dict:
    data = dict(data)
    if args.a1 is not None or args.a2 is not None:
        if args.a1 is None or args.a2 is None:
            raise cfgmod.ConfigError("--a1 and --a2 must be given together")
        data["beam"] = {"a1": args.a1, "a2": args.a2}
    for key in ("chi", "alpha", "shots", "context", "selected_port", "blocked_path"):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    return data


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    out_dir = args.out_dir or Path("out") / args.command
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        if args.command == "verify":
            return cmd_verify(args.seed if args.seed is not None else DEFAULT_SEED, out_dir, args.only)
        data, _ = cfgmod.load(args.config) if args.config else ({}, "")
        data = cfgmod.validate(_overrides(args, data))
        seed = args.seed if args.seed is not None else int(data.get("seed", DEFAULT_SEED))
        data.pop("seed", None)
        handler = {
            "table": cmd_table,
            "fringe": cmd_fringe,
            "presence-scan": cmd_presence_scan,
            "ozawa": cmd_ozawa,
        }[args.command]
        return handler(data, seed, out_dir)
    except (cfgmod.ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
