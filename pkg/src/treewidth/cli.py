"""Command-line front end: ``treewidth <command> [options]``.

Exit codes: 0 success, 2 mesh validation failure, 3 infeasible search,
64 usage error. Every option can also come from ``--config FILE`` holding
``key = value`` lines (keys are option names without dashes, ``-`` or
``_`` both accepted); options on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .builder import VARIANTS, BuildConfig, build
from .certificate import (
    area_gap_bound,
    calibrate,
    certify_cut,
    decompose_cycle,
    embed_tree,
    open_disc,
    paper_length_bound,
    sample_disc_arcs,
    threshold_E,
)
from .cuts import CyclePath, cut_from_partition, exact_balanced_cut, find_balanced_cut
from .errors import InfeasibleError, TreewidthError, ValidationError
from .lemma import verify_lemma
from .mesh import dumps, load, validate_mesh
from .metric import diameter
from .subdivide import subdivide_half

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_USAGE = 0, 2, 3, 64

SWEEP_HEADER = [
    "h", "variant", "k_or_side", "r", "n_vertices", "diameter", "best_cut_length",
    "balance_dev", "m_l", "m_s", "paper_bound_l0", "seconds", "seed",
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_heights(text: str) -> list[int]:
    """``3``, ``1..3`` or ``1,2,5``."""
    text = str(text).strip()
    try:
        if ".." in text:
            a, b = text.split("..")
            hs = list(range(int(a), int(b) + 1))
        else:
            hs = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad height range {text!r}") from None
    if not hs:
        raise UsageError(f"empty height range {text!r}")
    return hs


def read_config(path: str) -> dict[str, str]:
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected key = value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


# --------------------------------------------------------------------------
# argument definitions


def _mesh_options(p, heights: bool = False):
    p.add_argument("--variant", choices=VARIANTS, default="hyperbolic")
    if heights:
        p.add_argument("--h", default="1..3", help="heights: 3, 1..3 or 1,2,5")
    else:
        p.add_argument("--h", type=int, default=1)
    p.add_argument("--K", type=float, default=None, help="curvature scale (hyperbolic)")
    p.add_argument("--side", type=float, default=0.5, help="triangle side (flat_cone)")
    p.add_argument("--r", type=int, default=4, help="resolution R")
    p.add_argument("--genus", type=int, default=2, help="genus (genus_g)")
    p.add_argument("--normalize", action="store_true", help="scale to graph diameter 1")


def _mesh_source(p):
    p.add_argument("mesh", nargs="?", help="SMESH file; built from the mesh options if omitted")
    _mesh_options(p)


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="treewidth", description="Width experiments on glued surfaces.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    def command(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="key = value file mirroring the options")
        p.add_argument("--out", help="output file (default stdout)")
        return p

    p = command("build", "emit an SMESH mesh")
    _mesh_options(p)

    p = command("validate", "check closed-surface invariants")
    _mesh_source(p)

    p = command("diameter", "exact graph diameter")
    _mesh_source(p)

    p = command("cut", "balanced-cut search with certificate")
    _mesh_source(p)
    p.add_argument("--balance-tol", type=float, default=0.01, help="fraction of the total area")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--exact", action="store_true", help="exhaustive search (small meshes)")

    p = command("certify", "decompose a cycle and evaluate the lower-bound inequalities")
    _mesh_source(p)
    p.add_argument("--cut", help="cut JSON (uses faces_A)")
    p.add_argument("--edges", help="comma-separated closed edge walk")

    p = command("lemma", "power-gap lemma sweep as CSV")
    p.add_argument("--p", type=int, default=3)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--m-max", type=int, default=None)
    p.add_argument("--h-extra", type=int, default=1)
    p.add_argument("--positive", action="store_true", help="exponents >= 1 only")

    p = command("subdivide", "area-halving curve as JSON")
    _mesh_source(p)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)

    p = command("sweep", "cut length and diameter over heights (CSV + SVG)")
    _mesh_options(p, heights=True)
    p.set_defaults(r=8)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--balance-tol", type=float, default=0.01)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--svg", help="SVG plot path")
    p.add_argument("--reproducible", action="store_true",
                   help="zero the seconds column and drop the SVG timestamp")

    p = command("calibrate", "fit slack_per_arc and C1 from sweep cuts")
    _mesh_options(p, heights=True)
    p.set_defaults(r=8)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--restarts", type=int, default=16)
    p.add_argument("--balance-tol", type=float, default=0.01)
    p.add_argument("--arcs", type=int, default=60)
    return parser


def parse_args(argv) -> argparse.Namespace:
    parser = make_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError(parser.format_usage().strip())
    if getattr(args, "config", None):
        # re-parse with file values as defaults so explicit flags win
        values = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sub._actions}
        defaults = {}
        for k, v in values.items():
            if k not in known or k in ("help", "config"):
                raise UsageError(f"unknown config key {k!r}")
            act = known[k]
            if isinstance(act, argparse._StoreTrueAction):
                defaults[k] = v.lower() in ("1", "true", "yes", "on")
            elif act.type is not None:
                try:
                    defaults[k] = act.type(v)
                except ValueError:
                    raise UsageError(f"bad value for {k}: {v!r}") from None
            else:
                defaults[k] = v
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


# --------------------------------------------------------------------------
# helpers


def _config_for(args, h: int | None = None) -> BuildConfig:
    return BuildConfig(
        variant=args.variant, h=h if h is not None else int(args.h), K=args.K, side=args.side,
        R=args.r, genus=args.genus, normalize_diameter=args.normalize,
    )


def _mesh_from(args):
    if getattr(args, "mesh", None):
        return load(args.mesh)
    return build(_config_for(args))


def _emit(args, text: str):
    if not text.endswith("\n"):
        text += "\n"
    if getattr(args, "out", None):
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1)


def _tagged(mesh) -> bool:
    return any(t and t.startswith("tree:") for t in mesh.tags)


def _k_or_side(mesh) -> float:
    v = mesh.meta.get("K", mesh.meta.get("side"))
    return float(v) if v is not None else float("nan")


def _run_cut(mesh, tol_fraction, seed, restarts, budget):
    tol = tol_fraction * mesh.total_area
    cut = find_balanced_cut(mesh, balance_tol=tol, budget=budget, seed=seed, restarts=restarts)
    if _tagged(mesh):
        certify_cut(mesh, cut)
    return cut


# --------------------------------------------------------------------------
# commands


def cmd_build(args):
    _emit(args, dumps(build(_config_for(args))))
    return EXIT_OK


def cmd_validate(args):
    report = validate_mesh(_mesh_from(args))
    _emit(args, report.summary())
    return EXIT_OK if report.valid else EXIT_INVALID


def cmd_diameter(args):
    mesh = _mesh_from(args)
    s = diameter(mesh)
    _emit(args, _dumps({"diameter": s.diameter, "witness": list(s.witness), "approximate": s.approximate,
                        "n_vertices": mesh.n_vertices}))
    return EXIT_OK


def cmd_cut(args):
    mesh = _mesh_from(args)
    tol = args.balance_tol * mesh.total_area
    if args.exact:
        cut = exact_balanced_cut(mesh, balance_tol=tol)
        if _tagged(mesh):
            certify_cut(mesh, cut)
    else:
        cut = _run_cut(mesh, args.balance_tol, args.seed, args.restarts, args.budget)
    out = cut.to_dict(mesh)
    out["balance_tol"] = tol
    out["restarts"] = None if args.exact else args.restarts
    _emit(args, _dumps(out))
    return EXIT_OK


def cmd_certify(args):
    mesh = _mesh_from(args)
    if args.cut:
        with open(args.cut) as fh:
            faces = json.load(fh)["faces_A"]
        cycles = cut_from_partition(mesh, faces).cycles
    elif args.edges:
        cycles = [CyclePath.from_edges(mesh, [int(x) for x in args.edges.split(",")])]
    else:
        raise UsageError("certify needs --cut or --edges")
    emb = embed_tree(mesh)
    h = emb.tree.height
    rows = []
    m_l = m_s = 0
    for c in cycles:
        d = decompose_cycle(mesh, emb.tree, c, emb)
        m_l, m_s = m_l + d.m_l, m_s + d.m_s
        rows.append({"length": c.length, "m_l": d.m_l, "m_s": d.m_s, "L_s": d.L_s,
                     "arcs": [[a.kind, a.length] for a in d.arcs]})
    length = math.fsum(c.length for c in cycles)
    out = {
        "h": h,
        "length": length,
        "m_l": m_l,
        "m_s": m_s,
        "E": threshold_E(mesh),
        "eq3": length >= 0.75 * (m_l + m_s),
        "paper_length_bound": paper_length_bound(h),
        "area_gap_bound": {str(m): area_gap_bound(h, m, mesh.total_area) for m in range(1, h)},
        "cycles": rows,
    }
    _emit(args, _dumps(out))
    return EXIT_OK


def cmd_lemma(args):
    sweep = verify_lemma(args.p, args.n_max, args.m_max, args.positive, args.h_extra)
    buf = io.StringIO()
    cols = ["p", "N", "m", "min", "bound", "holds", "attained", "witness"]
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for row in sweep.rows():
        row = dict(row)
        row["holds"] = str(row["holds"]).lower()
        row["attained"] = str(row["attained"]).lower()
        w.writerow(row)
    _emit(args, buf.getvalue())
    return EXIT_OK if sweep.all_hold else EXIT_INFEASIBLE


def cmd_subdivide(args):
    mesh = _mesh_from(args)
    res = subdivide_half(mesh, args.epsilon, seed=args.seed)
    _emit(args, _dumps(res.to_dict()))
    return EXIT_OK


def sweep_rows(args, heights) -> list[dict]:
    rows = []
    for h in heights:
        t0 = time.perf_counter()
        mesh = build(_config_for(args, h))
        d = diameter(mesh).diameter
        cut = _run_cut(mesh, args.balance_tol, args.seed, args.restarts, args.budget)
        secs = time.perf_counter() - t0
        rows.append({
            "h": h,
            "variant": args.variant,
            "k_or_side": _k_or_side(mesh),
            "r": args.r,
            "n_vertices": mesh.n_vertices,
            "diameter": d,
            "best_cut_length": cut.length,
            "balance_dev": cut.balance_dev,
            "m_l": cut.certificate.get("m_l", ""),
            "m_s": cut.certificate.get("m_s", ""),
            "paper_bound_l0": paper_length_bound(h),
            "seconds": 0.0 if args.reproducible else round(secs, 3),
            "seed": args.seed,
        })
    rows.sort(key=lambda r: (r["h"], r["seed"]))
    return rows


def format_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_HEADER, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def _panel(x0, y0, w, h, xs, ys, title, ylabel):
    lo, hi = min(ys), max(ys)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.1 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    xl, xh = min(xs) - 0.5, max(xs) + 0.5

    def px(x):
        return x0 + (x - xl) / (xh - xl) * w

    def py(y):
        return y0 + h - (y - lo) / (hi - lo) * h

    pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
    out = [
        f'<rect x="{x0}" y="{y0}" width="{w}" height="{h}" fill="none" stroke="#444"/>',
        f'<text x="{x0 + w / 2}" y="{y0 - 8}" text-anchor="middle" font-size="13">{title}</text>',
        f'<text x="{x0 - 42}" y="{y0 + h / 2}" font-size="11" transform="rotate(-90 {x0 - 42} {y0 + h / 2})"'
        f' text-anchor="middle">{ylabel}</text>',
        f'<text x="{x0 + w / 2}" y="{y0 + h + 32}" text-anchor="middle" font-size="11">h</text>',
        f'<polyline points="{pts}" fill="none" stroke="#1f5fa8" stroke-width="2"/>',
    ]
    for x, y in zip(xs, ys):
        out.append(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="3.5" fill="#1f5fa8"/>')
        out.append(f'<text x="{px(x):.2f}" y="{y0 + h + 16}" text-anchor="middle" font-size="10">{x}</text>')
    for k in range(5):
        y = lo + (hi - lo) * k / 4
        out.append(f'<text x="{x0 - 5}" y="{py(y) + 3:.2f}" text-anchor="end" font-size="10">{y:.3g}</text>')
    return out


def render_svg(rows, reproducible: bool = False) -> str:
    xs = [r["h"] for r in rows]
    parts = ['<svg xmlns="http://www.w3.org/2000/svg" width="720" height="320" font-family="sans-serif">']
    if not reproducible:
        parts.append(f"<!-- generated {datetime.now(timezone.utc).isoformat(timespec='seconds')} -->")
    parts += _panel(70, 40, 260, 220, xs, [r["best_cut_length"] for r in rows], "best balanced cut", "length")
    parts += _panel(430, 40, 260, 220, xs, [r["diameter"] for r in rows], "graph diameter", "diameter")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_sweep(args):
    rows = sweep_rows(args, parse_heights(args.h))
    _emit(args, format_csv(rows))
    if args.out:
        # the CSV header is fixed, so run parameters go to a sidecar
        params = {k: getattr(args, k) for k in ("variant", "h", "K", "side", "r", "seed", "restarts",
                                                 "balance_tol", "budget", "svg", "out")}
        with open(args.out + ".params.json", "w") as fh:
            fh.write(_dumps(params) + "\n")
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(render_svg(rows, args.reproducible))
    return EXIT_OK


def cmd_calibrate(args):
    obs = []
    rng = np.random.default_rng(args.seed)
    for h in parse_heights(args.h):
        mesh = build(_config_for(args, h))
        cut = _run_cut(mesh, args.balance_tol, args.seed, args.restarts, None)
        arcs = sample_disc_arcs(open_disc(mesh), rng, args.arcs)
        obs.append((mesh, cut, arcs))
    cal = calibrate(obs)
    _emit(args, _dumps({"slack_per_arc": cal.slack_per_arc, "C1": cal.C1, "arcs": cal.arcs,
                        "cuts": cal.cuts, "seed": args.seed, "heights": args.h, "r": args.r}))
    return EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "validate": cmd_validate,
    "diameter": cmd_diameter,
    "cut": cmd_cut,
    "certify": cmd_certify,
    "lemma": cmd_lemma,
    "subdivide": cmd_subdivide,
    "sweep": cmd_sweep,
    "calibrate": cmd_calibrate,
}


def run_command(argv) -> int:
    try:
        args = parse_args(list(argv))
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ValidationError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (TreewidthError, OSError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
