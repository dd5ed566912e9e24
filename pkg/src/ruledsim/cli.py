"""Command-line front end.

Subcommands: analyze, compare, synthesize, mesh, reconstruct, demo.
Exit codes: 0 success (or: surfaces similar), 1 negative verdict or demo
mismatch, 2 usage, parse, or regularity errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import OdeInapplicableError, RuledSimError
from .expr import parse_expression
from .fileio import (fmt7, load_surface_file, tessellate, write_frame_csv,
                     write_obj)
from .frame import (frenet_frame, integrate_frame_ode, phi_samples,
                    ruling_ode_residual, structure_function, tangent_angle)
from .presets import get_preset, preset_names
from .similarity import (check_similar_surfaces, report_text,
                         synthesize_similar, write_transformation_csv)
from .surface import RuledSurface


def _load(arg: str, samples: int | None) -> RuledSurface:
    if arg in preset_names():
        return get_preset(arg, samples=samples)
    path = Path(arg)
    if not path.exists():
        raise RuledSimError(f"no such surface: {arg!r} is neither a preset "
                            f"({', '.join(preset_names())}) nor a file")
    return load_surface_file(path, samples_override=samples)


def _parse_anchor(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise RuledSimError(f"anchor must be three comma-separated numbers, got {text!r}")
    try:
        return tuple(float(p) for p in parts)  # type: ignore[return-value]
    except ValueError:
        raise RuledSimError(f"bad anchor component in {text!r}") from None


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def cmd_analyze(args) -> int:
    surface = _load(args.surface, args.samples)
    prefix = Path(args.output) if args.output else Path(surface.name or "surface")
    prefix.parent.mkdir(parents=True, exist_ok=True)
    cls = surface.classify()
    lines = [f"surface = {surface.name}", f"kind = {cls.kind}"]

    if cls.kind == "cylindrical":
        lines.append("striction undefined (cylindrical surface: dq = 0)")
        summary = "\n".join(lines) + "\n"
        (prefix.parent / (prefix.name + "_summary.txt")).write_text(summary)
        sys.stdout.write(summary)
        if args.figures:
            from .plots import save_surface_figure
            save_surface_figure(surface, prefix.parent / (prefix.name + "_surface.png"))
        return 0

    lines.append(f"conoid = {str(cls.conoid).lower()}")
    lines.append(f"max_abs_d = {fmt7(cls.max_abs_d)}")
    st = surface.striction()
    F = frenet_frame(surface)
    torsal = surface.torsal_rulings()
    lines.append(f"striction_length = {fmt7(F.total_s)}")
    lines.append(f"total_phi = {fmt7(F.total_phi)}")
    valid = F.valid()
    lines.append(f"k1 = [{fmt7(np.min(F.k1[valid]))}, {fmt7(np.max(F.k1[valid]))}]")
    if valid.all():
        lines.append(f"k2 = [{fmt7(np.min(F.k2))}, {fmt7(np.max(F.k2))}]")
    for lo, hi in F.gaps:
        lines.append(f"frame_gap = [{fmt7(lo)}, {fmt7(hi)}] (k1 below threshold)")
    if torsal and len(torsal) == len(surface.grid()):
        lines.append("torsal_rulings = all sampled u (developable)")
    elif torsal:
        lines.append("torsal_rulings = " + " ".join(fmt7(u) for u in torsal))
    else:
        lines.append("torsal_rulings = none")
    theta = None
    if valid.all():
        theta = tangent_angle(F)
        lines.append(f"theta = [{fmt7(np.min(theta.theta))}, {fmt7(np.max(theta.theta))}]")

    d_values = surface.distribution_parameter(surface.grid())
    name = prefix.name
    _write_csv(prefix.parent / f"{name}_striction.csv", "u,s,cx,cy,cz,v0",
               np.column_stack([st.u, F.s, st.points, st.v0]))
    _write_csv(prefix.parent / f"{name}_dparam.csv", "u,d",
               np.column_stack([st.u, d_values]))
    write_frame_csv(prefix.parent / f"{name}_frame.csv", F)
    lines.append(f"files = {name}_striction.csv {name}_dparam.csv {name}_frame.csv")
    summary = "\n".join(lines) + "\n"
    (prefix.parent / f"{name}_summary.txt").write_text(summary)
    sys.stdout.write(summary)
    if args.figures:
        from .plots import save_profile_figure, save_surface_figure
        save_surface_figure(surface, prefix.parent / f"{name}_surface.png")
        save_profile_figure(F, theta, d_values, prefix.parent / f"{name}_profiles.png")
    return 0


def _write_csv(path: Path, header: str, rows: np.ndarray) -> None:
    from .fileio import fmt17
    lines = [header]
    for row in rows:
        lines.append(",".join(fmt17(x) for x in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------

def cmd_compare(args) -> int:
    a = _load(args.surface_a, args.samples)
    b = _load(args.surface_b, args.samples)
    mode = "up_to_rotation" if args.mode == "rotation" else "exact"
    report = check_similar_surfaces(a, b, mode=mode, tol=args.tol,
                                    offset_search=args.offset_search)
    text = report_text(report)
    sys.stdout.write(text)
    if args.output:
        prefix = Path(args.output)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        (prefix.parent / f"{prefix.name}_report.txt").write_text(text)
        if report.transformation is not None:
            write_transformation_csv(prefix.parent / f"{prefix.name}_lambda.csv", report)
        if args.figures and not (a.is_cylindrical() or b.is_cylindrical()):
            from .frame import frenet_frame as _ff
            from .plots import save_comparison_figure
            sf_a = structure_function(_ff(a))
            sf_b = structure_function(_ff(b))
            save_comparison_figure(sf_a, sf_b, report,
                                   prefix.parent / f"{prefix.name}_compare.png")
    return 0 if report.verdict else 1


# ---------------------------------------------------------------------------
# synthesize
# ---------------------------------------------------------------------------

def cmd_synthesize(args) -> int:
    b = _load(args.surface, args.samples)
    lam = parse_expression(args.lam)
    theta = parse_expression(args.theta)
    anchor = _parse_anchor(args.anchor)
    out = Path(args.output or f"{b.name or 'surface'}_synth.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    result = synthesize_similar(b, lam, theta, anchor=anchor,
                                samples=args.out_samples)
    result.write_csv(out)
    sys.stdout.write(f"wrote {out} ({len(result.s)} samples, "
                     f"arc length {fmt7(result.s[-1])})\n")
    return 0


# ---------------------------------------------------------------------------
# mesh
# ---------------------------------------------------------------------------

def cmd_mesh(args) -> int:
    surface = _load(args.surface, args.samples)
    if args.nu < 2 or args.nv < 2:
        raise RuledSimError("nu and nv must both be >= 2")
    verts, tris = tessellate(surface, args.v_min, args.v_max, args.nu, args.nv)
    out = Path(args.output or f"{surface.name or 'surface'}.obj")
    out.parent.mkdir(parents=True, exist_ok=True)
    write_obj(out, verts, tris)
    sys.stdout.write(f"wrote {out} ({len(verts)} vertices, {len(tris)} triangles)\n")
    return 0


# ---------------------------------------------------------------------------
# reconstruct
# ---------------------------------------------------------------------------

def cmd_reconstruct(args) -> int:
    surface = _load(args.surface, args.samples)
    F = frenet_frame(surface)
    sf = structure_function(F, args.resolution)
    initial = np.array([F.q[0], F.h[0], F.a[0]])
    traj = integrate_frame_ode(sf, initial, (0.0, sf.total),
                               output_nodes=args.resolution)
    phi, q_direct, _ = phi_samples(F, args.resolution)
    dev = float(np.max(np.linalg.norm(traj.q - q_direct, axis=-1)))
    sys.stdout.write(f"ruling_deviation_sup = {fmt7(dev)}\n")
    try:
        residual = ruling_ode_residual(F, resolution=args.resolution)
        sys.stdout.write(f"third_order_residual = {fmt7(residual)}\n")
    except OdeInapplicableError as e:
        sys.stdout.write(f"third_order_residual = inapplicable ({e})\n")
    return 0


# ---------------------------------------------------------------------------
# demo: full reproduction of the worked helicoid example
# ---------------------------------------------------------------------------

def cmd_demo(args) -> int:
    out_dir = Path(args.output or "demo_output")
    out_dir.mkdir(parents=True, exist_ok=True)
    tol = 1e-6
    beta = get_preset("helicoid")
    alpha = get_preset("helix_conoid")
    F_beta = frenet_frame(beta)
    F_alpha = frenet_frame(alpha)

    checks: list[tuple[str, float]] = []

    def scalar(name: str, measured: float, expected: float) -> None:
        checks.append((name, abs(measured - expected)))
        sys.stdout.write(f"{name} = {measured:.7f}\n")

    scalar("k1_beta", float(np.max(F_beta.k1)), 1.0)
    scalar("k2_beta", float(np.max(np.abs(F_beta.k2))), 0.0)
    scalar("k1_alpha", float(np.max(F_alpha.k1)), 1.0 / math.sqrt(2.0))
    scalar("k2_alpha", float(np.max(np.abs(F_alpha.k2))), 0.0)

    report = check_similar_surfaces(alpha, beta, mode="exact")
    lam = float(np.median(report.transformation.lam))
    scalar("lambda", lam, math.sqrt(2.0))
    checks.append(("lambda_spread",
                   float(np.ptp(report.transformation.lam))))
    checks.append(("similarity_verdict", 0.0 if report.verdict else 1.0))

    # closed-form frame fields of both surfaces
    s_b = F_beta.s
    beta_closed = {
        "q": np.stack([np.cos(s_b), np.sin(s_b), np.zeros_like(s_b)], axis=-1),
        "h": np.stack([-np.sin(s_b), np.cos(s_b), np.zeros_like(s_b)], axis=-1),
        "a": np.stack([np.zeros_like(s_b), np.zeros_like(s_b), np.ones_like(s_b)], axis=-1),
    }
    s_a = F_alpha.s
    w = s_a / math.sqrt(2.0)
    alpha_closed = {
        "q": np.stack([np.cos(w), np.sin(w), np.zeros_like(w)], axis=-1),
        "h": np.stack([-np.sin(w), np.cos(w), np.zeros_like(w)], axis=-1),
        "a": np.stack([np.zeros_like(w), np.zeros_like(w), np.ones_like(w)], axis=-1),
    }
    for label, F, closed in (("beta", F_beta, beta_closed),
                             ("alpha", F_alpha, alpha_closed)):
        for vec in ("q", "h", "a"):
            dev = float(np.max(np.linalg.norm(getattr(F, vec) - closed[vec], axis=-1)))
            checks.append((f"{vec}_{label}_sup", dev))
    sys.stdout.write(f"frame_deviation_sup = "
                     f"{fmt7(max(v for n, v in checks if n.endswith('_sup')))}\n")

    verts_b, tris_b = tessellate(beta, -2.0, 2.0, 64, 16)
    write_obj(out_dir / "helicoid.obj", verts_b, tris_b)
    verts_a, tris_a = tessellate(alpha, -2.0, 2.0, 64, 16)
    write_obj(out_dir / "helix_conoid.obj", verts_a, tris_a)
    (out_dir / "comparison_report.txt").write_text(report_text(report))
    write_transformation_csv(out_dir / "lambda.csv", report)
    if args.figures:
        from .plots import save_comparison_figure, save_surface_figure
        save_surface_figure(beta, out_dir / "helicoid.png", v_span=(-2.0, 2.0))
        save_surface_figure(alpha, out_dir / "helix_conoid.png", v_span=(-2.0, 2.0))
        save_comparison_figure(structure_function(F_alpha), structure_function(F_beta),
                               report, out_dir / "comparison.png")
    sys.stdout.write(f"outputs written to {out_dir}\n")

    failing = [(n, v) for n, v in checks if v > tol]
    if failing:
        name, value = failing[0]
        sys.stdout.write(f"MISMATCH: {name} deviates by {fmt7(value)} (> {tol:g})\n")
        return 1
    sys.stdout.write("demo checks passed\n")
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ruledsim",
        description="Ruled-surface invariants and similarity analysis. "
                    "Surfaces are preset names, definition files, or sampled CSVs.")
    parser.add_argument("--version", action="version", version=f"ruledsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, samples_default=None):
        p.add_argument("--samples", type=int, default=samples_default,
                       help="override the surface sample count")

    p = sub.add_parser("analyze", help="invariants, striction data, frame CSVs")
    p.add_argument("surface")
    p.add_argument("-o", "--output", help="output path prefix")
    p.add_argument("--no-figures", dest="figures", action="store_false")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("compare", help="similarity verdict for two surfaces")
    p.add_argument("surface_a")
    p.add_argument("surface_b")
    p.add_argument("--mode", choices=("exact", "rotation"), default="exact")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--offset-search", action="store_true",
                   help="grid-search the phi anchor on the longer surface")
    p.add_argument("-o", "--output", help="output path prefix for report/CSV")
    p.add_argument("--no-figures", dest="figures", action="store_false")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("synthesize", help="build a similar surface from "
                                          "lambda/theta profiles")
    p.add_argument("surface")
    p.add_argument("--lam", required=True, help="lambda expression in u (= s_b)")
    p.add_argument("--theta", required=True, help="theta expression in u (= s_a)")
    p.add_argument("--anchor", default="0,0,0", help="start point x,y,z")
    p.add_argument("--out-samples", type=int, default=2048,
                   help="rows in the emitted CSV")
    p.add_argument("-o", "--output", help="output CSV path")
    common(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("mesh", help="tessellate to a Wavefront OBJ")
    p.add_argument("surface")
    p.add_argument("--v-min", type=float, default=-1.0)
    p.add_argument("--v-max", type=float, default=1.0)
    p.add_argument("--nu", type=int, default=64)
    p.add_argument("--nv", type=int, default=16)
    p.add_argument("-o", "--output", help="output OBJ path")
    common(p)
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("reconstruct", help="round-trip the rulings through "
                                           "the frame ODE")
    p.add_argument("surface")
    p.add_argument("--resolution", type=int, default=512)
    common(p)
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("demo", help="reproduce the built-in helicoid example")
    p.add_argument("-o", "--output", help="output directory")
    p.add_argument("--no-figures", dest="figures", action="store_false")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RuledSimError as e:
        sys.stderr.write(f"error: {e}\n")
        return 2
    except OSError as e:
        sys.stderr.write(f"error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
