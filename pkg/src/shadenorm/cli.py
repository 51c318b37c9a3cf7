"""``shadenorm`` command line.

Exit codes: 0 success, 1 data/domain failure (missing or malformed files,
unmet coverage), 2 usage error (bad flags or parameters). Human summaries
go to stderr; stdout carries machine output (report paths, or the report
itself when no output path is given).
"""
import argparse
import sys
from pathlib import Path

from . import io as sio
from .core import RingSpec, gen_ring, synth_sphere
from .coverage import DEFAULT_MIN_Z, verify_coverage
from .errors import ParameterError, ShadeNormError
from .metrics import (evaluate_normals, extract_boundary, shading_scores, tv_normal_map,
                      tv_sequence)
from .render import render_shading
from .robustness import DEFAULT_SIGMAS, run_robustness
from .solver import POSITIVE_THRESHOLD, solve_masked, solve_naive


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _info(msg):
    print(msg, file=sys.stderr)


def _emit(path, text):
    """Write ``text`` to ``path`` and print the path, or print ``text`` when path is None."""
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")
        print(path)


def _floats(s):
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}")


def _ints(s):
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}")


def _ring_from_args(a):
    try:
        return gen_ring(RingSpec(a.count, a.elevation_deg, a.phase_deg))
    except ParameterError as exc:
        raise UsageError(str(exc))


# -- subcommands ----------------------------------------------------------------

def cmd_fixture_sphere(a):
    try:
        nm = synth_sphere(a.size)
    except ParameterError as exc:
        raise UsageError(str(exc))
    p, mp = sio.write_normal_map(a.output, nm, a.mask)
    _info(f"sphere {a.size}x{a.size}: {int(nm.mask.sum())} object pixels")
    print(p)
    print(mp)


def cmd_lightpath_gen(a):
    lp = _ring_from_args(a)
    text = sio.dumps(sio.lightpath_to_dict(lp))
    _info(f"ring: {a.count} lights at {a.elevation_deg:g} deg elevation, phase {a.phase_deg:g} deg")
    _emit(a.output, text)


def cmd_render(a):
    nm = sio.read_normal_map(a.normals, a.mask)
    lp = sio.read_lightpath(a.lights)
    seq = render_shading(nm, lp)
    man = sio.write_sequence(a.output, seq, encoding=a.encoding, fmt=a.format)
    _info(f"rendered {len(seq)} frames of {seq.shape[1]}x{seq.shape[0]}")
    print(man)


def cmd_solve(a):
    seq = sio.read_sequence(a.shading)
    res = solve_naive(seq) if a.naive else solve_masked(seq, a.threshold)
    out = Path(a.output)
    p, mp = sio.write_normal_map(out, res.normals)
    summary = {"solver": "naive" if a.naive else "masked",
               "positive_threshold": None if a.naive else a.threshold,
               "status": {k: v for k, v in res.stats.items() if k != "mean_residual"},
               "mean_residual": res.stats["mean_residual"]}
    spath = out.with_name(out.stem + "_status.json")
    spath.write_text(sio.dumps(summary), encoding="utf-8")
    st = res.stats
    _info(f"solved {st['masked_in']} pixels: ok={st['ok']} underdetermined={st['underdetermined']} "
          f"rank_deficient={st['rank_deficient']} degenerate_norm={st['degenerate_norm']}")
    for x in (p, mp, spath):
        print(x)


def cmd_coverage(a):
    lp = sio.read_lightpath(a.lights)
    try:
        rep = verify_coverage(lp, a.m, a.min_z, a.samples, a.seed)
    except ParameterError as exc:
        raise UsageError(str(exc))
    _emit(a.output, sio.dumps(sio.coverage_to_dict(rep)))
    verdict = "meets" if rep.meets_requirement else "FAILS"
    _info(f"minimum positive shadings {rep.min_positive_count} (grid {rep.grid_min}, "
          f"monte carlo {rep.mc_min}); {verdict} m={a.m}")
    return 0 if rep.meets_requirement else 1


def cmd_eval(a):
    est = sio.read_normal_map(a.est, a.est_mask)
    gt = sio.read_normal_map(a.gt, a.gt_mask)
    boundary = extract_boundary(gt, a.sne_thresh, a.sne_dilate) if a.sne else None
    rep = evaluate_normals(est, gt, boundary)
    if a.tv:
        lp = sio.read_lightpath(a.lights) if a.lights else gen_ring(RingSpec())
        t_norm = tv_normal_map(gt)
        t_shad = tv_sequence(render_shading(gt, lp))
        rep.tv = {"normal_map": t_norm, "shading_sequence": t_shad, "ratio": t_shad / t_norm}
    doc = sio.metrics_to_dict(rep)
    if a.json:
        Path(a.json).write_text(sio.dumps(doc), encoding="utf-8")
        print(a.json)
    if a.csv_row:
        sys.stdout.write(sio.metrics_csv_row(rep, header=a.csv_header))
    if not a.json and not a.csv_row:
        sys.stdout.write(sio.dumps(doc))
    _info(f"MAE {rep.mae_deg:.4f} deg, median {rep.median_deg:.4f} deg over {rep.n_pixels} pixels")


def cmd_perturb(a):
    nm = sio.read_normal_map(a.normals, a.mask)
    lp = sio.read_lightpath(a.lights)
    try:
        rep = run_robustness(nm, lp, a.sigmas, a.frames, a.runs, a.seed)
    except ParameterError as exc:
        raise UsageError(str(exc))
    _emit(a.output, sio.dumps(sio.perturbation_to_dict(rep)))
    if a.csv:
        Path(a.csv).write_text(sio.perturbation_csv(rep), encoding="utf-8")
        print(a.csv)
    _info(sio.perturbation_csv(rep).rstrip())


def cmd_shading_eval(a):
    est = sio.read_sequence(a.est)
    gt = sio.read_sequence(a.gt)
    doc = shading_scores(est, gt)
    _emit(a.output, sio.dumps(doc))
    _info(f"mean PSNR {doc['mean_psnr_db']:.3f} dB, mean SSIM {doc['mean_ssim']:.5f}")


# -- parser ---------------------------------------------------------------------

def build_parser():
    fmt = argparse.ArgumentDefaultsHelpFormatter
    p = _Parser(prog="shadenorm", description=__doc__.splitlines()[0], formatter_class=fmt)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fx = sub.add_parser("fixture", help="emit synthetic fixtures", formatter_class=fmt)
    fxs = fx.add_subparsers(dest="fixture", required=True, parser_class=_Parser)
    sp = fxs.add_parser("sphere", help="orthographic unit sphere normal map", formatter_class=fmt)
    sp.add_argument("--size", type=int, default=256, help="frame width and height in pixels")
    sp.add_argument("-o", "--output", required=True, help="normal map PNG path")
    sp.add_argument("--mask", default=None, help="mask PNG path; <output>_mask.png when omitted")
    sp.set_defaults(func=cmd_fixture_sphere)

    lp = sub.add_parser("lightpath", help="light path tools", formatter_class=fmt)
    lps = lp.add_subparsers(dest="lightpath", required=True, parser_class=_Parser)
    g = lps.add_parser("gen", help="uniform latitude ring of parallel lights", formatter_class=fmt)
    g.add_argument("--count", type=int, default=9, help="number of lights (9 is the default ring)")
    g.add_argument("--elevation-deg", type=float, default=45.0, help="ring latitude in degrees")
    g.add_argument("--phase-deg", type=float, default=0.0, help="azimuth of the first light")
    g.add_argument("-o", "--output", default=None, help="JSON output path (stdout if omitted)")
    g.set_defaults(func=cmd_lightpath_gen)

    r = sub.add_parser("render", help="render a shading sequence", formatter_class=fmt)
    r.add_argument("--normals", required=True, help="16-bit normal map PNG")
    r.add_argument("--mask", default=None, help="mask PNG; <normals>_mask.png when omitted")
    r.add_argument("--lights", required=True, help="light path JSON")
    r.add_argument("--encoding", choices=sio.ENCODINGS, default="unsigned01",
                   help="signed11 stores 2s - 1")
    r.add_argument("--format", choices=("png", "pfm"), default="png", help="frame file format")
    r.add_argument("-o", "--output", required=True, help="output directory")
    r.set_defaults(func=cmd_render)

    s = sub.add_parser("solve", help="recover normals from a shading directory", formatter_class=fmt)
    s.add_argument("--shading", required=True, help="shading directory with manifest.json")
    s.add_argument("-o", "--output", required=True, help="estimated normal map PNG")
    s.add_argument("--naive", action="store_true", help="use every frame, clamped zeros included")
    s.add_argument("--threshold", type=float, default=POSITIVE_THRESHOLD,
                   help="shadings above this value count as valid equations")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("coverage", help="check positive-shading coverage of a light path",
                       formatter_class=fmt)
    c.add_argument("--lights", required=True, help="light path JSON")
    c.add_argument("--m", type=int, default=3, help="required positive shadings per normal")
    c.add_argument("--min-z", type=float, default=DEFAULT_MIN_Z,
                   help="only normals with z above this are checked")
    c.add_argument("--samples", type=int, default=1_000_000, help="Monte Carlo samples (0: grid only)")
    c.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    c.add_argument("-o", "--output", default=None, help="JSON report path (stdout if omitted)")
    c.set_defaults(func=cmd_coverage)

    e = sub.add_parser("eval", help="angular error metrics of a normal map", formatter_class=fmt)
    e.add_argument("--est", required=True, help="estimated normal map PNG")
    e.add_argument("--gt", required=True, help="ground-truth normal map PNG")
    e.add_argument("--est-mask", default=None, help="default: <est>_mask.png")
    e.add_argument("--gt-mask", default=None, help="default: <gt>_mask.png")
    e.add_argument("--sne", action="store_true", help="add boundary (sharp normal) error")
    e.add_argument("--sne-thresh", type=float, default=15.0, help="boundary angle threshold, degrees")
    e.add_argument("--sne-dilate", type=int, default=1, help="boundary dilation, pixels")
    e.add_argument("--tv", action="store_true",
                   help="add total variation of the gt normal map and of its shading sequence")
    e.add_argument("--lights", default=None, help="light path for --tv; 9 lights at 45 deg when omitted")
    e.add_argument("--json", default=None, help="write the report here")
    e.add_argument("--csv-row", action="store_true", help="print a CSV row to stdout")
    e.add_argument("--csv-header", action="store_true", help="precede the CSV row with a header")
    e.set_defaults(func=cmd_eval)

    pt = sub.add_parser("perturb", help="noise robustness study", formatter_class=fmt)
    pt.add_argument("--normals", required=True, help="ground-truth normal map PNG")
    pt.add_argument("--mask", default=None, help="mask PNG; <normals>_mask.png when omitted")
    pt.add_argument("--lights", required=True, help="light path JSON")
    pt.add_argument("--sigmas", type=_floats, default=",".join(f"{s:g}" for s in DEFAULT_SIGMAS),
                    help="noise standard deviations, comma-separated")
    pt.add_argument("--frames", type=_ints, default="1,9",
                    help="numbers of perturbed frames, comma-separated")
    pt.add_argument("--runs", type=int, default=5, help="noise realizations per setting")
    pt.add_argument("--seed", type=int, default=42, help="run r uses seed + r")
    pt.add_argument("-o", "--output", default=None, help="JSON report path")
    pt.add_argument("--csv", default=None, help="also write the sigma table as CSV")
    pt.set_defaults(func=cmd_perturb)

    se = sub.add_parser("shading-eval", help="PSNR and SSIM between shading directories",
                        formatter_class=fmt)
    se.add_argument("--est", required=True, help="estimated shading directory")
    se.add_argument("--gt", required=True, help="ground-truth shading directory")
    se.add_argument("-o", "--output", default=None, help="JSON report path (stdout if omitted)")
    se.set_defaults(func=cmd_shading_eval)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        rc = args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except (ShadeNormError, OSError) as exc:
        print(f"shadenorm: error: {exc}", file=sys.stderr)
        return 1
    return 0 if rc is None else rc


if __name__ == "__main__":
    sys.exit(main())
