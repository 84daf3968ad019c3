"""Wavelet Correlation CLI"""

import argparse
import sys
from functools import partial
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from tqdm import tqdm

from logutils import get_logger, quiet_logging
from src import io_formats
from src.depstats import ASYMPTOTIC, EXACT, MEASURES, PEARSON
from src.dwt1d import NONDECIMATED, ORTHOGONAL, dwt_forward
from src.errors import ManifestError, WavecorrError
from src.filterbank import available_filters, get_filter
from src.multiscale import (
    BIAS_THRESHOLD,
    PARTIAL,
    SEMIPARTIAL,
    Correlogram,
    average_correlogram,
    compare_wavelets,
    correlogram,
    correlogram2d,
    independent_baseline,
    scale_decomposition,
)
from src.ndwt1d import ndwt_forward
from src.simgen import ARSystem, generator_identity, simulate_ar_pair, simulate_image_pair
from src.wt2d import diagonal_block_labels, wt2d_forward

logger = get_logger("[WAVECORR CLI]")

SCHEME_ALIASES = {
    "dwt": ORTHOGONAL,
    "orthogonal": ORTHOGONAL,
    "ndwt": NONDECIMATED,
    "nondecimated": NONDECIMATED,
}

CORRELOGRAM_COLUMNS = ["level", "estimate", "lower", "upper", "n_eff", "status"]
COMPARE_COLUMNS = ["wavelet"] + CORRELOGRAM_COLUMNS
DECOMPOSE_COLUMNS = ["level", "weight", "level_correlation", "weighted_contribution"]

ACTIONS = [
    "transform",
    "correlate",
    "correlate2d",
    "simulate",
    "simulate-images",
    "decompose",
    "compare",
]


def _progress(items, args, description: str):
    disabled = args.quiet or not sys.stderr.isatty()
    return tqdm(
        items,
        desc=description,
        disable=disabled,
        bar_format="{l_bar}{bar}| {n_fmt}/{total_fmt}",
        colour="blue",
    )


def _scheme(args) -> str:
    return SCHEME_ALIASES[args.scheme]


def _bias_threshold(args) -> Optional[int]:
    return None if args.no_bias_correction else args.bias_threshold


def _correlogram_rows(curve) -> List[Dict]:
    return [
        {column: estimate.to_dict()[column] for column in CORRELOGRAM_COLUMNS}
        for estimate in curve
    ]


def _print_correlogram(result: Correlogram) -> None:
    title = "Partial correlogram" if result.partial_corr is not None else "Correlogram"
    print(f"{title + ' (' + result.measure + ', ' + result.wavelet + ')':=^60}")
    for estimate in result.curve():
        value = "-" if estimate.estimate is None else f"{estimate.estimate: .4f}"
        bounds = (
            ""
            if estimate.interval is None
            else f"[{estimate.lower: .4f}, {estimate.upper: .4f}]"
        )
        print(f"{str(estimate.label):>8}  {value:>8}  {bounds:<20} {estimate.status}")


def _write_correlogram(result: Correlogram, args) -> None:
    io_formats.write_json(args.out, result.to_dict(), schema="correlogram")
    logger.info("Correlogram written to %s", args.out)
    if args.csv:
        io_formats.write_table(args.csv, _correlogram_rows(result.curve()), CORRELOGRAM_COLUMNS)
        logger.info("Correlogram table written to %s", args.csv)


def cmd_transform(args) -> int:
    """Writes the coefficients of a 1D or 2D transform and prints level energies."""
    fb = get_filter(args.wavelet)
    scheme = _scheme(args)

    if args.image:
        image = io_formats.read_matrix(args.input)
        dec = wt2d_forward(image, fb, args.levels, scheme=scheme, keep_full=False)
        groups = list(zip(diagonal_block_labels(dec), dec.diagonal_blocks))
        n = dec.n
    else:
        series = io_formats.read_series(args.input)
        transform = dwt_forward if scheme == ORTHOGONAL else ndwt_forward
        dec = transform(series, fb, args.levels)
        groups = dec.subvectors()
        n = dec.n

    subvectors = []
    print(f"{'Transform (' + scheme + ', ' + fb.name + ')':=^60}")
    for label, values in groups:
        energy = float(np.sum(np.square(values)))
        subvectors.append(
            {
                "level": label,
                "shape": list(np.shape(values)),
                "energy": energy,
                "coefficients": values,
            }
        )
        print(f"{str(label):>8}  length={np.size(values):<8} energy={energy:.6g}")

    io_formats.write_json(
        args.out,
        {
            "scheme": scheme,
            "dimensions": 2 if args.image else 1,
            "n": n,
            "levels": args.levels,
            "wavelet": fb.describe(),
            "subvectors": subvectors,
        },
        schema="coefficients",
    )
    logger.info("Coefficients written to %s", args.out)
    return 0


def _analyse_pair(args, two_dimensional: bool):
    fb = get_filter(args.wavelet)
    analyse = correlogram2d if two_dimensional else correlogram
    return partial(
        analyse,
        fb=fb,
        L=args.levels,
        scheme=_scheme(args),
        measure=args.measure,
        alpha=args.alpha,
        partial_kind=SEMIPARTIAL if args.semipartial else PARTIAL,
        bias_threshold=_bias_threshold(args),
        kendall_variance=args.kendall_variance,
        threads=args.threads,
    )


def _load_records(args, two_dimensional: bool) -> Tuple[List[tuple], List[str]]:
    read = io_formats.read_matrix if two_dimensional else io_formats.read_series
    if args.average:
        manifest = io_formats.read_manifest(args.average)
        records = []
        for entry in _progress(manifest, args, "Reading records"):
            records.append(
                (read(entry["x"]), read(entry["y"]), *[read(c) for c in entry["controls"]])
            )
        names = manifest[0]["control_names"]
        return records, names

    controls = args.control or []
    record = (read(args.x), read(args.y), *[read(path) for path in controls])
    return [record], [Path(path).stem for path in controls]


def cmd_correlate(args, two_dimensional: bool = False) -> int:
    """Correlogram of one pair, or the average over a manifest of pairs."""
    records, names = _load_records(args, two_dimensional)
    analyse = _analyse_pair(args, two_dimensional)

    def run(record) -> Correlogram:
        return analyse(record[0], record[1], controls=list(record[2:]), control_names=names)

    runs = [run(record) for record in _progress(records, args, "Correlograms")]
    result = average_correlogram(runs)

    if args.baseline:
        result.baseline = independent_baseline(
            records,
            lambda x, y, controls: analyse(x, y, controls=controls, control_names=names),
            threads=args.threads,
        )

    _print_correlogram(result)
    _write_correlogram(result, args)
    return 0


def cmd_correlate2d(args) -> int:
    """Correlogram of two images over the diagonal-hierarchy blocks."""
    return cmd_correlate(args, two_dimensional=True)


def cmd_simulate(args) -> int:
    """Writes x.csv, y.csv and metadata.json for one AR system."""
    cfg = ARSystem(system_id=args.system, n=args.n, seed=args.seed, burn_in=args.burn_in)
    x, y = simulate_ar_pair(cfg)
    out_dir = Path(args.out_dir)
    io_formats.write_series(out_dir / "x.csv", x, "x")
    io_formats.write_series(out_dir / "y.csv", y, "y")
    io_formats.write_json(
        out_dir / "metadata.json",
        dict(cfg.metadata(), kind="ar_pair", files=["x.csv", "y.csv"]),
        schema="simulation",
    )
    logger.info("Simulated system %d (n=%d, seed=%d) into %s", args.system, args.n, args.seed, out_dir)
    return 0


def cmd_simulate_images(args) -> int:
    """Writes a.csv, b.csv and metadata.json for a synthetic image pair."""
    A, B = simulate_image_pair(
        args.n, args.dependence, args.seed, noise=args.noise, smoothness=args.smoothness
    )
    out_dir = Path(args.out_dir)
    io_formats.write_matrix(out_dir / "a.csv", A)
    io_formats.write_matrix(out_dir / "b.csv", B)
    io_formats.write_json(
        out_dir / "metadata.json",
        {
            "kind": "image_pair",
            "n": args.n,
            "dependence": args.dependence,
            "noise": args.noise,
            "smoothness": args.smoothness,
            "seed": args.seed,
            "generator": generator_identity(),
            "files": ["a.csv", "b.csv"],
        },
        schema="simulation",
    )
    logger.info("Simulated %dx%d image pair into %s", args.n, args.n, out_dir)
    return 0


def cmd_decompose(args) -> int:
    """Writes the per-level weights and correlations with the recovery footer."""
    x = io_formats.read_series(args.x)
    y = io_formats.read_series(args.y)
    result = scale_decomposition(x, y, get_filter(args.wavelet), args.levels)

    rows = result.rows()
    rows.append({"level": "recovered_rho", "weighted_contribution": result.recovered_correlation})
    rows.append({"level": "direct_rho", "weighted_contribution": result.direct_correlation})
    io_formats.write_table(args.out, rows, DECOMPOSE_COLUMNS)

    print(f"recovered_rho={result.recovered_correlation:.17g}")
    print(f"direct_rho={result.direct_correlation:.17g}")
    print(f"weight_sum={result.weight_sum:.17g}")
    logger.info("Decomposition written to %s", args.out)
    return 0


def cmd_compare(args) -> int:
    """Long-format correlogram table across wavelet families."""
    families = [name.strip() for name in args.wavelets.split(",") if name.strip()]
    unknown = [name for name in families if name not in available_filters()]
    if unknown:
        raise WavecorrError(f"Unknown wavelet(s): {', '.join(unknown)}")

    x = io_formats.read_series(args.x)
    y = io_formats.read_series(args.y)
    results = compare_wavelets(
        x,
        y,
        families,
        args.levels,
        scheme=_scheme(args),
        measure=args.measure,
        alpha=args.alpha,
        bias_threshold=_bias_threshold(args),
        kendall_variance=args.kendall_variance,
        threads=args.threads,
    )
    rows = []
    for family, result in results.items():
        rows += [dict(row, wavelet=family) for row in _correlogram_rows(result.corr)]
    io_formats.write_table(args.out, rows, COMPARE_COLUMNS)
    logger.info("Comparison of %s written to %s", ", ".join(families), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    """Argument parser shared by every action."""
    parser = argparse.ArgumentParser(description="Wavelet Correlation CLI")
    parser.add_argument("action", choices=ACTIONS, help="Action to perform")

    parser.add_argument("--input", help="Series CSV (or matrix CSV with --image)")
    parser.add_argument("--image", action="store_true", help="Transform a matrix CSV in 2D")
    parser.add_argument("--x", "--a", dest="x", help="First series or image CSV")
    parser.add_argument("--y", "--b", dest="y", help="Second series or image CSV")
    parser.add_argument(
        "--control", action="append", help="Control series or image CSV (repeatable)"
    )
    parser.add_argument("--average", help="Manifest CSV of records to average over")
    parser.add_argument(
        "--baseline",
        action="store_true",
        help="Add the independent-pairing curve (needs --average)",
    )

    parser.add_argument("--wavelet", choices=available_filters(), help="Filter family")
    parser.add_argument(
        "--wavelets",
        default=",".join(available_filters()),
        help="Families to compare (comma separated)",
    )
    parser.add_argument("--levels", type=int, help="Number of decomposition levels")
    parser.add_argument("--scheme", choices=sorted(SCHEME_ALIASES), help="Transform scheme")
    parser.add_argument("--measure", choices=MEASURES, default=PEARSON)
    parser.add_argument("--alpha", type=float, default=0.05, help="1 - confidence level")
    parser.add_argument(
        "--semipartial",
        action="store_true",
        help="Remove controls from x only",
    )
    parser.add_argument(
        "--kendall-variance", choices=[ASYMPTOTIC, EXACT], default=ASYMPTOTIC
    )
    parser.add_argument(
        "--bias-threshold",
        type=int,
        default=BIAS_THRESHOLD,
        help="Bias-correct Fisher intervals below this n_eff",
    )
    parser.add_argument(
        "--no-bias-correction", action="store_true", help="Never bias-correct"
    )

    parser.add_argument("--system", type=int, choices=[1, 2], help="AR system")
    parser.add_argument("--n", type=int, help="Series length or image side")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--burn-in", type=int, default=1000)
    parser.add_argument("--dependence", type=float, help="Shared-component weight")
    parser.add_argument("--noise", type=float, default=0.05)
    parser.add_argument("--smoothness", type=float, default=1.0)
    parser.add_argument("--out-dir", default=".", help="Directory for simulations")

    parser.add_argument("--out", help="Output file")
    parser.add_argument("--csv", help="Optional correlogram CSV")
    parser.add_argument("--threads", type=int, help="Worker threads (0 = auto)")
    parser.add_argument("--quiet", action="store_true", help="Only warnings and errors")
    return parser


def _validate(parser: argparse.ArgumentParser, args) -> None:
    action = args.action

    if action not in ("simulate", "simulate-images") and not args.out:
        parser.error(f"For '{action}' action, --out is required")

    if action == "correlate2d":
        args.wavelet = args.wavelet or "coif6"
        args.levels = args.levels if args.levels is not None else 5
        args.scheme = args.scheme or "ndwt"
    else:
        args.wavelet = args.wavelet or "haar"
        args.scheme = args.scheme or "dwt"

    if action in ("transform", "correlate", "decompose", "compare") and args.levels is None:
        parser.error(f"For '{action}' action, --levels is required")
    if args.levels is not None and args.levels < 1:
        parser.error("--levels must be at least 1")
    if not 0.0 < args.alpha < 1.0:
        parser.error("--alpha must lie in (0, 1)")

    if action == "transform" and not args.input:
        parser.error("For 'transform' action, --input is required")
    if action in ("correlate", "correlate2d"):
        if args.average and (args.x or args.y or args.control):
            parser.error("--average replaces --x, --y and --control")
        if not args.average and not (args.x and args.y):
            parser.error(f"For '{action}' action, --x and --y (or --average) are required")
        if args.baseline and not args.average:
            parser.error("--baseline needs --average")
    if action in ("decompose", "compare") and not (args.x and args.y):
        parser.error(f"For '{action}' action, --x and --y are required")
    if action == "decompose" and args.scheme not in ("dwt", "orthogonal"):
        parser.error("'decompose' only supports the orthogonal scheme")

    if action == "simulate":
        if args.system is None:
            parser.error("For 'simulate' action, --system is required")
        args.n = args.n if args.n is not None else 512
    if action == "simulate-images":
        if args.dependence is None:
            parser.error("For 'simulate-images' action, --dependence is required")
        args.n = args.n if args.n is not None else 64


def main(argv=None) -> int:
    """
    Parse command line arguments and execute corresponding actions.

    Returns:
        int: 0 on success, 1 on a data or numeric error. Usage errors exit with 2.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)

    if args.quiet:
        quiet_logging()

    commands = {
        "transform": cmd_transform,
        "correlate": cmd_correlate,
        "correlate2d": cmd_correlate2d,
        "simulate": cmd_simulate,
        "simulate-images": cmd_simulate_images,
        "decompose": cmd_decompose,
        "compare": cmd_compare,
    }
    try:
        return commands[args.action](args)
    except ManifestError as error:
        logger.error("Manifest error: %s", error)
    except WavecorrError as error:
        logger.error("%s", error)
    except OSError as error:
        logger.error("File error: %s", error)
    return 1


if __name__ == "__main__":
    sys.exit(main())
