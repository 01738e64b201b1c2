"""Command-line interface: ``mvksc fit|synth|heatmap|trace|eval``.

Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numerical failure.
"""
import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from mvksc import data, metrics
from mvksc.kernels import KernelSpec
from mvksc.solver import ConfigError, NumericalError, SolverConfig, TraceRow, fit

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

TRACE_HEADER = ["iter", "objective", "residual_CA", "residual_sum1", "rho"]


class UsageError(Exception):
    pass


@dataclass
class RunRecord:
    config: dict
    fingerprint: str
    summary: dict
    trace: list
    duration_s: float

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


# --- config ---------------------------------------------------------------

_FLOAT_KEYS = {"lambda": "lam", "gamma": "gamma", "theta": "theta", "rho0": "rho0",
               "rho_mult": "rho_mult", "tol": "tol"}
_INT_KEYS = {"k": "k", "max_iters": "max_iters", "iters": "max_iters", "seed": "seed",
             "kmeans_restarts": "kmeans_restarts"}


def _parse_float(key, text):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None


def _parse_int(key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def config_from_keyvalue(kv):
    """Translate config-file keys into SolverConfig keyword arguments."""
    out, per_view = {}, {}
    for key, value in kv.items():
        if key in _FLOAT_KEYS:
            out[_FLOAT_KEYS[key]] = _parse_float(key, value)
        elif key in _INT_KEYS:
            out[_INT_KEYS[key]] = _parse_int(key, value)
        elif key == "rho_cap":
            out["rho_cap"] = None if value.lower() in ("none", "inf", "unbounded") else _parse_float(key, value)
        elif key == "mode":
            out["consensus_mode"] = value.lower()
        elif key == "enriched":
            out["enriched"] = value.lower() in ("1", "true", "yes", "on")
        elif key == "check_solves":
            out["check_solves"] = value.lower() in ("1", "true", "yes", "on")
        elif key == "normalize":
            out["normalize"] = value.lower()
        elif key == "kernel":
            out["kernels"] = (_parse_kernel(value),)
        elif key.startswith("kernel."):
            per_view[_parse_int(key, key.split(".", 1)[1])] = _parse_kernel(value)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    if per_view:
        out["kernels"] = tuple(per_view[i] for i in sorted(per_view))
    return out


def _parse_kernel(text):
    try:
        return KernelSpec.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_config(args, dataset):
    kw = {}
    if args.config:
        kw.update(config_from_keyvalue(data.read_keyvalue(args.config)))
    overrides = {
        "lam": args.lam, "gamma": args.gamma, "theta": args.theta, "max_iters": args.iters,
        "tol": args.tol, "seed": args.seed, "k": args.k, "normalize": args.normalize,
        "rho0": args.rho0, "rho_mult": args.rho_mult, "kmeans_restarts": args.kmeans_restarts,
    }
    kw.update({k: v for k, v in overrides.items() if v is not None})
    if args.rho_cap is not None:
        kw["rho_cap"] = None if args.rho_cap.lower() in ("none", "inf") else _parse_float("rho_cap", args.rho_cap)
    if args.kernel is not None:
        kw["kernels"] = (_parse_kernel(args.kernel),)
    if args.mode is not None:
        kw["consensus_mode"] = args.mode
    if args.no_enrich:
        kw["enriched"] = False
    if args.check_solves:
        kw["check_solves"] = True
    if "k" not in kw:
        if dataset.labels is None:
            raise ConfigError("k is required (config key 'k' or --k) when the dataset has no labels")
        kw["k"] = int(np.unique(dataset.labels).size)
    return SolverConfig(**kw)


# --- commands -------------------------------------------------------------

def write_trace(path, trace):
    with open(path, "w") as fh:
        fh.write(",".join(TRACE_HEADER) + "\n")
        for row in trace:
            fh.write(f"{row.iter}," + ",".join(format(float(x), ".17g") for x in row[1:]) + "\n")


def read_trace(path):
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if header != TRACE_HEADER:
            raise data.DataError(f"{path}: unexpected trace header {header}")
        for line in fh:
            if line.strip():
                f = line.strip().split(",")
                rows.append(TraceRow(int(f[0]), *(float(x) for x in f[1:])))
    return rows


def cmd_fit(args):
    dataset = data.load_dataset(args.manifest)
    config = build_config(args, dataset)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    result = fit(dataset, config)
    duration = time.perf_counter() - t0

    data.write_labels(out / "labels.csv", result.labels)
    data.write_matrix_csv(out / "consensus.csv", result.C_star)
    data.write_matrix_csv(out / "embedding.csv", result.F)
    write_trace(out / "trace.csv", result.trace)
    if args.save_views:
        for v, C in enumerate(result.C):
            data.write_matrix_csv(out / f"view{v}_C.csv", C)
    if result.metrics is not None:
        data.write_keyvalue(out / "metrics.txt", {
            "acc": f"{result.metrics['acc']:.6f}",
            "nmi": f"{result.metrics['nmi']:.6f}",
            "nmi_normalization": result.metrics["nmi_normalization"],
        })

    last = result.trace[-1]
    summary = {
        "n_samples": dataset.n_samples,
        "n_views": dataset.n_views,
        "k": config.k,
        "iterations": result.iterations,
        "converged": result.converged,
        "final_objective": last.objective,
        "final_residual_CA": last.residual_CA,
        "final_residual_sum1": last.residual_sum1,
        "backend": result.backend,
        "metrics": result.metrics,
    }
    record = RunRecord(config.to_dict(), dataset.fingerprint(), summary,
                       [list(r) for r in result.trace], duration)
    (out / "run.json").write_text(record.to_json())

    msg = f"{result.iterations} iterations, converged={result.converged}"
    if result.metrics is not None:
        msg += f", acc={result.metrics['acc']:.4f} nmi={result.metrics['nmi']:.4f}"
    print(msg)
    return EXIT_OK


def cmd_trace(args):
    """Re-export the trace stored in a run.json as CSV."""
    try:
        record = RunRecord.from_json(Path(args.run).read_text())
    except OSError as exc:
        raise data.DataError(f"{args.run}: cannot read ({exc.strerror})") from None
    except (ValueError, TypeError) as exc:
        raise data.DataError(f"{args.run}: not a run record ({exc})") from None
    write_trace(args.out, [TraceRow(int(r[0]), *r[1:]) for r in record.trace])
    return EXIT_OK


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def cmd_synth(args):
    out = Path(args.out)
    if out.exists() and any(out.iterdir()) and not args.force:
        raise UsageError(f"{out} exists and is not empty (use --force to overwrite)")
    try:
        if args.kind == "subspaces":
            dims = [int(d) for d in _float_list(args.dims)]
            ds = data.synth_linear_subspaces(args.n_per_cluster, args.k, dims, args.noise,
                                             args.seed, args.subspace_dim)
        else:
            radii = _float_list(args.radii)
            ds = data.synth_rings(args.n_per_ring, len(radii), radii, args.noise, args.seed,
                                  args.views)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    manifest = data.save_dataset(ds, out)
    print(manifest)
    return EXIT_OK


def heatmap_pixels(M):
    """8-bit grayscale, 255 * (1 - |M| / max|M|); an all-zero matrix is white."""
    absM = np.abs(np.asarray(M, dtype=np.float64))
    top = absM.max()
    if top == 0:
        return np.full(absM.shape, 255, dtype=np.uint8)
    return np.rint(255.0 * (1.0 - absM / top)).astype(np.uint8)


def write_pgm(path, pixels):
    h, w = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(pixels, dtype=np.uint8).tobytes())


def cmd_heatmap(args):
    M = data.read_matrix_csv(args.matrix)
    if M.shape[0] != M.shape[1]:
        raise data.DataError(f"{args.matrix}: matrix is {M.shape[0]}x{M.shape[1]}, not square")
    write_pgm(args.image, heatmap_pixels(M))
    return EXIT_OK


def cmd_eval(args):
    pred = data.read_labels(args.pred)
    truth = data.read_labels(args.truth)
    if pred.size != truth.size:
        raise data.DataError(f"{args.pred} has {pred.size} labels, {args.truth} has {truth.size}")
    print(f"acc={metrics.accuracy(pred, truth):.4f} nmi={metrics.nmi(pred, truth):.4f}")
    return EXIT_OK


# --- entry point ----------------------------------------------------------

def build_parser():
    p = argparse.ArgumentParser(prog="mvksc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="cluster a multi-view dataset")
    f.add_argument("--manifest", required=True)
    f.add_argument("--config")
    f.add_argument("--out", required=True)
    f.add_argument("--seed", type=int)
    f.add_argument("--kernel", help="linear or poly:<c>:<d> (applied to every view)")
    f.add_argument("--lambda", dest="lam", type=float)
    f.add_argument("--gamma", type=float)
    f.add_argument("--theta", type=float)
    f.add_argument("--iters", type=int)
    f.add_argument("--tol", type=float)
    f.add_argument("--k", type=int)
    f.add_argument("--rho0", type=float)
    f.add_argument("--rho-mult", type=float)
    f.add_argument("--rho-cap", help="number, or 'none' for unbounded growth")
    f.add_argument("--mode", choices=["l1", "fro"])
    f.add_argument("--no-enrich", action="store_true")
    f.add_argument("--normalize", choices=list(data.NORMALIZE_MODES))
    f.add_argument("--kmeans-restarts", type=int)
    f.add_argument("--check-solves", action="store_true",
                   help="verify the C linear solves every 10 iterations")
    f.add_argument("--save-views", action="store_true", help="also write per-view C matrices")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("synth", help="generate a synthetic dataset")
    s.add_argument("--kind", choices=["subspaces", "rings"], required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--force", action="store_true")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--noise", type=float, default=None)
    s.add_argument("--n-per-cluster", type=int, default=30)
    s.add_argument("--k", type=int, default=3)
    s.add_argument("--dims", default="10,12")
    s.add_argument("--subspace-dim", type=int, default=3)
    s.add_argument("--n-per-ring", type=int, default=50)
    s.add_argument("--radii", default="1,3")
    s.add_argument("--views", type=int, default=2)
    s.set_defaults(func=cmd_synth)

    h = sub.add_parser("heatmap", help="render a square matrix CSV as a PGM image")
    h.add_argument("matrix")
    h.add_argument("image")
    h.set_defaults(func=cmd_heatmap)

    t = sub.add_parser("trace", help="export the iteration trace of a run.json as CSV")
    t.add_argument("run")
    t.add_argument("out")
    t.set_defaults(func=cmd_trace)

    e = sub.add_parser("eval", help="score predicted labels against ground truth")
    e.add_argument("pred")
    e.add_argument("truth")
    e.set_defaults(func=cmd_eval)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    if getattr(args, "command", None) == "synth" and args.noise is None:
        args.noise = 0.01 if args.kind == "subspaces" else 0.05
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"mvksc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except data.DataError as exc:
        print(f"mvksc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError) as exc:
        print(f"mvksc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
