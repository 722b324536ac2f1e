"""Command line front end.

Verbs: cluster, tune, baseline, decompose, bounds, ise, synth.  Reports are
line-oriented ``key: value`` pairs on stdout (deterministic for fixed argv and
input files); structured results go to JSON via --output.  Exit codes: 0 ok,
1 expected failure, 2 finished but the weight subproblem missed its tolerance,
64 usage.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from .bounds import (
    BoundInputs,
    empirical_loss,
    empirical_loss_upper_bound,
    generalization_bound,
    omega_terms,
    rademacher_bound,
)
from .data_io import load_csv, make_blobs, make_two_moons, write_csv, write_result
from .driver import (
    DEFAULT_LAMBDA_GRID,
    CdskConfig,
    run_baseline_spectral,
    run_cdsk,
    tune_lambda,
)
from .errors import CdskError
from .kdc import (
    KdeModel,
    decision_squared_integral,
    empirical_ise_terms,
    gaussian_convolution_check,
    ise_residual_slack,
)
from .kernel import KernelSpec, default_bandwidth, gram
from .kmeans_metrics import Partition, accuracy, nmi
from .spectral import eigh, psd_split


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags by default; the contract wants 64
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(64)


def _fmt(v: float) -> str:
    return repr(float(v))


def _emit(key: str, value) -> None:
    print(f"{key}: {value}")


def _add_input_flags(p: argparse.ArgumentParser, labels_help: str) -> None:
    p.add_argument("--input", required=True, help="CSV file, one sample per row")
    p.add_argument("--labels", type=int, default=None, metavar="COL", help=labels_help)
    p.add_argument("--header", action="store_true", help="skip the first line")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--lambda", dest="lam", type=float, default=0.1)
    p.add_argument("--bandwidth", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)


def _load(args):
    return load_csv(args.input, label_column=args.labels, header=args.header)


def _print_metrics(per_run: list[dict | None]) -> None:
    present = [m for m in per_run if m is not None]
    if not present:
        return
    for key in ("accuracy", "nmi"):
        vals = np.array([m[key] for m in present])
        if len(vals) == 1:
            _emit(key, f"{vals[0]:.3f}")
        else:
            _emit(key, f"{vals.mean():.3f} ± {vals.std():.3f}")


def _cluster_header(args, data, lam_desc: str) -> None:
    _emit("command", "cluster")
    _emit("input", args.input)
    _emit("n", data.n)
    _emit("d", data.d)
    _emit("clusters", args.clusters)
    _emit("lambda", lam_desc)
    _emit("bandwidth", "auto" if args.bandwidth is None else _fmt(args.bandwidth))
    _emit("max_iter", args.max_iter)
    _emit("seed", args.seed)
    _emit("runs", args.runs)


def cmd_cluster(args) -> int:
    data = _load(args)
    lam = args.lam
    lam_desc = f"{_fmt(lam)} (tuned)" if getattr(args, "pre_tuned", False) else _fmt(lam)
    if args.tune_lambda:
        lam, _ = tune_lambda(
            data,
            CdskConfig(
                c=args.clusters,
                bandwidth=args.bandwidth,
                max_iter=args.max_iter,
                seed=args.seed,
            ),
        )
        lam_desc = f"{_fmt(lam)} (tuned)"
    _cluster_header(args, data, lam_desc)
    results = []
    for i in range(args.runs):
        cfg = CdskConfig(
            c=args.clusters,
            lam=lam,
            bandwidth=args.bandwidth,
            max_iter=args.max_iter,
            seed=args.seed + i,
        )
        results.append(run_cdsk(data, cfg))
    first = results[0]
    _emit("bandwidth_used", _fmt(first.bandwidth_used))
    _emit("lambda_used", _fmt(first.lambda_used))
    _emit("iterations", len(first.objective_trace))
    if first.objective_trace:
        _emit("objective_final", _fmt(first.objective_trace[-1]))
    all_converged = all(r.qp_converged for r in results)
    _emit("qp_converged", "true" if all_converged else "false")
    _print_metrics([r.metrics for r in results])
    if args.output is not None:
        write_result(first, args.output)
        _emit("output", args.output)
    return 0 if all_converged else 2


def cmd_tune(args) -> int:
    data = _load(args)
    grid = DEFAULT_LAMBDA_GRID if args.grid is None else tuple(args.grid)
    cfg = CdskConfig(
        c=args.clusters, bandwidth=args.bandwidth, max_iter=args.max_iter, seed=args.seed
    )
    _emit("command", "tune")
    _emit("input", args.input)
    _emit("lambda_grid", " ".join(_fmt(v) for v in grid))
    chosen, entropies = tune_lambda(data, cfg, grid=grid)
    for lam, ent in zip(grid, entropies):
        _emit(f"entropy {_fmt(lam)}", _fmt(ent))
    _emit("chosen_lambda", _fmt(chosen))
    if args.then_cluster:
        args.lam = chosen
        args.tune_lambda = False
        args.pre_tuned = True
        return cmd_cluster(args)
    return 0


def cmd_baseline(args) -> int:
    data = _load(args)
    _emit("command", "baseline")
    _emit("input", args.input)
    _emit("n", data.n)
    _emit("clusters", args.clusters)
    result = run_baseline_spectral(
        data, args.clusters, seed=args.seed, bandwidth=args.bandwidth
    )
    _emit("bandwidth_used", _fmt(result.bandwidth_used))
    _print_metrics([result.metrics])
    if args.output is not None:
        write_result(result, args.output)
        _emit("output", args.output)
    return 0


def cmd_decompose(args) -> int:
    data = load_csv(args.input, header=args.header)
    s = data.data
    if s.shape[0] != s.shape[1]:
        raise CdskError(f"similarity matrix must be square, got {s.shape}")
    split = psd_split(s)
    recon = split.s_plus - split.s_minus
    _emit("command", "decompose")
    _emit("n", s.shape[0])
    _emit("reconstruction_error", _fmt(np.linalg.norm(s - recon)))
    _emit("s_plus_frobenius", _fmt(np.linalg.norm(split.s_plus)))
    _emit("s_minus_frobenius", _fmt(np.linalg.norm(split.s_minus)))
    _emit("min_eigenvalue_plus", _fmt(eigh(split.s_plus).eigenvalues.min()))
    _emit("min_eigenvalue_minus", _fmt(eigh(split.s_minus).eigenvalues.min()))
    return 0


def cmd_bounds(args) -> int:
    data = _load(args)
    if data.labels is None:
        raise CdskError("bounds need ground-truth labels; pass --labels COL")
    bandwidth = args.bandwidth if args.bandwidth is not None else default_bandwidth(data)
    spec = KernelSpec(bandwidth)
    kmat = gram(data, spec)
    alpha = np.full(data.n, 1.0 / data.n)
    split = psd_split(kmat.values)
    omega_plus, omega_minus = omega_terms(split, alpha, data.labels)
    r = float(
        np.sqrt(max(split.s_plus.diagonal().max(), split.s_minus.diagonal().max()))
    )
    c = int(data.labels.max())
    inputs = BoundInputs(
        n=data.n,
        c=c,
        gamma=args.gamma,
        delta=args.delta,
        b_plus=omega_plus,
        b_minus=omega_minus,
        r=r,
    )
    empirical = empirical_loss(data, alpha, spec, args.gamma)
    upper = empirical_loss_upper_bound(data, alpha, spec, args.gamma, kmat.values)
    _emit("command", "bounds")
    _emit("n", data.n)
    _emit("classes", c)
    _emit("bandwidth", _fmt(bandwidth))
    _emit("gamma", _fmt(args.gamma))
    _emit("delta", _fmt(args.delta))
    _emit("empirical_loss", _fmt(empirical))
    _emit("empirical_loss_upper_bound", _fmt(upper))
    _emit("omega_plus", _fmt(omega_plus))
    _emit("omega_minus", _fmt(omega_minus))
    _emit("generalization_bound", _fmt(generalization_bound(inputs, empirical)))
    _emit("rademacher_bound", _fmt(rademacher_bound(inputs, args.delta)))
    return 0


def cmd_ise(args) -> int:
    if args.check_convolution:
        numeric, closed = gaussian_convolution_check(args.a, args.b, args.h)
        rel = abs(numeric - closed) / max(abs(closed), 1e-300)
        _emit("command", "ise")
        _emit("numeric", _fmt(numeric))
        _emit("closed", _fmt(closed))
        _emit("rel_err", _fmt(rel))
        return 0
    if args.input is None:
        print("error: ise needs --check-convolution or --input", file=sys.stderr)
        raise SystemExit(64)
    data = load_csv(args.input, label_column=args.labels, header=args.header)
    if data.labels is None:
        raise CdskError("ise needs two-class labels; pass --labels COL")
    bandwidth = args.bandwidth if args.bandwidth is not None else default_bandwidth(data)
    model = KdeModel(
        points=data.data,
        alpha=np.full(data.n, 1.0 / data.n),
        labels=data.labels,
        h=bandwidth,
    )
    hat_ise, k_alpha, s_ise = empirical_ise_terms(model, args.lambda1)
    _emit("command", "ise")
    _emit("n", data.n)
    _emit("bandwidth", _fmt(bandwidth))
    _emit("lambda1", _fmt(args.lambda1))
    _emit("hat_ise", _fmt(hat_ise))
    _emit("k_alpha", _fmt(k_alpha))
    _emit("s_ise_max", _fmt(s_ise.max()))
    _emit("decision_squared_integral", _fmt(decision_squared_integral(model)))
    _emit("residual_slack", _fmt(ise_residual_slack(model, args.eps)))
    return 0


def _parse_centers(text: str) -> list[list[float]]:
    centers = []
    for part in text.split(";"):
        centers.append([float(v) for v in part.split(",")])
    return centers


def cmd_synth(args) -> int:
    if args.kind == "blobs":
        sample = make_blobs(
            args.n_per_cluster, _parse_centers(args.centers), args.sigma, seed=args.seed
        )
    else:
        sample = make_two_moons(args.n, args.noise, seed=args.seed)
    write_csv(sample, args.out)
    _emit("command", "synth")
    _emit("kind", args.kind)
    _emit("n", sample.n)
    _emit("d", sample.d)
    _emit("written", args.out)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="cdsk", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("cluster", help="run the full clustering pipeline")
    _add_input_flags(p, "column holding ground-truth labels, for metrics")
    p.add_argument("--clusters", type=int, required=True)
    _add_run_flags(p)
    p.add_argument("--output", default=None, help="write the result document here")
    p.add_argument("--tune-lambda", action="store_true")
    p.add_argument("--runs", type=int, default=1)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("tune", help="pick lambda on a validation subsample")
    _add_input_flags(p, "column holding ground-truth labels, for metrics")
    p.add_argument("--clusters", type=int, required=True)
    _add_run_flags(p)
    p.add_argument("--grid", type=float, nargs="+", default=None)
    p.add_argument("--then-cluster", action="store_true")
    p.add_argument("--output", default=None)
    p.add_argument("--runs", type=int, default=1)
    p.set_defaults(func=cmd_tune, tune_lambda=False)

    p = sub.add_parser("baseline", help="plain spectral clustering on the raw kernel")
    _add_input_flags(p, "column holding ground-truth labels, for metrics")
    p.add_argument("--clusters", type=int, required=True)
    p.add_argument("--bandwidth", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("decompose", help="difference-of-PSD split of a similarity")
    p.add_argument("--input", required=True, help="square symmetric matrix as CSV")
    p.add_argument("--header", action="store_true")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("bounds", help="misclassification bound report")
    _add_input_flags(p, "column holding class labels (required)")
    p.add_argument("--bandwidth", type=float, default=None)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--delta", type=float, default=0.1)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("ise", help="density-classification ISE diagnostics")
    p.add_argument("--check-convolution", action="store_true")
    p.add_argument("--a", type=float, default=0.0)
    p.add_argument("--b", type=float, default=0.0)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--input", default=None)
    p.add_argument("--labels", type=int, default=None)
    p.add_argument("--header", action="store_true")
    p.add_argument("--bandwidth", type=float, default=None)
    p.add_argument("--lambda1", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=0.0)
    p.set_defaults(func=cmd_ise)

    p = sub.add_parser("synth", help="write a synthetic dataset as CSV")
    p.add_argument("kind", choices=("blobs", "moons"))
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-per-cluster", type=int, default=100)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--centers", default="0,0;10,10")
    p.add_argument("--n", type=int, default=400)
    p.add_argument("--noise", type=float, default=0.05)
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CdskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
