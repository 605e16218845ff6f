"""Command line entry point: ``stochsep <subcommand> ...``.

Every subcommand prints its main artifact (CSV or JSON) on stdout.  With
``--out DIR`` the artifacts and a ``manifest.json`` describing the run are also
written into ``DIR`` and nowhere else.  Validation failures exit with status 2
and a one-line diagnostic on stderr.
"""

from __future__ import annotations

import argparse
import sys
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

from . import bounds, clustering, corrector, dimension, separability
from .errors import StochSepError
from .io import dumps, file_digest, loads, matrix_to_csv, read_matrix, rows_to_csv
from .preprocess import ConditionNumber, Kaiser, VarianceFraction, fit_whitening
from .sampling import KINDS, SampleSpec, sample


def tool_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:  # running from a source tree
        return "0.1.0"


# ---------------------------------------------------------------------------
# Argument helpers


def parse_range(text: str) -> list[int]:
    """``a:b:step`` (inclusive) or a comma list."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) == 2:
                parts.append(1)
            a, b, step = parts
            if step <= 0:
                raise ValueError
            return list(range(a, b + 1, step))
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b:step or a comma list of integers, got {text!r}") from None


def parse_floats(text: str) -> list[float]:
    try:
        if ":" in text:
            a, b, step = (float(p) for p in text.split(":"))
            n = int(round((b - a) / step))
            return [round(a + i * step, 12) for i in range(n + 1)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b:step or a comma list of numbers, got {text!r}") from None


def _retention(args):
    if args.rule == "kaiser":
        return Kaiser(args.kaiser_threshold)
    if args.rule == "varfrac":
        return VarianceFraction(args.fraction)
    return ConditionNumber(args.kappa)


def _add_retention(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rule", choices=["kaiser", "varfrac", "cond"], default="cond",
                   help="component retention rule used before whitening (default: cond)")
    p.add_argument("--kappa", type=float, default=10.0, help="condition number cap for --rule cond")
    p.add_argument("--fraction", type=float, default=0.95, help="explained variance for --rule varfrac")
    p.add_argument("--kaiser-threshold", type=float, default=1.0, help="mean-normalised cut for --rule kaiser")


class Run:
    """Collects the artifacts of one invocation and writes them on success."""

    def __init__(self, args: argparse.Namespace, inputs: list[str]):
        self.args = args
        self.inputs = inputs
        self.files: dict[str, str] = {}

    def add(self, name: str, text: str) -> None:
        self.files[name] = text

    def manifest(self) -> str:
        flags = {k: v for k, v in sorted(vars(self.args).items()) if k not in ("func",)}
        return dumps(
            {
                "subcommand": self.args.command,
                "flags": flags,
                "seed": getattr(self.args, "seed", None),
                "inputs": {p: file_digest(p) for p in self.inputs},
                "tool_version": tool_version(),
                "outputs": sorted(self.files),
            },
            "manifest",
        )

    def finish(self, primary: str) -> int:
        sys.stdout.write(self.files[primary])
        if self.args.out:
            out = Path(self.args.out)
            out.mkdir(parents=True, exist_ok=True)
            for name, text in self.files.items():
                (out / name).write_text(text, encoding="utf-8")
            (out / "manifest.json").write_text(self.manifest(), encoding="utf-8")
        return 0


# ---------------------------------------------------------------------------
# Subcommands


def cmd_bounds_table(args) -> int:
    rows = bounds.separation_table(args.dims, args.alpha, args.psi)
    run = Run(args, [])
    run.add("table.csv", rows_to_csv(["n", "M1", "M2"], [(r.n, r.m1, r.m2) for r in rows]))
    run.add("table.json", dumps({
        "alpha": args.alpha,
        "psi": args.psi,
        "rows": [
            {"n": r.n, "M1": str(r.m1), "M2": str(r.m2),
             "M1_3sf": bounds.format_sig(r.m1), "M2_3sf": bounds.format_sig(r.m2)}
            for r in rows
        ],
    }, "bounds_table"))
    return run.finish("table.json" if args.format == "json" else "table.csv")


def _maybe_whiten(X, args):
    if not args.whiten:
        return X, None
    return fit_whitening(X, _retention(args))


def cmd_check_separability(args) -> int:
    X = read_matrix(args.data)
    Z, wm = _maybe_whiten(X, args)
    report = separability.dataset_separability(Z, args.alpha, pair_cap=args.pair_cap)
    run = Run(args, [args.data])
    payload = report.to_dict()
    payload["whitened"] = wm is not None
    payload["retained"] = None if wm is None else wm.retained
    run.add("report.json", dumps(payload, "separability_report"))
    run.add("per_point.csv", rows_to_csv(
        ["index", "count", "frequency", "separable"],
        [(i, int(c), repr(float(f)), int(s)) for i, (c, f, s) in
         enumerate(zip(report.counts, report.frequencies, report.separable_points))],
    ))
    return run.finish("report.json")


def cmd_profile(args) -> int:
    X = read_matrix(args.data)
    Z, _ = _maybe_whiten(X, args)
    curve = separability.separability_profile(Z, args.alphas)
    run = Run(args, [args.data])
    run.add("profile.csv", rows_to_csv(["alpha", "fraction_separable"], [(repr(a), repr(f)) for a, f in curve]))
    return run.finish("profile.csv")


def cmd_estimate_dim(args) -> int:
    X = read_matrix(args.data)
    rule = _retention(args)
    run = Run(args, [args.data])
    if args.alphas:
        est = dimension.effective_dimension_grid(X, args.alphas, args.variant, rule)
        run.add("estimate.json", dumps(est.to_dict(), "dimension_estimate_grid"))
        per_point = est.estimates[0].per_point
    else:
        est = dimension.effective_dimension(X, args.alpha, args.variant, rule)
        run.add("estimate.json", dumps(est.to_dict(), "dimension_estimate"))
        per_point = est.per_point
    if args.per_point:
        run.add("py.csv", rows_to_csv(["index", "p_y"], [(i, repr(float(p))) for i, p in enumerate(per_point)]))
    return run.finish("estimate.json")


def cmd_cluster_quality(args) -> int:
    X = read_matrix(args.data)
    Z, wm = _maybe_whiten(X, args)
    clus = clustering.cluster_points(Z, args.k, seed=args.seed)
    n = args.n_override if args.n_override is not None else (wm.retained if wm else Z.shape[1])
    good = clustering.pairwise_goodness(Z, clus.assignments, n_override=n)
    run = Run(args, [args.data])
    payload = good.to_dict()
    payload["n_iter"] = clus.n_iter
    run.add("gamma.json", dumps(payload, "cluster_quality"))
    run.add("assignments.csv", rows_to_csv(["index", "cluster"], enumerate(clus.assignments.tolist())))
    return run.finish("gamma.json")


def cmd_train_corrector(args) -> int:
    E = read_matrix(args.errors)
    N = read_matrix(args.normals)
    if E.shape[1] != N.shape[1]:
        raise StochSepError(f"errors have {E.shape[1]} columns, normals {N.shape[1]}")
    Zn, wm = fit_whitening(N, _retention(args))
    Ze = wm.transform(E)
    if args.mode == "single":
        model = corrector.train_per_point(Ze, args.alpha, whitening=wm)
    elif args.mode == "fisher":
        model = corrector.CorrectorEnsemble((corrector.train_fisher(Ze, Zn, args.quantile, whitening=wm),))
    else:
        model = corrector.train_clustered(Ze, Zn, args.k, alpha=args.alpha, seed=args.seed,
                                          quantile=args.quantile, whitening=wm)
    run = Run(args, [args.errors, args.normals])
    train_eval = corrector.evaluate(model, E, N)
    doc = model.to_dict()
    doc["mode"] = args.mode
    doc["training_evaluation"] = train_eval.to_dict()
    run.add("corrector.json", dumps(doc, "corrector_ensemble"))
    return run.finish("corrector.json")


def cmd_apply_corrector(args) -> int:
    model = corrector.CorrectorEnsemble.from_dict(loads(Path(args.model).read_text(encoding="utf-8")))
    X = read_matrix(args.data)
    decisions = corrector.apply_batch(model, X)
    run = Run(args, [args.model, args.data])
    run.add("decisions.csv", rows_to_csv(
        ["index", "decision", "firing"],
        [(i, d.label, " ".join(map(str, d.firing))) for i, d in enumerate(decisions)],
    ))
    return run.finish("decisions.csv")


def cmd_sample(args) -> int:
    spec = SampleSpec(args.kind, args.n, args.m, args.seed)
    X = sample(spec)
    run = Run(args, [])
    run.add("sample.csv", matrix_to_csv(X, [f"x{i}" for i in range(spec.n)]))
    run.add("sample.json", dumps({"spec": spec.to_dict()}, "sample_spec"))
    return run.finish("sample.csv")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stochsep", description="Stochastic separation analyses.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--out", help="directory for artifacts and manifest.json")
        p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        p.set_defaults(func=func)
        return p

    p = add("bounds-table", cmd_bounds_table, "certified sample sizes M1, M2 on spheres")
    p.add_argument("--alpha", type=float, default=0.8)
    p.add_argument("--psi", type=float, default=0.01)
    p.add_argument("--dims", type=parse_range, default=parse_range("10:80:10"))
    p.add_argument("--format", choices=["csv", "json"], default="csv", help="stdout format")

    p = add("check-separability", cmd_check_separability, "exhaustive Fisher-separability audit of a CSV")
    p.add_argument("data")
    p.add_argument("--alpha", type=float, default=0.8)
    p.add_argument("--whiten", action="store_true", help="center and whiten before the audit")
    p.add_argument("--pair-cap", type=int, default=separability.DEFAULT_PAIR_CAP)
    _add_retention(p)

    p = add("profile", cmd_profile, "fraction of separable points over a threshold grid")
    p.add_argument("data")
    p.add_argument("--alphas", type=parse_floats, default=parse_floats("0.1:0.9:0.1"))
    p.add_argument("--whiten", action="store_true")
    _add_retention(p)

    p = add("estimate-dim", cmd_estimate_dim, "separability-based effective dimension")
    p.add_argument("data")
    p.add_argument("--alpha", type=float, default=0.8)
    p.add_argument("--alphas", type=parse_floats, default=None, help="average over several thresholds")
    p.add_argument("--variant", choices=["n", "n-1"], default="n")
    p.add_argument("--per-point", action="store_true", help="also write py.csv with every p_y")
    _add_retention(p)

    p = add("cluster-quality", cmd_cluster_quality, "cluster a CSV and report gamma for every pair")
    p.add_argument("data")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n-override", type=float, default=None, help="dimension used in gamma")
    p.add_argument("--whiten", action="store_true")
    _add_retention(p)

    p = add("train-corrector", cmd_train_corrector, "train correctors from error and normal CSVs")
    p.add_argument("--errors", required=True)
    p.add_argument("--normals", required=True)
    p.add_argument("--mode", choices=["single", "fisher", "clustered"], default="clustered")
    p.add_argument("--alpha", type=float, default=0.8)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--quantile", type=float, default=None, help="flag above this quantile of normals")
    _add_retention(p)

    p = add("apply-corrector", cmd_apply_corrector, "apply a trained corrector to a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("data")

    p = add("sample", cmd_sample, "draw a seeded sample")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (StochSepError, ValueError) as exc:
        print(f"stochsep {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"stochsep {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
