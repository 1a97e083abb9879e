"""Command-line interface.

Subcommands: cosa, hclust, mds (aliases smacof/cmds), attimp, simulate,
compare.  Every subcommand writes a JSON report holding the effective
configuration and SHA-256 digests of its inputs.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .datagen import gen_design1, gen_design2
from .distances import (
    DataMatrix,
    DissimilarityMatrix,
    TargetSpec,
    attribute_distances,
    compute_scale_factors,
    fixed_weight_dissimilarity,
    l1_dissimilarity,
    sqeuclid_dissimilarity,
)
from .engine import LOG_HEADER, CosaParams, maxweight_from_dk, run_cosa
from .errors import CosaError
from .hclust import LINKAGES, agglomerate, best_cut_ari, cut, normalize_ss
from .importance import attimp
from .io import (
    read_data_csv,
    read_dist,
    read_labels,
    read_weights_csv,
    sha256_file,
    write_data_csv,
    write_dist,
    write_json,
    write_matrix_csv,
)
from .mds import classical_mds, smacof
from . import plotting

log = logging.getLogger("cosa")

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(s: str) -> list:
    return [x.strip() for x in s.split(",") if x.strip()]


def _csv_cell(s: str) -> str:
    return '"' + s.replace('"', '""') + '"' if any(c in s for c in ',"\n') else s


def _report(args, inputs: dict, **extra) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func" and not k.startswith("_")}
    return {
        "call": " ".join(["cosa", *args._argv]),
        "command": args.command,
        "config": config,
        "inputs": {name: {"path": str(p), "sha256": sha256_file(p)} for name, p in inputs.items()},
        "version": __version__,
        **extra,
    }


def _outdir(args) -> Path:
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_data(args) -> DataMatrix:
    X, _ = read_data_csv(args.input, categorical=args.categorical, id_col=args.id_col)
    return X


def _cosa_params(args) -> CosaParams:
    return CosaParams(
        lam=args.lam,
        knn=args.knn,
        max_outer=args.max_outer,
        max_inner=args.max_inner,
        inner_tol=args.inner_tol,
        outer_tol=args.outer_tol,
        targ=args.targ,
        scale_method=args.scale,
        knn_includes_self=args.knn_includes_self,
    )


# -- subcommands --------------------------------------------------------------


def cmd_cosa(args) -> int:
    X = _load_data(args)
    out = _outdir(args)
    log_path = out / "cosa_iterations.log"
    lines = [LOG_HEADER]
    if not args.quiet:
        print(" COSA executing.")
        print(LOG_HEADER)

    def echo(rec, W):
        line = rec.format()
        lines.append(line)
        if not args.quiet:
            print(line, flush=True)

    res = run_cosa(X, _cosa_params(args), callback=echo)
    log_path.write_text("\n".join(lines) + "\n")
    write_dist(out / "cosa.dist", res.D, X.row_ids, {"source": "cosa", "targ": args.targ})
    W = res.W * X.p if args.w_scale == "timesP" else res.W
    write_matrix_csv(out / "cosa_weights.csv", W, X.row_ids, X.col_ids)
    p = res.params
    report = _report(
        args,
        {"data": args.input},
        tunpar=res.tunpar,
        effective={
            "knn": p.knn,
            "eta_init": p.eta_init,
            "eta_step": p.eta_step,
            "n": X.n,
            "p": X.p,
        },
        outputs=["cosa.dist", "cosa_weights.csv", "cosa_iterations.log"],
    )
    write_json(out / "cosa_report.json", report)
    return 0


def cmd_hclust(args) -> int:
    D, ids, flags = read_dist(args.input)
    out = _outdir(args)
    Dn = D if args.no_normalize else normalize_ss(D)
    dend = agglomerate(Dn, args.linkage)
    write_json(out / "dendrogram.json", {**dend.to_dict(), "ids": ids, "normalized": not args.no_normalize})
    outputs = ["dendrogram.json", "dendrogram.svg"]
    colors = read_labels(args.color_groups) if args.color_groups else None
    groups = None
    if args.cut_height is not None or args.cut_k is not None:
        groups = cut(dend, height=args.cut_height, k=args.cut_k, min_size=args.min_size)
        write_json(out / "groups.json", groups.to_dict(ids))
        outputs.append("groups.json")
        if colors is None:
            colors = groups.labels
    plotting.plot_dendrogram(out / "dendrogram.svg", dend, colors, ids)
    extra = {"n_groups": groups.n_groups, "group_sizes": [len(g) for g in groups.index]} if groups else {}
    inputs = {"dissimilarity": args.input}
    if args.color_groups:
        inputs["color_groups"] = args.color_groups
    write_json(
        out / "hclust_report.json",
        _report(args, inputs, inversions=dend.inversions, outputs=outputs, **extra),
    )
    return 0


def cmd_mds(args) -> int:
    D, ids, flags = read_dist(args.input)
    out = _outdir(args)
    labels = read_labels(args.groups) if args.groups else np.zeros(D.n, dtype=int)
    if len(labels) != D.n:
        raise CosaError(f"groups file has {len(labels)} labels for N={D.n}")
    if args.method == "classical":
        emb = classical_mds(D, args.dims)
    else:
        emb = smacof(D, args.dims, niter=args.niter, interc=args.interc, tol=args.tol,
                     init=args.init, seed=args.seed)
    with (out / "embedding.csv").open("w") as fh:
        fh.write(",".join(["id", *(f"dim{c + 1}" for c in range(args.dims)), "group"]) + "\n")
        for rid, z, lab in zip(ids, emb.Z, labels):
            fh.write(",".join([_csv_cell(rid), *map(repr, z.tolist()), str(int(lab))]) + "\n")
    plotting.plot_embedding(out / "mds.svg", emb.Z, labels, title=args.method)
    extra = {
        "stress": emb.stress,
        "history": emb.history,
        "n_iter": emb.n_iter,
        "transform": emb.transform,
    }
    if emb.transform == "interval":
        extra.update(alpha=emb.alpha, beta=emb.beta)
    if emb.eigenvalues is not None:
        extra.update(eigenvalues=emb.eigenvalues[: min(10, D.n)], negative_eigen=emb.negative_eigen)
    inputs = {"dissimilarity": args.input}
    if args.groups:
        inputs["groups"] = args.groups
    write_json(out / "mds_report.json", _report(args, inputs, outputs=["embedding.csv", "mds.svg"], **extra))
    return 0


def _group_members(args, X: DataMatrix) -> np.ndarray:
    if args.members:
        pos = {rid: i for i, rid in enumerate(X.row_ids)}
        missing = [m for m in args.members if m not in pos]
        if missing:
            raise CosaError(f"unknown object ids: {missing[:5]}")
        return np.array([pos[m] for m in args.members])
    if not args.group_file:
        raise UsageError("attimp needs --group-file or --members")
    labels = read_labels(args.group_file)
    if len(labels) != X.n:
        raise CosaError(f"group file has {len(labels)} labels for N={X.n}")
    return np.flatnonzero(labels == args.group)


def cmd_attimp(args) -> int:
    X = _load_data(args)
    out = _outdir(args)
    group = _group_members(args, X)
    S = compute_scale_factors(X, args.scale)
    targ = TargetSpec.from_data(X, args.targ)
    R = args.range if args.range is not None else X.p
    rep = attimp(X, S, targ, group, R=R, times=args.times, seed=args.seed, norm=args.imp_norm)
    with (out / "importance.csv").open("w") as fh:
        fh.write("rank,attribute,importance,dispersion\n")
        for r, (k, imp, d) in enumerate(zip(rep.att, rep.imp, rep.disp), start=1):
            fh.write(f"{r},{_csv_cell(X.col_ids[k])},{imp!r},{d!r}\n")
    outputs = ["importance.csv", "importance.svg"]
    if args.times > 0:
        rows = np.vstack([rep.null_curves, rep.null_mean[None, :]])
        names = [f"null{t + 1}" for t in range(args.times)] + ["null_mean"]
        write_matrix_csv(out / "importance_null.csv", rows, names, [str(r) for r in range(1, R + 1)], id_col="curve")
        outputs.append("importance_null.csv")
    plotting.plot_importance(out / "importance.svg", rep, title=args.title)
    inputs = {"data": args.input}
    if args.group_file:
        inputs["group_file"] = args.group_file
    write_json(
        out / "attimp_report.json",
        _report(args, inputs, group=[X.row_ids[i] for i in rep.group], outputs=outputs),
    )
    return 0


def cmd_simulate(args) -> int:
    out = _outdir(args)
    if args.design == 1:
        d = gen_design1(args.seed, n=args.n or 60, p=args.p or 500)
    else:
        d = gen_design2(args.seed, n=args.n or 100, p=args.p or 1000)
    write_data_csv(out / "data.csv", d.X)
    write_json(out / "truth.json", d.to_truth())
    write_json(out / "simulate_report.json", _report(args, {}, outputs=["data.csv", "truth.json"]))
    return 0


def cmd_compare(args) -> int:
    X = _load_data(args)
    out = _outdir(args)
    S = compute_scale_factors(X, args.scale)
    truth = read_labels(args.truth) if args.truth else None
    if truth is not None and len(truth) != X.n:
        raise CosaError(f"truth file has {len(truth)} labels for N={X.n}")
    ext = read_weights_csv(args.weights, X.col_ids) if args.weights else None

    res = run_cosa(X, _cosa_params(args))
    # COSA weights on squared attribute distances for the second grid row
    dk = attribute_distances(X, S, TargetSpec.from_data(X, args.targ))
    cosa_sq = DissimilarityMatrix(X.n, maxweight_from_dk(dk * dk, res.W))
    mats = {
        ("l1", "unweighted"): l1_dissimilarity(X, S),
        ("sqeuclid", "unweighted"): sqeuclid_dissimilarity(X, S),
        ("l1", "cosa"): res.D,
        ("sqeuclid", "cosa"): cosa_sq,
    }
    if ext is not None:
        mats[("l1", "external")] = fixed_weight_dissimilarity(X, S, ext, power=1)
        mats[("sqeuclid", "external")] = fixed_weight_dissimilarity(X, S, ext, power=2)

    dends = {key: agglomerate(normalize_ss(D), "average") for key, D in mats.items()}
    outputs = []
    for (r, c), dend in sorted(dends.items()):
        name = f"dendro_{r}_{c}.svg"
        plotting.plot_dendrogram(out / name, dend, truth, title=f"{r} / {c}")
        outputs.append(name)
    plotting.plot_dendrogram_grid(out / "compare_grid.svg", dends, truth)
    outputs.append("compare_grid.svg")

    extra = {"cells": len(dends), "cosa_tunpar": res.tunpar}
    if truth is not None:
        ari = {}
        for (r, c), dend in sorted(dends.items()):
            score, k = best_cut_ari(dend, truth)
            ari[f"{r}/{c}"] = {"ari": score, "k": k}
        extra["ari"] = ari
    inputs = {"data": args.input}
    if args.truth:
        inputs["truth"] = args.truth
    if args.weights:
        inputs["weights"] = args.weights
    write_json(out / "compare_report.json", _report(args, inputs, outputs=outputs, **extra))
    return 0


# -- parser ---------------------------------------------------------------------


def _add_data_args(p):
    p.add_argument("input", help="CSV with a header row")
    p.add_argument("--categorical", type=_csv_list, default=[], help="comma-separated categorical column names")
    p.add_argument("--id-col", default="id", help="row-label column, used if present (default: id)")
    p.add_argument("--scale", choices=("std", "mad"), default="std", help="per-attribute scale factor")
    p.add_argument("--targ", choices=("none", "high", "low", "high/low"), default="none", help="targeting")


def _add_cosa_args(p):
    p.add_argument("--lambda", dest="lam", type=float, default=0.2)
    p.add_argument("--knn", type=int, default=None, help="neighbours (default floor(sqrt(N)))")
    p.add_argument("--max-outer", type=int, default=100)
    p.add_argument("--max-inner", type=int, default=50)
    p.add_argument("--inner-tol", type=float, default=1e-4)
    p.add_argument("--outer-tol", type=float, default=1e-4)
    p.add_argument("--knn-includes-self", action="store_true")


def _add_mds_args(p, method):
    p.add_argument("input", help="condensed dissimilarity file")
    p.add_argument("--method", choices=("smacof", "classical"), default=method)
    p.add_argument("--dims", type=int, default=2)
    p.add_argument("--niter", type=int, default=100)
    p.add_argument("--interc", type=int, choices=(0, 1), default=1)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--init", choices=("classical", "random"), default="classical")
    p.add_argument("--groups", help="groups/truth JSON used to colour points")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cosa", description="Clustering objects on subsets of attributes.")
    parser.add_argument("--version", action="version", version=f"cosa {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("-o", "--outdir", default=".", help="output directory")

    p = sub.add_parser("cosa", aliases=["cosa2"], parents=[common], help="compute COSA dissimilarities")
    _add_data_args(p)
    _add_cosa_args(p)
    p.add_argument("--w-scale", choices=("simplex", "timesP"), default="simplex")
    p.add_argument("-q", "--quiet", action="store_true", help="do not echo the iteration log")
    p.set_defaults(func=cmd_cosa)

    p = sub.add_parser("hclust", aliases=["hierclust"], parents=[common], help="hierarchical clustering")
    p.add_argument("input", help="condensed dissimilarity file")
    p.add_argument("--linkage", choices=LINKAGES, default="average")
    p.add_argument("--no-normalize", action="store_true")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--cut-height", type=float)
    g.add_argument("--cut-k", type=int)
    p.add_argument("--min-size", type=int, default=2)
    p.add_argument("--color-groups", help="groups/truth JSON used to colour leaves")
    p.set_defaults(func=cmd_hclust)

    for name, method in (("mds", "smacof"), ("smacof", "smacof"), ("cmds", "classical")):
        p = sub.add_parser(name, parents=[common], help=f"multidimensional scaling ({method} default)")
        _add_mds_args(p, method)
        p.set_defaults(func=cmd_mds)

    p = sub.add_parser("attimp", parents=[common], help="attribute importance for a group")
    _add_data_args(p)
    p.add_argument("--group-file", help="groups.json or truth.json")
    p.add_argument("--group", type=int, default=1, help="group label to score (default 1)")
    p.add_argument("--members", type=_csv_list, help="explicit comma-separated object ids")
    p.add_argument("--range", type=int, default=None, help="number of ranked attributes to keep")
    p.add_argument("--times", type=int, default=0, help="random groups for the null curves")
    p.add_argument("--imp-norm", choices=("group", "global"), default="group")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--title", default=None)
    p.set_defaults(func=cmd_attimp)

    p = sub.add_parser("simulate", parents=[common], help="generate a planted-cluster data set")
    p.add_argument("--design", type=int, choices=(1, 2), default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--p", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", parents=[common], help="six-dendrogram comparison grid")
    _add_data_args(p)
    _add_cosa_args(p)
    p.add_argument("--truth", help="truth JSON with object_labels")
    p.add_argument("--weights", help="external attribute weights CSV (attribute,weight)")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args._argv = argv
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except CosaError as exc:
        print(f"cosa: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"cosa: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (UsageError, ValueError) as exc:
        print(f"cosa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
