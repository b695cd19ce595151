"""Command line interface.

Exit codes: 0 success, 2 bad arguments, 3 malformed input data,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .attention import AdmmParams
from .data import (
    DatasetBundle,
    load_features,
    make_synthetic,
    save_binmat,
    save_csv,
    save_labels,
)
from .dictlearn import INDUCTIVE, TRANSDUCTIVE
from .errors import (
    InputError,
    InternalError,
    NumericalError,
    ParameterError,
)
from .harness import (
    ABLATIONS,
    ExperimentConfig,
    ablation_suite,
    mask_sweep,
    run,
    write_json,
)
from .hypergraph import HypergraphConfig, build_laplacian


def _add_common(parser):
    parser.add_argument("--epsilon", type=float, default=2.0 ** -6,
                        help="attention l1 weight")
    parser.add_argument("--alpha", type=float, default=2.0 ** -6,
                        help="code l1 weight")
    parser.add_argument("--beta", type=float, default=2.0 ** 3,
                        help="manifold regularizer weight")
    parser.add_argument("--gamma", type=float, default=None,
                        help="test-coding l1 weight (defaults to alpha)")
    parser.add_argument("--knn", type=int, default=10,
                        help="neighborhood size per hyperedge")
    parser.add_argument("--dict-size", type=int, default=200,
                        help="number of dictionary atoms (capped at the corpus size)")
    parser.add_argument("--mode", choices=[INDUCTIVE, TRANSDUCTIVE],
                        default=INDUCTIVE)
    parser.add_argument("--ablation", choices=list(ABLATIONS), default="full")
    parser.add_argument("--mask-fraction", type=float, default=0.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--format", choices=["csv", "binmat"], default="csv",
                        help="on-disk format of feature files")


def _config(args, **overrides) -> ExperimentConfig:
    values = dict(
        epsilon=args.epsilon,
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        k_nn=args.knn,
        dict_size=args.dict_size,
        mode=args.mode,
        ablation=args.ablation,
        mask_fraction=args.mask_fraction,
        seed=args.seed,
    )
    values.update(overrides)
    return ExperimentConfig(**values)


def _load_bundle(args, need_test) -> DatasetBundle:
    X_train, y_train = load_features(args.train, args.format)
    if y_train is None:
        raise InputError(f"{args.train}: training labels required")
    X_test = y_test = None
    if getattr(args, "test", None):
        X_test, y_test = load_features(args.test, args.format)
    elif need_test:
        raise ParameterError("this subcommand requires --test")
    return DatasetBundle(X_train, y_train, X_test, y_test)


def cmd_train(args):
    bundle = _load_bundle(args, need_test=False)
    report = run(_config(args), bundle, out_path=args.out)
    where = "test" if bundle.test_features is not None else "train"
    print(f"{where} accuracy {report.accuracy:.4f} -> {args.out}")
    return 0


def cmd_eval(args):
    bundle = _load_bundle(args, need_test=True)
    report = run(_config(args), bundle, out_path=args.out)
    print(f"test accuracy {report.accuracy:.4f} -> {args.out}")
    return 0


def cmd_ablate(args):
    bundle = _load_bundle(args, need_test=False)
    seeds = range(args.seed, args.seed + args.seeds)
    result = ablation_suite(_config(args), bundle, seeds)
    write_json(result, args.out)
    means = result["mean_accuracy"]
    print(
        "mean accuracy "
        + " ".join(f"{name}={means[name]:.4f}" for name in means)
        + f" -> {args.out}"
    )
    return 0


def cmd_mask_sweep(args):
    bundle = _load_bundle(args, need_test=False)
    try:
        fractions = [float(tok) for tok in args.fractions.split(",") if tok]
    except ValueError:
        raise ParameterError(f"bad --fractions value {args.fractions!r}")
    seeds = range(args.seed, args.seed + args.seeds)
    result = mask_sweep(_config(args), bundle, fractions, seeds)
    write_json(result, args.out)
    gaps = " ".join(f"{g:+.4f}" for g in result["gap"])
    print(f"accuracy gap per fraction: {gaps} -> {args.out}")
    return 0


def cmd_synth(args):
    bundle = make_synthetic(
        n_classes=args.classes,
        per_class_train=args.per_class_train,
        per_class_test=args.per_class_test,
        dim=args.dim,
        noise_sigma=args.noise_sigma,
        seed=args.seed,
    )
    parts = [("train", bundle.train_features, bundle.train_labels)]
    if bundle.test_features is not None:
        parts.append(("test", bundle.test_features, bundle.test_labels))
    for name, X, y in parts:
        if args.format == "csv":
            path = f"{args.out}_{name}.csv"
            save_csv(path, X, y)
        else:
            path = f"{args.out}_{name}.binmat"
            save_binmat(path, X)
            save_labels(f"{path}.labels", y)
        print(f"wrote {path} ({X.shape[1]} samples, dim {X.shape[0]})")
    return 0


def cmd_export_laplacian(args):
    X, labels = load_features(args.train, args.format)
    if getattr(args, "test", None) and args.mode == TRANSDUCTIVE:
        X_extra, _ = load_features(args.test, args.format)
        if X_extra.shape[0] != X.shape[0]:
            raise InputError("test feature dimension differs from train")
        from .hypergraph import UNLABELED

        pad = np.full(X_extra.shape[1], UNLABELED)
        labels = (
            np.concatenate([labels, pad]) if labels is not None else None
        )
        X = np.hstack([X, X_extra])
    config = HypergraphConfig(
        admm=AdmmParams(epsilon=args.epsilon),
        k_nn=args.knn,
        use_attention=args.ablation != "saf-off",
        use_labels=args.ablation != "lb-off",
    )
    delta = build_laplacian(X, labels, config)
    save_binmat(args.out, delta)
    print(f"wrote {args.out} ({delta.shape[0]}x{delta.shape[1]})")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hgdl",
        description=(
            "Hypergraph-regularized dictionary learning with sparse"
            " attention neighborhood weighting."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit a model and report scores")
    p_train.add_argument("--train", required=True)
    p_train.add_argument("--test")
    p_train.add_argument("--out", required=True, help="report JSON path")
    _add_common(p_train)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="fit on train, score on test")
    p_eval.add_argument("--train", required=True)
    p_eval.add_argument("--test", required=True)
    p_eval.add_argument("--out", required=True, help="report JSON path")
    _add_common(p_eval)
    p_eval.set_defaults(func=cmd_eval)

    p_ablate = sub.add_parser("ablate", help="run full and ablated variants")
    p_ablate.add_argument("--train", required=True)
    p_ablate.add_argument("--test")
    p_ablate.add_argument("--out", required=True)
    p_ablate.add_argument("--seeds", type=int, default=1,
                          help="number of seeds, starting at --seed")
    _add_common(p_ablate)
    p_ablate.set_defaults(func=cmd_ablate)

    p_mask = sub.add_parser("mask-sweep",
                            help="accuracy vs mask fraction, with baseline")
    p_mask.add_argument("--train", required=True)
    p_mask.add_argument("--test")
    p_mask.add_argument("--out", required=True)
    p_mask.add_argument("--fractions", default="0,0.2,0.4,0.6")
    p_mask.add_argument("--seeds", type=int, default=1)
    _add_common(p_mask)
    p_mask.set_defaults(func=cmd_mask_sweep)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("--out", required=True, help="output path prefix")
    p_synth.add_argument("--classes", type=int, default=4)
    p_synth.add_argument("--per-class-train", type=int, default=5)
    p_synth.add_argument("--per-class-test", type=int, default=10)
    p_synth.add_argument("--dim", type=int, default=50)
    p_synth.add_argument("--noise-sigma", type=float, default=0.3)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--format", choices=["csv", "binmat"], default="csv")
    p_synth.set_defaults(func=cmd_synth)

    p_lap = sub.add_parser("export-laplacian",
                           help="write the hypergraph Laplacian as binmat")
    p_lap.add_argument("--train", required=True)
    p_lap.add_argument("--test")
    p_lap.add_argument("--out", required=True, help="binmat output path")
    _add_common(p_lap)
    p_lap.set_defaults(func=cmd_export_laplacian)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (NumericalError, InternalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
