"""Command-line driver: synthetic data, clustering runs, evaluation.

Three subcommands: ``synth`` writes a union-of-subspaces dataset,
``cluster`` runs the SSC or DSSC pipeline end to end and emits a
machine-readable report, ``eval`` scores two label files. Run
configuration comes from a flat ``key = value`` file; unknown keys are
rejected so typos in experiment configs fail loudly.
"""

import argparse
import json
import os
import sys

from deepssc import data, metrics, sparse, spectral, trainer
from deepssc.errors import ConfigError
from deepssc.network import ACTIVATIONS, init_network

CONFIG_KEYS = (
    "method",
    "gamma",
    "delta",
    "lambda",
    "mu",
    "tau",
    "conv_tol",
    "layers",
    "activation",
    "alternation",
    "post_linearize",
    "normalize_input",
    "pca_dim",
    "k",
    "seed",
    "kmeans_restarts",
)


def _parse_bool(text, key):
    if text.lower() in ("true", "1", "yes"):
        return True
    if text.lower() in ("false", "0", "no"):
        return False
    raise ConfigError(f"config key {key!r}: expected a boolean, got {text!r}")


def parse_config(path):
    """Parse the flat key = value run configuration."""
    raw = {}
    try:
        handle = open(path)
    except OSError as exc:
        raise ConfigError(f"cannot open config {path}: {exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
            key, _, value = text.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}: line {lineno}: unknown key {key!r}")
            if key in raw:
                raise ConfigError(f"{path}: line {lineno}: duplicate key {key!r}")
            raw[key] = value

    cfg = {
        "method": raw.get("method"),
        "gamma": 0.05,
        "delta": 1e-4,
        "lambda_mode": "auto",
        "lambda_value": None,
        "mu": 1e-3,
        "tau": 100,
        "conv_tol": 1e-3,
        "layers": None,
        "activation": "tanh",
        "alternation": "per_sample",
        "post_linearize": False,
        "normalize_input": True,
        "pca_dim": None,
        "k": None,
        "seed": 0,
        "kmeans_restarts": 20,
    }
    if cfg["method"] not in ("ssc", "dssc"):
        raise ConfigError("config must set method = ssc or method = dssc")
    try:
        for key in ("gamma", "delta", "mu", "conv_tol"):
            if key in raw:
                cfg[key] = float(raw[key])
        for key in ("tau", "seed", "kmeans_restarts"):
            if key in raw:
                cfg[key] = int(raw[key])
        if "pca_dim" in raw:
            cfg["pca_dim"] = int(raw["pca_dim"])
        if "k" in raw:
            cfg["k"] = int(raw["k"])
        if "layers" in raw:
            cfg["layers"] = [int(v) for v in raw["layers"].split(",")]
        if "lambda" in raw:
            if raw["lambda"] == "auto":
                cfg["lambda_mode"] = "auto"
            else:
                cfg["lambda_mode"] = "explicit"
                cfg["lambda_value"] = float(raw["lambda"])
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for key in ("post_linearize", "normalize_input"):
        if key in raw:
            cfg[key] = _parse_bool(raw[key], key)
    if "activation" in raw:
        if raw["activation"] not in ACTIVATIONS:
            raise ConfigError(f"unknown activation {raw['activation']!r}")
        cfg["activation"] = raw["activation"]
    if "alternation" in raw:
        if raw["alternation"] not in ("per_sample", "per_epoch"):
            raise ConfigError(f"unknown alternation {raw['alternation']!r}")
        cfg["alternation"] = raw["alternation"]
    if cfg["k"] is None or cfg["k"] < 2:
        raise ConfigError("config must set k >= 2")
    if cfg["method"] == "dssc" and not cfg["layers"]:
        raise ConfigError("method = dssc requires a layers list")
    return cfg


def _sig6(value):
    return float(f"{value:.6g}")


def cmd_synth(args):
    spec = data.SynthSpec(
        num_subspaces=args.subspaces,
        ambient_dim=args.dim,
        subspace_dim=args.subdim,
        points_per=args.per,
        noise_sigma=args.noise,
        warp="cubic_rotate" if args.kind == "nonlinear" else "identity",
        seed=args.seed,
    )
    if args.kind == "linear":
        dataset = data.gen_linear_subspaces(spec)
    else:
        dataset = data.gen_nonlinear_subspaces(spec)
    data.save_matrix_csv(args.out, dataset.x)
    if args.labels:
        data.save_labels(args.labels, dataset.labels)
    return 0


def _run_pipeline(cfg, x):
    """PCA, normalization, then the SSC or DSSC clustering pipeline."""
    d_input = x.shape[0]
    if cfg["pca_dim"] is not None:
        x, _, _ = data.pca_reduce(x, cfg["pca_dim"])
    if cfg["normalize_input"]:
        x = data.normalize_columns(x)
    d, n = x.shape

    trace = trainer.TrainTrace()
    if cfg["method"] == "ssc":
        params = init_network([d], cfg["activation"])
        coeff = sparse.self_expression(x, cfg["gamma"], cfg["delta"])
        feats = x
    else:
        tcfg = trainer.TrainerConfig(
            layer_dims=cfg["layers"],
            gamma=cfg["gamma"],
            delta=cfg["delta"],
            lambda_mode=cfg["lambda_mode"],
            lambda_value=cfg["lambda_value"],
            mu=cfg["mu"],
            tau=cfg["tau"],
            conv_tol=cfg["conv_tol"],
            activation=cfg["activation"],
            alternation=cfg["alternation"],
            post_linearize=cfg["post_linearize"],
            normalize_input=cfg["normalize_input"],
            seed=cfg["seed"],
        )
        dataset = data.Dataset(x=x)
        params, coeff, trace = trainer.train(dataset, tcfg)
        feats = trainer.infer_features(params, x, cfg["post_linearize"])
        if cfg["post_linearize"]:
            # re-solve the codes on the linearized features for clustering
            coeff = sparse.self_expression(feats, cfg["gamma"], cfg["delta"])

    affinity = spectral.build_affinity(coeff)
    assignment = spectral.spectral_cluster(
        affinity, cfg["k"], restarts=cfg["kmeans_restarts"], seed=cfg["seed"]
    )
    lam = trainer.TrainerConfig(
        layer_dims=[d],
        gamma=cfg["gamma"],
        lambda_mode=cfg["lambda_mode"],
        lambda_value=cfg["lambda_value"],
    ).effective_lambda(n)
    if trace.records:
        final_loss = trace.records[-1].loss
    else:
        final_loss = trainer.compute_loss(params, x, coeff, cfg["gamma"], lam)
    return {
        "labels": assignment.labels,
        "trace": trace,
        "final_loss": final_loss,
        "d_input": d_input,
        "d_latent": feats.shape[0],
        "n": n,
    }


def _write_report(path, cfg, result, truth):
    report = {
        "method": cfg["method"],
        "n": result["n"],
        "k": cfg["k"],
        "d_input": result["d_input"],
        "d_latent": result["d_latent"],
        "epochs_run": result["trace"].epochs_run,
        "seed": cfg["seed"],
        "final_loss": {
            "total": _sig6(result["final_loss"].total),
            "recon": _sig6(result["final_loss"].recon),
            "l1": _sig6(result["final_loss"].l1),
            "sphere": _sig6(result["final_loss"].sphere),
        },
    }
    if truth is not None:
        pred = result["labels"]
        report["acc"] = _sig6(metrics.accuracy(pred, truth))
        report["nmi"] = _sig6(metrics.nmi(pred, truth))
        report["ari"] = _sig6(metrics.ari(pred, truth))
        report["fscore"] = _sig6(metrics.pairwise_fscore(pred, truth))
    with open(path, "w") as handle:
        json.dump(report, handle, indent=2)
        handle.write("\n")


def _write_trace(path, trace):
    with open(path, "w", newline="") as handle:
        handle.write("epoch,loss_total,loss_recon,loss_l1,loss_sphere,seconds\n")
        for rec in trace.records:
            handle.write(
                f"{rec.epoch},{rec.loss.total!r},{rec.loss.recon!r},"
                f"{rec.loss.l1!r},{rec.loss.sphere!r},{rec.seconds!r}\n"
            )


def cmd_cluster(args):
    written = []
    try:
        cfg = parse_config(args.config)
        x = data.load_matrix_csv(args.data)
        truth = None
        if args.labels:
            truth = data.compact_labels(data.load_labels(args.labels))
            if truth.shape[0] != x.shape[1]:
                raise ConfigError(
                    f"{args.labels} has {truth.shape[0]} labels for "
                    f"{x.shape[1]} samples"
                )
        result = _run_pipeline(cfg, x)
        if args.pred:
            written.append(args.pred)
            data.save_labels(args.pred, result["labels"])
        written.append(args.out)
        _write_report(args.out, cfg, result, truth)
        if args.trace and cfg["method"] == "dssc":
            written.append(args.trace)
            _write_trace(args.trace, result["trace"])
        return 0
    except Exception as exc:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        print(f"error: {exc}", file=sys.stderr)
        return 1


def cmd_eval(args):
    pred = data.compact_labels(data.load_labels(args.pred))
    truth = data.compact_labels(data.load_labels(args.truth))
    if pred.shape[0] != truth.shape[0]:
        raise ConfigError(
            f"label files differ in length: {pred.shape[0]} vs {truth.shape[0]}"
        )
    out = {
        "acc": _sig6(metrics.accuracy(pred, truth)),
        "nmi": _sig6(metrics.nmi(pred, truth)),
        "ari": _sig6(metrics.ari(pred, truth)),
        "fscore": _sig6(metrics.pairwise_fscore(pred, truth)),
    }
    print(json.dumps(out))
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="deepssc", description="Subspace clustering toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("--kind", choices=("linear", "nonlinear"), required=True)
    p_synth.add_argument("--subspaces", type=int, required=True)
    p_synth.add_argument("--dim", type=int, required=True)
    p_synth.add_argument("--subdim", type=int, required=True)
    p_synth.add_argument("--per", type=int, required=True)
    p_synth.add_argument("--noise", type=float, default=0.0)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--labels")
    p_synth.set_defaults(func=cmd_synth)

    p_cluster = sub.add_parser("cluster", help="run the clustering pipeline")
    p_cluster.add_argument("--config", required=True)
    p_cluster.add_argument("--data", required=True)
    p_cluster.add_argument("--labels")
    p_cluster.add_argument("--out", required=True)
    p_cluster.add_argument("--pred")
    p_cluster.add_argument("--trace")
    p_cluster.set_defaults(func=cmd_cluster)

    p_eval = sub.add_parser("eval", help="score predicted against true labels")
    p_eval.add_argument("--pred", required=True)
    p_eval.add_argument("--truth", required=True)
    p_eval.set_defaults(func=cmd_eval)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.func is cmd_cluster:
        return args.func(args)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
