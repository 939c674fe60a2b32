"""Command line interface.

Subcommands: gen, cut, folds, classify, train-lstm, hybrid, sweep-g,
bench, report.  All file formats are the documented CSV/npz forms; every
command touching randomness takes --seed.  Exit codes: 0 success, 1 error
(diagnostic on stderr), 2 usage.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import harness as ev
from . import hybrid as hy
from . import lstm as lstm_mod
from . import series as se
from . import synth
from ._backend import active_backend
from .distances import DistanceSpec


def _add_seed(parser, default=0):
    parser.add_argument("--seed", type=int, default=default,
                        help="random seed (default %(default)s)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powerseq",
        description="Power-trace time series classification toolkit "
                    f"(kernel backend: {active_backend()})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic labeled corpus")
    p.add_argument("--out", required=True, help="corpus CSV to write")
    p.add_argument("--traces-per-class", type=int, default=40)
    p.add_argument("--min-len", type=int, default=260)
    p.add_argument("--profiles", help="profile bundle config to use "
                                      "(default: built-in 13-class bundle)")
    p.add_argument("--write-profiles", help="also write the bundle used")
    _add_seed(p)

    p = sub.add_parser("cut", help="cut traces into fixed-length windows")
    p.add_argument("--in", dest="inp", required=True, help="trace CSV")
    p.add_argument("--out", required=True, help="window CSV to write")
    p.add_argument("--length", type=int, default=200)
    p.add_argument("--stride", type=int, default=50)

    p = sub.add_parser("folds", help="assign traces to folds (before cutting)")
    p.add_argument("--in", dest="inp", required=True, help="trace CSV")
    p.add_argument("--out", required=True, help="fold plan CSV to write")
    p.add_argument("--num-folds", type=int, default=5)
    _add_seed(p)

    p = sub.add_parser("classify", help="per-fold 1NN accuracy for a distance spec")
    p.add_argument("--windows", required=True, help="window CSV")
    p.add_argument("--plan", required=True, help="fold plan CSV")
    p.add_argument("--spec", required=True,
                   help="distance spec, e.g. dtw:w=30:cost=sq or ltw:G=1-10:cid")
    p.add_argument("--out", required=True, help="per-fold accuracy CSV")
    p.add_argument("--audit", help="also write per-query predictions CSV")

    p = sub.add_parser("train-lstm", help="train the LSTM on one fold's training split")
    p.add_argument("--windows", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--fold-test", type=int, required=True)
    p.add_argument("--out", required=True, help="checkpoint file (.npz)")
    p.add_argument("--trace", help="loss trace CSV (epoch,loss,train_acc)")
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--batch-size", type=int, default=60)
    p.add_argument("--hidden", type=int, default=90)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--levels", type=int, default=100)
    _add_seed(p)

    p = sub.add_parser("hybrid", help="fuse kNN and LSTM probabilities on one fold")
    p.add_argument("--windows", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--fold-test", type=int, required=True)
    p.add_argument("--checkpoint", required=True, help="LSTM checkpoint (.npz)")
    p.add_argument("--spec", default="ltw:G=1-10:cid",
                   help="kNN distance spec (default %(default)s)")
    p.add_argument("--neighbors", type=int, default=5)
    p.add_argument("--out", required=True, help="audit CSV to write")

    p = sub.add_parser("sweep-g", help="1NN accuracy across warping index sets")
    p.add_argument("--windows", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--g", default="1;1-4;1-8;1-12",
                   help="semicolon-separated warping sets (default %(default)s)")
    p.add_argument("--out", required=True, help="sweep grid CSV")

    p = sub.add_parser("bench", help="kernel timing/scaling benchmark")
    p.add_argument("--lengths", default="100,200,400,800")
    p.add_argument("--pairs", type=int, default=100)
    p.add_argument("--specs", default="ltw:G=10;dtw",
                   help="semicolon-separated distance specs")
    p.add_argument("--backends", default="active",
                   choices=["active", "both", "numba", "numpy"])
    p.add_argument("--out", required=True, help="timing CSV")
    _add_seed(p)

    p = sub.add_parser("report", help="metrics from two persisted prediction audits")
    p.add_argument("--audit-a", required=True)
    p.add_argument("--audit-b", required=True)
    p.add_argument("--out", required=True, help="report CSV")
    p.add_argument("--dat", help="also write a gnuplot-ready .dat table")

    return parser


def _load_windows(path) -> se.Dataset:
    windows = se.load_csv(path)
    return se.Dataset.from_windows(windows)


def _cmd_gen(args) -> int:
    profiles = synth.load_profiles(args.profiles) if args.profiles \
        else synth.default_profiles()
    corpus = synth.generate_corpus(profiles, args.traces_per_class,
                                   args.min_len, args.seed)
    se.save_csv(corpus, args.out)
    if args.write_profiles:
        synth.save_profiles(profiles, args.write_profiles)
    print(f"wrote {len(corpus)} traces ({len(profiles)} classes) to {args.out}")
    return 0


def _cmd_cut(args) -> int:
    traces = se.load_csv(args.inp)
    windows = []
    for trace in traces:
        windows.extend(se.cut_windows(trace, args.length, args.stride))
    se.save_csv(windows, args.out)
    print(f"cut {len(traces)} traces into {len(windows)} windows of "
          f"length {args.length}")
    return 0


def _cmd_folds(args) -> int:
    traces = se.load_csv(args.inp)
    plan = se.partition_folds(traces, args.num_folds, args.seed)
    se.save_fold_plan(plan, args.out)
    print(f"assigned {len(plan.assignment)} traces to {plan.num_folds} folds")
    return 0


def _cmd_classify(args) -> int:
    dataset = _load_windows(args.windows)
    plan = se.load_fold_plan(args.plan)
    spec = DistanceSpec.parse(args.spec)
    clf = ev.NnClassifier("nn", spec)
    report = ev.run_folds(dataset, plan, [clf])
    import csv as _csv

    with open(args.out, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["fold", "n_test", "accuracy"])
        for fold in range(plan.num_folds):
            out = report.outcomes["nn"][fold]
            writer.writerow([fold, len(out.predictions),
                             f"{out.mean_accuracy:.6f}"])
    if args.audit:
        ev.write_predictions_csv(report, "nn", args.audit)
    for fold in range(plan.num_folds):
        print(f"fold {fold}: accuracy {report.accuracy('nn', fold):.4f}")
    return 0


def _cmd_train_lstm(args) -> int:
    dataset = _load_windows(args.windows)
    plan = se.load_fold_plan(args.plan)
    train, _ = se.split(dataset, plan, args.fold_test)
    config = lstm_mod.TrainConfig(
        batch_size=min(args.batch_size, len(train)),
        max_epochs=args.epochs,
        learning_rate=args.lr,
        levels=args.levels,
        seed=args.seed,
        hidden=args.hidden,
    )
    params, trace = lstm_mod.train(train, config)
    lstm_mod.save_checkpoint(args.out, params, levels=args.levels,
                             seed=args.seed, epoch=args.epochs)
    if args.trace:
        lstm_mod.write_loss_trace(args.trace, trace)
    final = trace[-1]
    print(f"trained {args.epochs} epochs on {len(train)} windows; "
          f"final loss {final.loss:.4f}, train accuracy {final.train_acc:.4f}")
    return 0


def _cmd_hybrid(args) -> int:
    dataset = _load_windows(args.windows)
    plan = se.load_fold_plan(args.plan)
    train, test = se.split(dataset, plan, args.fold_test)
    params, meta = lstm_mod.load_checkpoint(args.checkpoint)
    config = hy.HybridConfig(
        lstm_params=params,
        levels=meta["levels"],
        ltw_spec=DistanceSpec.parse(args.spec),
        m_neighbors=args.neighbors,
    )
    preds, records = hy.hybrid_classify_batch(test, train, config)
    hy.save_audit_csv(records, train.num_classes, args.out)
    y = test.labels()
    acc = float(np.mean(np.asarray(preds) == y))
    acc_ltw = float(np.mean([r.pred_ltw == r.true_label for r in records]))
    acc_lstm = float(np.mean([r.pred_lstm == r.true_label for r in records]))
    print(f"fold {args.fold_test}: hybrid {acc:.4f} "
          f"(nn {acc_ltw:.4f}, lstm {acc_lstm:.4f}); audit -> {args.out}")
    return 0


def _cmd_sweep_g(args) -> int:
    from .distances import WarpIndexSet

    dataset = _load_windows(args.windows)
    plan = se.load_fold_plan(args.plan)
    sets = [WarpIndexSet.parse(part) for part in args.g.split(";") if part.strip()]
    classifiers = [
        ev.NnClassifier(f"G={{{ws.to_string()}}}",
                        DistanceSpec("ltw", G=ws))
        for ws in sets
    ]
    report = ev.run_folds(dataset, plan, classifiers)
    import csv as _csv

    with open(args.out, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["fold"] + [c.name for c in classifiers])
        for fold in range(plan.num_folds):
            writer.writerow([fold] + [
                f"{report.accuracy(c.name, fold):.6f}" for c in classifiers
            ])
    print(f"swept {len(sets)} warping sets over {plan.num_folds} folds -> {args.out}")
    return 0


def _cmd_bench(args) -> int:
    lengths = [int(v) for v in args.lengths.split(",") if v.strip()]
    specs = [DistanceSpec.parse(s) for s in args.specs.split(";") if s.strip()]
    if args.backends == "both":
        backends = ["numba", "numpy"]
    else:
        backends = [args.backends]
    rows = ev.bench_kernels(lengths, args.pairs, specs, backends=backends,
                            seed=args.seed)
    ev.write_bench_csv(rows, args.out)
    for row in rows:
        ratio = "" if row.ratio_vs_half is None else f"  x{row.ratio_vs_half:.2f}"
        print(f"{row.spec:24s} {row.backend:6s} n={row.length:<5d} "
              f"{row.seconds_per_eval * 1e6:9.2f} us/eval{ratio}")
    return 0


def _cmd_report(args) -> int:
    result = ev.audit_pair_report(args.audit_a, args.audit_b)
    ev.write_audit_pair_csv(result, args.out)
    if args.dat:
        with open(args.dat, "w") as fh:
            fh.write("# fold acc_a acc_b union\n")
            for fold in sorted(result["folds"]):
                row = result["folds"][fold]
                fh.write(f"{fold} {row['acc_a']:.6f} {row['acc_b']:.6f} "
                         f"{row['union']:.6f}\n")
    for fold in sorted(result["folds"]):
        row = result["folds"][fold]
        print(f"fold {fold}: acc_a {row['acc_a']:.4f} acc_b {row['acc_b']:.4f} "
              f"union {row['union']:.4f}")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "cut": _cmd_cut,
    "folds": _cmd_folds,
    "classify": _cmd_classify,
    "train-lstm": _cmd_train_lstm,
    "hybrid": _cmd_hybrid,
    "sweep-g": _cmd_sweep_g,
    "bench": _cmd_bench,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"powerseq {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
