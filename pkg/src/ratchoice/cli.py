"""Command-line entry point.

Subcommands: ``rank``, ``gen-data``, ``train``, ``control``, ``report`` and
``demo`` (which chains the last four). Exit codes: 0 success, 1 input or
configuration error, 2 numerical failure.

Any option can also come from ``--config FILE``, a flat ``key=value`` file
whose keys are option names (dashes or underscores). Command-line flags win
over the file; unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import conflict_data as cdata
from . import control, expectations, utility
from .errors import DivergenceError

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2


class UsageError(Exception):
    pass


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _parse_bool(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {raw!r}")


def read_config(path) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _require_seed(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required for this command")
    return args.seed


# --- commands ---------------------------------------------------------------


def cmd_rank(args) -> int:
    alts = utility.read_alternatives_csv(args.alternatives)
    if not alts:
        _warn(f"{args.alternatives} holds no alternatives; writing header only")
        utility.write_ranking_csv(args.out, [])
        return EXIT_OK
    ranking = utility.rank_alternatives(alts)
    utility.write_ranking_csv(args.out, ranking)
    best, u = ranking[0]
    print(f"chosen: {best.id} utility={u:.8f}")
    if len(ranking) > 1:
        print(f"opportunity cost: {ranking[1][1]:.8f} (forgone {ranking[1][0].id})")
    else:
        print("opportunity cost: n/a (single alternative)")
    return EXIT_OK


def _synth_config(args) -> cdata.SynthConfig:
    kwargs = {"n": args.n, "seed": _require_seed(args), "noise_sd": args.noise_sd}
    if args.coefficients:
        kwargs["coefficients"] = tuple(float(c) for c in args.coefficients.split(","))
    return cdata.SynthConfig(**kwargs)


def cmd_gen_data(args) -> int:
    dyads = cdata.synth_generate(_synth_config(args))
    cdata.write_csv(args.out, dyads)
    rate = np.mean([d.outcome for d in dyads])
    print(f"wrote {len(dyads)} dyads to {args.out} (conflict fraction {rate:.4f})")
    return EXIT_OK


def _layers(hidden: str) -> list[int]:
    widths = [int(h) for h in hidden.split(",") if h.strip()] if hidden else []
    return [len(cdata.FEATURES)] + widths + [1]


def _norm_path(model_path, norm_path) -> Path:
    return Path(norm_path) if norm_path else Path(str(model_path) + ".norm.csv")


def cmd_train(args) -> int:
    seed = _require_seed(args)
    dyads, dropped = cdata.load_observations(args.data)
    if dropped:
        print(f"lagging dropped {dropped} row(s) without a previous year")
    if not dyads:
        raise UsageError(f"{args.data} holds no usable rows")
    cfg = expectations.TrainConfig(args.lr, args.epochs, seed, args.train_fraction)
    full = expectations.LabeledDataset(cdata.feature_matrix(dyads), cdata.outcomes(dyads), cdata.FEATURES)
    train_raw, hold_raw = full.split(cfg.train_fraction, seed)
    norm = cdata.NormParams.fit(train_raw.features)
    train_set = expectations.LabeledDataset(norm.apply(train_raw.features), train_raw.targets, cdata.FEATURES)
    model = expectations.init_model(_layers(args.hidden), seed)
    model, curve = expectations.train(model, train_set, cfg)

    expectations.save_model(model, args.out)
    norm.save(_norm_path(args.out, args.norm_out))
    loss_out = Path(args.loss_out) if args.loss_out else Path(str(args.out) + ".loss.csv")
    with open(loss_out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["epoch", "loss"])
        for i, v in enumerate(curve):
            writer.writerow([i, repr(v)])

    print(f"train accuracy: {expectations.accuracy(model, train_set):.4f}")
    if hold_raw is None:
        print("holdout accuracy: n/a (train_fraction = 1)")
    else:
        hold = expectations.LabeledDataset(norm.apply(hold_raw.features), hold_raw.targets, cdata.FEATURES)
        print(f"holdout accuracy: {expectations.accuracy(model, hold):.4f}")
    return EXIT_OK


def _strategies(args) -> list[control.ControlStrategy]:
    sa = control.AnnealingSchedule(
        alpha=args.sa_alpha, steps_per_temp=args.sa_steps, t_min=args.sa_t_min, restarts=args.sa_restarts
    )
    if args.all:
        if args.strategy:
            raise UsageError("use either --all or --strategy, not both")
        return control.standard_strategies(sa=sa)
    if not args.strategy:
        raise UsageError("give --strategy (repeatable) or --all")
    return [control.ControlStrategy.parse(s, sa=sa) for s in args.strategy]


def cmd_control(args) -> int:
    strategies = _strategies(args)
    seed = args.seed
    if any(s.mode == "multiple" for s in strategies):
        seed = _require_seed(args)
    model = expectations.load_model(args.model)
    norm = cdata.NormParams.load(_norm_path(args.model, args.norm))
    dyads, _ = cdata.load_observations(args.data)
    reports = [
        control.avoidance_report(model, norm, dyads, s, threshold=args.threshold, seed=seed or 0) for s in strategies
    ]
    control.write_summary_csv(args.out, reports)
    if args.detail_out:
        control.write_detail_csv(args.detail_out, reports)
    print(f"avoided = predicted risk below {args.threshold}")
    for rep in reports:
        print(f"{rep.strategy.label}: {rep.n_avoided}/{rep.n_conflicts} avoided ({rep.percent_avoided:.2f}%)")
    return EXIT_OK


def cmd_report(args) -> int:
    rows = control.read_summary_csv(args.summary)
    if not rows:
        raise UsageError(f"{args.summary} has no summary rows")
    plot = control.plot_rows(rows)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["strategy_label", "percent_avoided"])
        for label, pct in plot:
            writer.writerow([label, repr(pct)])
    return EXIT_OK


def cmd_demo(args) -> int:
    seed = _require_seed(args)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    data, model = out / "dyads.csv", out / "model.txt"
    summary, detail, plot = out / "summary.csv", out / "detail.csv", out / "plot.csv"
    steps = [
        ["gen-data", "--n", str(args.n), "--seed", str(seed), "--out", str(data)],
        ["train", "--data", str(data), "--seed", str(seed), "--epochs", str(args.epochs), "--out", str(model)],
        ["control", "--model", str(model), "--data", str(data), "--all", "--seed", str(seed),
         "--out", str(summary), "--detail-out", str(detail)],
        ["report", str(summary), "--out", str(plot)],
    ]
    for argv in steps:
        print(f"$ ratchoice {' '.join(argv)}")
        code = main(argv)
        if code != EXIT_OK:
            return code
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="ratchoice", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", help="flat key=value file supplying option values")
        p.set_defaults(func=func)
        subs[name] = p
        return p

    p = add("rank", cmd_rank, "rank alternatives by inverse-cost utility")
    p.add_argument("alternatives", help="CSV with header id,label,cost")
    p.add_argument("--out", required=True)

    p = add("gen-data", cmd_gen_data, "generate synthetic dyads")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--noise-sd", type=float, default=0.0)
    p.add_argument("--coefficients", help="8 comma-separated values: intercept then one per feature")
    p.add_argument("--out", required=True)

    p = add("train", cmd_train, "train the conflict-risk network")
    p.add_argument("--data", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--hidden", default="10", help="comma-separated hidden widths")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--out", required=True, help="model file")
    p.add_argument("--norm-out", help="normalization file (default <out>.norm.csv)")
    p.add_argument("--loss-out", help="loss curve CSV (default <out>.loss.csv)")

    p = add("control", cmd_control, "tune controllable variables of conflict dyads")
    p.add_argument("--model", required=True)
    p.add_argument("--norm", help="normalization file (default <model>.norm.csv)")
    p.add_argument("--data", required=True)
    p.add_argument("--strategy", action="append", help="single:<var> or multiple[:<var>,...]; repeatable")
    p.add_argument("--all", action="store_true", help="four single strategies plus all four jointly")
    p.add_argument("--seed", type=int)
    p.add_argument("--threshold", type=float, default=control.DEFAULT_THRESHOLD)
    p.add_argument("--sa-restarts", type=int, default=control.DEFAULT_SA.restarts)
    p.add_argument("--sa-steps", type=int, default=control.DEFAULT_SA.steps_per_temp)
    p.add_argument("--sa-alpha", type=float, default=control.DEFAULT_SA.alpha)
    p.add_argument("--sa-t-min", type=float, default=control.DEFAULT_SA.t_min)
    p.add_argument("--out", required=True, help="summary CSV")
    p.add_argument("--detail-out", help="per-dyad CSV")

    p = add("report", cmd_report, "reshape a control summary into plot data")
    p.add_argument("summary")
    p.add_argument("--out", required=True)

    p = add("demo", cmd_demo, "gen-data -> train -> control --all -> report")
    p.add_argument("--seed", type=int)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--out-dir", required=True)
    return parser, subs


def _config_path(argv) -> str | None:
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--config="):
            return a.split("=", 1)[1]
    return None


def _parse(argv) -> argparse.Namespace:
    parser, subs = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    path = _config_path(argv)
    sub = subs.get(argv[0]) if argv else None
    if path is None or sub is None:
        return parser.parse_args(argv)
    actions = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
    settings = read_config(path)
    unknown = sorted(set(settings) - set(actions))
    if unknown:
        raise UsageError(f"{path}: unknown key(s) {', '.join(unknown)}")
    defaults = {}
    for key, raw in settings.items():
        action = actions[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = _parse_bool(raw)
        elif isinstance(action, argparse._AppendAction):
            defaults[key] = [v.strip() for v in raw.split(";") if v.strip()]
        elif action.type is not None:
            try:
                defaults[key] = action.type(raw)
            except ValueError:
                raise UsageError(f"{path}: bad value for {key}: {raw!r}") from None
        else:
            defaults[key] = raw
        action.required = False
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    try:
        args = _parse(argv)
        return args.func(args)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
