"""Command line interface.

Subcommands:

  build      stream a CSV of points into a private partition tree
  generate   draw synthetic points from a saved tree
  evaluate   measure W1 between data and a tree (or a synthetic sample)
  bench      sweep a parameter grid and aggregate utility statistics

Config and grid files are flat `key = value` text; unknown keys are
rejected rather than ignored.  Seeds resolve as: --seed flag, then the
config file, then the PRIVHP_SEED environment variable, then 0.  Exit
codes: 0 success, 1 runtime/data failure, 2 bad usage or configuration.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from pathlib import Path

import numpy as np

from .core import PrivHpConfig, PrivHpState, default_config
from .evaluate import (ExactHistogram, UtilityReport, points_cell_measure,
                       summarize_trials, tree_cell_measure, w1_exact_1d,
                       w1_leaf_flow, w1_points_tree_1d)
from .sampler import sample_many
from .streams import zipf_points
from .tree import load_tree, save_tree

NON_PRIVATE_WARNING = (
    "WARNING: noiseless mode disables all perturbation; the output is NOT "
    "differentially private. Use only for calibration and testing."
)

_CONFIG_KEYS = {"dimension", "epsilon", "k", "n_hint", "L", "L_star", "j",
                "w_cells", "seed", "noiseless"}
_GRID_KEYS = {"n", "epsilon", "k", "d", "alpha", "n_keys"}


def parse_kv_file(path, allowed: set[str]) -> dict[str, str]:
    """Flat `key = value` file with # comments; unknown keys are errors."""
    out: dict[str, str] = {}
    with open(path) as fp:
        for lineno, line in enumerate(fp, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in allowed:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value.strip()
    return out


def _parse_bool(raw: str) -> bool:
    if raw.lower() in ("1", "true", "yes", "on"):
        return True
    if raw.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def config_from_mapping(kv: dict[str, str], seed_flag: int | None,
                        noiseless_flag: bool) -> PrivHpConfig:
    """PrivHpConfig from a parsed config file plus command-line overrides.

    Shape keys (L, L_star, j, w_cells) fall back to default_config derived
    from n_hint when not given explicitly.
    """
    for required in ("epsilon", "k", "n_hint"):
        if required not in kv:
            raise ValueError(f"config is missing required key {required!r}")
    epsilon = float(kv["epsilon"])
    k = int(kv["k"])
    n_hint = int(kv["n_hint"])
    dimension = int(kv.get("dimension", 1))
    noiseless = noiseless_flag or _parse_bool(kv.get("noiseless", "false"))
    if seed_flag is not None:
        seed = seed_flag
    elif "seed" in kv:
        seed = int(kv["seed"])
    else:
        seed = int(os.environ.get("PRIVHP_SEED", "0"))

    base = default_config(n_hint, epsilon, k, dimension)
    L = int(kv["L"]) if "L" in kv else base.L
    L_star = int(kv["L_star"]) if "L_star" in kv else min(base.L_star, L)
    j = int(kv["j"]) if "j" in kv else base.j
    w_cells = int(kv["w_cells"]) if "w_cells" in kv else base.w_cells
    return PrivHpConfig(dimension=dimension, epsilon=epsilon, k=k, L=L,
                        L_star=L_star, j=j, w_cells=w_cells, seed=seed,
                        n_hint=n_hint, noiseless=noiseless)


def stream_csv_points(path, dimension: int, strict: bool, chunk_rows: int = 65536):
    """Yield (points, malformed, bytes_read) chunks from a CSV in one pass.

    A leading non-numeric line is treated as a header.  Malformed rows
    (wrong arity or unparseable fields) are skipped and counted, or raise
    immediately under strict mode.  The malformed and byte totals arrive
    with the final chunk; intermediate chunks report zeros.
    """
    rows: list[list[float]] = []
    malformed = 0
    bytes_read = 0
    with open(path, "rb") as fp:
        for lineno, raw in enumerate(fp, start=1):
            bytes_read += len(raw)
            line = raw.decode("utf-8", errors="replace").strip()
            if not line:
                continue
            fields = line.split(",")
            try:
                values = [float(f) for f in fields]
                if len(values) != dimension:
                    raise ValueError
            except ValueError:
                if lineno == 1 and any(f.strip().lstrip("-").isalpha() or
                                       f.strip().startswith("x") for f in fields):
                    continue  # header row
                if strict:
                    raise ValueError(f"{path}:{lineno}: malformed row {line!r}") from None
                malformed += 1
                continue
            rows.append(values)
            if len(rows) >= chunk_rows:
                yield np.array(rows), 0, 0
                rows = []
    yield (np.array(rows) if rows else np.empty((0, dimension))), malformed, bytes_read


def cmd_build(args) -> int:
    kv = parse_kv_file(args.config, _CONFIG_KEYS)
    config = config_from_mapping(kv, args.seed, args.noiseless)
    if config.noiseless:
        print(NON_PRIVATE_WARNING, file=sys.stderr)
    state = PrivHpState(config)
    malformed = bytes_read = 0
    for points, bad, nbytes in stream_csv_points(args.input, config.dimension, args.strict):
        if len(points):
            state.update_batch(points)
        malformed += bad
        bytes_read += nbytes
    tree = state.finalize()
    save_tree(tree, args.output)
    print(f"tree written to {args.output}")
    print(f"items={state.items_seen} rejected={state.rejected} malformed={malformed} "
          f"bytes_read={bytes_read}")
    print(f"memory_cells={state.memory_cells()} nodes={tree.node_count()}")
    return 0


def cmd_generate(args) -> int:
    tree = load_tree(args.tree)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(_seed_of(args))))
    points = sample_many(tree, args.m, rng)
    with open(args.output, "w") as fp:
        fp.write(",".join(f"x{c}" for c in range(tree.dimension)) + "\n")
        for row in points:
            fp.write(",".join(f"{x:.17g}" for x in row) + "\n")
    print(f"{args.m} points written to {args.output}")
    return 0


def _seed_of(args) -> int:
    if args.seed is not None:
        return args.seed
    return int(os.environ.get("PRIVHP_SEED", "0"))


def _load_points(path, dimension: int | None = None) -> np.ndarray:
    chunks = []
    gen = stream_csv_points(path, dimension, strict=False) if dimension else None
    if gen is None:
        # dimension unknown: sniff it from the first data row
        with open(path) as fp:
            for line in fp:
                line = line.strip()
                if not line:
                    continue
                try:
                    dimension = len([float(f) for f in line.split(",")])
                except ValueError:
                    continue
                break
        if dimension is None:
            raise ValueError(f"{path}: no parseable rows")
        gen = stream_csv_points(path, dimension, strict=False)
    for points, _, _ in gen:
        if len(points):
            chunks.append(points)
    if not chunks:
        raise ValueError(f"{path}: no points")
    points = np.vstack(chunks)
    ok = ((points >= 0.0) & (points <= 1.0)).all(axis=1)
    if not ok.all():
        print(f"{path}: ignoring {len(points) - int(ok.sum())} out-of-range rows",
              file=sys.stderr)
        points = points[ok]
    if not len(points):
        raise ValueError(f"{path}: no points inside the unit cube")
    return points


def cmd_evaluate(args) -> int:
    tree = load_tree(args.tree) if args.tree else None
    dimension = tree.dimension if tree else None
    data = _load_points(args.input, dimension)
    dimension = data.shape[1]

    if tree is not None:
        if dimension == 1:
            w1 = w1_points_tree_1d(data[:, 0], tree)
            method = "exact-1d"
        else:
            level = args.level if args.level is not None else min(
                tree.meta.get("L_star", 8), 8)
            w1 = w1_leaf_flow(points_cell_measure(data, dimension, level),
                              tree_cell_measure(tree, level), dimension, level)
            method = "leaf-flow"
            gamma = 2.0 ** -(level // dimension)
            print(f"leaf-flow at level {level}: cell resolution gamma={gamma:g}",
                  file=sys.stderr)
    else:
        synth = _load_points(args.synthetic, dimension)
        if dimension == 1:
            w1 = w1_exact_1d(data[:, 0], synth[:, 0])
            method = "exact-1d"
        else:
            if args.level is None:
                raise ValueError("--level is required for d >= 2 sample comparison")
            level = args.level
            w1 = w1_leaf_flow(points_cell_measure(data, dimension, level),
                              points_cell_measure(synth, dimension, level),
                              dimension, level)
            method = "leaf-flow"

    meta = tree.meta if tree else {}
    tail_level = args.tail_level if args.tail_level is not None else \
        (tree.depth if tree else min(12, args.level or 12))
    tail_k = args.tail_k if args.tail_k is not None else meta.get("k", 1)
    hist = ExactHistogram(data, tail_level, dimension)
    if all(key in meta for key in ("L_star", "j", "w_cells")) and tree is not None:
        memory = ((1 << (meta["L_star"] + 1)) - 1) \
            + (tree.depth - meta["L_star"]) * meta["j"] * meta["w_cells"]
    else:
        memory = tree.node_count() if tree else 0

    report = UtilityReport(
        w1=w1, w1_method=method, tail_norm=hist.tail_norm(tail_level, tail_k),
        memory_cells=memory, epsilon=meta.get("epsilon"), k=meta.get("k"),
        L=tree.depth if tree else tail_level, L_star=meta.get("L_star"),
        j=meta.get("j"), trials=1, mean=w1, stderr=0.0,
        seed=meta.get("seed", _seed_of(args) if args.seed is not None else None),
    )
    text = report.to_json()
    if args.output:
        Path(args.output).write_text(text + "\n")
        print(f"report written to {args.output}")
    else:
        print(text)
    return 0


def cmd_bench(args) -> int:
    kv = parse_kv_file(args.grid, _GRID_KEYS)
    ns = [int(v) for v in kv.get("n", "100000").split(",")]
    epsilons = [float(v) for v in kv.get("epsilon", "1.0").split(",")]
    ks = [int(v) for v in kv.get("k", "4").split(",")]
    ds = [int(v) for v in kv.get("d", "1").split(",")]
    alpha = float(kv.get("alpha", "1.5"))
    n_keys = int(kv.get("n_keys", "4096"))

    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    master = np.random.SeedSequence(_seed_of(args))
    rows = ["n,d,epsilon,k,trials,w1_mean,w1_stderr"]
    cells = list(itertools.product(ns, ds, epsilons, ks))
    for cell_id, (n, d, epsilon, k) in enumerate(cells):
        cell_ss = np.random.SeedSequence(entropy=master.entropy,
                                         spawn_key=(cell_id,))
        values = []
        report = None
        for trial, trial_ss in enumerate(cell_ss.spawn(args.trials)):
            rng = np.random.Generator(np.random.PCG64(trial_ss))
            data = zipf_points(n, alpha, n_keys, d, rng)
            config = default_config(n, epsilon, k, d,
                                    seed=int(trial_ss.generate_state(1)[0]))
            state = PrivHpState(config)
            state.update_batch(data)
            tree = state.finalize()
            try:
                if d == 1:
                    w1 = w1_points_tree_1d(data[:, 0], tree)
                    method = "exact-1d"
                else:
                    level = min(config.L_star, 8)
                    w1 = w1_leaf_flow(points_cell_measure(data, d, level),
                                      tree_cell_measure(tree, level), d, level)
                    method = "leaf-flow"
            except ValueError as exc:
                print(f"cell n={n} d={d} eps={epsilon} k={k} trial {trial}: "
                      f"evaluation failed ({exc}); skipping trial", file=sys.stderr)
                continue
            values.append(w1)
            if report is None:
                hist = ExactHistogram(data, min(config.L, 20), d)
                report = UtilityReport(
                    w1=w1, w1_method=method,
                    tail_norm=hist.tail_norm(min(config.L, 20), k),
                    memory_cells=state.memory_cells(), epsilon=epsilon, k=k,
                    L=config.L, L_star=config.L_star, j=config.j,
                    trials=args.trials, mean=0.0, stderr=0.0, seed=config.seed)
        if not values:
            print(f"cell n={n} d={d} eps={epsilon} k={k}: no successful trials",
                  file=sys.stderr)
            continue
        mean, stderr = summarize_trials(values)
        report.mean, report.stderr, report.trials = mean, stderr, len(values)
        (outdir / f"cell_{cell_id:03d}.json").write_text(report.to_json() + "\n")
        rows.append(f"{n},{d},{epsilon:.17g},{k},{len(values)},"
                    f"{mean:.17g},{stderr:.17g}")
        print(f"n={n} d={d} eps={epsilon} k={k}: W1 = {mean:.6g} +- {stderr:.2g} "
              f"({len(values)} trials)")
    (outdir / "bench_results.csv").write_text("\n".join(rows) + "\n")
    if args.plot:
        _plot_bench(outdir / "bench_results.csv", outdir / "bench.png")
        print(f"plot written to {outdir / 'bench.png'}")
    return 0


def _plot_bench(csv_path: Path, png_path: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    table = np.genfromtxt(csv_path, delimiter=",", names=True)
    table = np.atleast_1d(table)
    fig, ax = plt.subplots(figsize=(6, 4))
    for k in np.unique(table["k"]):
        sel = table[table["k"] == k]
        order = np.argsort(sel["epsilon"])
        ax.errorbar(sel["epsilon"][order], sel["w1_mean"][order],
                    yerr=2 * sel["w1_stderr"][order], marker="o", label=f"k={int(k)}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("W1")
    ax.legend()
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="privhp", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="stream points into a private tree")
    p.add_argument("--config", required=True, help="flat key=value config file")
    p.add_argument("--input", required=True, help="CSV of points, one row per point")
    p.add_argument("--output", required=True, help="tree file to write")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--strict", action="store_true",
                   help="abort on the first malformed row instead of skipping")
    p.add_argument("--noiseless", action="store_true",
                   help="disable all noise (NOT private; for calibration only)")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("generate", help="sample synthetic points from a tree")
    p.add_argument("--tree", required=True)
    p.add_argument("-m", type=int, required=True, help="number of points to draw")
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("evaluate", help="W1 between data and a tree or sample")
    p.add_argument("--input", required=True, help="CSV of original points")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--tree", help="tree file to evaluate")
    group.add_argument("--synthetic", help="CSV of synthetic points to evaluate")
    p.add_argument("--level", type=int, default=None,
                   help="cell level for d>=2 leaf-flow evaluation")
    p.add_argument("--tail-level", type=int, default=None)
    p.add_argument("--tail-k", type=int, default=None)
    p.add_argument("--output", default=None, help="report JSON path (default stdout)")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bench", help="sweep a parameter grid")
    p.add_argument("--grid", required=True, help="flat key=value grid file")
    p.add_argument("--trials", type=int, default=5)
    p.add_argument("--output", required=True, help="directory for results")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--plot", action="store_true", help="write a summary plot")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
