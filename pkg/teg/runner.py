"""
Command-line entry point.

Usage:
  python -m teg train --config run.txt
  python -m teg eval --config run.txt
  python -m teg audit-equivariance --config run.txt [--noise-sweep 0,0.01,0.1]
  python -m teg diversity-grid --config run.txt --fractions 0.2,0.6,1.0 --availabilities 0.1,0.5,1.0
  python -m teg way-sweep --config run.txt --train-ways 2,3,4,5
  python -m teg sweep --config run.txt --knob gamma --values 0,0.25,0.5,0.75,1
  python -m teg gen-synthetic --sbm sbm.txt --out graph.txt
  python -m teg diag-anchors --graph graph.txt -k 16 --compare-random
  python -m teg grad-check

Reports, checkpoints and training logs go under <out>/<config hash>/.
"""
from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from teg.config import settings
from teg.episodes.dump import dump_episodes, episode_record
from teg.graph.io import load_graph, save_graph
from teg.graph.splits import InfeasiblePoolError
from teg.graph.synthetic import SbmConfig, generate_sbm, read_sbm_config
from teg.harness.audit import equivariance_audit, make_transforms, noise_sweep
from teg.harness.diversity import diversity_grid, sensitivity_sweep, way_sweep
from teg.harness.evaluation import evaluate, sample_eval_tasks
from teg.harness.model import RunContext, init_model, prepare_run, toy_gradient_problem
from teg.harness.results import sweep_rows, write_csv, write_eval_report, write_grid_csv, write_jsonl, write_training_log
from teg.harness.run_config import RunConfig, config_hash, dump_run_config, load_run_config, with_overrides
from teg.harness.trainer import train
from teg.numerics.checkpoint import load_checkpoint, save_checkpoint
from teg.numerics.gradcheck import grad_check
from teg.numerics.rng import child_seed
from teg.structural.anchors import anchor_degrees, attach_anchors, build_structural_features, graph_anchor_features, zero_ratio

logger = logging.getLogger(__name__)

CHECKPOINT = "checkpoint.bin"


# ── Helpers ──────────────────────────────────────────────────────────

def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _run_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_run_config(args.config) if args.config else RunConfig()
    overrides = {}
    for item in args.set or []:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    return with_overrides(cfg, overrides) if overrides else cfg


def _run_dir(args: argparse.Namespace, cfg: RunConfig) -> Path:
    path = Path(args.out) / config_hash(cfg)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _trained_model(args: argparse.Namespace, cfg: RunConfig, ctx: RunContext):
    path = Path(args.checkpoint) if args.checkpoint else _run_dir(args, cfg) / CHECKPOINT
    if not path.exists():
        raise FileNotFoundError(f"checkpoint not found: {path} (run `train` first or pass --checkpoint)")
    params, _ = load_checkpoint(path)
    return init_model(ctx, params)


def _dump_first_seed(model, pool, cfg: RunConfig, path: Path) -> None:
    """Seed-0 evaluation episodes with per-query predictions."""
    ep = cfg.episode
    tasks = sample_eval_tasks(pool, ep, child_seed(cfg.seed, "eval", 0), ep.episodes_eval)
    h_all = model.graph_embeddings(train_mode=False)
    records = [
        episode_record(task, i, model.predict_episode(task, h_all, ep.gamma)[0])
        for i, task in enumerate(tasks)
    ]
    dump_episodes(path, records)


# ── Commands ─────────────────────────────────────────────────────────

def cmd_train(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    out = _run_dir(args, cfg)
    result = train(cfg)
    save_checkpoint(out / CHECKPOINT, result.params, result.adam)
    write_training_log(out / "train_log.jsonl", result.log)
    (out / "config.txt").write_text(dump_run_config(cfg), encoding="utf-8")
    print(f"  Run:        {config_hash(cfg)}")
    print(f"  Episodes:   {len(result.log)}")
    if result.log:
        print(f"  Loss:       {result.log[0]['loss']:.4f} -> {result.log[-1]['loss']:.4f}")
    if result.best_accuracy is not None:
        print(f"  Validation: {result.best_accuracy:.4f} (episode {result.best_episode + 1})")
    print(f"  Checkpoint: {out / CHECKPOINT}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    ctx = prepare_run(cfg)
    if ctx.novel_pool is None:
        raise InfeasiblePoolError("no novel classes to evaluate on")
    model = _trained_model(args, cfg, ctx)
    report = evaluate(model, ctx.novel_pool, cfg)
    out = _run_dir(args, cfg)
    write_eval_report(out / "eval.jsonl", report)
    write_csv(out / "eval_summary.csv", [report.summary()])
    if args.dump_episodes:
        _dump_first_seed(model, ctx.novel_pool, cfg, out / "episodes.jsonl")
    print(f"  Accuracy: {report.mean:.4f} +/- {report.std:.4f} ({len(report.accuracies)} seeds x {report.episodes} episodes)")
    print(f"  Report:   {out / 'eval.jsonl'}")
    return 0


def cmd_audit(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    ctx = prepare_run(cfg)
    model = _trained_model(args, cfg, ctx)
    episodes = sample_eval_tasks(ctx.train_pool, cfg.episode, child_seed(cfg.seed, "audit-episodes"), args.episodes)
    gamma = cfg.episode.gamma
    if args.noise_sweep:
        reports = noise_sweep(model, episodes, _floats(args.noise_sweep), gamma, cfg.seed, args.transforms, ctx.run_id)
    else:
        transforms = make_transforms(cfg.gcn.output_dim, args.transforms, args.noise_sigma, cfg.seed)
        reports = [equivariance_audit(model, episodes, transforms, gamma, ctx.run_id)]
    out = _run_dir(args, cfg)
    write_jsonl(out / "audit.jsonl", [r.summary() for r in reports])
    print(f"  {'sigma':>8}  {'ref':>7}  {'trans':>7}  {'gap':>6}  {'agree':>7}")
    for r in reports:
        print(f"  {r.noise_sigma:>8.4f}  {r.acc_reference:>7.4f}  {r.mean_transformed:>7.4f}  {r.gap_points:>6.2f}  {r.agreement:>7.4f}")
    return 0


def cmd_diversity_grid(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    fractions, availabilities = _floats(args.fractions), _floats(args.availabilities)
    grid = diversity_grid(cfg, fractions, availabilities)
    path = write_grid_csv(_run_dir(args, cfg) / "diversity_grid.csv", grid, fractions, availabilities)
    print(path.read_text(encoding="utf-8"), end="")
    return 0


def cmd_way_sweep(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    points = way_sweep(cfg, _ints(args.train_ways))
    path = write_csv(_run_dir(args, cfg) / "way_sweep.csv", sweep_rows(points))
    print(path.read_text(encoding="utf-8"), end="")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _run_config(args)
    points = sensitivity_sweep(cfg, args.knob, [v.strip() for v in args.values.split(",") if v.strip()])
    path = write_csv(_run_dir(args, cfg) / f"sweep_{args.knob}.csv", sweep_rows(points))
    print(path.read_text(encoding="utf-8"), end="")
    return 0


def cmd_gen_synthetic(args: argparse.Namespace) -> int:
    sbm = read_sbm_config(args.sbm) if args.sbm else SbmConfig()
    graph = generate_sbm(sbm)
    save_graph(graph, args.out)
    print(f"  Wrote {graph.num_nodes} nodes, {graph.num_edges} edges, {graph.num_classes} classes to {args.out}")
    return 0


def cmd_diag_anchors(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph) if args.graph else generate_sbm(SbmConfig())
    anchors = attach_anchors(graph, args.k, args.seed)
    virtual = build_structural_features(graph, anchors)
    degrees = np.array(anchor_degrees(anchors), dtype=np.int64)

    print(f"  {'anchor':>6}  {'degree':>7}  {'reached':>7}")
    for i, degree in enumerate(degrees):
        print(f"  {i + 1:>6}  {degree:>7}  {int(np.count_nonzero(virtual.matrix[:, i])):>7}")
    if args.k == 0:
        print("  No anchors; nothing to diagnose")
        return 0
    print(f"  Virtual anchors:  k={args.k}  zero ratio {zero_ratio(virtual):.4f}")
    connected = np.flatnonzero(degrees)
    if 0 < connected.size < args.k:
        print(f"    over the {connected.size} anchors with edges: {zero_ratio(virtual, connected):.4f}")
    if args.compare_random:
        in_graph = graph_anchor_features(graph, args.k, args.seed)
        print(f"  In-graph anchors: k={args.k}  zero ratio {zero_ratio(in_graph):.4f}")
    if args.csv:
        header = [f"anchor_{i + 1}" for i in range(args.k)]
        write_csv(args.csv, [dict(zip(header, map(repr, row.tolist()))) for row in virtual.matrix], header)
        print(f"  H^(s) written to {args.csv}")
    return 0


def cmd_grad_check(args: argparse.Namespace) -> int:
    loss_fn, params = toy_gradient_problem(args.seed)
    worst = grad_check(loss_fn, params, h=args.h, sample=args.sample, seed=args.seed)
    status = "PASS" if worst <= args.tolerance else "FAIL"
    print(f"  max relative error {worst:.3e} over {args.sample} coordinates ({status}, tolerance {args.tolerance:g})")
    return 0 if status == "PASS" else 1


# ── Parser ───────────────────────────────────────────────────────────

def _add_run_args(p: argparse.ArgumentParser, checkpoint: bool = False) -> None:
    p.add_argument("--config", default=None, help="key=value run config file (defaults if omitted)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key; repeatable")
    p.add_argument("--out", default=settings.output_dir, help="output root (default: TEG_OUTPUT_DIR)")
    if checkpoint:
        p.add_argument("--checkpoint", default=None, help="checkpoint file (default: <out>/<hash>/checkpoint.bin)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="teg", description="Few-shot node classification with equivariant task embeddings")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model and save its checkpoint")
    _add_run_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on the novel classes")
    _add_run_args(p, checkpoint=True)
    p.add_argument("--dump-episodes", action="store_true", help="also write seed-0 episodes and predictions to episodes.jsonl")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("audit-equivariance", help="score episodes under random rigid transforms")
    _add_run_args(p, checkpoint=True)
    p.add_argument("--episodes", type=int, default=50)
    p.add_argument("--transforms", type=int, default=10)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--noise-sweep", default=None, help="comma-separated noise levels; overrides --noise-sigma")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("diversity-grid", help="class fraction x label availability heatmap")
    _add_run_args(p)
    p.add_argument("--fractions", default="0.2,0.6,1.0")
    p.add_argument("--availabilities", default="0.1,0.5,1.0")
    p.set_defaults(func=cmd_diversity_grid)

    p = sub.add_parser("way-sweep", help="train at lower ways, evaluate at episode.n_way")
    _add_run_args(p)
    p.add_argument("--train-ways", default="2,3,4,5")
    p.set_defaults(func=cmd_way_sweep)

    p = sub.add_parser("sweep", help="one experiment per value of a config knob")
    _add_run_args(p)
    p.add_argument("--knob", default="gamma", help="gamma, anchors, way or a dotted config key")
    p.add_argument("--values", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen-synthetic", help="write a stochastic block model graph file")
    p.add_argument("--sbm", default=None, help="key=value SbmConfig file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_synthetic)

    p = sub.add_parser("diag-anchors", help="anchor degrees and structural zero ratio")
    p.add_argument("--graph", default=None)
    p.add_argument("-k", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--compare-random", action="store_true", help="also report k random in-graph anchors")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_diag_anchors)

    p = sub.add_parser("grad-check", help="central-difference check of the full loss on a toy instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--h", type=float, default=1e-5)
    p.add_argument("--sample", type=int, default=50)
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.set_defaults(func=cmd_grad_check)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s [%(levelname)s] %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, FloatingPointError, OSError, RuntimeError) as e:
        logger.debug("%s failed", args.command, exc_info=True)
        print(f"ERROR: {e}")
        return 1
