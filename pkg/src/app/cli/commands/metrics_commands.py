import argparse
from pathlib import Path

from app.cli.context import CommandContext
from app.infra.storage.atomic import atomic_write_text


def evaluate(ctx: CommandContext) -> int:
    cfg = ctx.config.metrics
    tokens = Path(ctx.args.tokens) if ctx.args.tokens else ctx.config.paths.tokens
    reference = Path(ctx.args.reference) if ctx.args.reference else ctx.config.paths.reference
    out = ctx.out(tokens.with_name(tokens.stem + ".eval.jsonl"))
    records, summaries = ctx.container.services.evaluation_service().evaluate(
        tokens_path=tokens,
        codebook=ctx.load_codebook(),
        fps=cfg.fps,
        half_width=cfg.half_width,
        epsilon=cfg.epsilon,
        seed=ctx.seed,
        pair_count=cfg.pair_count,
        reference_path=reference,
    )
    ctx.container.repos.evaluation_repository().save(records, out)
    inputs = {"tokens": tokens, "codebook": ctx.config.paths.codebook}
    if reference is not None:
        inputs["reference"] = reference
    ctx.manifest(
        out,
        inputs=inputs,
        details={s.metric: {"count": s.count, "mean": s.mean, "std": s.std} for s in summaries},
    )
    print(f"{'metric':<18} {'count':>6} {'mean':>14} {'std':>14}")
    for s in summaries:
        print(f"{s.metric:<18} {s.count:>6d} {s.mean:>14.6f} {s.std:>14.6f}")
    return 0


def profile(ctx: CommandContext) -> int:
    tokens = Path(ctx.args.tokens) if ctx.args.tokens else ctx.config.paths.tokens
    table = ctx.container.services.evaluation_service().profile(
        tokens_path=tokens,
        codebook=ctx.load_codebook(),
        fps=ctx.config.metrics.fps,
        index=ctx.args.index,
    )
    out = ctx.out(None)
    if out is not None:
        atomic_write_text(out, table)
        ctx.manifest(out, inputs={"tokens": tokens}, details={"index": ctx.args.index})
    print(table, end="")
    return 0


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("evaluate", parents=parents, help="jerk, diversity and Frechet-lite report")
    parser.add_argument("--tokens", help="token file (default: paths.tokens)")
    parser.add_argument("--reference", help="reference dataset for Frechet-lite (default: paths.reference)")
    parser.set_defaults(handler=evaluate)

    parser = subparsers.add_parser("profile", parents=parents, help="per-frame speed and jerk table")
    parser.add_argument("--tokens", help="token file (default: paths.tokens)")
    parser.add_argument("--index", type=int, default=0, help="record index in the token file")
    parser.set_defaults(handler=profile)
