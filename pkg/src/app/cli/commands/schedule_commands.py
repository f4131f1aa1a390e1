import argparse
from pathlib import Path

from app.cli.context import CommandContext
from app.core.services.schedule_service import render_audit
from app.infra.storage.atomic import atomic_write_text


def corrupt(ctx: CommandContext) -> int:
    source = Path(ctx.args.input) if ctx.args.input else ctx.config.paths.tokens
    out = ctx.out(source.with_name(source.stem + f".t{ctx.args.step}.jsonl"))
    records = ctx.container.services.corruption_service().corrupt(
        ctx.transition(None),
        source_path=source,
        t=ctx.args.step,
        seed=ctx.seed,
        path=out,
    )
    masked = sum(r.sequence.mask_count() for r in records)
    total = sum(len(r.sequence) for r in records)
    fraction = masked / total if total else 0.0
    ctx.manifest(out, inputs={"tokens": source}, details={"t": ctx.args.step, "mask_fraction": fraction})
    print(f"records={len(records)} t={ctx.args.step} mask_fraction={fraction:.6f} path={out}")
    return 0


def matrix_audit(ctx: CommandContext) -> int:
    table = render_audit(ctx.transition(None, multi=ctx.args.multi).audit_rows())
    out = ctx.out(None)
    if out is not None:
        atomic_write_text(out, table)
        ctx.manifest(out, details={"eta": "multi" if ctx.args.multi else "single"})
    print(table, end="")
    return 0


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("corrupt", parents=parents, help="forward-corrupt a token file to step t")
    parser.add_argument("--input", help="token file (default: paths.tokens)")
    parser.add_argument("--step", "-t", type=int, required=True, help="diffusion step t in 0..T")
    parser.set_defaults(handler=corrupt)

    parser = subparsers.add_parser(
        "matrix-audit", parents=parents, help="column-sum and MASK-mass table of Q_t and its products"
    )
    parser.add_argument("--multi", action="store_true", help="use the multi-segment eta")
    parser.set_defaults(handler=matrix_audit)
