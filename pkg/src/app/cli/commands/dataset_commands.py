import argparse

from app.cli.context import CommandContext


def make_dataset(ctx: CommandContext) -> int:
    cfg = ctx.config.dataset
    out = ctx.out(ctx.config.paths.dataset)
    records = ctx.container.services.dataset_service().create(
        ctx.load_codebook(),
        conditions=cfg.conditions,
        sequences_per_condition=cfg.sequences_per_condition,
        length=cfg.sequence_length,
        seed=ctx.seed,
        path=out,
    )
    ctx.manifest(
        out,
        inputs={"codebook": ctx.config.paths.codebook},
        details={"records": len(records), "conditions": cfg.conditions},
    )
    print(f"records={len(records)} path={out}")
    return 0


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        "make-dataset", parents=parents, help="quantize per-condition sinusoids into token records"
    )
    parser.set_defaults(handler=make_dataset)
