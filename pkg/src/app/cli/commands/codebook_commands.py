import argparse

from app.cli.context import CommandContext


def make_codebook(ctx: CommandContext) -> int:
    cfg = ctx.config.codebook
    out = ctx.out(ctx.config.paths.codebook)
    ctx.container.services.codebook_service().create(
        K=cfg.size, D=cfg.dim, clusters=cfg.clusters, seed=ctx.seed, path=out
    )
    ctx.manifest(out, details={"K": cfg.size, "D": cfg.dim, "clusters": cfg.clusters})
    print(out)
    return 0


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("make-codebook", parents=parents, help="write a synthetic codebook")
    parser.set_defaults(handler=make_codebook)
