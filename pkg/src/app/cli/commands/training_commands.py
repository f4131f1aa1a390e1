import argparse

from app.cli.context import CommandContext


def train(ctx: CommandContext) -> int:
    cfg = ctx.config.training
    paths = ctx.config.paths
    out = ctx.out(paths.model)
    cb = ctx.load_codebook()
    result = ctx.container.services.training_service().fit(
        dataset_path=paths.dataset,
        model_path=out,
        transition=ctx.transition(cb),
        conditions=ctx.config.dataset.conditions,
        buckets=cfg.buckets,
        epochs=cfg.epochs,
        learning_rate=cfg.learning_rate,
        null_prob=cfg.null_prob,
        loss_coefficient=cfg.loss_coefficient,
        seed=ctx.seed,
        init_scale=cfg.init_scale,
        batch_size=cfg.batch_size,
        progress=cfg.progress,
    )
    ctx.manifest(
        out,
        inputs={"codebook": paths.codebook, "dataset": paths.dataset},
        details={
            "epochs": cfg.epochs,
            "initial_loss": result.initial_loss,
            "final_loss": result.final_loss,
            "curve": result.curve,
        },
    )
    print(f"initial_loss={result.initial_loss:.6f} final_loss={result.final_loss:.6f} path={out}")
    return 0


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("train", parents=parents, help="fit the tabular denoiser")
    parser.set_defaults(handler=train)
