import argparse

from app.cli.context import CommandContext
from app.core.domain.tokens import GenerationPlan, Segment
from app.core.exceptions.config import ConfigError
from app.core.services.sampling_service import Sampler


def parse_plan(text: str) -> list[Segment]:
    """``"1:12,2:12"`` → segments (condition, length)."""
    segments = []
    for item in text.split(","):
        condition, sep, length = item.strip().partition(":")
        try:
            segments.append(Segment(condition=int(condition), length=int(length)))
        except ValueError as exc:
            raise ConfigError(f"plan item '{item}' is not <condition>:<length>") from exc
        if not sep:
            raise ConfigError(f"plan item '{item}' is not <condition>:<length>")
    return segments


def _sampler(ctx: CommandContext, *, multi: bool) -> Sampler:
    cb = ctx.load_codebook() if ctx.config.schedule.dynamic else None
    transition = ctx.transition(cb, multi=multi)
    return Sampler(transition, ctx.load_model(transition), workers=ctx.config.sampler.workers)


def generate(ctx: CommandContext) -> int:
    cfg = ctx.config.sampler
    out = ctx.out(ctx.config.paths.tokens)
    condition = ctx.args.condition or cfg.condition
    length = ctx.args.length or cfg.length
    count = ctx.args.count or cfg.count
    records = ctx.container.services.sampling_service().generate(
        _sampler(ctx, multi=False),
        condition=condition,
        length=length,
        guidance_scale=cfg.guidance_single,
        seed=ctx.seed,
        count=count,
        path=out,
    )
    ctx.manifest(
        out,
        inputs={"model": ctx.config.paths.model, "codebook": ctx.config.paths.codebook},
        details={"condition": condition, "length": length, "count": count, "s": cfg.guidance_single},
    )
    print(f"records={len(records)} path={out}")
    return 0


def generate_multi(ctx: CommandContext) -> int:
    cfg = ctx.config.sampler
    out = ctx.out(ctx.config.paths.tokens)
    count = ctx.args.count or cfg.count
    if ctx.args.plan:
        segments = parse_plan(ctx.args.plan)
    else:
        segments = list(
            GenerationPlan.default(
                conditions=ctx.config.dataset.conditions,
                count=cfg.segments,
                length=cfg.segment_length,
                independent_from=cfg.independent_from,
                guidance_scale=cfg.guidance_multi,
                seed=ctx.seed,
            ).segments
        )
    records = ctx.container.services.sampling_service().generate_multi(
        _sampler(ctx, multi=True),
        segments=segments,
        independent_from=cfg.independent_from,
        guidance_scale=cfg.guidance_multi,
        seed=ctx.seed,
        count=count,
        path=out,
    )
    boundaries = list(records[0].sequence.inner_boundaries)
    ctx.manifest(
        out,
        inputs={"model": ctx.config.paths.model, "codebook": ctx.config.paths.codebook},
        details={
            "segments": [[s.condition, s.length] for s in segments],
            "T_s": cfg.independent_from,
            "s": cfg.guidance_multi,
            "count": count,
            "plan_digests": [r.plan_digest for r in records],
        },
    )
    print(f"records={len(records)} boundaries={','.join(map(str, boundaries))} path={out}")
    return 0


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("generate", parents=parents, help="single-motion generation")
    parser.add_argument("--condition", type=int, help="action condition (default: sampler.condition)")
    parser.add_argument("--length", type=int, help="token length (default: sampler.length)")
    parser.add_argument("--count", type=int, help="number of samples (default: sampler.count)")
    parser.set_defaults(handler=generate)

    parser = subparsers.add_parser("generate-multi", parents=parents, help="two-phase multi-segment generation")
    parser.add_argument("--plan", help="segments as <condition>:<length>,... (default: cycling plan)")
    parser.add_argument("--count", type=int, help="number of samples (default: sampler.count)")
    parser.set_defaults(handler=generate_multi)
