"""
子命令執行上下文

集中處理輸出路徑、碼本與轉移模型的建立，以及 manifest 寫入。
"""
from __future__ import annotations

import argparse
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from app.config import RunConfig, config_digest
from app.core.domain.codebook import Codebook
from app.core.domain.denoiser import TabularDenoiser
from app.core.exceptions.common import InvalidParameterError
from app.core.services.schedule_service import TransitionModel, build_schedule, build_transition
from app.infra.containers.application import ApplicationContainer

logger = logging.getLogger(__name__)


@dataclass
class CommandContext:
    args: argparse.Namespace
    config: RunConfig
    container: ApplicationContainer
    started: float = field(default_factory=time.perf_counter)

    @property
    def command(self) -> str:
        return self.args.command

    @property
    def seed(self) -> int:
        return self.config.seed

    def out(self, default: Path | None) -> Path | None:
        return Path(self.args.out) if self.args.out else default

    def load_codebook(self) -> Codebook:
        return self.container.services.codebook_service().load(self.config.paths.codebook)

    def load_model(self, transition: TransitionModel) -> TabularDenoiser:
        path = self.config.paths.model
        model = self.container.repos.denoiser_repository().load(path)
        if model.K != transition.K or model.T != transition.T:
            raise InvalidParameterError(
                f"{path} was trained for K={model.K} T={model.T}, "
                f"configuration asks for K={transition.K} T={transition.T}"
            )
        return model

    def transition(self, cb: Codebook | None, *, multi: bool = False) -> TransitionModel:
        """Transition model for this run; eta_multi drives multi-segment sampling."""
        s = self.config.schedule
        eta = s.eta_multi if multi else s.eta_single
        if s.dynamic:
            if cb is None:
                cb = self.load_codebook()
            return build_transition(
                cb,
                T=s.steps,
                gamma_max=s.gamma_max,
                alpha_min=s.alpha_min,
                eta=eta,
                dynamic=True,
                distance=self.config.codebook.distance,
            )
        K = cb.K if cb is not None else self.config.codebook.size
        return TransitionModel(build_schedule(s.steps, s.gamma_max, s.alpha_min, eta), K)

    def manifest(
        self,
        out: Path,
        *,
        inputs: dict[str, Path] | None = None,
        outputs: dict[str, Path] | None = None,
        details: dict[str, Any] | None = None,
    ) -> Path:
        path = self.container.infra.manifest_writer().write(
            out,
            command=self.command,
            config_digest=config_digest(self.config),
            seed=self.seed,
            wall_clock_seconds=time.perf_counter() - self.started,
            inputs=inputs,
            outputs=outputs or {"out": out},
            details=details,
        )
        logger.debug("manifest written path=%s", path)
        return path
