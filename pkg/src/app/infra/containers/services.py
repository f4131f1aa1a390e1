from dependency_injector import containers, providers

from app.core.services.codebook_service import CodebookService
from app.core.services.dataset_service import DatasetService
from app.core.services.metrics_service import EvaluationService
from app.core.services.sampling_service import SamplingService
from app.core.services.schedule_service import CorruptionService
from app.core.services.training_service import TrainingService


class ServiceContainer(containers.DeclarativeContainer):
    repos = providers.DependenciesContainer()

    codebook_service = providers.Factory(
        CodebookService,
        codebook_repo=repos.codebook_repository,
    )
    dataset_service = providers.Factory(
        DatasetService,
        dataset_repo=repos.dataset_repository,
    )
    training_service = providers.Factory(
        TrainingService,
        dataset_repo=repos.dataset_repository,
        model_repo=repos.denoiser_repository,
    )
    sampling_service = providers.Factory(
        SamplingService,
        token_repo=repos.token_repository,
    )
    corruption_service = providers.Factory(
        CorruptionService,
        token_repo=repos.token_repository,
    )
    evaluation_service = providers.Factory(
        EvaluationService,
        token_repo=repos.token_repository,
        dataset_repo=repos.dataset_repository,
    )
