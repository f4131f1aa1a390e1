from dependency_injector import containers, providers

from app.infra.storage.repositories.codebook_file_repository import CodebookFileRepository
from app.infra.storage.repositories.dataset_file_repository import DatasetFileRepository
from app.infra.storage.repositories.denoiser_file_repository import DenoiserFileRepository
from app.infra.storage.repositories.evaluation_file_repository import EvaluationFileRepository
from app.infra.storage.repositories.token_file_repository import TokenFileRepository


class RepositoryContainer(containers.DeclarativeContainer):
    infra = providers.DependenciesContainer()

    codebook_repository = providers.Singleton(CodebookFileRepository)
    dataset_repository = providers.Singleton(DatasetFileRepository)
    denoiser_repository = providers.Singleton(DenoiserFileRepository)
    token_repository = providers.Singleton(TokenFileRepository)
    evaluation_repository = providers.Singleton(EvaluationFileRepository)
