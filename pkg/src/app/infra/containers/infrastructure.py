from dependency_injector import containers, providers

from app.infra.storage.manifest import ManifestWriter


class InfrastructureContainer(containers.DeclarativeContainer):
    config = providers.Configuration()

    manifest_writer = providers.Singleton(ManifestWriter)
