"""Persistence contracts; implementations live in app.infra.storage."""
