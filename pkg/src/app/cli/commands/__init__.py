"""Subcommand modules; every ``*_commands`` module exposes ``register``."""
