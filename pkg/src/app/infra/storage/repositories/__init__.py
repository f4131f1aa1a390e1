"""File repository implementations of the core repository contracts."""
