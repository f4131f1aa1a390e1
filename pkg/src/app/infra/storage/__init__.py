"""File-backed persistence: atomic writes, record schemas and repositories."""
