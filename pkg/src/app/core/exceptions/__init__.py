"""Domain-level exceptions without CLI concerns."""
