"""CLI command groups, one package per group."""
