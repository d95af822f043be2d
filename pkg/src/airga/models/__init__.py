"""Benchmark model generation and sparse-system file I/O."""
