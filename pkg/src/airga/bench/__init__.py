"""Benchmark matrix of AIRGA runs over model sizes and solver strategies."""
