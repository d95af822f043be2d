"""Adaptive iterative rational global Arnoldi reduction of second-order systems."""
