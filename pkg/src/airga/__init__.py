"""Adaptive iterative rational global Arnoldi (AIRGA) model order reduction
for proportionally damped second-order systems, with SPAI-preconditioned
conjugate gradient solves and stability diagnostics."""

__version__ = "0.1.0"
