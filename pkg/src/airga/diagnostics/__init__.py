"""Stability analysis of AIRGA runs with inexact linear solves."""
