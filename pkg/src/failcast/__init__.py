"""Failure prediction for hourly machine-state event streams.

Pipeline: ingest or synthesize the five event datasets, assemble a joined
machine-state stream with a configurable failure horizon, fit a
sample-weighted logistic regression, and evaluate it with machine-disjoint
temporally ordered cross-validation.
"""

__version__ = "0.1.0"
