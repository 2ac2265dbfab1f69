"""Multi-sensor building energy forecasting: ingest, fuse, featurize, train, tune, evaluate."""

__version__ = "0.1.0"
