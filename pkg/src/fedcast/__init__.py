"""fedcast: a seeded, bit-reproducible simulator for federated LSTM
forecasting of cellular traffic, with energy and sustainability accounting."""

__version__ = "0.1.0"
