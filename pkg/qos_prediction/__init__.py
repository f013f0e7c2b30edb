"""Region-biased, fuzzy-entropy regularized matrix factorization for QoS prediction."""

__version__ = "0.1.0"
