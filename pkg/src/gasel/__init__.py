"""GA-driven variable selection with pairwise interactions for logistic risk models."""

__version__ = "0.1.0"
