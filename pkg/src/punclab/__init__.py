"""Random puncturings of linear codes: fields, codes, types, local properties,
thresholds, channels and low-randomness sampling."""

__version__ = "0.1.0"
