"""Digital twin of an indoor heritage site with visitor localization,
proximity notifications and preference-aware route planning."""

__version__ = "0.1.0"
