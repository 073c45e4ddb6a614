"""Bibliometric science mapping: descriptors, participation cut-offs, VOS maps and overlays."""

from pathlib import Path

__version__ = "0.1.0"

DATA_DIR = Path(__file__).resolve().parent / "data"
DEFAULT_VARIANT_RULES = DATA_DIR / "elearning_variants.csv"
PUBLISHED_BANDS = DATA_DIR / "published_bands.csv"
