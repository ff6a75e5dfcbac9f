"""medal — a metadata catalog engine for data lakes.

Cataloged items are data entities in a property hypergraph: groupings
collect them into possibly-overlapping groups, links relate entities or
groups, and processes record transformations and carry lineage.
"""

from .model import CatalogSnapshot, ValidationReport, validate
from .store import CatalogStore

__all__ = ["CatalogSnapshot", "CatalogStore", "ValidationReport", "validate"]
__version__ = "0.1.0"
