"""Error types shared across the catalog engine.

Every error carries a stable ``code`` string so API and CLI layers can map
failures deterministically, plus the ids that triggered it (when any).
"""

from __future__ import annotations


class CatalogError(Exception):
    """Base class for all catalog failures."""

    code = "catalog_error"
    http_status = 400

    def __init__(self, message: str, offending_ids: tuple[str, ...] = ()):
        super().__init__(message)
        self.message = message
        self.offending_ids = tuple(offending_ids)


class UnknownIdError(CatalogError):
    """A referenced id does not exist in the catalog."""

    http_status = 404

    def __init__(self, kind: str, ids: tuple[str, ...] | list[str] | str):
        if isinstance(ids, str):
            ids = (ids,)
        self.kind = kind
        self.code = f"unknown_{kind}"
        listed = ", ".join(sorted(ids))
        super().__init__(f"unknown {kind}: {listed}", tuple(ids))


class DuplicateIdError(CatalogError):
    code = "duplicate_id"
    http_status = 409

    def __init__(self, record_id: str):
        super().__init__(f"id already in use: {record_id}", (record_id,))


class SameGroupingError(CatalogError):
    """Group links must connect groups of two distinct groupings."""

    code = "group_link_same_grouping"
    http_status = 422

    def __init__(self, source_group: str, target_group: str, grouping: str):
        super().__init__(
            f"groups {source_group} and {target_group} both belong to grouping {grouping}",
            (source_group, target_group),
        )


class InvalidAttributeError(CatalogError):
    code = "invalid_attributes"
    http_status = 422


class ValidationFailedError(CatalogError):
    """A mutation or a loaded file would leave the catalog invalid."""

    code = "validation_failed"
    http_status = 422

    def __init__(self, message: str, report=None):
        ids = ()
        if report is not None:
            ids = tuple(sorted({v.record_id for v in report.violations}))
        super().__init__(message, ids)
        self.report = report


class CatalogFileError(CatalogError):
    """The catalog file cannot be read back (parse or version problems)."""

    http_status = 400

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


class ForeignDocumentError(CatalogError):
    """An interchange document for a foreign metadata model is malformed."""

    http_status = 422

    def __init__(self, code: str, message: str, offending_ids: tuple[str, ...] = ()):
        self.code = code
        super().__init__(message, offending_ids)


class ThesaurusError(CatalogError):
    code = "invalid_thesaurus"
    http_status = 422


class IngestError(CatalogError):
    """A pipeline source (directory, file, entity payload) cannot be used."""

    http_status = 422

    def __init__(self, code: str, message: str, offending_ids: tuple[str, ...] = ()):
        self.code = code
        super().__init__(message, offending_ids)


class FixtureMissingError(CatalogError):
    code = "fixture_missing"
    http_status = 409

    def __init__(self, message: str = "fixture missing"):
        super().__init__(message)


class ReadOnlyError(CatalogError):
    code = "read_only"
    http_status = 403

    def __init__(self):
        super().__init__("catalog is read-only")
