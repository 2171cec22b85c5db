"""Exception hierarchy. CLI maps ZonesError subclasses to exit status 3."""


class ZonesError(Exception):
    pass


class CatalogError(ZonesError):
    """Bad catalog input. ``row`` is the 1-based data row number when known."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class IndexBuildError(ZonesError):
    pass


class IndexFormatError(ZonesError):
    pass


class VersionMismatchError(IndexFormatError):
    pass


class MalformedHeaderError(IndexFormatError):
    pass


class TruncatedBodyError(IndexFormatError):
    pass


class QueryError(ZonesError):
    pass


class MatchError(ZonesError):
    pass
