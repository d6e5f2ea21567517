"""Exception hierarchy shared by all stgminer modules."""


class STGError(Exception):
    """Base class for every error raised by stgminer."""


class DuplicateIdentity(STGError):
    """An (object_id, time) pair already has a node."""


class BadLayer(STGError):
    """A layer index is outside the graph's time domain."""


class UnknownNode(STGError):
    """A node id does not exist in the graph."""


class LayerViolation(STGError):
    """An edge connects layers its kind does not allow."""


class IdentityViolation(STGError):
    """A filiation edge disagrees with the object identities of its endpoints."""


class DuplicateEdge(STGError):
    """An equivalent edge is already present."""


class EmptySeries(STGError):
    """A snapshot series has no snapshots."""


class BadAnchor(STGError):
    """A match anchor does not fit the pattern or the graph."""


class TooLarge(STGError):
    """Brute-force enumeration would exceed its size guard."""


class ParseError(STGError):
    """A file or text could not be decoded into an stgminer object."""

    def __init__(self, path, line, reason):
        self.path = path
        self.line = line
        self.reason = reason
        where = str(path) if path is not None else "<text>"
        if line is not None:
            where = f"{where}:{line}"
        super().__init__(f"{where}: {reason}")


class SchemaVersionError(ParseError):
    """The file declares a schema version this package cannot read."""


class ValidationError(STGError):
    """A decoded object breaks one or more structural invariants.

    ``issues`` holds every violation found, not just the first.
    """

    def __init__(self, issues):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))
