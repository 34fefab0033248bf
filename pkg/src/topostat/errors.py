"""Domain error types.

Every error carries a short machine-parsable ``code`` used by the CLI to
emit single-line diagnostics.
"""


class TopostatError(Exception):
    code = "error"

    def __str__(self):
        msg = super().__str__()
        return f"{self.code}: {msg}" if msg else self.code


class InvalidInputError(TopostatError):
    code = "invalid-input"


class InvalidFiltrationError(TopostatError):
    code = "invalid-filtration"


class DegenerateVolumeError(TopostatError):
    code = "degenerate-volume"


class InvalidCapError(TopostatError):
    code = "invalid-cap"


class InvalidPersistenceError(TopostatError):
    code = "invalid-persistence"


class InvalidLabelsError(TopostatError):
    code = "invalid-labels"
