"""Exception hierarchy shared across the package."""


class FedArchError(Exception):
    """Base class for all fedarch errors."""


# --- catalog ---

class CatalogError(FedArchError):
    pass


class ParseError(CatalogError):
    """File is not readable as the expected structured text."""


class SchemaError(CatalogError):
    """Unknown field, enum value, or wrong shape in a catalog document."""


class DanglingReferenceError(CatalogError):
    """An id points at a pattern/attribute that does not exist."""


class DuplicateIdError(CatalogError):
    pass


class NotFoundError(FedArchError):
    pass


# --- decision engine ---

class EngineError(FedArchError):
    pass


class MixedModelError(EngineError):
    """A chosen set spans more than one decision model."""


class UnknownAttributeError(EngineError):
    pass


class InfeasibleProfileError(EngineError):
    """forced_in itself violates feasibility for some decision model."""


# --- simulator ---

class SimError(FedArchError):
    pass


class ConfigError(SimError):
    pass


class IncompatiblePluginsError(ConfigError):
    """The requested plugin combination has no defined semantics."""


class NonFiniteError(SimError):
    """Training diverged: loss or weights became non-finite."""


class EmptyUpdateError(SimError):
    pass


class DimensionMismatchError(SimError):
    pass


class EmptySelectionError(SimError):
    """Client selection policy excluded every client."""


class MaskingCardinalityError(SimError):
    """Pairwise masking needs at least two participants."""


class DuplicateVersionError(SimError):
    pass
