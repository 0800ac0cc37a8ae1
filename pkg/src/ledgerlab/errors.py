"""Exception hierarchy shared across the package."""


class LedgerlabError(Exception):
    """Base class for all errors raised by this package."""


# --- ledger / CSV ingestion ---------------------------------------------

class DuplicateLineError(LedgerlabError):
    """A (journal_id, line_no) pair occurred more than once."""


class OversizeEntryError(LedgerlabError):
    """A journal entry exceeds the configured maximum transaction count."""


class SchemaError(LedgerlabError):
    """A CSV file or field value violates the documented schema."""


class UnlabeledEntryError(LedgerlabError):
    """A journal entry has no matching row in the labels file."""


class DcDomainError(SchemaError):
    """A debit/credit flag was neither 'D' nor 'C'."""


class AlphabetError(SchemaError):
    """A source/account value contains a reserved substring."""


# --- synthetic generation -------------------------------------------------

class ConfigError(LedgerlabError):
    """A generator configuration violates its invariants."""


class InapplicableInjectorError(LedgerlabError):
    """The chosen anomaly injector cannot perturb this entry."""


# --- encoding -------------------------------------------------------------

class UnknownCategoryError(LedgerlabError):
    """A category value is absent from the encoder vocabulary."""


class InsufficientRowsError(LedgerlabError):
    """An operation requires more rows than the matrix provides."""


# --- embedding ------------------------------------------------------------

class EmptyMaskError(LedgerlabError):
    """An attention mask contains no active positions."""


class BackendLoadError(LedgerlabError):
    """An embedding backend could not be constructed from its assets."""


class TokenizationError(LedgerlabError):
    """The tokenizer rejected an input text."""


# --- sampling -------------------------------------------------------------

class DegenerateClassError(LedgerlabError):
    """A class has too few members for the requested split or fold."""


# --- classifiers ----------------------------------------------------------

class SingleClassError(LedgerlabError):
    """Training data contains only one class."""


class DimensionMismatchError(LedgerlabError):
    """Feature dimensions do not match the fitted model."""


class NonFiniteInputError(LedgerlabError):
    """An input matrix contains NaN or infinite values."""


# --- hyperparameter search --------------------------------------------------

class EmptySpaceError(LedgerlabError):
    """A search space declares no parameters."""


# --- metrics ----------------------------------------------------------------

class LengthMismatchError(LedgerlabError):
    """Paired sequences have different lengths."""


class UndefinedClassRecallError(LedgerlabError):
    """A per-class recall is undefined because the class is absent."""


class InsufficientPairsError(LedgerlabError):
    """Agreement statistics need at least two paired observations."""


class KeyMismatchError(LedgerlabError):
    """Two score maps do not share the same keys."""
