"""Exception types shared across the pipeline stages."""

from __future__ import annotations


class TdmError(Exception):
    """Base class for all pipeline errors."""


# -- document conversion / parsing ------------------------------------------

class ConverterNotFoundError(TdmError):
    """The configured external converter executable does not exist."""


class ConverterFailedError(TdmError):
    """External converter exited nonzero; carries its stderr."""

    def __init__(self, returncode: int, stderr: str):
        super().__init__(f"converter exited {returncode}: {stderr.strip()}")
        self.returncode = returncode
        self.stderr = stderr


class MalformedOutputError(TdmError):
    """A converter or remote parser produced output that is not well-formed TEI."""


class MalformedXmlError(TdmError):
    """Input to the TEI parser is not well-formed UTF-8 XML."""


class MissingBodyError(TdmError):
    """TEI document has no body division."""


# -- remote services ---------------------------------------------------------

class EndpointUnreachableError(TdmError):
    """The remote endpoint could not be reached."""


class HttpError(TdmError):
    """Remote service answered with a non-success HTTP status."""

    def __init__(self, status: int, body: str):
        super().__init__(f"HTTP {status}: {body[:200]}")
        self.status = status
        self.body = body


class SchemaError(TdmError):
    """Remote service response does not match the expected schema."""


class RemoteTimeoutError(TdmError):
    """Remote request exceeded the configured timeout."""


# -- feature extraction ------------------------------------------------------

class EmptyDocumentError(TdmError):
    """Document has neither title nor abstract."""


class EmptyCollectionError(TdmError):
    """Statistics requested over an empty collection."""


# -- corpus ------------------------------------------------------------------

class MalformedDumpError(TdmError):
    """An annotation dump file could not be parsed."""


class EmptyVocabularyError(TdmError):
    """Frequency filtering removed every label from the vocabulary."""


class TooFewPapersError(TdmError):
    """Fold splitting needs at least two papers."""


# -- scoring / prediction ----------------------------------------------------

class UnknownTripleError(TdmError):
    """The distinguished Unknown label cannot be rendered as a hypothesis."""


class PredictError(TdmError):
    """Scorer failure while predicting one paper; carries the paper id."""

    def __init__(self, paper_id: str, cause: Exception):
        super().__init__(f"paper {paper_id}: {cause}")
        self.paper_id = paper_id


# -- evaluation --------------------------------------------------------------

class UnknownPaperIdError(TdmError):
    """A prediction references a paper that is absent from the gold set."""


class EmptyEvaluationError(TdmError):
    """No papers remain after applying the evaluation setting."""


class SettingMismatchError(TdmError):
    """Cross-fold averaging was asked to combine reports of different settings."""
