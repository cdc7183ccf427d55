"""Error types shared across the package."""


class FormatError(ValueError):
    """Raised when a binary tensor file violates the IDSL layout."""


class ValidationError(ValueError):
    """Raised when tensor contents or cross-tensor shapes are inconsistent."""


class ManifestError(ValueError):
    """Raised when a case manifest is missing fields or malformed."""
