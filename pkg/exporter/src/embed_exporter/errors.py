class ExporterError(Exception):
    """Base for all exporter failures."""


class ManifestError(ExporterError):
    """Manifest file violates the documented TSV layout."""


class ModelLoadFailure(ExporterError):
    """The requested encoder backend could not be constructed."""


class EncodeFailure(ExporterError):
    """A specific sample could not be encoded; aborts the job."""
