"""Turn a corpus manifest into image/text/aspect embedding sidecar files."""

from .encoders import DEFAULT_MODEL, BuiltinBackend, ClipBackend, load_backend
from .errors import EncodeFailure, ExporterError, ManifestError, ModelLoadFailure
from .export import ExportJob, export
from .manifest import Row, read_manifest

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_MODEL",
    "BuiltinBackend",
    "ClipBackend",
    "EncodeFailure",
    "ExportJob",
    "ExporterError",
    "ManifestError",
    "ModelLoadFailure",
    "Row",
    "export",
    "load_backend",
    "read_manifest",
    "__version__",
]
