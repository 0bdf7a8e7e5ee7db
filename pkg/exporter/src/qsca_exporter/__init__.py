"""Bridges real backends to the qsca toolkit via interchange JSON files."""

from .convert import device_dict, library_dict
from .qc_format import parse_qc
from .schedule_export import schedule_dict
from .snapshot import BackendSnapshot, ExportError, load_or_fetch

__version__ = "0.1.0"
