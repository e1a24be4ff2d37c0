"""Constellation mapping, error-rate analysis and rate adaptation for
denoise-and-forward physical-layer network coding with M-PAM/M-QAM."""

__version__ = "0.1.0"

from .constellation import Constellation, build_constellation, demodulate, from_name, modulate
from .pnc_mapping import (
    DecodeError,
    MappingTable,
    build_mapping_table,
    decode_expected,
    superpose,
    verify_exclusive_law,
)

__all__ = [
    "Constellation",
    "build_constellation",
    "from_name",
    "modulate",
    "demodulate",
    "DecodeError",
    "MappingTable",
    "superpose",
    "build_mapping_table",
    "decode_expected",
    "verify_exclusive_law",
]
