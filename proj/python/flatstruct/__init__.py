"""Verification of flat structures and their Painleve VI data."""

import json

from ._core import (
    FlatstructError,
    WdvvReport,
    catalog_ids,
    check_wdvv,
    extract_p6,
    jm_round_trip,
    normalize_expr,
)
from . import _core


def catalog_get(entry_id):
    return json.loads(_core.catalog_entry_json(entry_id))


def verify(entry_id, depth="symbolic", residual=1e-6, identity=1e-10, trace=1e-8):
    return json.loads(_core.verify_json(entry_id, depth, residual, identity, trace))


__all__ = [
    "FlatstructError",
    "WdvvReport",
    "catalog_get",
    "catalog_ids",
    "check_wdvv",
    "extract_p6",
    "jm_round_trip",
    "normalize_expr",
    "verify",
]
