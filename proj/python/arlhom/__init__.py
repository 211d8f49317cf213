"""Effective-coefficient identification for heterogeneous diffusion media.

Thin Python veneer over the C++ core: batch commands mirror the `arlhom`
CLI, plus direct access to the main numeric operations.
"""

import json as _json

from ._core import (
    run,
    mesh_info,
    realize_cells,
    ensemble_average,
    scan,
    kstar_1d,
    kopt_1d,
    interface_1d,
    cell_corrector,
    sqs_scores,
)

__all__ = [
    "run",
    "run_json",
    "mesh_info",
    "realize_cells",
    "ensemble_average",
    "scan",
    "kstar_1d",
    "kopt_1d",
    "interface_1d",
    "cell_corrector",
    "sqs_scores",
]


def run_json(command, config_text, out_dir, threads=0, verbose=False):
    """Like run(), but returns the result document as a dict."""
    return _json.loads(run(command, config_text, out_dir, threads, verbose))
