"""Regenerate convergence figures from fvselect run directories.

Reads only the CSV outputs (plus manifest.json for the experiment name) and
renders deterministic PNG panels; no simulation happens here.
"""

from .render import EmptyDataError, SchemaMismatchError, render_run

__all__ = ["EmptyDataError", "SchemaMismatchError", "render_run"]
