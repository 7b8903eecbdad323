"""Python front end for the clnx naturalizer."""

import json as _json

from ._clnx import ClnxError, analyze, apply_rules, list_rules, naturalize
from ._clnx import run_corpus as _run_corpus

__all__ = ["ClnxError", "analyze", "apply_rules", "list_rules", "naturalize", "run_corpus"]


def run_corpus(input, output, **kwargs):
    """Naturalize a JSONL corpus file into `output`; returns the aggregate statistics."""
    return _json.loads(_run_corpus(str(input), str(output), **kwargs))
