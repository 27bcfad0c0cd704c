#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
errors.py

Error taxonomy shared by every threadsim script, plus the quiet switch
used by the per-module log() helpers.

  ParameterError   bad law / model parameters       (CLI exit 2)
  DataError        bad or insufficient data          (CLI exit 3)
  EstimationError  an estimator failed to converge   (CLI exit 3)
"""

from __future__ import annotations

import sys
from typing import Any, Dict, Optional

_QUIET = False


class ParameterError(ValueError):
    pass


class DataError(ValueError):
    pass


class EstimationError(RuntimeError):
    def __init__(self, msg: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(msg)
        self.diagnostics = dict(diagnostics or {})

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        details = ", ".join(f"{k}={v!r}" for k, v in self.diagnostics.items())
        return f"{base} ({details})"


def set_quiet(flag: bool) -> None:
    global _QUIET
    _QUIET = bool(flag)


def emit(prefix: str, msg: str) -> None:
    if _QUIET:
        return
    print(f"[{prefix}] {msg}", file=sys.stderr, flush=True)
