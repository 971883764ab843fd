"""Dissipative ground-state preparation with a single ancilla and mid-circuit reset."""

from __future__ import annotations

__version__ = "0.1.0"
