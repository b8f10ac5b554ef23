"""Enumeration caps and search budgets.

Caps are configuration, not behavior: exceeding one raises a typed error
instead of silently truncating, and callers that need more room pass their
own Caps instance.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Caps:
    brute_support: int = 12        # largest support the exhaustive norm oracle accepts
    sign_vectors: int = 20         # sign enumeration cap (unconditional constants)
    subset_vectors: int = 20       # subset enumeration cap (c0 equivalence constants)
    facet_functionals: int = 200000  # functional enumeration cap (operator norms)
    vertex_dim: int = 6            # exact vertex enumeration dimension cap
    search_nodes: int = 200000     # generic combinatorial search budget


DEFAULT_CAPS = Caps()
