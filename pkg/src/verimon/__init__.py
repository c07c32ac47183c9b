"""verimon: monitoring of verification processes for safety-critical software.

Norm templates define assurance levels, objectives and checklist banks;
projects instantiate them, collect checklist answers and non-conformities,
and every status is recomputed from an append-only, hash-chained event log
that doubles as certification evidence.
"""

__version__ = "0.1.0"
