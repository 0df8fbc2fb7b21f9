"""Python bindings for the thin_epi C++ library."""

from ._thin_epi import (
    BlowupProfile,
    Solution,
    ThinEpiError,
    a1_members,
    catalog_profile,
    epi_check,
    gap_demo,
    kappa_of,
    lambda_of,
    mode_count_ell,
    run,
    solve,
    weiss_spectral,
)

__all__ = [
    "BlowupProfile",
    "Solution",
    "ThinEpiError",
    "a1_members",
    "catalog_profile",
    "epi_check",
    "gap_demo",
    "kappa_of",
    "lambda_of",
    "mode_count_ell",
    "run",
    "solve",
    "weiss_spectral",
]
