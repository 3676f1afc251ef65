"""Numerical verification of quasi-Einstein warped products over conformal pseudo-Euclidean bases."""

from .geometry import Direction, Profile, Signature, WarpedSpec, causal_class
from .specio import load_spec, spec_from_dict, spec_to_dict
from .verifier import ResidualReport, verify

__all__ = [
    "Direction",
    "Profile",
    "ResidualReport",
    "Signature",
    "WarpedSpec",
    "causal_class",
    "load_spec",
    "spec_from_dict",
    "spec_to_dict",
    "verify",
]
