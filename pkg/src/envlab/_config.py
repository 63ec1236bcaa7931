"""Numerical tolerances and size limits shared across envlab."""

import os

EPS_NORM = 1e-10
EPS_ORTH = 1e-10
EPS_UNITARY = 1e-10
EPS_HERM = 1e-10
EPS_PSD = 1e-10
EPS_RECON = 1e-8
EPS_EIG = 1e-8
EPS_RANK = 1e-12
EPS_EQ = 1e-9
EPS_CERT = 1e-8

DEFAULT_DIM_CAP = 2 ** 24
DIM_CAP_ENV = "ENVLAB_DIM_CAP"


def dim_cap() -> int:
    """Largest allowed amplitude count; ``ENVLAB_DIM_CAP`` overrides the default."""
    raw = os.environ.get(DIM_CAP_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_DIM_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{DIM_CAP_ENV} must be a positive integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError(f"{DIM_CAP_ENV} must be a positive integer, got {raw!r}")
    return cap
