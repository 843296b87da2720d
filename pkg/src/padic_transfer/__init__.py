"""Exact lattice computations for orbital integrals over an unramified quadratic extension."""

from .padic import LogMultiple, PadicScalar, PrecisionExhausted, nonresidue, norm_one_sample

__all__ = ["LogMultiple", "PadicScalar", "PrecisionExhausted", "nonresidue", "norm_one_sample"]
