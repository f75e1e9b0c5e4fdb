"""Model constants tied to the conformal exponent."""

from __future__ import annotations


def p_conformal(dim_N: int) -> float:
    """Conformal power p_c = 1 + 4/(N-1)."""
    return 1.0 + 4.0 / (dim_N - 1)


def kappa(p: float) -> float:
    """Amplitude of the space-independent blow-up profile.

    kappa solves v'' = v^p for v(t) = kappa (T - t)^(-2/(p-1)), i.e.
    kappa^(p-1) = 2 (p+1) / (p-1)^2; the constant-in-y state w = kappa is
    the corresponding stationary solution in similarity variables.
    """
    return (2.0 * (p + 1.0) / (p - 1.0) ** 2) ** (1.0 / (p - 1.0))


def eps0(p: float, b: float) -> float:
    """Decay rate (p-1) / (32 b (p+1)) in the damped-functional tail."""
    return (p - 1.0) / (32.0 * b * (p + 1.0))
