"""Unit conventions.

All user-facing numbers are linear frequencies: mode frequencies in GHz,
couplings and anharmonicities in MHz, stray strengths in MHz or kHz as
labeled.  Internally everything is converted exactly once to angular
frequency in rad/ns, so that ``exp(-i H t)`` with ``t`` in ns needs no
extra factors.
"""

import math

TAU = 2.0 * math.pi


def ghz(value: float) -> float:
    """Linear GHz -> rad/ns."""
    return TAU * value


def mhz(value: float) -> float:
    """Linear MHz -> rad/ns."""
    return TAU * 1e-3 * value


def khz(value: float) -> float:
    """Linear kHz -> rad/ns."""
    return TAU * 1e-6 * value


def to_ghz(omega: float) -> float:
    return omega / TAU


def to_mhz(omega: float) -> float:
    return omega / TAU * 1e3


def to_khz(omega: float) -> float:
    return omega / TAU * 1e6
