"""Distance functions over ring labels.

``delta_clockwise`` and ``delta_absolute`` measure gaps along a ring of ``n``
positions; ``delta_xor`` is the Hamming distance between labels.  All three
are used both as greedy objectives and as oracles in the test-suite.
"""

from __future__ import annotations

from .errors import ParameterError


def check_label(u: int, n: int) -> None:
    """Raise :class:`ParameterError` unless ``0 <= u < n``."""
    if n < 1:
        raise ParameterError(f"ring size must be positive, got {n}")
    if not 0 <= u < n:
        raise ParameterError(f"node label {u} outside [0, {n - 1}]")


def delta_clockwise(u: int, v: int, n: int) -> int:
    check_label(u, n)
    check_label(v, n)
    return v - u if v >= u else n + v - u


def delta_absolute(u: int, v: int, n: int) -> int:
    check_label(u, n)
    check_label(v, n)
    gap = v - u if v >= u else n + v - u
    return min(gap, n - gap) if gap else 0


def delta_xor(u: int, v: int) -> int:
    """Number of bit positions in which ``u`` and ``v`` differ."""
    if u < 0 or v < 0:
        raise ParameterError("xor distance is defined for non-negative labels")
    return bin(u ^ v).count("1")


# Unchecked variants for inner loops; callers validate labels once up front.


def _cw(u: int, v: int, n: int) -> int:
    return (v - u) % n


def _abs(u: int, v: int, n: int) -> int:
    gap = (v - u) % n
    return min(gap, n - gap)


def _xor(u: int, v: int, n: int) -> int:
    return bin(u ^ v).count("1")


METRICS = {
    "clockwise": _cw,
    "absolute": _abs,
    "xor": _xor,
}


def metric_function(name: str):
    """Return the unchecked ``(u, v, n) -> int`` distance for ``name``."""
    try:
        return METRICS[name]
    except KeyError:
        raise ParameterError(f"unknown metric {name!r}") from None
