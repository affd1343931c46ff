"""Global configuration.

The reduced Planck constant is a process-wide setting (default 1, i.e.
natural units).  All minimum-uncertainty checks and Fourier kernels read
it through :func:`hbar` at call time.
"""

from contextlib import contextmanager

_HBAR = 1.0


def hbar() -> float:
    """Current value of the reduced Planck constant."""
    return _HBAR


def set_hbar(value: float) -> None:
    """Set the reduced Planck constant (must be > 0)."""
    if not value > 0:
        raise ValueError(f"hbar must be positive, got {value}")
    global _HBAR
    _HBAR = float(value)


@contextmanager
def use_hbar(value: float):
    """Temporarily override hbar inside a with-block (mainly for tests)."""
    old = _HBAR
    set_hbar(value)
    try:
        yield
    finally:
        set_hbar(old)
