"""Arithmetic precision selection.

Coefficients are complex doubles by default. The ``extended`` mode stores
them as mpmath ``mpc`` objects inside numpy object arrays, which is slow but
keeps rounding far below the size of high-order jet terms. The mode is read
from ``FIBRED_FLOWER_PRECISION`` at import and can be switched locally with
:func:`precision`.
"""

import contextlib
import os

import mpmath

ENV_VAR = "FIBRED_FLOWER_PRECISION"
MODES = ("double", "extended")

# digits carried by RotationNumber's cached value; must exceed extended dps
ROTATION_DPS = 80

_state = {"mode": "double", "dps": 50}


def _from_env():
    mode = os.environ.get(ENV_VAR, "double").strip().lower() or "double"
    if mode not in MODES:
        raise ValueError(f"{ENV_VAR} must be one of {MODES}, got {mode!r}")
    _state["mode"] = mode


_from_env()


def mode():
    return _state["mode"]


def is_extended():
    return _state["mode"] == "extended"


def dps():
    return _state["dps"]


@contextlib.contextmanager
def precision(new_mode, digits=None):
    """Temporarily switch precision mode (and mpmath working digits)."""
    if new_mode not in MODES:
        raise ValueError(f"precision must be one of {MODES}")
    old = dict(_state)
    _state["mode"] = new_mode
    if digits is not None:
        _state["dps"] = int(digits)
    try:
        if new_mode == "extended":
            with mpmath.workdps(_state["dps"]):
                yield
        else:
            yield
    finally:
        _state.clear()
        _state.update(old)
