"""Named objectives addressable from the command line."""

from __future__ import annotations

import numpy as np

from .errors import InputError
from .objective import BlackBoxObjective
from .polynomial import parse_polynomial
from .simplex import DomainShape

# d(angle)/dx for the two angles of the demo, in flat order (11, 12, 21, 22)
_DA = np.array([4.0, -4.0, 0.0, 0.0])
_DB = np.array([0.0, 0.0, 3.0, -3.0])


def _trig_angles(x):
    f = np.asarray(x, dtype=float).reshape(-1)
    a = 4.0 * (f[0] - f[1] + 1.0)
    b = 3.0 * (f[2] - f[3] + 1.0)
    return a, b


def _trig_value(x):
    a, b = _trig_angles(x)
    return 2.0 * np.cos(a) * np.sin(b)


def _trig_grad(x):
    a, b = _trig_angles(x)
    g = 2.0 * (-np.sin(a) * np.sin(b) * _DA + np.cos(a) * np.cos(b) * _DB)
    return g.reshape(2, 2)


def _trig_hess(x):
    a, b = _trig_angles(x)
    cross = np.outer(_DA, _DB) + np.outer(_DB, _DA)
    return 2.0 * (
        -np.cos(a) * np.sin(b) * (np.outer(_DA, _DA) + np.outer(_DB, _DB))
        - np.sin(a) * np.cos(b) * cross
    )


def trig_demo() -> BlackBoxObjective:
    """``cos(8x) sin(6y)`` lifted to a 2x2 profile with ``x = x11``, ``y = x21``.

    The lift is ``2 cos(4(x11 - x12 + 1)) sin(3(x21 - x22 + 1))``.  On the
    simplex it equals ``2 cos(8x) sin(6y)``; its partial derivatives are
    ``(+-8 sin 8x sin 6y)`` and ``(+-6 cos 8x cos 6y)`` with opposite signs per
    strategy, so MWU on it reproduces the two-variable demo map exactly.
    """
    return BlackBoxObjective(DomainShape(2, 2), _trig_value, _trig_grad, _trig_hess, name="trig-demo")


def coordination_2x2():
    """Bilinear potential ``x11 x21 + x12 x22`` of a two-player coordination game."""
    return parse_polynomial("1 1:1 2:1\n1 1:2 2:2", shape=(2, 2))


def counterexample():
    """``x1 + x1^7 x2 + x2^7`` on a single 2-simplex; its Baum-Eagon map is not injective."""
    return parse_polynomial("1 1:1\n1 1:1^7 1:2^1\n1 1:2^7", shape=(1, 2))


BUILTINS = {
    "trig-demo": trig_demo,
    "coord-2x2": coordination_2x2,
    "counterexample": counterexample,
}


def get_builtin(name: str):
    try:
        return BUILTINS[name]()
    except KeyError:
        raise InputError(f"unknown builtin objective {name!r}; choose from {sorted(BUILTINS)}") from None
