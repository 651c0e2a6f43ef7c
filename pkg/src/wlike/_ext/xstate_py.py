"""NumPy implementation of the X-state Devetak-Winter kernel."""

import numpy as np


def _xlogx(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log2(x[pos])
    return out


def xstate_dw(a, b, c, d):
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    tot = a + 2 * b + d
    a, b, c, d = a / tot, b / tot, np.abs(c) / tot, d / tot
    ab, bd = a + b, b + d
    lo = np.clip(b - c, 0.0, None)
    i_ab = _xlogx(a) + 2 * _xlogx(b) + _xlogx(d) - 2 * (_xlogx(ab) + _xlogx(bd))
    i_ae = 2 * _xlogx(b) - _xlogx(b + c) - _xlogx(lo) - _xlogx(ab) - _xlogx(bd)
    return i_ab, i_ae
