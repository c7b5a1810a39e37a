"""Unit-quaternion algebra and the manifold calculus built on it.

Quaternions are numpy arrays of shape (4,), scalar first: q = (u, x, y, z),
Hamilton convention (i*j = k). The log/exp maps use the half-angle form

    log q = (v / |v|) * acos(u),      exp w = (cos |w|, (w / |w|) sin |w|)

so exp(w) rotates by an angle of 2*|w| about w. All analytic derivatives
here are plain Jacobians of these expressions and are checked against
central finite differences in the test suite.
"""

from __future__ import annotations

import numpy as np

# Below this norm the closed forms divide by a near-zero value; switch to
# 2-term Taylor expansions.
SMALL_ANGLE = 1e-8

# Tolerated deviation from unit norm before an input is rejected.
UNIT_TOL = 1e-6

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])

# Derivative of the exponential map at w = 0: the scalar part is stationary,
# the vector part is the identity.
EXP_DERIV_AT_ZERO = np.array([
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
])


def check_unit(q: np.ndarray) -> None:
    """Raise ValueError if q is not unit-norm within UNIT_TOL."""
    n = np.linalg.norm(q)
    if abs(n - 1.0) > UNIT_TOL:
        raise ValueError(f"quaternion norm {n!r} deviates from 1 by more than {UNIT_TOL}")


def canonicalize(q: np.ndarray) -> np.ndarray:
    """Flip sign so the scalar part is >= 0; q and -q are the same rotation.

    When the scalar part is exactly zero the tie is broken on the first
    nonzero vector component, so canonicalize(q) == canonicalize(-q) always.
    """
    q = np.asarray(q, dtype=float)
    if q[0] < 0.0:
        return -q
    if q[0] == 0.0:
        for comp in q[1:]:
            if comp != 0.0:
                return -q if comp < 0.0 else q.copy()
    return q.copy()


def qlog(q: np.ndarray) -> np.ndarray:
    """Logarithm of a unit quaternion as a 3-vector (half-angle times axis).

    The input is canonicalized to u >= 0 first, so the result norm is at
    most pi/2.
    """
    q = np.asarray(q, dtype=float)
    check_unit(q)
    q = canonicalize(q)
    u, v = q[0], q[1:]
    vn = np.linalg.norm(v)
    if vn < SMALL_ANGLE:
        # acos(u)/|v| = 1 + |v|^2/6 + O(|v|^4) for u = sqrt(1 - |v|^2)
        return v * (1.0 + vn * vn / 6.0)
    return v * (np.arccos(np.clip(u, -1.0, 1.0)) / vn)


def qexp(w: np.ndarray) -> np.ndarray:
    """Exponential map: 3-vector to unit quaternion (inverse of qlog)."""
    w = np.asarray(w, dtype=float)
    n = np.linalg.norm(w)
    if n < SMALL_ANGLE:
        # cos n = 1 - n^2/2, sin(n)/n = 1 - n^2/6 to second order
        n2 = n * n
        return np.concatenate(([1.0 - n2 / 2.0], w * (1.0 - n2 / 6.0)))
    return np.concatenate(([np.cos(n)], w * (np.sin(n) / n)))


def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a * b."""
    au, ax, ay, az = a
    bu, bx, by, bz = b
    return np.array([
        au * bu - ax * bx - ay * by - az * bz,
        au * bx + bu * ax + ay * bz - az * by,
        au * by + bu * ay + az * bx - ax * bz,
        au * bz + bu * az + ax * by - ay * bx,
    ])


def qinv(q: np.ndarray) -> np.ndarray:
    """Inverse of a unit quaternion: the conjugate (u, -v)."""
    out = np.asarray(q, dtype=float).copy()
    out[1:] = -out[1:]
    return out


def qrotate(q: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Rotate 3-vector t by q: the vector part of q * (0, t) * q^-1."""
    u, x, y, z = q
    t0, t1, t2 = float(t[0]), float(t[1]), float(t[2])
    # t + 2 v x (v x t + u t), algebraically equal to the conjugation
    a0 = y * t2 - z * t1 + u * t0
    a1 = z * t0 - x * t2 + u * t1
    a2 = x * t1 - y * t0 + u * t2
    return np.array([
        t0 + 2.0 * (y * a2 - z * a1),
        t1 + 2.0 * (z * a0 - x * a2),
        t2 + 2.0 * (x * a1 - y * a0),
    ])


def to_matrix(q: np.ndarray) -> np.ndarray:
    """3x3 rotation matrix R with R @ t == qrotate(q, t)."""
    u, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - u * z), 2 * (x * z + u * y)],
        [2 * (x * y + u * z), 1 - 2 * (x * x + z * z), 2 * (y * z - u * x)],
        [2 * (x * z - u * y), 2 * (y * z + u * x), 1 - 2 * (x * x + y * y)],
    ])


def dqmul_left(a: np.ndarray) -> np.ndarray:
    """4x4 matrix L(a) with a * b == L(a) @ b, i.e. d(a*b)/db."""
    u, x, y, z = a
    return np.array([
        [u, -x, -y, -z],
        [x, u, -z, y],
        [y, z, u, -x],
        [z, -y, x, u],
    ])


def dqmul_right(b: np.ndarray) -> np.ndarray:
    """4x4 matrix R(b) with a * b == R(b) @ a, i.e. d(a*b)/da."""
    u, x, y, z = b
    return np.array([
        [u, -x, -y, -z],
        [x, u, z, -y],
        [y, -z, u, x],
        [z, y, -x, u],
    ])


# conj(q) = CONJ @ q
_CONJ = np.diag([1.0, -1.0, -1.0, -1.0])


def drotate_dt(q: np.ndarray) -> np.ndarray:
    """d(qrotate(q, t))/dt: the rotation matrix of q."""
    return to_matrix(q)


def drotate_dq(q: np.ndarray, t: np.ndarray) -> np.ndarray:
    """d(qrotate(q, t))/dq as a 3x4 matrix over the raw components of q.

    Differentiates the conjugation q * (0, t) * conj(q) treating the four
    components of q as free variables.
    """
    s = np.concatenate(([0.0], np.asarray(t, dtype=float)))
    d4 = dqmul_right(qmul(s, qinv(q))) + dqmul_left(qmul(q, s)) @ _CONJ
    return d4[1:, :]


def exp_map_derivative_at_zero() -> np.ndarray:
    """The constant 4x3 derivative of qexp at w = 0."""
    return EXP_DERIV_AT_ZERO.copy()
