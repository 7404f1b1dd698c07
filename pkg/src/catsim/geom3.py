"""Minimal SO(3) toolbox for the two-vehicle cable simulation.

Rotations are plain 3x3 numpy arrays (body-to-inertial). Only the
operations the controller and plant actually use are provided; this is
not a general Lie-group library.
"""

import numpy as np

from .errors import DegenerateMatrix, NonSkewInput

# Orthonormality tolerance used for validation throughout the package.
ORTHONORMALITY_TOL = 1e-9

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def hat(v):
    """Skew-symmetric matrix of v, so that hat(v) @ u == cross(v, u)."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def vee(m):
    """Inverse of hat(). Rejects input whose symmetric part is not negligible."""
    m = np.asarray(m, dtype=float)
    if np.linalg.norm(m + m.T) >= 1e-9:
        raise NonSkewInput("matrix is not skew-symmetric to 1e-9")
    return np.array([m[2, 1], m[0, 2], m[1, 0]])


def rot_z(angle):
    """Right-handed rotation about the inertial vertical by `angle` radians."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([
        [c, -s, 0.0],
        [s, c, 0.0],
        [0.0, 0.0, 1.0],
    ])


def rot_from_rotvec(v):
    """Rodrigues formula: rotation by angle ||v|| about axis v/||v||."""
    v = np.asarray(v, dtype=float)
    angle = np.linalg.norm(v)
    if angle < 1e-12:
        return np.eye(3)
    k = hat(v / angle)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def is_rotation(r, tol=ORTHONORMALITY_TOL):
    """True if r is orthonormal with unit determinant within tol."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        return False
    return (np.linalg.norm(r.T @ r - np.eye(3)) < tol
            and abs(np.linalg.det(r) - 1.0) < tol)


def nearest_rotation(m):
    """Orthogonal polar factor of m: the closest rotation in Frobenius norm.

    Used to repair integration drift of attitude matrices. Raises
    DegenerateMatrix when m has non-positive determinant or a singular
    value below 1e-9, where the projection is ill-defined. Idempotent on
    matrices that are already rotations.
    """
    m = np.asarray(m, dtype=float)
    if np.linalg.det(m) <= 0.0:
        raise DegenerateMatrix("determinant must be positive")
    u, sigma, vt = np.linalg.svd(m)
    if sigma[-1] < 1e-9:
        raise DegenerateMatrix("smallest singular value below 1e-9")
    r = u @ vt
    if np.linalg.det(r) < 0.0:
        # Unreachable for det(m) > 0, kept as a guard against SVD sign play.
        u[:, -1] = -u[:, -1]
        r = u @ vt
    return r


def attitude_error(r, r_des):
    """Rotation error 0.5 * vee(Rd^T R - R^T Rd), zero iff R == Rd."""
    r = np.asarray(r, dtype=float)
    r_des = np.asarray(r_des, dtype=float)
    m = r_des.T @ r
    return 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def angular_velocity_error(omega, r, r_des, omega_des):
    """Body-rate error Omega - R^T Rd Omega_d."""
    omega = np.asarray(omega, dtype=float)
    omega_des = np.asarray(omega_des, dtype=float)
    return omega - np.asarray(r, dtype=float).T @ np.asarray(r_des, dtype=float) @ omega_des
