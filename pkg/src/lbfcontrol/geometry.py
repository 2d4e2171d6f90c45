"""SO(3) primitives used by the plant, planner and controller.

Rotations are plain 3x3 ``numpy`` arrays whose columns are the body axes
b1, b2, b3 expressed in the world frame.  Vectors are length-3 arrays.
Everything here is a pure function.
"""
import math

import numpy as np

from .errors import NotSkew

ORTHO_TOL = 1e-9
E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def cross(a, b):
    # np.cross is ~10x slower than this for single 3-vectors
    return np.array((a[1] * b[2] - a[2] * b[1],
                     a[2] * b[0] - a[0] * b[2],
                     a[0] * b[1] - a[1] * b[0]))


def norm(v):
    return math.sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2])


def hat(v):
    """Skew-symmetric matrix such that ``hat(v) @ w == cross(v, w)``."""
    return np.array(((0.0, -v[2], v[1]),
                     (v[2], 0.0, -v[0]),
                     (-v[1], v[0], 0.0)))


def vee(M, check=True):
    """Inverse of :func:`hat`.

    Raises NotSkew if ``M`` is not antisymmetric to within 1e-8
    (Frobenius norm of ``M + M.T``).
    """
    M = np.asarray(M, dtype=float)
    if check and np.linalg.norm(M + M.T) >= 1e-8:
        raise NotSkew("matrix is not skew-symmetric")
    return np.array((M[2, 1], M[0, 2], M[1, 0]))


def _vee_asym(M):
    # vee of the antisymmetric part 0.5*(M - M.T), no check
    return 0.5 * np.array((M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]))


def rot_x(a):
    c, s = math.cos(a), math.sin(a)
    return np.array(((1.0, 0.0, 0.0), (0.0, c, -s), (0.0, s, c)))


def rot_y(a):
    c, s = math.cos(a), math.sin(a)
    return np.array(((c, 0.0, s), (0.0, 1.0, 0.0), (-s, 0.0, c)))


def rot_z(a):
    c, s = math.cos(a), math.sin(a)
    return np.array(((c, -s, 0.0), (s, c, 0.0), (0.0, 0.0, 1.0)))


def exp_map(phi):
    """Rotation matrix of the rotation vector ``phi`` (Rodrigues formula)."""
    x, y, z = phi
    th2 = x * x + y * y + z * z
    if th2 < 1e-12:
        # second-order series; error O(th^3) below float eps here
        a = 1.0 - th2 / 6.0
        b = 0.5 - th2 / 24.0
    else:
        th = math.sqrt(th2)
        a = math.sin(th) / th
        b = (1.0 - math.cos(th)) / th2
    K = hat(phi)
    return np.eye(3) + a * K + b * (K @ K)


def log_map(R):
    """Rotation vector (axis * angle, angle in [0, pi]) of ``R``.

    Near pi the axis is recovered from the column of the symmetric part
    with the largest diagonal entry; either sign of the axis is a valid
    answer at exactly pi.
    """
    R = np.asarray(R, dtype=float)
    c = 0.5 * (R[0, 0] + R[1, 1] + R[2, 2] - 1.0)
    c = min(1.0, max(-1.0, c))
    w = np.array((R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]))
    s = 0.5 * norm(w)
    theta = math.atan2(s, c)
    if theta < 1e-6:
        # sin(th)/th ~ 1 - th^2/6
        return 0.5 * (1.0 + theta * theta / 6.0) * w
    if theta < math.pi - 1e-4:
        return (0.5 * theta / math.sin(theta)) * w
    # symmetric part is c*I + (1 - c)*a a^T
    B = (0.5 * (R + R.T) - c * np.eye(3)) / (1.0 - c)
    i = int(np.argmax(np.diag(B)))
    axis = B[:, i] / math.sqrt(B[i, i])
    axis /= norm(axis)
    # fix the sign using the (small but informative) antisymmetric part
    if axis @ w < 0.0:
        axis = -axis
    return theta * axis


def orthonormalize(R):
    """Closest rotation matrix to ``R`` in the Frobenius sense (polar factor)."""
    U, _, Vt = np.linalg.svd(R)
    Q = U @ Vt
    if np.linalg.det(Q) < 0.0:
        U[:, -1] = -U[:, -1]
        Q = U @ Vt
    return Q


def orthonormality_error(R):
    return float(np.linalg.norm(R.T @ R - np.eye(3)))


def ensure_rotation(R, tol=ORTHO_TOL):
    """Return ``R`` unchanged unless ``|R^T R - I|_F`` exceeds ``tol``."""
    if orthonormality_error(R) > tol:
        return orthonormalize(R)
    return R


def is_rotation(R, tol=ORTHO_TOL):
    R = np.asarray(R)
    return (R.shape == (3, 3) and orthonormality_error(R) < tol
            and abs(np.linalg.det(R) - 1.0) < tol)


def rotation_distance(R1, R2):
    """d(R1, R2) = 0.5 * tr(I - R2^T R1), in [0, 2]."""
    # tr(R2^T R1) is the elementwise inner product
    return 0.5 * (3.0 - float(np.sum(R1 * R2)))


def attitude_error(R, R_d):
    """e_R = 0.5 * vee(R_d^T R - R^T R_d)."""
    return _vee_asym(R_d.T @ R)


def angular_velocity_error(omega, R, R_d, omega_d):
    """e_w = w - R^T R_d w_d.

    The rotation between frames is R^T R_d, consistent with the attitude
    error dynamics used in the moment law.
    """
    return omega - R.T @ (R_d @ omega_d)


def rodrigues(v, k, theta):
    """Rotate ``v`` about the unit axis ``k`` by ``theta`` radians."""
    c, s = math.cos(theta), math.sin(theta)
    return v * c + cross(k, v) * s + k * (float(k @ v) * (1.0 - c))


def angle_between(a, b):
    return math.atan2(norm(cross(a, b)), float(a @ b))


def euler_zyx(R):
    """(roll, pitch, yaw) in radians for R = Rz(yaw) Ry(pitch) Rx(roll)."""
    pitch = -math.asin(max(-1.0, min(1.0, R[2, 0])))
    roll = math.atan2(R[2, 1], R[2, 2])
    yaw = math.atan2(R[1, 0], R[0, 0])
    return roll, pitch, yaw


def from_euler_zyx(roll, pitch, yaw):
    return rot_z(yaw) @ rot_y(pitch) @ rot_x(roll)


def random_rotation(rng):
    """Uniformly distributed rotation (via a random unit quaternion)."""
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array((
        (1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)),
        (2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)),
        (2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)),
    ))
