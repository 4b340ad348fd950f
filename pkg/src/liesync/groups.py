"""Matrix Lie group primitives for SO(3) and SE(3).

States are square matrices: rotations R with R^T R = I, det R = +1, and rigid
transforms [[R, t], [0, 1]].  Lie-algebra elements are coordinate vectors with
respect to a fixed generator basis (3 coordinates for so(3), 6 for se(3): three
rotational followed by three translational).  The generator convention is

    E1 = [[0, 1, 0], [-1, 0, 0], [0, 0, 0]]
    E2 = [[0, 0, 0], [0, 0, 1], [0, -1, 0]]
    E3 = [[0, 0, 1], [0, 0, 0], [-1, 0, 0]]

so hat((a, c, b)) = [[0, a, b], [-a, 0, c], [-b, -c, 0]], and the se(3)
generators E4..E6 place a 1 in the translation column.

All values are immutable; every operation returns a new element.  The *_many
functions are the batched array kernels (leading axis = batch) that the
object-level API wraps.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

# group-membership orthogonality tolerance (Frobenius)
SO3_TOL = 1e-8
# tolerance for recognizing a matrix as an algebra element in vee()
ALGEBRA_TOL = 1e-10
# reproject() refuses blocks farther than this from the orthogonal group
REPROJECT_MAX_DRIFT = 0.1
# below this rotation angle the se(3) translation factor switches to its series
SE3_SMALL_ANGLE = 1e-4


class IntegrityError(RuntimeError):
    """A state drifted off the group farther than reprojection allows."""


class GroupTag(Enum):
    SO3 = "SO3"
    SE3 = "SE3"

    @property
    def matrix_dim(self) -> int:
        return 3 if self is GroupTag.SO3 else 4

    @property
    def algebra_dim(self) -> int:
        return 3 if self is GroupTag.SO3 else 6


def tag_for_algebra_dim(n: int) -> GroupTag:
    if n == 3:
        return GroupTag.SO3
    if n == 6:
        return GroupTag.SE3
    raise ValueError(f"no group with algebra dimension {n}")


def so3_membership_error(mat: np.ndarray) -> float:
    """Frobenius norm of R^T R - I for the rotation block of ``mat``."""
    R = np.asarray(mat, dtype=float)[:3, :3]
    return float(np.linalg.norm(R.T @ R - np.eye(3)))


def _check_membership(tag: GroupTag, mat: np.ndarray) -> None:
    d = tag.matrix_dim
    if mat.shape != (d, d):
        raise ValueError(f"{tag.value} element must be {d}x{d}, got {mat.shape}")
    err = so3_membership_error(mat)
    if err > SO3_TOL:
        raise ValueError(
            f"rotation block is not orthogonal: ||R^T R - I||_F = {err:.3e} > {SO3_TOL:g}"
        )
    if np.linalg.det(mat[:3, :3]) <= 0.0:
        raise ValueError("rotation block has non-positive determinant")
    if tag is GroupTag.SE3 and not np.array_equal(mat[3], [0.0, 0.0, 0.0, 1.0]):
        raise ValueError("SE3 element must have bottom row exactly [0, 0, 0, 1]")


@dataclass(frozen=True, eq=False)
class GroupElement:
    """A group state: an immutable square matrix tagged with its group."""

    tag: GroupTag
    mat: np.ndarray

    def __post_init__(self):
        mat = np.array(self.mat, dtype=float)
        _check_membership(self.tag, mat)
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @classmethod
    def identity(cls, tag: GroupTag) -> GroupElement:
        return cls(tag, np.eye(tag.matrix_dim))

    @property
    def rotation(self) -> np.ndarray:
        return self.mat[:3, :3]

    @property
    def translation(self) -> np.ndarray:
        if self.tag is not GroupTag.SE3:
            raise ValueError("translation is only defined for SE3 elements")
        return self.mat[:3, 3]


@dataclass(frozen=True, eq=False)
class AlgebraVector:
    """Coordinates in the generator basis (length 3 for so(3), 6 for se(3))."""

    tag: GroupTag
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float).reshape(-1)
        if coords.shape != (self.tag.algebra_dim,):
            raise ValueError(
                f"{self.tag.value} algebra vector must have length "
                f"{self.tag.algebra_dim}, got {coords.shape[0]}"
            )
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def zero(cls, tag: GroupTag) -> AlgebraVector:
        return cls(tag, np.zeros(tag.algebra_dim))


# ---------------------------------------------------------------------------
# batched array kernels
# ---------------------------------------------------------------------------

def hat_so3_many(V: np.ndarray) -> np.ndarray:
    """Map (k, 3) coordinate rows to (k, 3, 3) algebra matrices."""
    V = np.asarray(V, dtype=float)
    k = V.shape[0]
    S = np.zeros((k, 3, 3))
    S[:, 0, 1] = V[:, 0]
    S[:, 1, 0] = -V[:, 0]
    S[:, 1, 2] = V[:, 1]
    S[:, 2, 1] = -V[:, 1]
    S[:, 0, 2] = V[:, 2]
    S[:, 2, 0] = -V[:, 2]
    return S


def hat_se3_many(V: np.ndarray) -> np.ndarray:
    """Map (k, 6) coordinate rows to (k, 4, 4) algebra matrices."""
    V = np.asarray(V, dtype=float)
    k = V.shape[0]
    M = np.zeros((k, 4, 4))
    M[:, :3, :3] = hat_so3_many(V[:, :3])
    M[:, :3, 3] = V[:, 3:]
    return M


def _rodrigues_coeffs(theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # sin(t)/t and (1-cos(t))/t^2 with series below sqrt-eps scale
    small = theta < 1e-8
    safe = np.where(small, 1.0, theta)
    c1 = np.where(small, 1.0 - theta * theta / 6.0, np.sin(safe) / safe)
    c2 = np.where(small, 0.5 - theta * theta / 24.0, (1.0 - np.cos(safe)) / (safe * safe))
    return c1, c2


def exp_so3_many(V: np.ndarray) -> np.ndarray:
    """Rodrigues exponential of (k, 3) coordinate rows -> (k, 3, 3) rotations."""
    V = np.asarray(V, dtype=float)
    theta = np.sqrt(np.sum(V * V, axis=1))
    S = hat_so3_many(V)
    S2 = S @ S
    c1, c2 = _rodrigues_coeffs(theta)
    return np.eye(3) + c1[:, None, None] * S + c2[:, None, None] * S2


def exp_se3_many(V: np.ndarray) -> np.ndarray:
    """Closed-form exponential of (k, 6) rows -> (k, 4, 4) rigid transforms.

    The rotation block is the Rodrigues exponential of the rotational part S
    with angle theta; the translation column is A v with

        A = I + (1 - cos(theta))/theta^2 * S + (theta - sin(theta))/theta^3 * S^2,

    replaced by its series A = I + S/2 + S^2/6 below theta = 1e-4, where the
    closed form loses digits to cancellation.  At theta = 0 the translation
    passes through unchanged.
    """
    V = np.asarray(V, dtype=float)
    k = V.shape[0]
    rot = V[:, :3]
    theta = np.sqrt(np.sum(rot * rot, axis=1))
    S = hat_so3_many(rot)
    S2 = S @ S

    c1, c2 = _rodrigues_coeffs(theta)
    R = np.eye(3) + c1[:, None, None] * S + c2[:, None, None] * S2

    small = theta < SE3_SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    a1 = np.where(small, 0.5, (1.0 - np.cos(safe)) / (safe * safe))
    a2 = np.where(small, 1.0 / 6.0, (safe - np.sin(safe)) / (safe * safe * safe))
    A = np.eye(3) + a1[:, None, None] * S + a2[:, None, None] * S2

    out = np.zeros((k, 4, 4))
    out[:, :3, :3] = R
    out[:, :3, 3] = np.einsum("kij,kj->ki", A, V[:, 3:])
    out[:, 3, 3] = 1.0
    return out


def exp_many(V: np.ndarray, tag: GroupTag) -> np.ndarray:
    return exp_so3_many(V) if tag is GroupTag.SO3 else exp_se3_many(V)


# ---------------------------------------------------------------------------
# object-level operations
# ---------------------------------------------------------------------------

def hat(v: AlgebraVector) -> np.ndarray:
    """Linear map from coordinates to the algebra matrix."""
    if v.tag is GroupTag.SO3:
        return hat_so3_many(v.coords[None, :])[0]
    return hat_se3_many(v.coords[None, :])[0]


def vee(m: np.ndarray, tag: GroupTag) -> AlgebraVector:
    """Inverse of hat.  Rejects matrices farther than 1e-10 from the algebra."""
    m = np.asarray(m, dtype=float)
    d = tag.matrix_dim
    if m.shape != (d, d):
        raise ValueError(f"vee expects a {d}x{d} matrix for {tag.value}")
    if tag is GroupTag.SO3:
        coords = np.array([m[0, 1], m[1, 2], m[0, 2]])
    else:
        coords = np.array([m[0, 1], m[1, 2], m[0, 2], m[0, 3], m[1, 3], m[2, 3]])
    v = AlgebraVector(tag, coords)
    residual = np.max(np.abs(m - hat(v)))
    if residual > ALGEBRA_TOL:
        raise ValueError(
            f"matrix is not in the algebra: residual {residual:.3e} > {ALGEBRA_TOL:g}"
        )
    return v


def exp_so3(v: AlgebraVector) -> GroupElement:
    """Exponential map so(3) -> SO(3) (Rodrigues, angle = ||coords||)."""
    if v.tag is not GroupTag.SO3:
        raise ValueError("exp_so3 expects an so(3) vector")
    return GroupElement(GroupTag.SO3, exp_so3_many(v.coords[None, :])[0])


def exp_se3(v: AlgebraVector) -> GroupElement:
    """Exponential map se(3) -> SE(3) (closed form, see exp_se3_many)."""
    if v.tag is not GroupTag.SE3:
        raise ValueError("exp_se3 expects an se(3) vector")
    return GroupElement(GroupTag.SE3, exp_se3_many(v.coords[None, :])[0])


def exp(v: AlgebraVector) -> GroupElement:
    return exp_so3(v) if v.tag is GroupTag.SO3 else exp_se3(v)


def multiply(a: GroupElement, b: GroupElement) -> GroupElement:
    if a.tag is not b.tag:
        raise ValueError(f"tag mismatch: {a.tag.value} * {b.tag.value}")
    return GroupElement(a.tag, a.mat @ b.mat)


def inverse(g: GroupElement) -> GroupElement:
    if g.tag is GroupTag.SO3:
        return GroupElement(g.tag, g.mat.T.copy())
    R, t = g.rotation, g.translation
    out = np.eye(4)
    out[:3, :3] = R.T
    out[:3, 3] = -R.T @ t
    return GroupElement(GroupTag.SE3, out)


def nearest_rotation(R: np.ndarray) -> np.ndarray:
    """Polar factor of a 3x3 matrix: the Frobenius-nearest rotation."""
    U, _, Vt = np.linalg.svd(np.asarray(R, dtype=float))
    P = U @ Vt
    if np.linalg.det(P) < 0:
        P = U @ np.diag([1.0, 1.0, -1.0]) @ Vt
    return P


def reproject(g, tag: GroupTag | None = None) -> GroupElement:
    """Replace the rotation block with its polar factor; everything else kept.

    Accepts a GroupElement or a raw matrix with an explicit tag (a drifted
    matrix cannot be constructed as a GroupElement in the first place).
    Controls floating-point drift off the manifold.  Raises IntegrityError if
    the block sits farther than 0.1 (Frobenius) from the rotation group,
    which signals a misconfigured integrator rather than roundoff.
    """
    if isinstance(g, GroupElement):
        tag = g.tag
        g = g.mat
    elif tag is None:
        raise ValueError("reproject needs a tag when given a raw matrix")
    mat = np.array(g, dtype=float)
    d = tag.matrix_dim
    if mat.shape != (d, d):
        raise ValueError(f"reproject expects a {d}x{d} matrix for {tag.value}")
    P = nearest_rotation(mat[:3, :3])
    drift = float(np.linalg.norm(mat[:3, :3] - P))
    if drift > REPROJECT_MAX_DRIFT:
        raise IntegrityError(
            f"rotation block is {drift:.3e} from the rotation group "
            f"(limit {REPROJECT_MAX_DRIFT}); integrator misconfiguration?"
        )
    mat[:3, :3] = P
    if tag is GroupTag.SE3:
        mat[3] = [0.0, 0.0, 0.0, 1.0]
    return GroupElement(tag, mat)


def group_distance(a: GroupElement, b: GroupElement) -> float:
    """Frobenius distance ||a - b||_F between two elements of the same group."""
    if a.tag is not b.tag:
        raise ValueError(f"tag mismatch: {a.tag.value} vs {b.tag.value}")
    return float(np.linalg.norm(a.mat - b.mat))


def random_element(tag: GroupTag, rng: np.random.Generator,
                   translation_scale: float = 1.0) -> GroupElement:
    """Haar-random rotation (QR of a Gaussian); SE3 adds a Gaussian translation."""
    A = rng.normal(size=(3, 3))
    Q, R = np.linalg.qr(A)
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 2] = -Q[:, 2]
    if tag is GroupTag.SO3:
        return GroupElement(tag, Q)
    mat = np.eye(4)
    mat[:3, :3] = Q
    mat[:3, 3] = rng.normal(scale=translation_scale, size=3)
    return GroupElement(tag, mat)


def serialize_matrix(mat: np.ndarray) -> str:
    """Row-major decimal text at full round-trip precision (17 significant digits)."""
    return " ".join(f"{x:.17g}" for x in np.asarray(mat, dtype=float).reshape(-1))


def deserialize_matrix(text: str, dim: int) -> np.ndarray:
    values = [float(tok) for tok in text.split()]
    if len(values) != dim * dim:
        raise ValueError(f"expected {dim * dim} values for a {dim}x{dim} matrix, got {len(values)}")
    return np.array(values, dtype=float).reshape(dim, dim)
