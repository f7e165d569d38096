"""Magnetic force fields on 2-step nilpotent metric Lie algebras.

A magnetic field is a left-invariant closed 2-form omega; its Lorentz force
is the skew-symmetric map F with omega(x, y) = <F x, y>.  Relative to the
splitting n = v (+) z a skew F decomposes into blocks, and two families are
distinguished:

    type I  : F preserves the splitting (F(v) in v, F(z) in z)
    type II : F swaps it            (F(v) in z, F(z) in v)

Closedness is evaluated through the left-invariant exterior differential

    d omega (x, y, w) = -omega([x, y], w) - omega([y, w], x) - omega([w, x], y),

whose cyclic sum must vanish on all basis triples.  For type-I forces this
reduces to F([n, n]) = 0; skewness then forces F(z) into the flat central
directions automatically.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .algebra import MetricNilAlgebra
from .errors import InvalidForceError, UnsupportedForceError

__all__ = [
    "ForceType",
    "LorentzForce",
    "ClosednessReport",
    "CentralConstraintReport",
    "ExactnessResult",
    "check_closed",
    "verify_central_constraints",
    "exactness_test",
    "type2_from_vector",
    "conjugate_force",
    "random_closed_type1",
]

_SKEW_TOL = 1e-10


class ForceType(Enum):
    TYPE_I = "type_I"
    TYPE_II = "type_II"
    MIXED = "mixed"


@dataclass(frozen=True)
class ClosednessReport:
    """Result of the exterior-derivative check on all basis triples."""

    closed: bool
    max_residual: float
    worst_triple: tuple[int, int, int] | None
    frobenius_residual: float  # basis-independent norm of the full 3-tensor


@dataclass(frozen=True)
class CentralConstraintReport:
    """Residuals of the two structural constraints of closed type-I forces."""

    ok: bool
    commutator_residual: float  # || F restricted to [n, n] ||
    kernel_residual: float      # || component of F(z) outside ker j ||


@dataclass(frozen=True)
class ExactnessResult:
    """Best approximation of F by a central-derivative force j(Z~) on v.

    is_exact is True when F equals j(Z~) (+) 0 for some commutator vector Z~
    up to 1e-10 relative; z_tilde is that vector (full coordinates, central).
    """

    is_exact: bool
    z_tilde: np.ndarray
    residual: float


class LorentzForce:
    """A skew force matrix on an algebra, with block bookkeeping.

    The matrix is given in internal adapted coordinates.  Construction
    validates skewness to 1e-10 (relative) and then antisymmetrizes exactly.
    """

    def __init__(self, alg: MetricNilAlgebra, matrix: np.ndarray):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (alg.dim, alg.dim):
            raise InvalidForceError(
                f"force matrix must be ({alg.dim}, {alg.dim}), got {matrix.shape}"
            )
        if not np.all(np.isfinite(matrix)):
            raise InvalidForceError("force matrix contains non-finite entries")
        scale = max(1.0, float(np.max(np.abs(matrix))))
        if np.max(np.abs(matrix + matrix.T)) > _SKEW_TOL * scale:
            raise InvalidForceError("force matrix is not skew-symmetric")
        self.alg = alg
        self.matrix = 0.5 * (matrix - matrix.T)

    @property
    def dim(self) -> int:
        return self.alg.dim

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)

    # block views (v-rows/cols first)
    @property
    def block_vv(self) -> np.ndarray:
        dv = self.alg.dim_v
        return self.matrix[:dv, :dv]

    @property
    def block_zz(self) -> np.ndarray:
        dv = self.alg.dim_v
        return self.matrix[dv:, dv:]

    @property
    def block_vz(self) -> np.ndarray:
        """Images of central vectors inside v (rows v, columns z)."""
        dv = self.alg.dim_v
        return self.matrix[:dv, dv:]

    @property
    def block_zv(self) -> np.ndarray:
        dv = self.alg.dim_v
        return self.matrix[dv:, :dv]

    def force_type(self, tol: float = _SKEW_TOL) -> ForceType:
        """Classify by which blocks vanish.

        The zero force preserves the splitting and is reported as TYPE_I.
        """
        scale = max(1.0, float(np.max(np.abs(self.matrix))))
        diag_zero = (
            np.max(np.abs(self.block_vv), initial=0.0) <= tol * scale
            and np.max(np.abs(self.block_zz), initial=0.0) <= tol * scale
        )
        off_zero = np.max(np.abs(self.block_vz), initial=0.0) <= tol * scale
        if off_zero:
            return ForceType.TYPE_I
        if diag_zero:
            return ForceType.TYPE_II
        return ForceType.MIXED

    def omega(self, x: np.ndarray, y: np.ndarray) -> float:
        """The 2-form omega(x, y) = <F x, y>."""
        return float((self.matrix @ np.asarray(x, float)) @ np.asarray(y, float))


def _as_force(alg: MetricNilAlgebra, f) -> LorentzForce:
    if isinstance(f, LorentzForce):
        if f.alg is not alg and f.alg.dim != alg.dim:
            raise InvalidForceError("force belongs to an algebra of different dimension")
        return f
    return LorentzForce(alg, f)


def check_closed(alg: MetricNilAlgebra, force, tol: float = 1e-12) -> ClosednessReport:
    """Evaluate d omega on every basis triple i < j < k.

    Returns the largest cyclic-sum residual, the triple attaining it
    (0-based internal indices), and the Frobenius norm of the full residual
    tensor (which, unlike the max, is invariant under orthogonal changes of
    basis).  closed is max_residual <= tol.
    """
    f = _as_force(alg, force)
    d = alg.dim
    # d omega(e_i, e_j, e_k) = -omega([e_i,e_j], e_k) - omega([e_j,e_k], e_i)
    #                          - omega([e_k,e_i], e_j)
    # with omega([e_i, e_j], e_k) = <F [e_i, e_j], e_k> = sum_m c[i,j,m] F[k,m]
    t = np.einsum("ijm,km->ijk", alg.structure, f.matrix)
    resid = -(t + t.transpose(1, 2, 0) + t.transpose(2, 0, 1))
    max_res = 0.0
    worst = None
    for i in range(d):
        for j in range(i + 1, d):
            for k in range(j + 1, d):
                r = abs(resid[i, j, k])
                if r > max_res:
                    max_res = r
                    worst = (i, j, k)
    return ClosednessReport(
        closed=bool(max_res <= tol),
        max_residual=float(max_res),
        worst_triple=worst,
        frobenius_residual=float(np.linalg.norm(resid)),
    )


def verify_central_constraints(alg: MetricNilAlgebra, force) -> CentralConstraintReport:
    """Check the two structural identities of a closed type-I force.

    (a) F vanishes on the commutator directions [n, n];
    (b) F maps the center into the flat directions ker j.
    A type-I force is closed exactly when (a) holds, and (a) plus skewness
    implies (b); both residuals are reported.  Raises UnsupportedForceError
    for non-type-I input.
    """
    f = _as_force(alg, force)
    if f.force_type() is not ForceType.TYPE_I:
        raise UnsupportedForceError("central constraints apply to type-I forces only")
    comm = alg.commutator_z_basis()      # rows, z-coords
    ker = alg.kernel_z_basis()
    fz = f.block_zz
    if comm.size:
        comm_res = float(np.max(np.abs(fz @ comm.T)))
    else:
        comm_res = 0.0
    # component of F(z) outside ker j = projection onto commutator directions
    if comm.size:
        kernel_res = float(np.max(np.abs(comm @ (fz @ np.eye(alg.dim_z)))))
    else:
        kernel_res = 0.0
    ok = comm_res <= 1e-10 * max(1.0, float(np.max(np.abs(f.matrix)))) and kernel_res <= 1e-10 * max(
        1.0, float(np.max(np.abs(f.matrix)))
    )
    return CentralConstraintReport(ok=ok, commutator_residual=comm_res, kernel_residual=kernel_res)


def exactness_test(alg: MetricNilAlgebra, force, rel_tol: float = 1e-10) -> ExactnessResult:
    """Least-squares fit of F by j(Z~) on v (zero on z), Z~ in the commutator span.

    The fit solves min over Z~ of ||F_vv - j(Z~)||_F; the reported residual
    also includes every block of F outside v x v, so is_exact certifies
    F = j(Z~) (+) 0 globally.  Residual is relative to max(1, ||F||_F).
    """
    f = _as_force(alg, force)
    comm = alg.commutator_z_basis()
    dv = alg.dim_v
    if comm.size == 0 or dv == 0:
        z_full = np.zeros(alg.dim)
        resid = float(np.linalg.norm(f.matrix))
        rel = resid / max(1.0, float(np.linalg.norm(f.matrix)))
        return ExactnessResult(is_exact=bool(rel <= rel_tol), z_tilde=z_full, residual=rel)
    basis_mats = np.stack([alg.j_map(row).ravel() for row in comm], axis=1)
    target = f.block_vv.ravel()
    coef, *_ = np.linalg.lstsq(basis_mats, target, rcond=None)
    z_coords = comm.T @ coef  # z-coordinates of Z~
    fit = (basis_mats @ coef).reshape(dv, dv)
    best = np.zeros_like(f.matrix)
    best[:dv, :dv] = fit
    resid = float(np.linalg.norm(f.matrix - best))
    rel = resid / max(1.0, float(np.linalg.norm(f.matrix)))
    return ExactnessResult(
        is_exact=bool(rel <= rel_tol),
        z_tilde=alg.embed_z(z_coords),
        residual=rel,
    )


def type2_from_vector(alg: MetricNilAlgebra, u: np.ndarray) -> LorentzForce:
    """The type-II force of the 3-dimensional Heisenberg algebra.

    For a nonzero u = (u1, u2) in v the force is F(V + Z) = [V, u] + j(Z) u,
    i.e. the matrix with F e3 = (-u2, u1, 0) and last row (u2, -u1, 0).
    Only defined on the 3-dimensional Heisenberg algebra.
    """
    from .errors import DegenerateForceError

    if alg.dim != 3 or alg.dim_v != 2:
        raise UnsupportedForceError(
            "type-II direction forces are implemented on the 3-dim Heisenberg algebra only"
        )
    u = np.asarray(u, dtype=float)
    if u.shape == (3,):
        if abs(u[2]) > 1e-14:
            raise InvalidForceError("direction vector must lie in v (zero central part)")
        u = u[:2]
    if u.shape != (2,):
        raise InvalidForceError(f"direction vector must have shape (2,), got {u.shape}")
    if not np.all(np.isfinite(u)) or float(np.linalg.norm(u)) == 0.0:
        raise DegenerateForceError("type-II direction vector must be nonzero and finite")
    m = np.zeros((3, 3))
    m[0, 2] = -u[1]
    m[1, 2] = u[0]
    m[2, 0] = u[1]
    m[2, 1] = -u[0]
    return LorentzForce(alg, m)


def conjugate_force(
    alg: MetricNilAlgebra, force, phi: np.ndarray, r: float = 1.0, tol: float = 1e-10
) -> LorentzForce:
    """The transported force r * phi F phi^{-1} for an orthogonal automorphism phi.

    phi must be orthogonal (phi^T phi = Id) and a Lie-algebra automorphism
    ([phi x, phi y] = phi [x, y] on basis pairs) to within tol; otherwise
    InvalidForceError is raised.
    """
    f = _as_force(alg, force)
    phi = np.asarray(phi, dtype=float)
    d = alg.dim
    if phi.shape != (d, d):
        raise InvalidForceError(f"automorphism must be ({d}, {d})")
    if np.max(np.abs(phi.T @ phi - np.eye(d))) > tol:
        raise InvalidForceError("phi is not orthogonal")
    eye = np.eye(d)
    for i in range(d):
        for j in range(i + 1, d):
            lhs = alg.bracket(phi @ eye[i], phi @ eye[j])
            rhs = phi @ alg.bracket(eye[i], eye[j])
            if np.max(np.abs(lhs - rhs)) > tol * max(1.0, float(np.max(np.abs(rhs)))):
                raise InvalidForceError("phi is not a Lie-algebra automorphism")
    return LorentzForce(alg, float(r) * (phi @ f.matrix @ phi.T))


def random_closed_type1(
    alg: MetricNilAlgebra, rng: np.random.Generator, scale: float = 1.0
) -> LorentzForce:
    """A random closed type-I force: skew on v, skew on ker j, zero elsewhere.

    This parametrizes the whole cone of closed type-I forces (closedness of
    a type-I force is exactly vanishing on the commutator directions).
    """
    dv, dz = alg.dim_v, alg.dim_z
    m = np.zeros((alg.dim, alg.dim))
    if dv:
        a = rng.normal(scale=scale, size=(dv, dv))
        m[:dv, :dv] = 0.5 * (a - a.T)
    ker = alg.kernel_z_basis()
    nk = ker.shape[0]
    if nk:
        b = rng.normal(scale=scale, size=(nk, nk))
        b = 0.5 * (b - b.T)
        m[dv:, dv:] = ker.T @ b @ ker
    return LorentzForce(alg, m)
