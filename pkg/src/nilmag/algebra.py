"""2-step nilpotent Lie algebras with an inner product, in adapted coordinates.

A metric 2-step nilpotent Lie algebra splits orthogonally as n = v (+) z,
where z is the center and v its orthogonal complement; all brackets land in
the center, so [[x, y], w] = 0.  Everything in this module works in an
internal orthonormal basis adapted to that splitting: coordinates 0..dim_v-1
span v and the remaining dim_z coordinates span z.

The geometry is encoded by the skew-symmetric central rotation maps
j(Z): v -> v, defined by  <j(Z) V, W> = <Z, [V, W]>.  The center further
splits as z = [n, n] (+) ker j, the commutator directions and the flat
directions on which j vanishes.

Group structure: in exponential coordinates the product of a simply
connected 2-step nilpotent group is

    a * b = a + b + (1/2) [a, b],

which is exactly associative (brackets of brackets vanish) and has inverse -a.

Left-invariant Levi-Civita connection on constant vector fields:

    nabla_x y = (1/2)[x_v, y_v] - (1/2) j(x_z) y_v - (1/2) j(y_z) x_v.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "MetricNilAlgebra",
    "SingularityKind",
    "SingularityReport",
]

# Relative singular-value threshold treating a direction as zero (rank cuts).
_ZERO_TOL = 1e-10


class SingularityKind(Enum):
    """Invertibility pattern of the central rotation maps j(Z), Z != 0."""

    NONSINGULAR = "nonsingular"        # every j(Z), Z != 0, is invertible
    ALMOST_NONSINGULAR = "almost"      # some invertible, some not
    SINGULAR = "singular"              # no j(Z) is invertible


@dataclass(frozen=True)
class SingularityReport:
    """Outcome of classify_singularity.

    exhaustive is True when the verdict is a proof (exact polynomial root
    analysis for dim z <= 2, the odd-dimensional-v argument, the h-type
    shortcut, or a mixed pair of witnesses), False when it only reflects
    quasi-random sampling of the central sphere.
    """

    kind: SingularityKind
    exhaustive: bool
    method: str
    singular_direction: np.ndarray | None = None
    regular_direction: np.ndarray | None = None


def _as_vector(x, dim: int, what: str) -> np.ndarray:
    v = np.asarray(x, dtype=float)
    if v.shape != (dim,):
        raise ValueError(f"{what} must have shape ({dim},), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{what} contains non-finite entries")
    return v


def _orthonormal_rows(rows: np.ndarray, tol: float = _ZERO_TOL) -> np.ndarray:
    """Orthonormal basis (as rows) of the row space of `rows`."""
    if rows.size == 0:
        return np.zeros((0, rows.shape[1]))
    u, s, vh = np.linalg.svd(rows, full_matrices=False)
    rank = int(np.sum(s > tol * (s[0] if s.size else 1.0)))
    return vh[:rank]


class MetricNilAlgebra:
    """A 2-step nilpotent Lie algebra with inner product, adapted basis.

    Construct with the presets `heisenberg(n)` / `quaternionic(n)` or from
    raw structure constants via `from_structure`.  Vectors are plain float
    arrays of length `dim` in the internal adapted orthonormal basis
    (v-coordinates first, then z-coordinates).
    """

    def __init__(
        self,
        structure: np.ndarray,
        dim_v: int,
        dim_z: int,
        name: str = "",
        input_basis: np.ndarray | None = None,
        input_metric: np.ndarray | None = None,
    ):
        dim = dim_v + dim_z
        structure = np.asarray(structure, dtype=float)
        if structure.shape != (dim, dim, dim):
            raise ValueError("structure tensor must be (dim, dim, dim)")
        self.dim = dim
        self.dim_v = dim_v
        self.dim_z = dim_z
        self.name = name or f"nilalgebra(dim_v={dim_v}, dim_z={dim_z})"
        # enforce exact antisymmetry in the first two slots
        self.structure = 0.5 * (structure - structure.transpose(1, 0, 2))
        # central arguments bracket to zero; bracket images lie in z
        self.structure[dim_v:, :, :] = 0.0
        self.structure[:, dim_v:, :] = 0.0
        self.structure[:, :, :dim_v] = 0.0
        # change of basis back to the user's coordinates (identity for presets)
        self.input_basis = np.eye(dim) if input_basis is None else np.asarray(input_basis, float)
        self.input_metric = np.eye(dim) if input_metric is None else np.asarray(input_metric, float)
        self._commutator_z = None  # cached orthonormal basis of [n, n] in z-coords

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------

    @classmethod
    def heisenberg(cls, n: int) -> "MetricNilAlgebra":
        """Heisenberg algebra of dimension 2n + 1.

        v has the symplectic basis (X1, Y1, ..., Xn, Yn) with [Xi, Yi] = Z,
        so j(Z) is the block-diagonal quarter-turn diag(R, ..., R).
        """
        if n < 1:
            raise ValueError("heisenberg(n) needs n >= 1")
        dim_v, dim_z = 2 * n, 1
        dim = dim_v + dim_z
        c = np.zeros((dim, dim, dim))
        for i in range(n):
            c[2 * i, 2 * i + 1, dim_v] = 1.0
            c[2 * i + 1, 2 * i, dim_v] = -1.0
        return cls(c, dim_v, dim_z, name=f"heisenberg({n})")

    @classmethod
    def quaternionic(cls, n: int) -> "MetricNilAlgebra":
        """Quaternionic Heisenberg algebra of dimension 4n + 3.

        v = H^n with per-block basis (X, Y, V, W) and a 3-dimensional center
        (Z1, Z2, Z3); the brackets realize the imaginary quaternion units:

            [X, Y] = Z1, [V, W] = Z1,
            [X, V] = Z2, [Y, W] = -Z2,
            [X, W] = Z3, [Y, V] = Z3.

        The result is h-type: j(Z)^2 = -|Z|^2 Id.
        """
        if n < 1:
            raise ValueError("quaternionic(n) needs n >= 1")
        dim_v, dim_z = 4 * n, 3
        dim = dim_v + dim_z
        z1, z2, z3 = dim_v, dim_v + 1, dim_v + 2
        c = np.zeros((dim, dim, dim))
        for b in range(n):
            x, y, v, w = 4 * b, 4 * b + 1, 4 * b + 2, 4 * b + 3
            pairs = [
                (x, y, z1, 1.0),
                (v, w, z1, 1.0),
                (x, v, z2, 1.0),
                (y, w, z2, -1.0),
                (x, w, z3, 1.0),
                (y, v, z3, 1.0),
            ]
            for i, j, k, val in pairs:
                c[i, j, k] = val
                c[j, i, k] = -val
        return cls(c, dim_v, dim_z, name=f"quaternionic({n})")

    @classmethod
    def from_structure(
        cls,
        dim: int,
        brackets: list,
        metric: np.ndarray | None = None,
        name: str = "",
    ) -> "MetricNilAlgebra":
        """Build from structure constants in an arbitrary basis.

        brackets is a list of (i, j, k, val) with 1-based indices i < j,
        meaning [e_i, e_j] = sum_k val * e_k.  metric is an optional
        symmetric positive-definite Gram matrix of the input basis (identity
        if omitted).  The constructor finds the center, takes its metric
        orthogonal complement, orthonormalizes both (preferring directions
        aligned with the input axes, so coordinate-aligned inputs keep their
        axes), and rewrites the structure constants in that adapted basis.

        Raises ValueError if the data is not a 2-step nilpotent algebra
        (i.e. if some bracket image fails to be central) or the metric is
        not symmetric positive definite.  Abelian input (no brackets) is
        allowed and yields dim_v = 0.
        """
        if dim < 0:
            raise ValueError("dim must be nonnegative")
        c = np.zeros((dim, dim, dim))
        for entry in brackets:
            if len(entry) != 4:
                raise ValueError(f"bracket entries are (i, j, k, val), got {entry!r}")
            i, j, k, val = entry
            if not (1 <= i <= dim and 1 <= j <= dim and 1 <= k <= dim):
                raise ValueError(f"bracket indices out of range 1..{dim}: {entry!r}")
            if i >= j:
                raise ValueError(f"bracket entries need i < j (one orientation), got {entry!r}")
            c[i - 1, j - 1, k - 1] += float(val)
            c[j - 1, i - 1, k - 1] -= float(val)

        if metric is None:
            g = np.eye(dim)
        else:
            g = np.asarray(metric, dtype=float)
            if g.shape != (dim, dim):
                raise ValueError("metric must be (dim, dim)")
            if not np.allclose(g, g.T, atol=1e-12):
                raise ValueError("metric must be symmetric")
            if dim > 0 and np.min(np.linalg.eigvalsh(g)) <= 0:
                raise ValueError("metric must be positive definite")

        if dim == 0:
            return cls(c, 0, 0, name=name or "trivial")

        # center = null space of x |-> [x, .]  (a metric-independent notion)
        ad_flat = c.transpose(1, 2, 0).reshape(dim * dim, dim)  # rows (j,k), cols i
        _, s, vh = np.linalg.svd(ad_flat)
        smax = s[0] if s.size and s[0] > 0 else 1.0
        center_rows = vh[s <= _ZERO_TOL * smax]
        if center_rows.size == 0:
            raise ValueError("input algebra has trivial center; not 2-step nilpotent")

        # every bracket image must be central (2-step condition)
        images = c.reshape(dim * dim, dim)
        img_basis = _orthonormal_rows(images)
        for w in img_basis:
            if np.linalg.norm(ad_flat @ w) > 1e-8 * max(1.0, np.linalg.norm(c)):
                raise ValueError("bracket images are not central; algebra is not 2-step")

        z_basis = cls._aligned_orthonormal(center_rows, g)
        dim_z = z_basis.shape[0]
        # v = metric-orthogonal complement of the center: null space of z^T g
        if dim_z < dim:
            _, _, vh2 = np.linalg.svd(z_basis @ g)
            v_basis = cls._aligned_orthonormal(vh2[dim_z:], g)
        else:
            v_basis = np.zeros((0, dim))
        dim_v = v_basis.shape[0]
        if dim_v + dim_z != dim:
            raise ValueError("internal error: adapted basis does not span")

        p = np.vstack([v_basis, z_basis]).T  # columns = internal basis in input coords
        gram = p.T @ g @ p
        if not np.allclose(gram, np.eye(dim), atol=1e-9):
            raise ValueError("internal error: adapted basis is not orthonormal")

        # rewrite structure constants: [p_a, p_b] expressed in the new basis
        c_int = np.einsum("ia,jb,ijk,km->abm", p, p, c, g @ p, optimize=True)
        if dim_v and np.max(np.abs(c_int[:, :, :dim_v])) > 1e-9 * max(1.0, np.max(np.abs(c_int))):
            raise ValueError("internal error: brackets escaped the center")
        return cls(c_int, dim_v, dim_z, name=name, input_basis=p, input_metric=g)

    @staticmethod
    def _aligned_orthonormal(span_rows: np.ndarray, g: np.ndarray) -> np.ndarray:
        """g-orthonormal basis of the row span, greedily aligned with input axes.

        Projects the standard basis vectors onto the subspace in index order
        and keeps the metric Gram-Schmidt survivors, so coordinate-aligned
        subspaces come out with their own axes (exactly, for diagonal g).
        """
        if span_rows.size == 0:
            return span_rows.reshape(0, g.shape[0])
        dim = g.shape[0]
        # metric-orthogonal projector onto the span
        b = _orthonormal_rows(span_rows)  # euclidean orthonormal span, rows
        m = b.shape[0]
        # solve for g-orthonormal combos: projector P(x) = B^T (B g B^T)^{-1} B g x
        bg = b @ g
        gram_inv = np.linalg.inv(b @ g @ b.T)
        chosen: list[np.ndarray] = []
        for i in range(dim):
            x = b.T @ (gram_inv @ bg[:, i])  # projection of e_i onto span (g-orthogonal)
            for q in chosen:
                x = x - q * float(q @ g @ x)
            nrm = float(np.sqrt(max(x @ g @ x, 0.0)))
            if nrm > 1e-8:
                chosen.append(x / nrm)
            if len(chosen) == m:
                break
        if len(chosen) != m:
            raise ValueError("internal error: Gram-Schmidt lost rank")
        return np.array(chosen)

    # ------------------------------------------------------------------
    # vector bookkeeping
    # ------------------------------------------------------------------

    def v_part(self, x: np.ndarray) -> np.ndarray:
        """The first dim_v coordinates (component in v)."""
        return np.asarray(x, float)[: self.dim_v]

    def z_part(self, x: np.ndarray) -> np.ndarray:
        """The last dim_z coordinates (component in the center)."""
        return np.asarray(x, float)[self.dim_v :]

    def embed_v(self, xv: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim)
        out[: self.dim_v] = xv
        return out

    def embed_z(self, xz: np.ndarray) -> np.ndarray:
        out = np.zeros(self.dim)
        out[self.dim_v :] = xz
        return out

    def to_internal(self, x_input: np.ndarray) -> np.ndarray:
        """Convert a vector from input coordinates to the adapted basis."""
        return self.input_basis.T @ (self.input_metric @ np.asarray(x_input, float))

    def from_internal(self, x: np.ndarray) -> np.ndarray:
        """Convert a vector from the adapted basis back to input coordinates."""
        return self.input_basis @ np.asarray(x, float)

    # ------------------------------------------------------------------
    # algebra and group operations
    # ------------------------------------------------------------------

    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Lie bracket [x, y] (always a central vector)."""
        x = _as_vector(x, self.dim, "x")
        y = _as_vector(y, self.dim, "y")
        return np.einsum("i,j,ijk->k", x, y, self.structure)

    def group_mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Group product in exponential coordinates: a + b + [a, b]/2."""
        a = _as_vector(a, self.dim, "a")
        b = _as_vector(b, self.dim, "b")
        return a + b + 0.5 * self.bracket(a, b)

    def group_inv(self, a: np.ndarray) -> np.ndarray:
        """Group inverse in exponential coordinates (just -a)."""
        return -_as_vector(a, self.dim, "a")

    def j_map(self, z: np.ndarray) -> np.ndarray:
        """Central rotation map j(Z): v -> v for a central vector.

        Accepts either z-coordinates (dim_z,) or a full vector (dim,), whose
        central part is used.  Defined by <j(Z) V, W> = <Z, [V, W]>; the
        result is skew-symmetric.
        """
        z = np.asarray(z, dtype=float)
        if z.shape == (self.dim,):
            z = z[self.dim_v :]
        elif z.shape != (self.dim_z,):
            raise ValueError(f"central vector must be ({self.dim_z},) or ({self.dim},)")
        # (j(Z) e_a)_b = <Z, [e_a, e_b]>
        return np.einsum("abk,k->ba", self.structure[: self.dim_v, : self.dim_v, self.dim_v :], z)

    def geodesic_term(self, x: np.ndarray) -> np.ndarray:
        """Quadratic drift of the left-trivialized geodesic field.

        Component k is <x, [x, e_k]>; for x = x_v + x_z this equals
        j(x_z) x_v embedded in v.  Computed directly from the structure
        tensor (independently of j_map) so the two routes can cross-check.
        """
        x = _as_vector(x, self.dim, "x")
        return np.einsum("m,i,ikm->k", x, x, self.structure)

    def levi_civita(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Levi-Civita connection on constant (left-invariant) fields.

        nabla_x y = (1/2)[x_v, y_v] - (1/2) j(x_z) y_v - (1/2) j(y_z) x_v.
        """
        x = _as_vector(x, self.dim, "x")
        y = _as_vector(y, self.dim, "y")
        xv, xz = x[: self.dim_v], x[self.dim_v :]
        yv, yz = y[: self.dim_v], y[self.dim_v :]
        out = 0.5 * self.bracket(x, y)  # = (1/2)[x_v, y_v], central
        out[: self.dim_v] -= 0.5 * (self.j_map(xz) @ yv + self.j_map(yz) @ xv)
        return out

    # ------------------------------------------------------------------
    # center decomposition
    # ------------------------------------------------------------------

    def commutator_z_basis(self) -> np.ndarray:
        """Orthonormal basis (rows, z-coordinates) of the commutator ideal [n, n]."""
        if self._commutator_z is None:
            images = self.structure[: self.dim_v, : self.dim_v, self.dim_v :]
            self._commutator_z = _orthonormal_rows(images.reshape(-1, self.dim_z))
        return self._commutator_z

    def kernel_z_basis(self) -> np.ndarray:
        """Orthonormal basis (rows, z-coordinates) of the flat directions ker j.

        ker j is the orthogonal complement of [n, n] inside the center: for a
        central Z, <j(Z)V, W> = <Z, [V, W]> vanishes for all V, W exactly when
        Z is orthogonal to every bracket.
        """
        comm = self.commutator_z_basis()
        if comm.shape[0] == self.dim_z:
            return np.zeros((0, self.dim_z))
        if comm.size == 0:
            return np.eye(self.dim_z)
        _, s, vh = np.linalg.svd(comm)
        return vh[comm.shape[0] :]

    def decompose_center(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Split a central vector into commutator and flat components.

        Accepts z-coordinates (dim_z,) or a full vector (dim,); returns the
        pair (z_commutator, z_flat) in z-coordinates, summing to the input.
        """
        z = np.asarray(z, dtype=float)
        if z.shape == (self.dim,):
            z = z[self.dim_v :]
        elif z.shape != (self.dim_z,):
            raise ValueError(f"central vector must be ({self.dim_z},) or ({self.dim},)")
        comm = self.commutator_z_basis()
        zc = comm.T @ (comm @ z) if comm.size else np.zeros_like(z)
        return zc, z - zc

    def j_injective_on_commutator(self) -> tuple[bool, float]:
        """Whether Z |-> j(Z) is injective on the commutator directions.

        Returns (flag, smallest singular value of the stacked map).  This is
        a structural identity of 2-step algebras: a commutator Z with
        j(Z) = 0 would be orthogonal to all brackets, hence zero.
        """
        comm = self.commutator_z_basis()
        if comm.shape[0] == 0:
            return True, np.inf
        cols = np.stack([self.j_map(row).ravel() for row in comm], axis=1)
        s = np.linalg.svd(cols, compute_uv=False)
        return bool(s[-1] > _ZERO_TOL * max(1.0, s[0])), float(s[-1])

    # ------------------------------------------------------------------
    # structural classification
    # ------------------------------------------------------------------

    def is_h_type(self, tol: float = 1e-10) -> bool:
        """True when j(Z)^2 = -|Z|^2 Id for every central Z.

        Checked on the orthonormal central basis: j(z_i)^2 = -Id and the
        anticommutators j(z_i) j(z_l) + j(z_l) j(z_i) = 0 for i != l; by
        polarization this is equivalent to the definition.  Vacuously true
        when v = {0} (abelian case).
        """
        if self.dim_v == 0:
            return True
        eye = np.eye(self.dim_v)
        js = [self.j_map(np.eye(self.dim_z)[i]) for i in range(self.dim_z)]
        for i, ji in enumerate(js):
            if np.max(np.abs(ji @ ji + eye)) > tol:
                return False
            for jl in js[i + 1 :]:
                if np.max(np.abs(ji @ jl + jl @ ji)) > tol:
                    return False
        return True

    def classify_singularity(self, samples: int = 10_000) -> SingularityReport:
        """Classify the invertibility pattern of j(Z) over the central sphere.

        Exact for dim z <= 2 (polynomial analysis of det j(Z), plus the
        parity shortcut: skew maps on odd-dimensional v are always singular)
        and for h-type algebras; otherwise deterministic quasi-random
        sampling of `samples` central directions, with `exhaustive=False`
        on all-regular / all-singular verdicts.
        """
        dv, dz = self.dim_v, self.dim_z
        if dv == 0 or dz == 0:
            # abelian (or centerless trivial) case: no nonzero j to test
            return SingularityReport(SingularityKind.NONSINGULAR, True, "vacuous")
        if dv % 2 == 1:
            # skew maps on odd-dimensional spaces are always singular
            zdir = np.zeros(dz)
            zdir[0] = 1.0
            comm = self.commutator_z_basis()
            if comm.size:
                zdir = comm[0]
            return SingularityReport(
                SingularityKind.SINGULAR, True, "odd_dim_v", singular_direction=zdir
            )
        if self.is_h_type():
            zdir = np.zeros(dz)
            zdir[0] = 1.0
            return SingularityReport(
                SingularityKind.NONSINGULAR, True, "h_type", regular_direction=zdir
            )
        if dz == 1:
            j1 = self.j_map(np.array([1.0]))
            s = np.linalg.svd(j1, compute_uv=False)
            one = np.array([1.0])
            if s[-1] > _ZERO_TOL * max(1.0, s[0]):
                return SingularityReport(
                    SingularityKind.NONSINGULAR, True, "single_direction", regular_direction=one
                )
            return SingularityReport(
                SingularityKind.SINGULAR, True, "single_direction", singular_direction=one
            )
        if dz == 2:
            return self._classify_dim_z2()
        return self._classify_sampling(samples)

    def _sigma_ratio(self, zdir: np.ndarray) -> float:
        jm = self.j_map(zdir)
        s = np.linalg.svd(jm, compute_uv=False)
        return float(s[-1] / s[0]) if s[0] > 0 else 0.0

    def _classify_dim_z2(self) -> SingularityReport:
        """Exact classification for a 2-dimensional center.

        det j(z1 + s z2) is a polynomial of degree <= dim_v in s (plus the
        lone direction z2 at s = infinity).  The coefficients are recovered
        by interpolation at Chebyshev nodes, candidate real roots are then
        confirmed by the smallest singular value of j at the candidate
        direction, so root-finding precision is not load-bearing.  det of an
        even-dimensional skew matrix is a squared Pfaffian, hence real roots
        come in double pairs; sigma_min confirmation catches them reliably.
        """
        dv = self.dim_v
        e1 = np.array([1.0, 0.0])
        e2 = np.array([0.0, 1.0])
        j1, j2 = self.j_map(e1), self.j_map(e2)
        n1 = np.linalg.norm(j1, 2)
        n2 = np.linalg.norm(j2, 2)
        if n2 <= _ZERO_TOL * max(1.0, n1):
            # j2 = 0: behaves like a 1-dim center plus a flat direction
            if self._sigma_ratio(e1) > 1e-8:
                return SingularityReport(
                    SingularityKind.ALMOST_NONSINGULAR,
                    True,
                    "degenerate_axis",
                    singular_direction=e2,
                    regular_direction=e1,
                )
            return SingularityReport(
                SingularityKind.SINGULAR, True, "degenerate_axis", singular_direction=e1
            )

        radius = 2.0 * max(1.0, n1 / n2)
        nodes = radius * np.cos(np.pi * (2 * np.arange(dv + 1) + 1) / (2 * (dv + 1)))
        dets = np.array([np.linalg.det(j1 + s * j2) for s in nodes])
        vander = np.vander(nodes, dv + 1, increasing=True)
        coeffs = np.linalg.solve(vander, dets)
        det_scale = float(np.max(np.abs(dets)))

        singular_dirs: list[np.ndarray] = []
        if det_scale <= 1e-12 * max(1.0, (n1 + radius * n2) ** dv):
            # det vanishes along the whole family z1 + s z2
            singular_dirs.append(e1)
        else:
            roots = np.polynomial.polynomial.polyroots(coeffs)
            for r in roots:
                if abs(r.imag) > 1e-4 * (1.0 + abs(r.real)):
                    continue
                cand = np.array([1.0, r.real])
                cand = cand / np.linalg.norm(cand)
                refined = self._refine_singular_direction(cand)
                if self._sigma_ratio(refined) <= 1e-7:
                    singular_dirs.append(refined)
        # the direction at infinity (z2 alone)
        if self._sigma_ratio(e2) <= 1e-7:
            singular_dirs.append(e2)

        # regular witness: best sigma ratio over a coarse angular sweep
        thetas = np.linspace(0.0, np.pi, 37, endpoint=False)
        sweep = [(self._sigma_ratio(np.array([np.cos(t), np.sin(t)])), t) for t in thetas]
        best_ratio, best_t = max(sweep)
        regular = np.array([np.cos(best_t), np.sin(best_t)]) if best_ratio > 1e-7 else None

        if not singular_dirs and regular is not None:
            return SingularityReport(
                SingularityKind.NONSINGULAR, True, "det_polynomial", regular_direction=regular
            )
        if singular_dirs and regular is not None:
            return SingularityReport(
                SingularityKind.ALMOST_NONSINGULAR,
                True,
                "det_polynomial",
                singular_direction=singular_dirs[0],
                regular_direction=regular,
            )
        return SingularityReport(
            SingularityKind.SINGULAR,
            True,
            "det_polynomial",
            singular_direction=singular_dirs[0] if singular_dirs else e1,
        )

    def _refine_singular_direction(self, zdir: np.ndarray) -> np.ndarray:
        """Polish a candidate singular direction by minimizing sigma_min on the circle."""
        theta = float(np.arctan2(zdir[1], zdir[0]))

        def ratio(t: float) -> float:
            return self._sigma_ratio(np.array([np.cos(t), np.sin(t)]))

        lo, hi = theta - 0.05, theta + 0.05
        for _ in range(60):  # golden-section-ish trisection; plenty for 1e-12
            m1 = lo + (hi - lo) / 3
            m2 = hi - (hi - lo) / 3
            if ratio(m1) <= ratio(m2):
                hi = m2
            else:
                lo = m1
        t = 0.5 * (lo + hi)
        return np.array([np.cos(t), np.sin(t)])

    def _classify_sampling(self, samples: int) -> SingularityReport:
        """Quasi-random sphere sampling for dim z >= 3 (non-h-type).

        Deterministic probes run first: flat central directions (j = 0 there,
        a guaranteed singular witness when ker j != 0), the coordinate axes,
        and the commutator basis.  Sobol sampling (balanced power-of-two
        count >= samples) then hunts for whichever witness is still missing.
        """
        import math as _math

        from scipy.stats import norm, qmc

        dz = self.dim_z
        probes = [np.eye(dz)[i] for i in range(dz)]
        probes.extend(self.commutator_z_basis())
        probes.extend(self.kernel_z_basis())
        eng = qmc.Sobol(d=dz, scramble=True, seed=20240817)
        pts = eng.random_base2(max(1, _math.ceil(_math.log2(max(2, samples)))))
        gauss = norm.ppf(np.clip(pts, 1e-12, 1 - 1e-12))
        norms = np.linalg.norm(gauss, axis=1)
        keep = norms > 1e-8
        dirs = np.vstack([np.array(probes), gauss[keep] / norms[keep, None]])
        jblock = self.structure[: self.dim_v, : self.dim_v, self.dim_v :]
        mats = np.einsum("abk,nk->nba", jblock, dirs)
        svals = np.linalg.svd(mats, compute_uv=False)
        ratios = svals[:, -1] / np.maximum(svals[:, 0], 1e-300)
        singular_mask = ratios <= 1e-8
        n_sing = int(np.sum(singular_mask))
        if 0 < n_sing < len(dirs):
            return SingularityReport(
                SingularityKind.ALMOST_NONSINGULAR,
                True,  # both witnesses in hand: conclusive
                "sampling",
                singular_direction=dirs[singular_mask][0],
                regular_direction=dirs[~singular_mask][0],
            )
        if n_sing == 0:
            return SingularityReport(
                SingularityKind.NONSINGULAR, False, "sampling", regular_direction=dirs[0]
            )
        return SingularityReport(
            SingularityKind.SINGULAR, False, "sampling", singular_direction=dirs[0]
        )
