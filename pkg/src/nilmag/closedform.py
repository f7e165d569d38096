"""Closed-form magnetic trajectories for splitting-preserving closed forces.

For a closed type-I force F (skew on v, skew on the flat central directions,
zero on the commutator directions) and charge q, the left-trivialized
velocity x(t) and the exponential-coordinate group curve xi(t) are explicit.
Write J = j(Z0) + q F_v on v and G = q F_z on the flat directions, split the
initial v-velocity into the kernel part X1 of J plus rotating components
xi_p on the invariant subspaces of J with rates th_p > 0, and split the
initial central velocity into its commutator part Z0c, the G-kernel flat
part Z1f, and rotating flat components zeta_p with rates mu_p.  Then

    v-velocity:      x_v(t) = X1 + sum_p e^{tJ} xi_p
    z-velocity:      x_z(t) = Z0c + Z1f + sum_p e^{tG} zeta_p
    v-position:      X(t)   = t X1 + sum_p (e^{tJ} - Id) J^{-1} xi_p
    flat position:   Zf(t)  = t Z1f + sum_p (e^{tG} - Id) G^{-1} zeta_p
    commutator pos.: Zc(t)  = t ( Z0c + (1/2)[X1, (e^{tJ} + Id) J^{-1} X2]
                                   - (1/2) sum_p [xi_p, J^{-1} xi_p] )
                      - [X1, J^{-2}(e^{tJ} - Id) X2]
                      + (1/2) [e^{tJ} J^{-1} X2, J^{-1} X2]
                      - (1/2) sum_{p != r} (c_pr(t) - c_pr(0)),

    c_pr(t) = ( [e^{tJ} J xi_p, e^{tJ} J^{-1} xi_r] - [e^{tJ} xi_p, e^{tJ} xi_r] )
              / (th_r^2 - th_p^2),        X2 = sum_p xi_p.

All inverses act on the rotating subspaces only, where J^{-1} = -J / th^2.
The commutator formula follows by integrating Zc' = Z0c - [x_v, X]/2 term by
term; the pair terms integrate in closed form because
(d/dt)([e^{tJ} J xi_p, e^{tJ} J^{-1} xi_r] - [e^{tJ} xi_p, e^{tJ} xi_r])
equals (th_r^2 - th_p^2) [e^{tJ} xi_p, e^{tJ} J^{-1} xi_r], and the diagonal
quantities [e^{tJ} xi_p, e^{tJ} J^{-1} xi_p] are conserved.

Special cases: an exact force F = j(Z~) (+) 0 shifts a geodesic (the
velocity equals a geodesic velocity minus q Z~, the position picks up -t q Z~);
a force with F_z = 0 has velocity e^{t(j(Z0) + q F_v)} X0 + Z0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import MetricNilAlgebra
from .errors import InvalidForceError, UnsupportedForceError
from .lorentz import ForceType, LorentzForce, check_closed, exactness_test
from .oracle import CurveSamples

__all__ = [
    "InitialCondition",
    "InvariantPlane",
    "SkewSpectrum",
    "spectral_decompose",
    "TypeISolution",
    "ExactShiftSolution",
    "CentralKernelSolution",
    "solve_type1",
    "solve_exact",
    "solve_central_kernel",
]

_MERGE_TOL = 1e-9


@dataclass(frozen=True)
class InitialCondition:
    """Initial velocity split into v and central components, plus the charge."""

    v0: np.ndarray
    z0: np.ndarray
    charge: float = 1.0

    @classmethod
    def from_velocity(cls, alg: MetricNilAlgebra, x0: np.ndarray, charge: float = 1.0):
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (alg.dim,):
            raise ValueError(f"initial velocity must be ({alg.dim},)")
        return cls(v0=x0[: alg.dim_v].copy(), z0=x0[alg.dim_v :].copy(), charge=float(charge))

    def validate(self, alg: MetricNilAlgebra) -> None:
        v0 = np.asarray(self.v0, dtype=float)
        z0 = np.asarray(self.z0, dtype=float)
        if v0.shape != (alg.dim_v,) or z0.shape != (alg.dim_z,):
            raise ValueError(
                f"initial condition needs shapes ({alg.dim_v},) and ({alg.dim_z},),"
                f" got {v0.shape} and {z0.shape}"
            )
        if not (np.all(np.isfinite(v0)) and np.all(np.isfinite(z0)) and np.isfinite(self.charge)):
            raise ValueError("initial condition contains non-finite entries")


@dataclass(frozen=True)
class InvariantPlane:
    """An invariant subspace of a skew map with a single rotation rate.

    basis rows span the subspace orthonormally; rate is the positive
    frequency, so the restricted map squares to -rate^2 Id.
    """

    rate: float
    basis: np.ndarray


@dataclass(frozen=True)
class SkewSpectrum:
    """Kernel plus rotation subspaces of a skew matrix.

    Merges rates that agree to 1e-9 relative into one subspace (the
    evaluation formulas only need the restriction to square to -rate^2).
    """

    kernel: np.ndarray          # rows, orthonormal basis of ker J
    planes: tuple[InvariantPlane, ...]
    matrix: np.ndarray

    def project_kernel(self, x: np.ndarray) -> np.ndarray:
        if self.kernel.shape[0] == 0:
            return np.zeros_like(x)
        return self.kernel.T @ (self.kernel @ x)

    def project(self, plane: InvariantPlane, x: np.ndarray) -> np.ndarray:
        return plane.basis.T @ (plane.basis @ x)

    def reassembled(self) -> np.ndarray:
        """Sum of the blockwise restrictions; equals the matrix up to rounding."""
        n = self.matrix.shape[0]
        out = np.zeros((n, n))
        for pl in self.planes:
            proj = pl.basis.T @ pl.basis
            out += proj @ self.matrix @ proj
        return out


def spectral_decompose(j_matrix: np.ndarray, merge_tol: float = _MERGE_TOL) -> SkewSpectrum:
    """Split a skew matrix into its kernel and single-rate rotation subspaces.

    Rates are the positive square roots of the eigenvalues of -J^2 (a
    symmetric PSD matrix); eigenspaces whose rates agree to merge_tol
    (relative to the largest rate) are merged.
    """
    j_matrix = np.asarray(j_matrix, dtype=float)
    n = j_matrix.shape[0]
    if j_matrix.shape != (n, n):
        raise ValueError("spectral_decompose needs a square matrix")
    scale = max(1.0, float(np.max(np.abs(j_matrix))) if n else 1.0)
    if n and np.max(np.abs(j_matrix + j_matrix.T)) > 1e-10 * scale:
        raise ValueError("spectral_decompose needs a skew-symmetric matrix")
    if n == 0:
        return SkewSpectrum(kernel=np.zeros((0, 0)), planes=(), matrix=j_matrix)
    m = -(j_matrix @ j_matrix)
    w, vecs = np.linalg.eigh(0.5 * (m + m.T))
    rates = np.sqrt(np.maximum(w, 0.0))
    max_rate = float(rates[-1])
    if max_rate <= 0.0:
        return SkewSpectrum(kernel=np.eye(n), planes=(), matrix=j_matrix)
    kernel_mask = rates <= merge_tol * max_rate
    kernel = vecs[:, kernel_mask].T
    idx = np.where(~kernel_mask)[0]
    planes: list[InvariantPlane] = []
    group: list[int] = []
    for i in idx:
        if group and abs(rates[i] - rates[group[-1]]) > merge_tol * max_rate:
            planes.append(InvariantPlane(float(np.mean(rates[group])), vecs[:, group].T.copy()))
            group = []
        group.append(int(i))
    if group:
        planes.append(InvariantPlane(float(np.mean(rates[group])), vecs[:, group].T.copy()))
    return SkewSpectrum(kernel=kernel, planes=tuple(planes), matrix=j_matrix)


class _RotatingPart:
    """Evaluation helper: one initial component on a single-rate subspace."""

    def __init__(self, rate: float, comp: np.ndarray, mat: np.ndarray):
        self.rate = rate
        self.xi = comp
        self.jxi = mat @ comp  # J xi; J^{-1} xi = -jxi / rate^2

    def exp(self, t: float) -> np.ndarray:
        """e^{tJ} xi."""
        th = self.rate
        return np.cos(th * t) * self.xi + (np.sin(th * t) / th) * self.jxi

    def exp_j(self, t: float) -> np.ndarray:
        """e^{tJ} J xi."""
        th = self.rate
        return np.cos(th * t) * self.jxi - th * np.sin(th * t) * self.xi

    def exp_jinv(self, t: float) -> np.ndarray:
        """e^{tJ} J^{-1} xi."""
        th = self.rate
        return (np.sin(th * t) / th) * self.xi - (np.cos(th * t) / th**2) * self.jxi

    def int_exp(self, t: float) -> np.ndarray:
        """(e^{tJ} - Id) J^{-1} xi = integral of e^{sJ} xi."""
        th = self.rate
        one_minus_cos = 2.0 * np.sin(0.5 * th * t) ** 2
        return (np.sin(th * t) / th) * self.xi + (one_minus_cos / th**2) * self.jxi

    def jinv(self) -> np.ndarray:
        return -self.jxi / self.rate**2

    def jinv2_exp_minus_id(self, t: float) -> np.ndarray:
        """J^{-2}(e^{tJ} - Id) xi = -((e^{tJ} - Id) xi) / rate^2."""
        th = self.rate
        one_minus_cos = 2.0 * np.sin(0.5 * th * t) ** 2
        return (one_minus_cos * self.xi - (np.sin(th * t) / th) * self.jxi) / th**2


class TypeISolution:
    """Closed-form solution for a closed type-I force.

    velocity(t) is the left-trivialized velocity; position(t) the group curve
    in exponential coordinates with position(0) = 0.  sample(ts) evaluates a
    whole grid into CurveSamples for comparison with the numerical oracle.
    """

    def __init__(self, alg: MetricNilAlgebra, force: LorentzForce, ic: InitialCondition):
        ic.validate(alg)
        self.alg = alg
        self.force = force
        self.ic = ic
        q = ic.charge
        dv, dz = alg.dim_v, alg.dim_z

        self.z0_comm, z0_flat = alg.decompose_center(np.asarray(ic.z0, float))

        j_total = alg.j_map(np.asarray(ic.z0, float)) + q * force.block_vv
        self.spectrum = spectral_decompose(j_total) if dv else SkewSpectrum(
            kernel=np.zeros((0, 0)), planes=(), matrix=np.zeros((0, 0))
        )
        v0 = np.asarray(ic.v0, float)
        self.x1 = self.spectrum.project_kernel(v0) if dv else v0.copy()
        self.parts = [
            _RotatingPart(pl.rate, self.spectrum.project(pl, v0), j_total)
            for pl in self.spectrum.planes
        ]
        # drop components that are numerically zero (keeps pair sums clean)
        v_scale = max(1.0, float(np.linalg.norm(v0)))
        self.parts = [p for p in self.parts if np.linalg.norm(p.xi) > 1e-14 * v_scale]

        g_total = q * force.block_zz
        self.flat_spectrum = spectral_decompose(g_total) if dz else SkewSpectrum(
            kernel=np.zeros((0, 0)), planes=(), matrix=np.zeros((0, 0))
        )
        self.z1_flat = self.flat_spectrum.project_kernel(z0_flat) if dz else z0_flat.copy()
        z_scale = max(1.0, float(np.linalg.norm(ic.z0)))
        self.flat_parts = [
            fp
            for fp in (
                _RotatingPart(pl.rate, self.flat_spectrum.project(pl, z0_flat), g_total)
                for pl in self.flat_spectrum.planes
            )
            if np.linalg.norm(fp.xi) > 1e-14 * z_scale
        ]

        # constant central ingredients
        self._jinv_x2 = sum((p.jinv() for p in self.parts), np.zeros(dv))
        self._f0_sum = sum(
            (self._wedge(p.xi, p.jinv()) for p in self.parts), np.zeros(dz)
        )
        self._c0_pairs = [
            (p, r, self._c_pair(p, r, 0.0)) for p in self.parts for r in self.parts if p is not r
        ]

    # -- helpers ---------------------------------------------------------

    def _wedge(self, a_v: np.ndarray, b_v: np.ndarray) -> np.ndarray:
        """z-coordinates of [a, b] for v-vectors a, b."""
        return self.alg.z_part(self.alg.bracket(self.alg.embed_v(a_v), self.alg.embed_v(b_v)))

    def _c_pair(self, p: _RotatingPart, r: _RotatingPart, t: float) -> np.ndarray:
        num = self._wedge(p.exp_j(t), r.exp_jinv(t)) - self._wedge(p.exp(t), r.exp(t))
        return num / (r.rate**2 - p.rate**2)

    # -- evaluation ------------------------------------------------------

    def velocity(self, t: float) -> np.ndarray:
        t = float(t)
        xv = self.x1 + sum((p.exp(t) for p in self.parts), np.zeros(self.alg.dim_v))
        xz = self.z0_comm + self.z1_flat + sum(
            (fp.exp(t) for fp in self.flat_parts), np.zeros(self.alg.dim_z)
        )
        out = np.empty(self.alg.dim)
        out[: self.alg.dim_v] = xv
        out[self.alg.dim_v :] = xz
        return out

    def position(self, t: float) -> np.ndarray:
        t = float(t)
        dv, dz = self.alg.dim_v, self.alg.dim_z
        x_t = t * self.x1 + sum((p.int_exp(t) for p in self.parts), np.zeros(dv))

        # flat central part: t Z1f + (e^{tG} - Id) G^{-1} zeta
        z_flat = t * self.z1_flat + sum(
            (fp.int_exp(t) for fp in self.flat_parts), np.zeros(dz)
        )

        # commutator central part
        exp_jinv_sum = sum((p.exp_jinv(t) for p in self.parts), np.zeros(dv))
        lin = self.z0_comm.copy()
        if self.parts:
            lin += 0.5 * self._wedge(self.x1, exp_jinv_sum + self._jinv_x2) - 0.5 * self._f0_sum
        z_comm = t * lin
        if self.parts:
            jinv2_sum = sum(
                (p.jinv2_exp_minus_id(t) for p in self.parts), np.zeros(dv)
            )
            z_comm = z_comm - self._wedge(self.x1, jinv2_sum)
            z_comm = z_comm + 0.5 * self._wedge(exp_jinv_sum, self._jinv_x2)
            for p, r, c0 in self._c0_pairs:
                z_comm = z_comm - 0.5 * (self._c_pair(p, r, t) - c0)

        out = np.empty(self.alg.dim)
        out[:dv] = x_t
        out[dv:] = z_comm + z_flat
        return out

    def eval(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        return self.position(t), self.velocity(t)

    def sample(self, ts: np.ndarray) -> CurveSamples:
        ts = np.asarray(ts, dtype=float)
        xi = np.stack([self.position(t) for t in ts])
        vel = np.stack([self.velocity(t) for t in ts])
        return CurveSamples(t=ts.copy(), velocity=vel, xi=xi)

    # -- derived quantities ----------------------------------------------

    def speed(self) -> float:
        """The conserved speed |x(t)| = |x(0)|."""
        return float(np.linalg.norm(self.velocity(0.0)))

    def linear_coefficient(self) -> np.ndarray:
        """Average central drift: the constant part of the t-linear coefficient.

        The full coefficient of t also carries the bounded oscillation
        [X1, e^{tJ} J^{-1} X2]/2 whenever the kernel component brackets
        against the rotating subspaces; this method reports the constant part
        Z0c + [X1, J^{-1} X2]/2 - sum_p [xi_p, J^{-1} xi_p]/2 (plus Z1f).
        """
        lin = self.z0_comm + self.z1_flat
        if self.parts:
            lin = lin + 0.5 * self._wedge(self.x1, self._jinv_x2) - 0.5 * self._f0_sum
        return lin

    def central_oscillation_bound(self) -> float:
        """Triangle-inequality bound for the bounded central oscillation.

        Bounds |Zc(t) + Zf(t) - t * (linear coefficient + oscillating linear
        part)| uniformly in t; the oscillating t-linear part is
        [X1, e^{tJ} J^{-1} X2]/2, bounded by lam |X1| |J^{-1}X2| per unit t,
        so this constant bounds the non-growing remainder only.
        """
        lam = self._bracket_norm()
        b = 0.0
        norm_x1 = float(np.linalg.norm(self.x1))
        sum_jinv = sum(np.linalg.norm(p.xi) / p.rate for p in self.parts)
        for p in self.parts:
            b += lam * norm_x1 * 2.0 * np.linalg.norm(p.xi) / p.rate**2
        b += 0.5 * lam * sum_jinv * sum_jinv
        for p, r, _ in self._c0_pairs:
            amp = lam * (
                p.rate * np.linalg.norm(p.xi) * np.linalg.norm(r.xi) / r.rate
                + np.linalg.norm(p.xi) * np.linalg.norm(r.xi)
            )
            b += amp / abs(r.rate**2 - p.rate**2)  # (1/2) * 2 endpoints
        for fp in self.flat_parts:
            b += 2.0 * np.linalg.norm(fp.xi) / fp.rate
        return float(b)

    def _bracket_norm(self) -> float:
        """Operator bound lam with |[a, b]| <= lam |a| |b| (Frobenius route)."""
        dv = self.alg.dim_v
        tensor = self.alg.structure[:dv, :dv, dv:]
        return float(np.linalg.norm(tensor.reshape(dv * dv, -1), 2)) if dv else 0.0


@dataclass(frozen=True)
class ExactShiftSolution:
    """An exact force trajectory viewed as a shifted geodesic.

    solution solves the magnetic equation directly; geodesic is the zero-force
    trajectory with initial central velocity raised by the charge times the
    force potential; shift = q Z~ relates the two:

        velocity(t) = geodesic velocity(t) - shift
        position(t) = geodesic position(t) - t * shift
    """

    solution: TypeISolution
    geodesic: TypeISolution
    shift: np.ndarray

    def velocity_via_shift(self, t: float) -> np.ndarray:
        return self.geodesic.velocity(t) - self.shift

    def position_via_shift(self, t: float) -> np.ndarray:
        return self.geodesic.position(t) - float(t) * self.shift


@dataclass(frozen=True)
class CentralKernelSolution:
    """Trajectory for a force vanishing on the center (F_z = 0).

    The velocity admits the direct one-exponential form
    e^{t (j(Z0) + q F_v)} X0 + Z0, evaluated here independently of the general
    solver; full is the general solution (same trajectory) for positions.
    """

    full: TypeISolution
    _vel_spectrum: SkewSpectrum
    _vel_parts: tuple
    _vel_kernel: np.ndarray
    _z0: np.ndarray

    def velocity(self, t: float) -> np.ndarray:
        alg = self.full.alg
        xv = self._vel_kernel + sum(
            (p.exp(float(t)) for p in self._vel_parts), np.zeros(alg.dim_v)
        )
        out = np.empty(alg.dim)
        out[: alg.dim_v] = xv
        out[alg.dim_v :] = self._z0
        return out

    def position(self, t: float) -> np.ndarray:
        return self.full.position(t)


def _require_closed_type1(alg: MetricNilAlgebra, force) -> LorentzForce:
    f = force if isinstance(force, LorentzForce) else LorentzForce(alg, force)
    ftype = f.force_type()
    if ftype is not ForceType.TYPE_I:
        raise UnsupportedForceError(
            f"closed-form solver handles splitting-preserving (type I) forces; got {ftype.value}"
        )
    rep = check_closed(alg, f)
    if not rep.closed:
        raise InvalidForceError(
            f"force is not closed: residual {rep.max_residual:.3e} on basis triple {rep.worst_triple}"
        )
    return f


def solve_type1(alg: MetricNilAlgebra, force, ic: InitialCondition) -> TypeISolution:
    """Closed-form trajectory for a closed type-I force (see module docstring)."""
    return TypeISolution(alg, _require_closed_type1(alg, force), ic)


def solve_exact(alg: MetricNilAlgebra, force, ic: InitialCondition) -> ExactShiftSolution:
    """Solve an exact force F = j(Z~) (+) 0 and exhibit the geodesic shift.

    Raises UnsupportedForceError when F is not exact (no commutator vector
    Z~ reproduces it).
    """
    f = _require_closed_type1(alg, force)
    res = exactness_test(alg, f)
    if not res.is_exact:
        raise UnsupportedForceError(
            f"force is not exact: best central-potential fit leaves residual {res.residual:.3e}"
        )
    shift = ic.charge * res.z_tilde  # full coordinates, central
    main = TypeISolution(alg, f, ic)
    geo_ic = InitialCondition(
        v0=np.asarray(ic.v0, float).copy(),
        z0=np.asarray(ic.z0, float) + alg.z_part(shift),
        charge=ic.charge,
    )
    zero_force = LorentzForce(alg, np.zeros((alg.dim, alg.dim)))
    geodesic = TypeISolution(alg, zero_force, geo_ic)
    return ExactShiftSolution(solution=main, geodesic=geodesic, shift=shift)


def solve_central_kernel(alg: MetricNilAlgebra, force, ic: InitialCondition) -> CentralKernelSolution:
    """Solve a closed type-I force with F_z = 0 via the one-exponential velocity."""
    f = _require_closed_type1(alg, force)
    if alg.dim_z and float(np.max(np.abs(f.block_zz), initial=0.0)) > 1e-10 * max(
        1.0, float(np.max(np.abs(f.matrix)))
    ):
        raise UnsupportedForceError("central-kernel solver needs F to vanish on the center")
    ic.validate(alg)
    full = TypeISolution(alg, f, ic)
    m = alg.j_map(np.asarray(ic.z0, float)) + ic.charge * f.block_vv
    spec = spectral_decompose(m)
    v0 = np.asarray(ic.v0, float)
    parts = tuple(
        _RotatingPart(pl.rate, spec.project(pl, v0), m)
        for pl in spec.planes
        if np.linalg.norm(spec.project(pl, v0)) > 0.0
    )
    return CentralKernelSolution(
        full=full,
        _vel_spectrum=spec,
        _vel_parts=parts,
        _vel_kernel=spec.project_kernel(v0),
        _z0=np.asarray(ic.z0, float).copy(),
    )
