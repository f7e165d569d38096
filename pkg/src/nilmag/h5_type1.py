"""Periodic magnetic trajectories on the 5-dimensional Heisenberg group.

v = R^4 carries the complex structure j(Z) = diag(R, R) of heisenberg(2).
A splitting-preserving closed force on H5 is a skew F_v (the central block
is 1-dimensional, hence zero); the solvable class handled here is the one
commuting with j(Z), i.e. complex-linear under (a, b, c, d) <-> (a+ib, c+id).
Such an F_v is orthogonally conjugate, by a complex-unitary change of basis
S that preserves j and the brackets, to diag(mu1 R, mu2 R) with real rates
mu1 <= mu2.  The force is exact (a shifted geodesic) exactly when mu1 = mu2.

In the S-coordinates the two blocks decouple into planar rotations with
frequencies nu_i = z0 + charge * mu_i:

    block velocity   W_i'(t) = Rot(nu_i t) V_i
    block position   (sin(nu_i t)/nu_i) V_i + ((1 - cos(nu_i t))/nu_i) R V_i
    central position z(t) = drift * t - sum_i (|V_i|^2 / (2 nu_i^2)) sin(nu_i t)
    drift            z0 + sum_i |V_i|^2 / (2 nu_i)

with resonant blocks (nu_i = 0) degenerating to straight lines that leave
the center untouched.  The curve closes up (is genuinely periodic) when the
central drift vanishes and the active frequencies are commensurate; from
these two conditions a periodic orbit can be constructed AT EVERY ENERGY
whenever the force is not exact:

  * single mode i:  possible when mu_i^2 > 2 E, with
        z0 = -mu_i + sign(mu_i) sqrt(mu_i^2 - 2E),  period 2 pi / |nu_i|
  * two modes:      pick a rational ratio nu_1 / nu_2 = p / q < 0, which
        forces z0 = (mu1 - r mu2)/(r - 1), r = p/q; the block energies
        x1 = -nu_1 (2 z0 nu_2 + s) / (nu_2 - nu_1), x2 = s - x1 with
        s = 2E - z0^2 must be nonnegative; period 2 pi q / |nu_2|.

periodic_at_energy tries the single modes first and then searches rational
ratios ordered by (q, |p|); the ratio -1 is feasible at every sufficiently
large energy, so the search succeeds on the whole energy range.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .algebra import MetricNilAlgebra
from .errors import ExactForceError, InputError, NoCertificateError, UnsupportedForceError
from .lorentz import ForceType, LorentzForce
from .oracle import CurveSamples

__all__ = [
    "H5Force",
    "H5Branch",
    "H5Trajectory",
    "solve_h5",
    "PeriodicCertificate",
    "periodic_at_energy",
    "verify_periodic",
]

_ROTATION = np.array([[0.0, -1.0], [1.0, 0.0]])
_RES_TOL = 1e-12
_SEARCH_MAX_Q = 64
_SEARCH_MAX_P = 64


@lru_cache(maxsize=1)
def _h5_algebra() -> MetricNilAlgebra:
    return MetricNilAlgebra.heisenberg(2)


def _complexify(m4: np.ndarray) -> np.ndarray:
    """2x2 complex matrix of a real 4x4 matrix commuting with diag(R, R)."""
    out = np.empty((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            block = m4[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]
            out[i, j] = complex(block[0, 0], block[1, 0])
    return out


def _realify(m2: np.ndarray) -> np.ndarray:
    """Inverse of _complexify: x + iy becomes [[x, -y], [y, x]] blockwise."""
    out = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            x, y = m2[i, j].real, m2[i, j].imag
            out[2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = np.array([[x, -y], [y, x]])
    return out


@dataclass(frozen=True)
class H5Force:
    """A j-commuting closed force on H5 in diagonalized form.

    rates are (mu1, mu2) with mu1 <= mu2; frame is the orthogonal map S with
    S F_v S^T = diag(mu1 R, mu2 R), S j S^T = j, and bracket-preserving.
    matrix is the full 5x5 force.
    """

    mu1: float
    mu2: float
    frame: np.ndarray
    matrix: np.ndarray

    @classmethod
    def from_rates(cls, mu1: float, mu2: float) -> "H5Force":
        if not (math.isfinite(mu1) and math.isfinite(mu2)):
            raise InputError("rotation rates must be finite")
        if mu1 > mu2:
            mu1, mu2 = mu2, mu1
        m = np.zeros((5, 5))
        m[0:2, 0:2] = mu1 * _ROTATION
        m[2:4, 2:4] = mu2 * _ROTATION
        return cls(mu1=float(mu1), mu2=float(mu2), frame=np.eye(4), matrix=m)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "H5Force":
        """Diagonalize a j-commuting force given as a full 5x5 matrix.

        Raises UnsupportedForceError when the force is not splitting
        preserving or its v-block does not commute with j(Z).
        """
        alg = _h5_algebra()
        f = LorentzForce(alg, np.asarray(matrix, dtype=float))
        if f.force_type() is not ForceType.TYPE_I:
            raise UnsupportedForceError("H5 solver needs a splitting-preserving force")
        fv = f.block_vv
        jz = alg.j_map(np.array([1.0]))
        scale = max(1.0, float(np.max(np.abs(fv))))
        if np.max(np.abs(fv @ jz - jz @ fv)) > 1e-10 * scale:
            raise UnsupportedForceError(
                "H5 diagonalization needs the v-block to commute with j(Z)"
            )
        a = _complexify(fv)
        h = -1j * a
        w, u = np.linalg.eigh(0.5 * (h + h.conj().T))
        frame = _realify(u.conj().T)
        want = np.zeros((4, 4))
        want[0:2, 0:2] = w[0] * _ROTATION
        want[2:4, 2:4] = w[1] * _ROTATION
        if np.max(np.abs(frame @ fv @ frame.T - want)) > 1e-10 * scale:
            raise UnsupportedForceError("diagonalization of the v-block failed")
        return cls(mu1=float(w[0]), mu2=float(w[1]), frame=frame, matrix=f.matrix.copy())

    @property
    def rates(self) -> tuple[float, float]:
        return self.mu1, self.mu2

    def is_exact(self, rel_tol: float = 1e-12) -> bool:
        """Exact forces are the shifted-geodesic ones: mu1 = mu2."""
        scale = max(1.0, abs(self.mu1), abs(self.mu2))
        return abs(self.mu2 - self.mu1) <= rel_tol * scale


class H5Branch(enum.Enum):
    BOTH_FREE = "both-free"
    ONE_RESONANT = "one-resonant"
    FULLY_RESONANT = "fully-resonant"


class H5Trajectory:
    """Magnetic trajectory on H5 in the force's diagonalizing frame."""

    def __init__(self, force: H5Force, v0: np.ndarray, z0: float, charge: float = 1.0):
        v0 = np.asarray(v0, dtype=float)
        if v0.shape != (4,):
            raise InputError("initial v-velocity must have shape (4,)")
        if not (np.all(np.isfinite(v0)) and math.isfinite(z0) and math.isfinite(charge)):
            raise InputError("initial data must be finite")
        self.force = force
        self.v0 = v0.copy()
        self.z0 = float(z0)
        self.charge = float(charge)
        self.nu = np.array(
            [self.z0 + self.charge * force.mu1, self.z0 + self.charge * force.mu2]
        )
        tilde = force.frame @ v0
        self.blocks = [tilde[0:2], tilde[2:4]]
        scale = max(1.0, abs(self.z0), abs(self.charge) * max(abs(force.mu1), abs(force.mu2)))
        self.resonant = [abs(n) <= _RES_TOL * scale for n in self.nu]
        n_res = sum(self.resonant)
        self.branch = (
            H5Branch.BOTH_FREE
            if n_res == 0
            else H5Branch.ONE_RESONANT
            if n_res == 1
            else H5Branch.FULLY_RESONANT
        )

    def energy(self) -> float:
        return 0.5 * (float(self.v0 @ self.v0) + self.z0**2)

    def drift(self) -> float:
        """Mean central velocity; the trajectory closes only when it is 0."""
        out = self.z0
        for vi, nu, res in zip(self.blocks, self.nu, self.resonant):
            if not res:
                out += float(vi @ vi) / (2.0 * nu)
        return out

    def velocity(self, t: float) -> np.ndarray:
        t = float(t)
        tilde = np.empty(4)
        for i, (vi, nu, res) in enumerate(zip(self.blocks, self.nu, self.resonant)):
            if res:
                tilde[2 * i : 2 * i + 2] = vi
            else:
                c, s = math.cos(nu * t), math.sin(nu * t)
                tilde[2 * i] = c * vi[0] - s * vi[1]
                tilde[2 * i + 1] = s * vi[0] + c * vi[1]
        out = np.empty(5)
        out[:4] = self.force.frame.T @ tilde
        out[4] = self.z0
        return out

    def position(self, t: float) -> np.ndarray:
        t = float(t)
        tilde = np.empty(4)
        z = self.z0 * t
        for i, (vi, nu, res) in enumerate(zip(self.blocks, self.nu, self.resonant)):
            if res:
                tilde[2 * i : 2 * i + 2] = t * vi
                continue
            s = math.sin(nu * t)
            one_minus_cos = 2.0 * math.sin(0.5 * nu * t) ** 2
            w = (s / nu) * vi + (one_minus_cos / nu) * (_ROTATION @ vi)
            tilde[2 * i : 2 * i + 2] = w
            n2 = float(vi @ vi)
            z += (n2 / (2.0 * nu)) * t - (n2 / (2.0 * nu**2)) * s
        out = np.empty(5)
        out[:4] = self.force.frame.T @ tilde
        out[4] = z
        return out

    def eval(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        return self.position(t), self.velocity(t)

    def sample(self, ts: np.ndarray) -> CurveSamples:
        ts = np.asarray(ts, dtype=float)
        xi = np.stack([self.position(t) for t in ts])
        vel = np.stack([self.velocity(t) for t in ts])
        return CurveSamples(t=ts.copy(), velocity=vel, xi=xi)


def solve_h5(force: H5Force, v0, z0: float, charge: float = 1.0) -> H5Trajectory:
    """Trajectory of the j-commuting closed force with initial velocity (v0, z0)."""
    return H5Trajectory(force, v0, z0, charge)


@dataclass(frozen=True)
class PeriodicCertificate:
    """Constructive witness of a periodic orbit at a prescribed energy.

    The trajectory solve_h5(force, v0, z0) has the stated period, zero
    central drift, and energy |v0|^2/2 + z0^2/2 equal to the request.
    mode records the construction: "single-1", "single-2", or
    "two-mode p:q" for commensurate frequencies nu1/nu2 = p/q.
    """

    v0: np.ndarray
    z0: float
    period: float
    drift: float
    energy: float
    mode: str


def _single_mode(force: H5Force, energy: float, idx: int) -> PeriodicCertificate | None:
    mu = force.rates[idx]
    disc = mu * mu - 2.0 * energy
    if disc <= 0.0 or mu == 0.0:
        return None
    z0 = -mu + math.copysign(math.sqrt(disc), mu)
    nu = z0 + mu
    amp2 = -2.0 * z0 * nu
    if amp2 < 0.0:
        return None
    tilde = np.zeros(4)
    tilde[2 * idx] = math.sqrt(amp2)
    v0 = force.frame.T @ tilde
    return PeriodicCertificate(
        v0=v0,
        z0=z0,
        period=2.0 * math.pi / abs(nu),
        drift=0.0,
        energy=energy,
        mode=f"single-{idx + 1}",
    )


def _two_mode(force: H5Force, energy: float) -> PeriodicCertificate | None:
    mu1, mu2 = force.rates
    scale = max(1.0, abs(mu1), abs(mu2))
    for q in range(1, _SEARCH_MAX_Q + 1):
        for p_abs in range(1, _SEARCH_MAX_P + 1):
            p = -p_abs
            if math.gcd(p_abs, q) != 1:
                continue
            r = p / q
            z0 = (mu1 - r * mu2) / (r - 1.0)
            nu1, nu2 = z0 + mu1, z0 + mu2
            if abs(nu1) <= 1e-9 * scale or abs(nu2) <= 1e-9 * scale:
                continue
            s = 2.0 * energy - z0 * z0
            if s < 0.0:
                continue
            x1 = -nu1 * (2.0 * z0 * nu2 + s) / (nu2 - nu1)
            x2 = s - x1
            if x1 < -1e-12 * max(1.0, s) or x2 < -1e-12 * max(1.0, s):
                continue
            x1, x2 = max(x1, 0.0), max(x2, 0.0)
            tilde = np.array([math.sqrt(x1), 0.0, math.sqrt(x2), 0.0])
            v0 = force.frame.T @ tilde
            return PeriodicCertificate(
                v0=v0,
                z0=z0,
                period=2.0 * math.pi * q / abs(nu2),
                drift=0.0,
                energy=energy,
                mode=f"two-mode {p}:{q}",
            )
    return None


def periodic_at_energy(force: H5Force, energy: float) -> PeriodicCertificate:
    """Construct a periodic orbit of the given energy (charge 1).

    Raises ExactForceError for exact forces (mu1 = mu2, which admit no
    periodic orbits), InputError for negative energy, and
    NoCertificateError if the rational search is exhausted.
    """
    if not math.isfinite(energy) or energy < 0.0:
        raise InputError("energy must be a finite nonnegative number")
    if force.is_exact():
        raise ExactForceError(
            "exact forces (equal rotation rates) admit no periodic orbits"
        )
    for idx in (0, 1):
        cert = _single_mode(force, energy, idx)
        if cert is not None:
            return cert
    cert = _two_mode(force, energy)
    if cert is not None:
        return cert
    raise NoCertificateError(
        f"no periodic orbit certificate found at energy {energy:.6g}"
    )


def verify_periodic(
    traj: H5Trajectory, period: float, n_checks: int = 20, tol: float = 1e-8
) -> tuple[bool, float]:
    """Check sigma(t + period) = sigma(t) in the group, returning (ok, residual).

    The residual is the worst norm of sigma(t)^{-1} * sigma(t + period) in
    exponential coordinates over the sample times.
    """
    alg = _h5_algebra()
    worst = 0.0
    for t in np.linspace(0.0, period, n_checks):
        a = traj.position(t)
        b = traj.position(t + period)
        gap = alg.group_mul(alg.group_inv(a), b)
        worst = max(worst, float(np.linalg.norm(gap)))
    return worst <= tol, worst
