"""Jacobi-elliptic trajectories for the vector-type force on H3.

On the 3-dimensional Heisenberg group the non-splitting closed force is
F_u(V + Z) = [V, u] + j(Z) u for a nonzero u in v.  Every (u, charge) pair
reduces to the canonical u = e2, charge = 1 by a rotation of v and a time
rescaling, so the solver below handles the canonical case and a transport
wrapper restores the general one.

Canonical case, initial velocity (x0, y0, z0).  The z-velocity psi(t)
(shifted as Phi = psi - z0, so Phi(0) = 0, Phi'(0) = x0) obeys

    Phi'^2 + (Phi^2/2 + z0 Phi + y1)^2 = S^2,   y1 = y0 + 1,
    S = sqrt(x0^2 + y1^2),

which pins the whole velocity algebraically:

    velocity(t) = ( Phi'(t),  y0 + z0 Phi + Phi^2/2,  z0 + Phi(t) ).

The sign of disc = 2 (S + y1) - z0^2 selects the solution family for
psi = Phi + z0:

    disc > 0:  psi = a cn(C0 - sqrt(S) t, k),  a^2 = 2S - 2y1 + z0^2,
               k = a / (2 sqrt(S)),            period 4 K(k) / sqrt(S)
    disc < 0:  psi = sign(z0) a dn(C1 - (a/2) t, k),  k = 2 sqrt(S) / a,
               period 4 K(k) / a
    disc = 0:  psi = sign(z0) 2 sqrt(S) sech(C2 - sqrt(S) t)   (separatrix)

plus the degenerate straight line Phi == 0 exactly when x0 = 0 and
z0 y1 = 0.  Phases C0, C1, C2 are pinned by psi(0) = z0 and the sign of x0.

Positions need the running integrals I_m(t) of Phi^m, m = 1, 2, 3: with
xi = (xi_x, xi_y, xi_z) the group curve from the identity,

    xi_x = Phi(t)
    xi_y = y0 t + z0 I1 + I2 / 2
    xi_z = z0 t + y1 I1 + z0 I2 + I3 / 2 - Phi(t) xi_y(t) / 2,

the last line obtained by integrating the reconstruction bracket by parts.
I_m are evaluated by one-period quadrature plus exact period folding on the
oscillating branches and in elementary closed form on the separatrix.

A velocity with period w makes the group curve lam-periodic:
sigma(t + w) = lam * sigma(t) with lam = sigma(w), because both sides share
the same left-trivialized velocity and the same value at t = 0.  The curve
is genuinely periodic exactly when lam is the identity.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .algebra import MetricNilAlgebra
from .errors import DegenerateForceError
from .oracle import CurveSamples
from .specfun import complete_K, inverse_cn, inverse_dn, jacobi, sech

__all__ = [
    "Branch",
    "Type2TrajectoryH3",
    "solve_h3_type2",
    "NormalizedType2",
    "normalize_force",
    "TransportedType2",
    "solve_type2_general",
    "PeriodicityKind",
    "PeriodicityReport",
    "lambda_periodicity",
    "lambda_kernel_check",
]

_BOUNDARY_TOL = 1e-12
_QUAD_OPTS = dict(epsabs=1e-12, epsrel=1e-12, limit=200)


@lru_cache(maxsize=1)
def _h3_algebra() -> MetricNilAlgebra:
    return MetricNilAlgebra.heisenberg(1)


class Branch(enum.Enum):
    """Solution family of the canonical H3 vector-force trajectory."""

    CN = "cn"
    DN = "dn"
    SECH_POS = "sech+"
    SECH_NEG = "sech-"
    LINEAR = "linear"


def _gd(x: float) -> float:
    """Gudermannian function, the antiderivative of sech."""
    return 2.0 * math.atan(math.tanh(0.5 * x))


class Type2TrajectoryH3:
    """Canonical H3 trajectory for F_{e2} with charge 1.

    Exposes the branch data (modulus, amplitude, phase, rate, period), the
    algebraic velocity, and the reconstructed group curve.  Instances are
    produced by solve_h3_type2.
    """

    def __init__(self, x0: float, y0: float, z0: float):
        if not all(math.isfinite(v) for v in (x0, y0, z0)):
            raise ValueError("initial velocity contains non-finite entries")
        self.x0, self.y0, self.z0 = float(x0), float(y0), float(z0)
        self.y1 = self.y0 + 1.0
        self.v1_norm = math.hypot(self.x0, self.y1)  # S above
        s = self.v1_norm
        z0 = self.z0
        disc = 2.0 * (s + self.y1) - z0 * z0
        self.disc = disc
        self.boundary_margin = abs(disc) / max(1.0, s)

        self.amplitude = 0.0
        self.modulus = 0.0
        self.rate = 0.0
        self.phase = 0.0
        self.period: float | None = None
        self.sign = 1.0

        if self.x0 == 0.0 and z0 * self.y1 == 0.0:
            self.branch = Branch.LINEAR
            return

        if abs(disc) <= _BOUNDARY_TOL * max(1.0, s):
            # separatrix: |z0| = 2 sqrt(S) up to rounding, z0 != 0 here
            self.branch = Branch.SECH_POS if z0 > 0 else Branch.SECH_NEG
            self.sign = 1.0 if z0 > 0 else -1.0
            self.amplitude = 2.0 * math.sqrt(s)
            self.modulus = 1.0
            self.rate = math.sqrt(s)
            ratio = min(abs(z0) / self.amplitude, 1.0)
            c2 = math.acosh(1.0 / ratio) if ratio < 1.0 else 0.0
            self.phase = math.copysign(c2, self.sign * self.x0) if self.x0 else c2
            return

        if disc > 0.0:
            self.branch = Branch.CN
            a = math.sqrt(2.0 * s - 2.0 * self.y1 + z0 * z0)
            self.amplitude = a
            self.modulus = a / (2.0 * math.sqrt(s))
            self.rate = math.sqrt(s)
            self.period = 4.0 * complete_K(self.modulus) / self.rate
            c0 = inverse_cn(float(np.clip(z0 / a, -1.0, 1.0)), self.modulus)
            self.phase = c0 if self.x0 >= 0.0 else -c0
            return

        self.branch = Branch.DN
        a = math.sqrt(2.0 * s - 2.0 * self.y1 + z0 * z0)
        self.amplitude = a
        self.modulus = 2.0 * math.sqrt(s) / a
        self.rate = 0.5 * a
        self.period = 4.0 * complete_K(self.modulus) / a
        self.sign = 1.0 if z0 > 0 else -1.0
        kp = math.sqrt((1.0 - self.modulus) * (1.0 + self.modulus))
        ratio = float(np.clip(abs(z0) / a, kp, 1.0))
        c1 = inverse_dn(ratio, self.modulus)
        if self.sign > 0:
            self.phase = c1 if self.x0 >= 0.0 else -c1
        else:
            self.phase = c1 if self.x0 <= 0.0 else -c1

    # -- scalar trajectory data -------------------------------------------

    def _psi(self, t: float) -> tuple[float, float]:
        """The z-velocity psi = Phi + z0 and its time derivative."""
        br = self.branch
        if br is Branch.LINEAR:
            return self.z0, 0.0
        u = self.phase - self.rate * t
        if br is Branch.CN:
            sn, cn, dn = jacobi(u, self.modulus)
            psi = self.amplitude * cn
            dpsi = self.amplitude * self.rate * sn * dn
            return psi, dpsi
        if br is Branch.DN:
            sn, cn, dn = jacobi(u, self.modulus)
            psi = self.sign * self.amplitude * dn
            dpsi = self.sign * self.amplitude * self.rate * self.modulus**2 * sn * cn
            return psi, dpsi
        sech_u = sech(u)
        tanh_u = math.tanh(u)
        psi = self.sign * self.amplitude * sech_u
        dpsi = self.sign * self.amplitude * self.rate * sech_u * tanh_u
        return psi, dpsi

    def phi(self, t: float) -> float:
        """The shifted z-velocity Phi(t) = psi(t) - z0, with Phi(0) = 0."""
        return self._psi(float(t))[0] - self.z0

    def phi_prime(self, t: float) -> float:
        return self._psi(float(t))[1]

    def velocity(self, t: float) -> np.ndarray:
        psi, dpsi = self._psi(float(t))
        phi = psi - self.z0
        return np.array(
            [dpsi, self.y0 + self.z0 * phi + 0.5 * phi * phi, psi]
        )

    # -- power integrals and positions -------------------------------------

    def _power_integrals(self, t: float) -> tuple[float, float, float]:
        """(I1, I2, I3) with I_m = integral of Phi^m over [0, t]."""
        br = self.branch
        if br is Branch.LINEAR:
            return 0.0, 0.0, 0.0
        if br in (Branch.SECH_POS, Branch.SECH_NEG):
            return self._sech_integrals(t)
        period = self.period
        n = math.floor(t / period)
        tau = t - n * period
        per = self._period_integrals()
        part = self._quad_integrals(tau)
        return tuple(n * p + q for p, q in zip(per, part))

    def _quad_integrals(self, tau: float) -> tuple[float, float, float]:
        out = []
        for m in (1, 2, 3):
            val, _ = quad(lambda s: self.phi(s) ** m, 0.0, tau, **_QUAD_OPTS)
            out.append(val)
        return tuple(out)

    def _period_integrals(self) -> tuple[float, float, float]:
        cached = getattr(self, "_period_cache", None)
        if cached is None:
            cached = self._quad_integrals(self.period)
            self._period_cache = cached
        return cached

    def _sech_integrals(self, t: float) -> tuple[float, float, float]:
        """Exact I_m on the separatrix via antiderivatives of sech powers."""
        a = self.sign * self.amplitude
        r = self.rate
        z0 = self.z0

        def sech_powers(w: float) -> tuple[float, float, float]:
            sw, tw = sech(w), math.tanh(w)
            return _gd(w), tw, 0.5 * (sw * tw + _gd(w))

        hi = sech_powers(self.phase)
        lo = sech_powers(self.phase - r * t)
        s1, s2, s3 = ((h - l) / r for h, l in zip(hi, lo))
        i1 = a * s1 - z0 * t
        i2 = a * a * s2 - 2.0 * a * z0 * s1 + z0 * z0 * t
        i3 = a**3 * s3 - 3.0 * a * a * z0 * s2 + 3.0 * a * z0 * z0 * s1 - z0**3 * t
        return i1, i2, i3

    def position(self, t: float) -> np.ndarray:
        """Group curve in exponential coordinates, position(0) = 0."""
        t = float(t)
        phi = self.phi(t)
        i1, i2, i3 = self._power_integrals(t)
        xi_y = self.y0 * t + self.z0 * i1 + 0.5 * i2
        xi_z = (
            self.z0 * t
            + self.y1 * i1
            + self.z0 * i2
            + 0.5 * i3
            - 0.5 * phi * xi_y
        )
        return np.array([phi, xi_y, xi_z])

    def eval(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        return self.position(t), self.velocity(t)

    def sample(self, ts: np.ndarray) -> CurveSamples:
        ts = np.asarray(ts, dtype=float)
        xi = np.stack([self.position(t) for t in ts])
        vel = np.stack([self.velocity(t) for t in ts])
        return CurveSamples(t=ts.copy(), velocity=vel, xi=xi)

    def phi_image(self) -> tuple[float, float]:
        """Closure of the range of Phi."""
        a, z0 = self.amplitude, self.z0
        if self.branch is Branch.LINEAR:
            return 0.0, 0.0
        if self.branch is Branch.CN:
            return -a - z0, a - z0
        if self.branch is Branch.DN:
            floor = a * math.sqrt((1.0 - self.modulus) * (1.0 + self.modulus))
            if self.sign > 0:
                return floor - z0, a - z0
            return -a - z0, -floor - z0
        if self.sign > 0:
            return -z0, a - z0
        return -a - z0, -z0


def solve_h3_type2(x0) -> Type2TrajectoryH3:
    """Canonical H3 trajectory (force direction e2, charge 1).

    x0 is the initial left-trivialized velocity (x, y, z components).
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (3,):
        raise ValueError("initial velocity must have shape (3,)")
    return Type2TrajectoryH3(x0[0], x0[1], x0[2])


# -- reduction of the general vector force to the canonical one --------------


@dataclass(frozen=True)
class NormalizedType2:
    """Reduction data: trajectory time runs at canonical time / time_scale.

    rotation maps the effective unit force direction to e2; unit_direction
    is that direction (charge sign absorbed).
    """

    time_scale: float
    rotation: np.ndarray
    unit_direction: np.ndarray


def normalize_force(u, charge: float) -> NormalizedType2:
    """Rotation and time rescaling taking (u, charge) to (e2, 1)."""
    u = np.asarray(u, dtype=float)
    if u.shape == (3,):
        if abs(u[2]) > 1e-14:
            raise ValueError("force direction must lie in v (third component 0)")
        u = u[:2]
    if u.shape != (2,):
        raise ValueError("force direction must have shape (2,) or (3,)")
    w = float(charge) * u
    rho = float(np.linalg.norm(w))
    if not math.isfinite(rho) or rho < 1e-14:
        raise DegenerateForceError("vector-type force needs charge * u nonzero")
    w_hat = w / rho
    rotation = np.array([[w_hat[1], -w_hat[0]], [w_hat[0], w_hat[1]]])
    return NormalizedType2(time_scale=1.0 / rho, rotation=rotation, unit_direction=w_hat)


class TransportedType2:
    """General-(u, charge) trajectory expressed through the canonical one.

    With q = time_scale and the normalizing rotation r,
        velocity(t) = (1/q) * r^T-action of canonical velocity(t / q)
        position(t) =        r^T-action of canonical position(t / q)
    where the rotation acts on the v-components only.
    """

    def __init__(self, u, charge: float, x0):
        x0 = np.asarray(x0, dtype=float)
        if x0.shape != (3,):
            raise ValueError("initial velocity must have shape (3,)")
        self.normalization = normalize_force(u, charge)
        q, rot = self.normalization.time_scale, self.normalization.rotation
        inner_v = q * (rot @ x0[:2])
        self.inner = Type2TrajectoryH3(inner_v[0], inner_v[1], q * x0[2])
        self.u = np.asarray(u, dtype=float)[:2].copy()
        self.charge = float(charge)

    def velocity(self, t: float) -> np.ndarray:
        q = self.normalization.time_scale
        v = self.inner.velocity(float(t) / q) / q
        out = np.empty(3)
        out[:2] = self.normalization.rotation.T @ v[:2]
        out[2] = v[2]
        return out

    def position(self, t: float) -> np.ndarray:
        q = self.normalization.time_scale
        p = self.inner.position(float(t) / q)
        out = np.empty(3)
        out[:2] = self.normalization.rotation.T @ p[:2]
        out[2] = p[2]
        return out

    def sample(self, ts: np.ndarray) -> CurveSamples:
        ts = np.asarray(ts, dtype=float)
        xi = np.stack([self.position(t) for t in ts])
        vel = np.stack([self.velocity(t) for t in ts])
        return CurveSamples(t=ts.copy(), velocity=vel, xi=xi)

    @property
    def branch(self) -> Branch:
        return self.inner.branch

    @property
    def period(self) -> float | None:
        """Velocity period in the outer time variable (inner period times q)."""
        if self.inner.period is None:
            return None
        return self.normalization.time_scale * self.inner.period


def solve_type2_general(u, charge: float, x0) -> TransportedType2:
    """Trajectory for the vector force F_u with an arbitrary charge."""
    return TransportedType2(u, charge, x0)


# -- lambda-periodicity -------------------------------------------------------


class PeriodicityKind(enum.Enum):
    PERIODIC = "periodic"
    LAMBDA_PERIODIC = "lambda-periodic"
    NON_PERIODIC = "non-periodic"


@dataclass(frozen=True)
class PeriodicityReport:
    """Trichotomy certificate for a vector-force trajectory.

    For kinds other than NON_PERIODIC, sigma(t + omega) = translation *
    sigma(t) for all t; residual is the worst verification error of that
    identity on sample times.  PERIODIC means the translation is the
    identity to tolerance.
    """

    kind: PeriodicityKind
    omega: float | None
    translation: np.ndarray | None
    residual: float | None


def _verify_translation(traj, lam: np.ndarray, omega: float, n_checks: int) -> float:
    alg = _h3_algebra()
    worst = 0.0
    for t in np.linspace(0.0, 2.0 * omega, n_checks):
        lhs = traj.position(t + omega)
        rhs = alg.group_mul(lam, traj.position(t))
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def lambda_periodicity(traj, tol: float = 1e-9, n_checks: int = 10) -> PeriodicityReport:
    """Classify a canonical or transported trajectory as periodic,
    lambda-periodic, or non-periodic, with the translation element.

    The translation is sigma(omega) where omega is the velocity period
    (omega = 1 for the straight-line branch, whose velocity is constant).
    """
    if isinstance(traj, TransportedType2):
        inner_report = lambda_periodicity(traj.inner, tol=tol, n_checks=0)
        if inner_report.kind is PeriodicityKind.NON_PERIODIC:
            return inner_report
        q, rot = traj.normalization.time_scale, traj.normalization.rotation
        omega = q * inner_report.omega
        lam = np.empty(3)
        lam[:2] = rot.T @ inner_report.translation[:2]
        lam[2] = inner_report.translation[2]
        kind = (
            PeriodicityKind.PERIODIC
            if np.linalg.norm(lam) <= tol
            else PeriodicityKind.LAMBDA_PERIODIC
        )
        residual = _verify_translation(traj, lam, omega, n_checks) if n_checks else None
        return PeriodicityReport(kind=kind, omega=omega, translation=lam, residual=residual)

    if traj.branch in (Branch.SECH_POS, Branch.SECH_NEG):
        return PeriodicityReport(
            kind=PeriodicityKind.NON_PERIODIC, omega=None, translation=None, residual=None
        )
    omega = 1.0 if traj.branch is Branch.LINEAR else traj.period
    lam = traj.position(omega)
    kind = (
        PeriodicityKind.PERIODIC
        if np.linalg.norm(lam) <= tol
        else PeriodicityKind.LAMBDA_PERIODIC
    )
    residual = _verify_translation(traj, lam, omega, n_checks) if n_checks else None
    return PeriodicityReport(kind=kind, omega=omega, translation=lam, residual=residual)


def lambda_kernel_check(u, translation: np.ndarray, tol: float = 1e-12) -> bool:
    """Whether the translation's v-component lies in ker F_u = span(u)."""
    u = np.asarray(u, dtype=float)[:2]
    nu = np.linalg.norm(u)
    if nu == 0.0:
        raise DegenerateForceError("kernel check needs a nonzero direction")
    lam_v = np.asarray(translation, dtype=float)[:2]
    u_hat = u / nu
    residual = float(np.linalg.norm(lam_v - (lam_v @ u_hat) * u_hat))
    return residual <= tol * max(1.0, float(np.linalg.norm(translation)))
