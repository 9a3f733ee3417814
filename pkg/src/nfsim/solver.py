"""Time-domain integration of the coherence/field equations for one target.

The two coherences per slab obey

    d rho31/dt = -(gamma/2 + i Delta M(t)) rho31 + i (a/4) Omega
    d rho42/dt = -(gamma/2 - i Delta M(t)) rho42 + i (a/4) Omega

and the field is transported through the target in the retarded frame,

    d Omega/dy = i eta (rho31 + rho42) + (i k / 2) (n^2 - 1) Omega,

with eta = 2 gamma xi / (a L).  The transit time through a 10 um crystal is
femtoseconds, so the (1/c) d/dt term is dropped and transport reduces to a
y-ODE solved once per time step.  Coherences live at slab centers, the field
at slab faces; transport uses the trapezoidal rule in y.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from numba import njit

from .core import (
    FieldRecord,
    NumericalInstabilityError,
    TruncationWarning,
    angular_detuning,
)


@dataclass(frozen=True)
class SlabState:
    """Per-slab coherences at one instant."""

    rho31: np.ndarray
    rho42: np.ndarray

    def __post_init__(self):
        r31 = np.asarray(self.rho31, dtype=np.complex128)
        r42 = np.asarray(self.rho42, dtype=np.complex128)
        if r31.shape != r42.shape:
            raise ValueError("rho31 and rho42 must have the same length")
        object.__setattr__(self, "rho31", r31)
        object.__setattr__(self, "rho42", r42)

    @classmethod
    def zeros(cls, n_slabs):
        return cls(np.zeros(n_slabs, np.complex128), np.zeros(n_slabs, np.complex128))


@dataclass(frozen=True)
class PropagationCoefficients:
    """Transport coefficients for one target."""

    eta: float          # 1/(m ns)
    electronic_term: complex  # 1/m, multiplies Omega in d/dy
    slab_dy: float      # m

    @classmethod
    def for_target(cls, target, constants):
        if target.xi > 0:
            eta = 2.0 * constants.gamma * target.xi / (
                constants.cg_a * target.thickness_L
            )
        else:
            eta = 0.0
        if target.include_electronic:
            # -(k/2i)(n^2-1) = (ik/2)(n^2-1); Re < 0 for Im n > 0
            elec = 0.5j * constants.k_xray * (constants.n_electronic**2 - 1.0)
        else:
            elec = 0.0 + 0.0j
        return cls(eta, elec, target.thickness_L / 128)

    def with_slabs(self, n_slabs, thickness_L):
        return PropagationCoefficients(
            self.eta, self.electronic_term, thickness_L / n_slabs
        )


def _rk4_coefficients(c1, c2, c4, dt):
    """Per-step closed form for rho' = c(t) rho + g with constant g.

    Returns (A, B) with rho(t+dt) = A rho(t) + B g for the classical RK4
    scheme, c evaluated at the stage times t, t+dt/2, t+dt.
    """
    h = dt
    k1r = c1
    k1g = 1.0
    k2r = c2 * (1.0 + h / 2 * k1r)
    k2g = c2 * h / 2 * k1g + 1.0
    k3r = c2 * (1.0 + h / 2 * k2r)
    k3g = c2 * h / 2 * k2g + 1.0
    k4r = c4 * (1.0 + h * k3r)
    k4g = c4 * h * k3g + 1.0
    A = 1.0 + h / 6 * (k1r + 2 * k2r + 2 * k3r + k4r)
    B = h / 6 * (k1g + 2 * k2g + 2 * k3g + k4g)
    return A, B


def step_coherences(state, omega_at_slabs, delta_m, gamma, cg_a, dt):
    """Advance both coherences one RK4 step.

    delta_m is Delta*M (rad/ns) either as a scalar (constant over the step)
    or as a length-3 sequence evaluated at the stage times t, t+dt/2, t+dt.
    The drive i(a/4)Omega is held constant over the step.
    """
    dm = np.atleast_1d(np.asarray(delta_m, dtype=float))
    if dm.size == 1:
        dm = np.repeat(dm, 3)
    elif dm.size != 3:
        raise ValueError("delta_m must be a scalar or 3 stage values")
    c1, c2, c4 = (-(gamma / 2 + 1j * d) for d in dm)
    A, B = _rk4_coefficients(c1, c2, c4, dt)
    g = 0.25j * cg_a * np.asarray(omega_at_slabs, dtype=np.complex128)
    r31 = A * state.rho31 + B * g
    r42 = np.conj(A) * state.rho42 + np.conj(B) * g
    for name, arr in (("rho31", r31), ("rho42", r42)):
        bad = ~np.isfinite(arr)
        if bad.any():
            slab = int(np.argmax(bad))
            raise NumericalInstabilityError(
                f"{name} became non-finite at slab {slab}"
            )
    return SlabState(r31, r42)


def transport_field(state, omega_in, coeffs):
    """Integrate the field across the target for the current coherences.

    Implicit trapezoid per slab: the source i eta (rho31+rho42) is sampled
    at the slab center, the electronic term averaged over the two faces.
    Returns (field at the n_slabs+1 faces, exit value).
    """
    n = state.rho31.size
    faces = np.empty(n + 1, np.complex128)
    faces[0] = omega_in
    e2 = 0.5 * coeffs.electronic_term * coeffs.slab_dy
    src = 1j * coeffs.eta * coeffs.slab_dy * (state.rho31 + state.rho42)
    om = complex(omega_in)
    for m in range(n):
        om = (om * (1.0 + e2) + src[m]) / (1.0 - e2)
        faces[m + 1] = om
    return faces, faces[-1]


@njit(cache=True, fastmath=True)
def _switch_profile(t, times, d):
    m = 1.0
    for k in range(times.size):
        m *= -np.tanh((t - times[k]) / (0.25 * d))
    return m


@njit(cache=True)
def _march(om_in, dt, n_slabs, gamma, cg_a, delta, times, d, eta_dy, elec_dy):
    n_t = om_in.size
    out = np.empty(n_t, np.complex128)
    r31 = np.zeros(n_slabs, np.complex128)
    r42 = np.zeros(n_slabs, np.complex128)
    omc = np.zeros(n_slabs, np.complex128)
    e2 = elec_dy / 2.0
    gfac = 1j * cg_a / 4.0
    om = om_in[0] + 0j
    for m in range(n_slabs):
        om2 = (om * (1.0 + e2) + 1j * eta_dy * (r31[m] + r42[m])) / (1.0 - e2)
        omc[m] = 0.5 * (om + om2)
        om = om2
    out[0] = om
    h = dt
    for n in range(1, n_t):
        t = (n - 1) * dt
        c1 = -(gamma / 2 + 1j * delta * _switch_profile(t, times, d))
        c2 = -(gamma / 2 + 1j * delta * _switch_profile(t + h / 2, times, d))
        c4 = -(gamma / 2 + 1j * delta * _switch_profile(t + h, times, d))
        k1r = c1
        k1g = 1.0
        k2r = c2 * (1 + h / 2 * k1r)
        k2g = c2 * h / 2 * k1g + 1.0
        k3r = c2 * (1 + h / 2 * k2r)
        k3g = c2 * h / 2 * k2g + 1.0
        k4r = c4 * (1 + h * k3r)
        k4g = c4 * h * k3g + 1.0
        A1 = 1 + h / 6 * (k1r + 2 * k2r + 2 * k3r + k4r)
        B1 = h / 6 * (k1g + 2 * k2g + 2 * k3g + k4g)
        A2 = np.conj(A1)
        B2 = np.conj(B1)
        for m in range(n_slabs):
            g = gfac * omc[m]
            r31[m] = A1 * r31[m] + B1 * g
            r42[m] = A2 * r42[m] + B2 * g
        om = om_in[n] + 0j
        for m in range(n_slabs):
            om2 = (om * (1.0 + e2) + 1j * eta_dy * (r31[m] + r42[m])) / (1.0 - e2)
            omc[m] = 0.5 * (om + om2)
            om = om2
        out[n] = om
        if n % 4096 == 0 and not (
            np.isfinite(om.real) and np.isfinite(om.imag)
        ):
            return out, n
    if not (np.isfinite(om.real) and np.isfinite(om.imag)):
        return out, n_t - 1
    return out, -1


def run_target(input_record, target, constants, grid):
    """Propagate a field record through one target; returns the exit record."""
    if abs(input_record.dt - grid.dt) > 1e-12 * grid.dt:
        raise ValueError("input record dt does not match the grid")
    coeffs = PropagationCoefficients.for_target(target, constants).with_slabs(
        grid.n_slabs, target.thickness_L
    )
    sched = target.schedule
    out, bad = _march(
        np.ascontiguousarray(input_record.samples),
        grid.dt,
        grid.n_slabs,
        constants.gamma,
        constants.cg_a,
        angular_detuning(target.delta_over_gamma, constants),
        np.asarray(sched.switch_times, dtype=float),
        sched.duration_d,
        coeffs.eta * coeffs.slab_dy,
        coeffs.electronic_term * coeffs.slab_dy,
    )
    if bad >= 0:
        raise NumericalInstabilityError(
            f"field became non-finite near t = {bad * grid.dt:.4g} ns"
        )
    peak = np.abs(out).max()
    if peak > 0 and abs(out[-1]) > 1e-2 * peak:
        warnings.warn(
            "field has not decayed at t_end; spectra will be truncated",
            TruncationWarning,
            stacklevel=2,
        )
    return FieldRecord(input_record.t_start, input_record.dt, out)


def run_chain(input_record, targets, constants, grid):
    """Feed the exit field of each target into the next."""
    record = input_record
    for target in targets:
        record = run_target(record, target, constants, grid)
    return record
