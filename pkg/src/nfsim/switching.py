"""Magnetic inversion schedules and temporal node detection.

A schedule is a list of inversion instants t_k plus a transition duration d.
The magnetization profile is the product of tanh steps,

    M(t) = prod_k [ -tanh((t - t_k) / (0.25 d)) ],

so it sits at +1 before the first switch and flips sign at each t_k.
"""

from dataclasses import dataclass
import warnings

import numpy as np
from scipy.integrate import cumulative_simpson, quad


class ScheduleOverlapWarning(UserWarning):
    """Switches are close enough that tanh transitions start to overlap."""


@dataclass(frozen=True)
class SwitchSchedule:
    """Ordered inversion times (ns) and transition duration d (ns)."""

    switch_times: tuple = ()
    duration_d: float = 2.0

    def __post_init__(self):
        times = tuple(float(t) for t in self.switch_times)
        object.__setattr__(self, "switch_times", times)
        object.__setattr__(self, "duration_d", float(self.duration_d))
        if self.duration_d <= 0:
            raise ValueError("duration_d must be positive")
        for a, b in zip(times, times[1:]):
            if b <= a:
                raise ValueError("switch_times must be strictly increasing")
            if b - a < self.duration_d:
                raise ValueError(
                    f"switches at {a} and {b} overlap badly (gap < d)"
                )
            if b - a < 3.0 * self.duration_d:
                # product form distorts a little when transitions overlap;
                # tolerated because node spacing pi/Delta can be < 3d
                warnings.warn(
                    f"switch gap {b - a:.3g} ns < 3 d, transitions overlap",
                    ScheduleOverlapWarning,
                    stacklevel=2,
                )

    @property
    def n_switches(self):
        return len(self.switch_times)


def profile_value(schedule, t):
    """Evaluate M(t).  Accepts a scalar or an array of times."""
    t = np.asarray(t, dtype=float)
    m = np.ones_like(t)
    scale = 0.25 * schedule.duration_d
    for tk in schedule.switch_times:
        m = m * (-np.tanh((t - tk) / scale))
    if m.ndim == 0:
        return float(m)
    return m


def phase_integral(schedule, t):
    """Phi(t) = integral of M from 0 to t.

    Scalars and arrays are both accepted; arrays must be uniformly spaced
    and start at 0 (the use case is the simulation time grid).  An empty
    schedule returns t exactly.
    """
    t_arr = np.asarray(t, dtype=float)
    if not schedule.switch_times:
        return float(t_arr) if t_arr.ndim == 0 else t_arr.copy()

    if t_arr.ndim == 0:
        tf = float(t_arr)
        if tf < 0:
            raise ValueError("phase_integral requires t >= 0")
        if tf == 0.0:
            return 0.0
        pts = [tk for tk in schedule.switch_times if 0.0 < tk < tf]
        val, _ = quad(
            lambda u: profile_value(schedule, u),
            0.0,
            tf,
            points=pts or None,
            limit=200,
        )
        return float(val)

    if t_arr.size < 2:
        return np.zeros_like(t_arr)
    dt = t_arr[1] - t_arr[0]
    if not np.allclose(np.diff(t_arr), dt, rtol=1e-9, atol=1e-12):
        raise ValueError("array input to phase_integral must be uniform")
    # integrate on a refined grid so the tanh transitions are well resolved,
    # then subsample back to the caller's grid
    refine = 8
    fine = t_arr[0] + np.arange((t_arr.size - 1) * refine + 1) * (dt / refine)
    m_fine = profile_value(schedule, fine)
    phi_fine = cumulative_simpson(m_fine, dx=dt / refine, initial=0.0)
    phi = phi_fine[::refine]
    if t_arr[0] != 0.0:
        phi = phi + phase_integral(schedule, float(t_arr[0]))
    return phi


def make_type_schedules(type_tag, t1, tau_d=0.0, d=2.0):
    """Build the (target 1, target 2) schedule pair for switching types 1-4.

    Type 1 inverts both fields at t1, type 2 only the upstream field,
    type 3 only the downstream field, type 4 both with delay tau_d.
    """
    if t1 <= 0:
        raise ValueError("t1 must be positive")
    if type_tag == 1:
        return SwitchSchedule((t1,), d), SwitchSchedule((t1,), d)
    if type_tag == 2:
        return SwitchSchedule((t1,), d), SwitchSchedule((), d)
    if type_tag == 3:
        return SwitchSchedule((), d), SwitchSchedule((t1,), d)
    if type_tag == 4:
        if t1 + tau_d <= 0:
            raise ValueError("t1 + tau_d must be positive")
        return SwitchSchedule((t1,), d), SwitchSchedule((t1 + tau_d,), d)
    raise ValueError(f"unknown switching type {type_tag!r}")


def detect_nodes(field, t_min):
    """Find temporal nodes (local minima of |field|^2) after t_min.

    Each discrete minimum is refined by a parabola through the three
    surrounding intensity samples.  Returns a list of times in ns; shallow
    minima are reported too, beat nodes need not be exact zeros.
    """
    samples = np.asarray(field.samples)
    if samples.size < 3:
        return []
    intensity = np.abs(samples) ** 2
    dt = field.dt
    t0 = field.t_start
    i0 = max(1, int(np.ceil((t_min - t0) / dt)) + 1)
    nodes = []
    for i in range(i0, samples.size - 1):
        if intensity[i] < intensity[i - 1] and intensity[i] < intensity[i + 1]:
            d2 = intensity[i - 1] - 2.0 * intensity[i] + intensity[i + 1]
            off = 0.5 * (intensity[i - 1] - intensity[i + 1]) / d2 if d2 > 0 else 0.0
            nodes.append(t0 + (i + off) * dt)
    return nodes


def node_schedule(nodes, n_switches, d=2.0):
    """Schedule that inverts at each node except the first.

    Takes nodes[1] .. nodes[n_switches] from a sorted node list.
    """
    nodes = list(nodes)
    if n_switches < 0:
        raise ValueError("n_switches must be >= 0")
    if n_switches > len(nodes) - 1:
        raise ValueError(
            f"need {n_switches + 1} nodes for {n_switches} switches, "
            f"have {len(nodes)}"
        )
    return SwitchSchedule(tuple(nodes[1 : n_switches + 1]), d)


def filter_node_pairs(nodes, min_gap):
    """Drop both members of adjacent node pairs closer than min_gap.

    Near a zero of the slow multiple-scattering envelope the beat minima
    bunch into close pairs; inverting there desynchronizes the accumulated
    phase, while the envelope's own sign change already does the flip.
    Skipping the whole pair keeps the switched lobes in phase.
    """
    nodes = list(nodes)
    kept = []
    k = 0
    while k < len(nodes):
        if k + 1 < len(nodes) and nodes[k + 1] - nodes[k] < min_gap:
            k += 2
        else:
            kept.append(nodes[k])
            k += 1
    return kept
