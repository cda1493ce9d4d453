"""Longitudinal car-following laws.

Human-driven vehicles follow the Krauss safe-velocity model (Krauss 1998):
the driver picks the highest speed that still allows stopping behind the
leader under a shared maximum deceleration and a reaction time ``tau``, then
loses a random fraction of the possible acceleration (driver imperfection
``sigma``).

Automated vehicles follow the Intelligent Driver Model (Treiber, Hennecke
and Helbing 2000) with a short desired time headway, which is what lets a
dense automated fleet carry more flow at the same speed.

All functions are pure; the engine supplies the synchronous previous-step
leader view and the per-step noise sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Below this gap the IDM interaction term is replaced by hard emergency
# braking to keep the update bounded near degenerate gaps.
EMERGENCY_GAP = 0.01


@dataclass(frozen=True)
class KraussParams:
    """Krauss model parameters (human-driven vehicles)."""

    accel: float = 2.6
    decel: float = 4.5
    tau: float = 1.0
    sigma: float = 0.5
    v_max: float = 50.0
    min_gap: float = 2.5
    length: float = 5.0

    def __post_init__(self) -> None:
        if self.accel <= 0 or self.decel <= 0:
            raise ValueError("accel and decel must be positive")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError(f"sigma must lie in [0, 1], got {self.sigma}")
        if self.min_gap < 0:
            raise ValueError("min_gap must be non-negative")
        if self.v_max <= 0 or self.length <= 0:
            raise ValueError("v_max and length must be positive")


@dataclass(frozen=True)
class IdmParams:
    """IDM parameters (automated vehicles).

    ``T`` is the desired time headway and ``s0`` the jam gap; the defaults
    encode an aggressive automated setting (T = 0.5 s) next to the human
    reaction time of 1.0 s in :class:`KraussParams`.
    """

    accel: float = 2.6
    decel: float = 4.5
    T: float = 0.5
    s0: float = 1.0
    delta: float = 4.0
    v_max: float = 50.0
    length: float = 5.0

    def __post_init__(self) -> None:
        if self.accel <= 0 or self.decel <= 0 or self.T <= 0 or self.s0 <= 0:
            raise ValueError("accel, decel, T and s0 must be positive")
        if self.delta < 1:
            raise ValueError(f"delta must be >= 1, got {self.delta}")
        if self.v_max <= 0 or self.length <= 0:
            raise ValueError("v_max and length must be positive")


@dataclass(frozen=True)
class LeaderView:
    """What a follower knows about its leader.

    ``gap`` is front bumper to rear bumper, i.e. net of vehicle lengths,
    and must be non-negative when a leader is present.
    """

    leader_speed: float
    gap: float
    present: bool = True


def krauss_safe_speed(v: float, leader: LeaderView, p: KraussParams) -> float:
    """Highest speed from which the follower can still avoid a collision.

    May be negative for very tight gaps; callers clamp at zero.
    """
    v_l = leader.leader_speed
    return v_l + (leader.gap - v_l * p.tau) / ((v + v_l) / (2.0 * p.decel) + p.tau)


def krauss_step(
    v: float,
    leader: LeaderView | None,
    v_limit: float,
    dt: float,
    noise_u: float,
    p: KraussParams,
) -> float:
    """One Krauss speed update.

    The desired speed is the minimum of free acceleration, the safe speed
    (when a leader is present), the road limit, and the vehicle cap; the
    driver then randomly undershoots it by up to ``sigma * accel * dt``.
    ``noise_u`` is a uniform sample in [0, 1] supplied by the caller so the
    update stays deterministic and order-independent.
    """
    v_des = min(v + p.accel * dt, v_limit, p.v_max)
    if leader is not None and leader.present:
        v_des = min(v_des, krauss_safe_speed(v, leader, p))
    return max(0.0, v_des - p.sigma * p.accel * dt * noise_u)


def idm_acceleration(
    v: float,
    delta_v: float,
    s: float,
    p: IdmParams,
    v0: float | None = None,
) -> float:
    """IDM acceleration for speed ``v``, closing speed ``delta_v``, gap ``s``.

    Free flow is expressed as ``s = inf`` with ``delta_v = 0``. ``v0``
    defaults to the vehicle cap; the engine passes the effective desired
    speed min(road limit, cap).
    """
    if s <= 0:
        raise ValueError(f"gap must be positive with a leader present, got {s}")
    if v0 is None:
        v0 = p.v_max
    s_star = p.s0 + max(0.0, v * p.T + v * delta_v / (2.0 * math.sqrt(p.accel * p.decel)))
    return p.accel * (1.0 - (v / v0) ** p.delta - (s_star / s) ** 2)


def idm_step(
    v: float,
    leader: LeaderView | None,
    v_limit: float,
    dt: float,
    p: IdmParams,
) -> float:
    """One explicit-Euler IDM speed update, clamped to [0, min(limit, cap)]."""
    v0 = min(v_limit, p.v_max)
    if leader is None or not leader.present:
        a = idm_acceleration(v, 0.0, math.inf, p, v0)
    elif leader.gap < EMERGENCY_GAP:
        a = -p.decel * 10.0
    else:
        a = idm_acceleration(v, v - leader.leader_speed, leader.gap, p, v0)
    return min(max(0.0, v + a * dt), v0)


def equilibrium_gap(v: float, p: IdmParams, v0: float | None = None) -> float:
    """Steady-state IDM gap at speed ``v``: the gap where acceleration is zero.

    Closed form of the model's fixed point; diverges as ``v`` approaches the
    desired speed ``v0``.
    """
    if v0 is None:
        v0 = p.v_max
    if not 0.0 <= v < v0:
        raise ValueError(f"need 0 <= v < v0, got v={v}, v0={v0}")
    return (p.s0 + v * p.T) / math.sqrt(1.0 - (v / v0) ** p.delta)
