"""Compliant ground-reaction model: spring-damper normal force plus
velocity-dependent tangential friction with a static-to-Coulomb transition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GroundParams:
    """Ground contact coefficients.

    k1/k2 are the normal spring and damper; mu_c, mu_s, mu_v the Coulomb,
    static and viscous friction coefficients; v_s the transition velocity
    between the static and Coulomb regimes; v_eps the width of the tanh
    regularization replacing sgn (raw sgn chatters at the simulation step).
    """

    k1: float = 2.0e4
    k2: float = 150.0
    mu_c: float = 0.4
    mu_s: float = 0.6
    mu_v: float = 0.1
    v_s: float = 0.05
    v_eps: float = 1e-3

    def __post_init__(self):
        if self.k1 <= 0.0:
            raise ValueError("k1 must be > 0")
        if self.k2 < 0.0:
            raise ValueError("k2 must be >= 0")
        if not (self.mu_s >= self.mu_c >= 0.0):
            raise ValueError("need mu_s >= mu_c >= 0")
        if self.mu_v < 0.0:
            raise ValueError("mu_v must be >= 0")
        if self.v_s <= 0.0:
            raise ValueError("v_s must be > 0")
        if self.v_eps <= 0.0:
            raise ValueError("v_eps must be > 0")


@dataclass(frozen=True)
class ContactQuery:
    """World-frame position and velocity of a single contact point."""

    p: np.ndarray
    pdot: np.ndarray


def stribeck(params: GroundParams, v) -> np.ndarray:
    """Friction coefficient as a function of tangential speed.

    Equals mu_s at rest and decays to mu_c as |v| grows past v_s.
    """
    v = np.asarray(v, dtype=float)
    return params.mu_c - (params.mu_c - params.mu_s) * np.exp(-(v * v) / (params.v_s**2))


def ground_reaction(params: GroundParams, p, pdot) -> np.ndarray:
    """Ground reaction force at one or more contact points.

    `p` and `pdot` are (..., 3) world positions and velocities. Points with
    p_z > 0 feel nothing. Below ground the normal force is -k1*p_z - k2*pdot_z
    clamped to be non-adhesive, and each tangential axis gets
    -s(v_i)*F_z*tanh(v_i/v_eps) - mu_v*v_i.
    """
    p = np.asarray(p, dtype=float)
    pdot = np.asarray(pdot, dtype=float)
    if p.shape != pdot.shape or p.shape[-1] != 3:
        raise ValueError("p and pdot must both have shape (..., 3)")
    pz = p[..., 2]
    vz = pdot[..., 2]
    in_contact = pz <= 0.0
    fz = np.where(in_contact, -params.k1 * pz - params.k2 * vz, 0.0)
    fz = np.maximum(fz, 0.0)  # ground cannot pull during separation
    out = np.zeros_like(p)
    for i in range(2):
        vi = pdot[..., i]
        s = stribeck(params, vi)
        out[..., i] = np.where(
            in_contact, -s * fz * np.tanh(vi / params.v_eps) - params.mu_v * vi, 0.0
        )
    # the viscous term also vanishes out of contact; tangential force only
    # exists while the normal model is engaged
    out[..., 2] = fz
    return out


def ground_reaction_query(params: GroundParams, query: ContactQuery) -> np.ndarray:
    return ground_reaction(params, query.p, query.pdot)
