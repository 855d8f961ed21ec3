"""Thermal rotational populations with nuclear-spin alternation.

Weights follow the rigid-rotor Boltzmann form on B_0,

    w(J) ~ g_J (2J+1) exp(-hc B_0 J(J+1) / k T),

with g_J alternating between the even-J and odd-J spin-isomer weights
(2:1 for 14N2, heavier weight on even J).  The (2J+1) factor accounts for
the M_J degeneracy; no per-M_J bookkeeping happens anywhere downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .units import HC_OVER_K_CM_K

__all__ = ["ThermalEnsemble", "build_ensemble", "thermal_J_spread", "write_ensemble_csv"]

#: never populate J above this, regardless of temperature
J_HARD_CAP = 200


@dataclass(frozen=True)
class ThermalEnsemble:
    """Normalized rotational populations for J = 0 .. J_max."""

    temperature_K: float
    B0_cm1: float
    spin_even: float
    spin_odd: float
    J_max: int
    weights: np.ndarray = field(repr=False)  # shape (J_max + 1,), sums to 1

    def weight(self, J: int) -> float:
        return float(self.weights[J])

    @property
    def Js(self) -> np.ndarray:
        return np.arange(self.J_max + 1)


def build_ensemble(
    temperature_K: float,
    B0_cm1: float,
    spin_even: float = 2.0,
    spin_odd: float = 1.0,
    tail_tol: float = 1e-8,
) -> ThermalEnsemble:
    """Build the thermal ensemble, truncated once the neglected tail is tiny.

    J_max is the smallest J for which the summed weight beyond it is below
    ``tail_tol`` of the total (evaluated up to a hard cap of J = 200, far
    beyond any realistic temperature for a light diatomic).
    """
    if temperature_K <= 0:
        raise ValueError("temperature must be positive (use a small value for the T -> 0 limit)")
    if B0_cm1 <= 0:
        raise ValueError("B0 must be positive")
    if spin_even <= 0 or spin_odd <= 0:
        raise ValueError("spin statistical weights must be positive")
    if not 0.0 < tail_tol < 1.0:
        raise ValueError("tail_tol must lie in (0, 1)")

    J = np.arange(J_HARD_CAP + 1)
    g = np.where(J % 2 == 0, spin_even, spin_odd)
    raw = g * (2 * J + 1) * np.exp(-HC_OVER_K_CM_K * B0_cm1 * J * (J + 1) / temperature_K)
    total = raw.sum()
    tail = total - np.cumsum(raw)
    below = np.nonzero(tail / total < tail_tol)[0]
    J_max = int(below[0]) if below.size else J_HARD_CAP

    w = raw[: J_max + 1]
    w = w / w.sum()
    return ThermalEnsemble(
        temperature_K=temperature_K,
        B0_cm1=B0_cm1,
        spin_even=spin_even,
        spin_odd=spin_odd,
        J_max=J_max,
        weights=w,
    )


def thermal_J_spread(ens: ThermalEnsemble) -> float:
    """Population-weighted standard deviation of J.

    This is the Delta-J fed to the dephasing-time estimate.  The standard
    deviation (not a full width) is the convention used throughout.
    """
    j = ens.Js
    mean = float(np.dot(ens.weights, j))
    var = float(np.dot(ens.weights, (j - mean) ** 2))
    return np.sqrt(var)


def write_ensemble_csv(ens: ThermalEnsemble, path) -> None:
    """Dump (J, weight) rows."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("J,weight\n")
        for J, w in zip(ens.Js, ens.weights):
            fh.write(f"{J},{w!r}\n")
