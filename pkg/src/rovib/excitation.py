"""Raman line tables: O/Q/S enumeration, branch weighting, amplitudes.

Off-resonant Raman coupling through the bond-length derivative of the
polarizability drives J -> J (Q) via the isotropic part plus half the
anisotropic part, and J -> J +- 2 (S, O) via a quarter of the anisotropic
part; the 1/2 and 1/4 are the planar-rotor estimates of the cos^2(theta)
matrix elements, valid for J much larger than M_J.  Only the ratio

    N = (a_perp' + 1/2 da') / (1/4 da')

matters for relative line strengths; the common vibrational matrix element
sqrt(hbar / 2 m w01) is absorbed into the overall amplitude scale.  For N2
the static polarizability derivatives give N ~ 4.6, hence branch intensity
contributions of roughly 1 : 21 : 1 for O : Q : S after both the excitation
and the probing step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .ensemble import ThermalEnsemble
from .molmodel import SpectroscopicConstants, transition_wavenumber, vibrational_term
from .pulses import ResolutionError, TwoPhotonSpectrum

__all__ = [
    "PolarizabilityDerivatives",
    "N2_POLARIZABILITY",
    "RamanLine",
    "LineTable",
    "branching_ratio",
    "enumerate_lines",
    "assign_amplitudes",
    "write_lines_csv",
]

#: planar-rotor cos^2(theta) matrix elements
COS2_SAME_J = 0.5
COS2_J_PM2 = 0.25


@dataclass(frozen=True)
class PolarizabilityDerivatives:
    """Bond-length derivatives of the polarizability components.

    Units cancel in the branching ratio; values are conventionally quoted
    as (atomic units) / Re.  delta_a_prime = 0 means no anisotropy
    derivative and therefore no O/S coupling at all.
    """

    a_perp_prime: float
    delta_a_prime: float
    Re: float = 1.0


#: static-limit values for N2
N2_POLARIZABILITY = PolarizabilityDerivatives(a_perp_prime=8.7, delta_a_prime=13.3)


def branching_ratio(p: PolarizabilityDerivatives) -> float:
    """Q-branch to O/S-branch amplitude ratio.

    Returns math.inf when the anisotropy derivative vanishes (no O/S
    coupling); downstream amplitude assignment then simply zeroes the O and
    S lines instead of failing.
    """
    if p.delta_a_prime == 0.0:
        return math.inf
    return (p.a_perp_prime + COS2_SAME_J * p.delta_a_prime) / (
        COS2_J_PM2 * p.delta_a_prime
    )


@dataclass(frozen=True)
class RamanLine:
    branch: str        # "O", "Q" or "S"
    J_lower: int
    J_upper: int
    wavenumber_cm1: float
    amplitude: complex


@dataclass(frozen=True)
class LineTable:
    """Ordered Raman lines plus the rotating-frame reference wavenumber.

    nu_ref_cm1 is the pure vibrational gap G(v1) - G(0); coherence phases
    are accumulated relative to it.  Directly after enumerate_lines the
    amplitudes hold the bare thermal weights (the placeholder state);
    assign_amplitudes folds in the branch weighting and the two-photon
    envelope.
    """

    lines: tuple[RamanLine, ...]
    nu_ref_cm1: float
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.lines)

    def wavenumbers(self) -> np.ndarray:
        return np.array([ln.wavenumber_cm1 for ln in self.lines])

    def amplitudes(self) -> np.ndarray:
        return np.array([ln.amplitude for ln in self.lines], dtype=complex)

    def branches(self) -> np.ndarray:
        return np.array([ln.branch for ln in self.lines])


def enumerate_lines(
    ens: ThermalEnsemble, consts: SpectroscopicConstants, v1: int = 1
) -> LineTable:
    """All O/Q/S lines out of the populated J levels, weight placeholders only.

    Per J: one Q line, one S line, and (for J >= 2) one O line; the total
    count is 3 (J_max + 1) - 2.
    """
    lines = []
    for J in range(ens.J_max + 1):
        w = ens.weight(J)
        lines.append(
            RamanLine("Q", J, J, transition_wavenumber(consts, J, J, v1), complex(w))
        )
        lines.append(
            RamanLine("S", J, J + 2, transition_wavenumber(consts, J, J + 2, v1), complex(w))
        )
        if J >= 2:
            lines.append(
                RamanLine("O", J, J - 2, transition_wavenumber(consts, J, J - 2, v1), complex(w))
            )
    nu_ref = vibrational_term(consts, v1) - vibrational_term(consts, 0)
    meta = {
        "state": consts.label,
        "temperature_K": ens.temperature_K,
        "v1": v1,
        "J_max": ens.J_max,
        "amplitudes": "thermal-weight placeholders",
    }
    return LineTable(lines=tuple(lines), nu_ref_cm1=nu_ref, metadata=meta)


def assign_amplitudes(
    table: LineTable,
    a2: TwoPhotonSpectrum,
    ratio: float,
    *,
    interp_check_tol: float = 1e-6,
) -> LineTable:
    """Weight each line by branch factor and two-photon envelope.

    amplitude = thermal_weight * b * A2(nu_line), with b = 1 for Q lines and
    b = 1/ratio for O and S lines (b = 0 for an infinite ratio).  The input
    must be the placeholder table from enumerate_lines.

    A2 is linearly interpolated; a quadratic reinterpolation at the line
    positions must agree within ``interp_check_tol`` of the envelope peak,
    otherwise the supplied grid is too coarse.
    """
    if not math.isinf(ratio) and ratio == 0:
        raise ValueError("branch amplitude ratio must be nonzero")
    b_os = 0.0 if math.isinf(ratio) else 1.0 / ratio

    nus = table.wavenumbers()
    for ln in table.lines:
        if not (a2.grid_cm1[0] <= ln.wavenumber_cm1 <= a2.grid_cm1[-1]):
            raise ValueError(
                f"line {ln.branch}({ln.J_lower}) at {ln.wavenumber_cm1:.3f} cm^-1 "
                f"is outside the two-photon grid "
                f"[{a2.grid_cm1[0]:.3f}, {a2.grid_cm1[-1]:.3f}]"
            )
    env = a2(nus)
    _check_interpolation(a2, nus, env, interp_check_tol)

    new = []
    for ln, e in zip(table.lines, env):
        b = 1.0 if ln.branch == "Q" else b_os
        new.append(replace(ln, amplitude=ln.amplitude * b * e))
    meta = dict(table.metadata)
    meta["amplitudes"] = "weight * branch factor * two-photon envelope"
    meta["branch_amplitude_ratio"] = None if math.isinf(ratio) else ratio
    return LineTable(lines=tuple(new), nu_ref_cm1=table.nu_ref_cm1, metadata=meta)


def _check_interpolation(a2, nus, linear_vals, tol):
    """Linear vs quadratic interpolation agreement at the line positions."""
    from scipy.interpolate import interp1d

    if len(a2.grid_cm1) < 3:
        raise ResolutionError("two-photon grid has fewer than 3 points")
    quad_re = interp1d(a2.grid_cm1, a2.amplitude.real, kind="quadratic")
    quad_im = interp1d(a2.grid_cm1, a2.amplitude.imag, kind="quadratic")
    quad = quad_re(nus) + 1j * quad_im(nus)
    scale = np.abs(a2.amplitude).max()
    if scale == 0:
        return
    err = np.abs(quad - linear_vals).max() / scale
    if err > tol:
        raise ResolutionError(
            f"two-photon grid too coarse for linear interpolation at the lines: "
            f"linear vs quadratic differ by {err:.2e} (> {tol:.0e}) of the peak"
        )


def write_lines_csv(table: LineTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("branch,J_lower,J_upper,wavenumber_cm1,re_amplitude,im_amplitude\n")
        for ln in table.lines:
            fh.write(
                f"{ln.branch},{ln.J_lower},{ln.J_upper},"
                f"{ln.wavenumber_cm1!r},{ln.amplitude.real!r},{ln.amplitude.imag!r}\n"
            )
