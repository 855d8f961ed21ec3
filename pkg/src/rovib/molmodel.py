"""Ro-vibrational term values and characteristic time scales of a diatomic.

The energy model is the usual truncated Dunham form,

    G(v)    = we (v+1/2) - wexe (v+1/2)^2 + weye (v+1/2)^3
    F(v, J) = B_v J(J+1) - D_v J^2 (J+1)^2
    B_v     = Be - alpha_e (v+1/2) + gamma_e (v+1/2)^2
    D_v     = De + beta_e (v+1/2)

with every constant in cm^-1.  ``gamma_e`` and ``beta_e`` are frequently
missing from compilations; absent values behave exactly like zero but stay
independently settable so they can be fitted.

Electronic term origins (Te) are stored for bookkeeping only and never enter
energy differences within a single electronic state.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from importlib import resources

from .units import C_CM_PER_PS

__all__ = [
    "SpectroscopicConstants",
    "RoVibLevel",
    "CharacteristicTimes",
    "vibrational_term",
    "rotational_constants",
    "rotational_term",
    "term_value",
    "level",
    "transition_wavenumber",
    "characteristic_times",
    "load_constants",
    "available_states",
]

#: nine constant fields stored per electronic state in the JSON database
CONSTANT_FIELDS = ("Te", "we", "wexe", "weye", "Be", "alpha_e", "gamma_e", "De", "beta_e")


@dataclass(frozen=True)
class SpectroscopicConstants:
    """Dunham-style constants of one electronic state, all in cm^-1.

    ``gamma_e`` and ``beta_e`` may be None (not available); they are treated
    as zero wherever they enter an evaluation.
    """

    label: str
    Te: float = 0.0
    we: float = 0.0
    wexe: float = 0.0
    weye: float = 0.0
    Be: float = 0.0
    alpha_e: float = 0.0
    gamma_e: float | None = None
    De: float = 0.0
    beta_e: float | None = None

    def replace(self, **kwargs) -> "SpectroscopicConstants":
        """Copy with selected fields overridden (used to set a fitted gamma_e)."""
        return dataclasses.replace(self, **kwargs)

    def as_dict(self) -> dict:
        return {f: getattr(self, f) for f in CONSTANT_FIELDS}


@dataclass(frozen=True)
class RoVibLevel:
    v: int
    J: int
    energy_cm1: float  # G(v) + F(v, J), term origin excluded


def _zero_if_none(x: float | None) -> float:
    return 0.0 if x is None else x


def vibrational_term(c: SpectroscopicConstants, v: int) -> float:
    """Vibrational term value G(v) in cm^-1 (v >= 0)."""
    x = v + 0.5
    return c.we * x - c.wexe * x**2 + c.weye * x**3


def rotational_constants(c: SpectroscopicConstants, v: int) -> tuple[float, float]:
    """Effective rotational constants (B_v, D_v) in cm^-1 for level v."""
    x = v + 0.5
    b_v = c.Be - c.alpha_e * x + _zero_if_none(c.gamma_e) * x**2
    d_v = c.De + _zero_if_none(c.beta_e) * x
    return b_v, d_v


def rotational_term(c: SpectroscopicConstants, v: int, J: int) -> float:
    """Rotational term value F(v, J) in cm^-1."""
    b_v, d_v = rotational_constants(c, v)
    x = J * (J + 1)
    return b_v * x - d_v * x * x


def term_value(c: SpectroscopicConstants, v: int, J: int) -> float:
    """G(v) + F(v, J) in cm^-1, without the electronic term origin."""
    return vibrational_term(c, v) + rotational_term(c, v, J)


def level(c: SpectroscopicConstants, v: int, J: int) -> RoVibLevel:
    return RoVibLevel(v=v, J=J, energy_cm1=term_value(c, v, J))


def transition_wavenumber(
    c: SpectroscopicConstants, J_lower: int, J_upper: int, v1: int = 1
) -> float:
    """Raman transition wavenumber (v=0, J_lower) -> (v=v1, J_upper) in cm^-1.

    Only J_upper in {J_lower - 2, J_lower, J_lower + 2} is meaningful here
    (O, Q, S branches).  An O-branch request from J_lower < 2 lands on a
    negative J_upper and is rejected.
    """
    if J_upper < 0:
        raise ValueError(
            f"no level with J={J_upper}: O-branch transitions need J_lower >= 2"
        )
    if J_upper - J_lower not in (-2, 0, 2):
        raise ValueError(
            f"J_lower={J_lower} -> J_upper={J_upper} is not an O, Q or S branch transition"
        )
    return term_value(c, v1, J_upper) - term_value(c, 0, J_lower)


@dataclass(frozen=True)
class CharacteristicTimes:
    """Time scales of the coherence dynamics, in picoseconds.

    ``dephasing_estimate_ps`` is an order-of-magnitude number only (revival
    time divided by the squared thermal J spread), not a fitted quantity.
    """

    revival_ps: float          # math.inf when B_v1 == B_0 (no rephasing)
    rotational_ps: float
    dephasing_estimate_ps: float


def characteristic_times(
    c: SpectroscopicConstants, v1: int = 1, thermal_J_spread: float = 1.0
) -> CharacteristicTimes:
    """Revival, rotational-recurrence and dephasing-estimate times.

    revival_ps    = 1 / (2 c |B_v1 - B_0|)
    rotational_ps = 1 / (2 c B_0)
    dephasing     ~ revival_ps / thermal_J_spread^2
    """
    if thermal_J_spread <= 0:
        raise ValueError("thermal_J_spread must be positive")
    b0, _ = rotational_constants(c, 0)
    b1, _ = rotational_constants(c, v1)
    if b1 == b0:
        revival = math.inf
    else:
        revival = 1.0 / (2.0 * C_CM_PER_PS * abs(b1 - b0))
    rotational = 1.0 / (2.0 * C_CM_PER_PS * b0)
    return CharacteristicTimes(
        revival_ps=revival,
        rotational_ps=rotational,
        dephasing_estimate_ps=revival / thermal_J_spread**2,
    )


# ---------------------------------------------------------------------------
# constants database (JSON keyed by state label, null for unavailable values)

def _builtin_db_text() -> str:
    return resources.files("rovib.data").joinpath("diatomic_constants.json").read_text()


def load_constants(label: str, path: str | None = None) -> SpectroscopicConstants:
    """Load one state's constants from a JSON database.

    ``path=None`` uses the bundled database (currently the two nitrogen
    states).  Unavailable entries are stored as null and come back as None.
    """
    if path is None:
        db = json.loads(_builtin_db_text())
    else:
        with open(path, encoding="utf-8") as fh:
            db = json.load(fh)
    if label not in db:
        raise KeyError(f"unknown state label {label!r}; available: {sorted(db)}")
    row = db[label]
    unknown = set(row) - set(CONSTANT_FIELDS)
    if unknown:
        raise ValueError(f"unexpected fields for {label!r}: {sorted(unknown)}")
    return SpectroscopicConstants(label=label, **row)


def available_states(path: str | None = None) -> list[str]:
    if path is None:
        return sorted(json.loads(_builtin_db_text()))
    with open(path, encoding="utf-8") as fh:
        return sorted(json.load(fh))
