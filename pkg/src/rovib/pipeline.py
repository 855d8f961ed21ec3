"""Run configuration and the assembled forward model.

A RunConfig carries everything needed to go from spectroscopic constants to
a sampled CARS trace: state selection (plus optional gamma_e/beta_e
overrides, since compilations often lack them), thermal ensemble settings,
the pump/Stokes pulse pair, the branch-ratio source, decay, and the time
grid.  Defaults reproduce a room-temperature nitrogen scan: 295 K, 2:1
even/odd spin weights, 130 fs pulses at 12500 and 10183 cm^-1, collisional
decay of 256 ps.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import dynamics, ensemble, excitation, molmodel, pulses

__all__ = ["ConfigError", "PulseConfig", "RunConfig", "ForwardModel"]


class ConfigError(ValueError):
    """Invalid run configuration; message names the offending field."""


@dataclass(frozen=True)
class PulseConfig:
    center_cm1: float
    fwhm_fs: float = 130.0
    chirp_fs2: float = 0.0
    delay_fs: float = 0.0
    amplitude: float = 1.0

    def to_pulse(self) -> pulses.Pulse:
        return pulses.Pulse(
            center_cm1=self.center_cm1,
            fwhm_fs=self.fwhm_fs,
            chirp_fs2=self.chirp_fs2,
            delay_fs=self.delay_fs,
            amplitude=self.amplitude,
        )


@dataclass(frozen=True)
class RunConfig:
    constants_db: str | None = None          # None: bundled database
    state: str = "N2_X"
    gamma_e_cm1: float | None = -2.6e-5      # retrieved value; table entry is absent
    beta_e_cm1: float | None = None
    temperature_K: float = 295.0
    spin_even: float = 2.0
    spin_odd: float = 1.0
    tail_tol: float = 1e-8
    v1: int = 1
    pump: PulseConfig = field(default_factory=lambda: PulseConfig(center_cm1=12500.0))
    stokes: PulseConfig = field(default_factory=lambda: PulseConfig(center_cm1=10183.0))
    branch_ratio_mode: str = "computed"       # "computed" | "fixed" | "q_only"
    branch_ratio_value: float | None = None   # used when mode == "fixed"
    a_perp_prime: float = 8.7
    delta_a_prime: float = 13.3
    tau_c_ps: float | None = 256.0
    t0_ps: float = 0.0
    t1_ps: float = 1100.0
    dt_ps: float = 0.5
    probe_fwhm_fs: float | None = None
    output_dir: str = "out"

    # -- validation ---------------------------------------------------------

    def validate(self) -> "RunConfig":
        try:
            molmodel.load_constants(self.state, self.constants_db)
        except (KeyError, FileNotFoundError) as exc:
            raise ConfigError(f"state/constants_db: {exc}") from exc
        if self.temperature_K <= 0:
            raise ConfigError("temperature_K: must be positive")
        if self.spin_even <= 0 or self.spin_odd <= 0:
            raise ConfigError("spin_even/spin_odd: must be positive")
        if not 0 < self.tail_tol < 1:
            raise ConfigError("tail_tol: must lie in (0, 1)")
        if self.v1 < 1:
            raise ConfigError("v1: must be a positive integer")
        for name, pc in (("pump", self.pump), ("stokes", self.stokes)):
            if pc.fwhm_fs <= 0:
                raise ConfigError(f"{name}.fwhm_fs: must be positive")
            if pc.center_cm1 <= 0:
                raise ConfigError(f"{name}.center_cm1: must be positive")
        if self.branch_ratio_mode not in ("computed", "fixed", "q_only"):
            raise ConfigError(
                "branch_ratio_mode: expected 'computed', 'fixed' or 'q_only'"
            )
        if self.branch_ratio_mode == "fixed":
            if self.branch_ratio_value is None or self.branch_ratio_value <= 0:
                raise ConfigError("branch_ratio_value: positive value required in fixed mode")
        elif self.branch_ratio_value is not None:
            raise ConfigError(
                "branch_ratio_value: only allowed with branch_ratio_mode='fixed'"
            )
        if self.tau_c_ps is not None and self.tau_c_ps <= 0:
            raise ConfigError("tau_c_ps: must be positive or null")
        if self.dt_ps <= 0:
            raise ConfigError("dt_ps: must be positive")
        if self.t1_ps <= self.t0_ps:
            raise ConfigError("t1_ps: must exceed t0_ps")
        if self.t0_ps < 0:
            raise ConfigError("t0_ps: must be nonnegative")
        if self.probe_fwhm_fs is not None and self.probe_fwhm_fs <= 0:
            raise ConfigError("probe_fwhm_fs: must be positive or null")
        return self

    # -- serialization ------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        for key in ("pump", "stokes"):
            if key in data and isinstance(data[key], dict):
                try:
                    data[key] = PulseConfig(**data[key])
                except TypeError as exc:
                    raise ConfigError(f"{key}: {exc}") from exc
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data).validate()

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)


class ForwardModel:
    """Config-bound pipeline: constants -> ensemble -> lines -> trace.

    The two-photon spectrum is computed once per instance; gamma_e and
    tau_c can be swapped per evaluation (that is what the fitter varies)
    without touching the pulse-side cache.
    """

    def __init__(self, cfg: RunConfig):
        cfg.validate()
        self.cfg = cfg
        base = molmodel.load_constants(cfg.state, cfg.constants_db)
        overrides = {}
        if cfg.gamma_e_cm1 is not None:
            overrides["gamma_e"] = cfg.gamma_e_cm1
        if cfg.beta_e_cm1 is not None:
            overrides["beta_e"] = cfg.beta_e_cm1
        self.constants = base.replace(**overrides) if overrides else base
        self.pump = cfg.pump.to_pulse()
        self.stokes = cfg.stokes.to_pulse()
        self._a2 = None

    # -- pieces --------------------------------------------------------------

    def branch_ratio(self) -> float:
        cfg = self.cfg
        if cfg.branch_ratio_mode == "fixed":
            return cfg.branch_ratio_value
        if cfg.branch_ratio_mode == "q_only":
            return math.inf
        return excitation.branching_ratio(
            excitation.PolarizabilityDerivatives(cfg.a_perp_prime, cfg.delta_a_prime)
        )

    def build_ensemble(self, constants=None) -> ensemble.ThermalEnsemble:
        c = constants if constants is not None else self.constants
        b0, _ = molmodel.rotational_constants(c, 0)
        return ensemble.build_ensemble(
            self.cfg.temperature_K, b0, self.cfg.spin_even, self.cfg.spin_odd, self.cfg.tail_tol
        )

    def two_photon(self) -> pulses.TwoPhotonSpectrum:
        """A2 on a grid spanning every line, cached."""
        if self._a2 is None:
            ens = self.build_ensemble()
            table = excitation.enumerate_lines(ens, self.constants, self.cfg.v1)
            nus = table.wavenumbers()
            grid = pulses.suggest_omega_grid(
                self.pump, self.stokes, float(nus.min()) - 30.0, float(nus.max()) + 30.0
            )
            self._a2 = pulses.two_photon_spectrum(self.pump, self.stokes, grid)
        return self._a2

    def line_table(
        self, gamma_e: float | None = None, beta_e: float | None = None, check: bool = True
    ) -> excitation.LineTable:
        c = self.constants
        overrides = {}
        if gamma_e is not None:
            overrides["gamma_e"] = gamma_e
        if beta_e is not None:
            overrides["beta_e"] = beta_e
        if overrides:
            c = c.replace(**overrides)
        ens = self.build_ensemble(c)
        table = excitation.enumerate_lines(ens, c, self.cfg.v1)
        tol = 1e-6 if check else None
        return excitation.assign_amplitudes(
            table, self.two_photon(), self.branch_ratio(), interp_check_tol=tol
        )

    def simulate(self, workers: int | None = None) -> dynamics.CoherenceTrace:
        cfg = self.cfg
        table = self.line_table()
        trace = dynamics.signal_trace(
            table,
            dynamics.DecayModel(cfg.tau_c_ps),
            cfg.t0_ps,
            cfg.t1_ps,
            cfg.dt_ps,
            probe_fwhm_fs=cfg.probe_fwhm_fs,
            workers=workers,
        )
        trace.metadata["pump"] = _pulse_summary(self.pump)
        trace.metadata["stokes"] = _pulse_summary(self.stokes)
        ratio = self.branch_ratio()
        trace.metadata["branch_amplitude_ratio"] = "inf" if math.isinf(ratio) else repr(ratio)
        return trace

    def characteristic_times(self) -> molmodel.CharacteristicTimes:
        spread = ensemble.thermal_J_spread(self.build_ensemble())
        return molmodel.characteristic_times(self.constants, self.cfg.v1, spread)


def _pulse_summary(p: pulses.Pulse) -> str:
    return (
        f"center={p.center_cm1!r} cm^-1 fwhm={p.fwhm_fs!r} fs "
        f"chirp={p.chirp_fs2!r} fs^2 delay={p.delay_fs!r} fs"
    )


def line_span_grid(model: ForwardModel) -> np.ndarray:
    """Convenience: the cached A2 grid of a model (building it if needed)."""
    return model.two_photon().grid_cm1
