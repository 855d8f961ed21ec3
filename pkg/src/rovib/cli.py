"""Command-line front end.

Subcommands: constants, spectrum, husimi, trace, revivals, fit, branching.
Configuration comes from a JSON file (all fields optional; defaults are the
room-temperature nitrogen experiment).  Outputs are CSV/JSON artifacts plus
self-contained matplotlib plot scripts that read the CSVs, so the package
itself needs no graphics stack.

Exit codes: 0 success, 2 configuration error, 3 numerical or validation
error.  ROVIB_THREADS caps any internal worker pool.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import analysis, dynamics, excitation, fitting, molmodel, pulses
from .pipeline import ConfigError, ForwardModel, RunConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig().validate()
    return RunConfig.from_json(path)


def _outdir(cfg: RunConfig, override: str | None) -> Path:
    out = Path(override) if override else Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_metadata(path: Path, cfg: RunConfig, derived: dict) -> None:
    payload = {"config": cfg.to_dict(), "derived": derived, "generated": _timestamp()}
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommands

def cmd_constants(args) -> int:
    c = molmodel.load_constants(args.state, args.db)
    overrides = {}
    if args.gamma_e is not None:
        overrides["gamma_e"] = args.gamma_e
    if args.beta_e is not None:
        overrides["beta_e"] = args.beta_e
    if overrides:
        c = c.replace(**overrides)
    print(f"state: {c.label}")
    for name, value in c.as_dict().items():
        shown = "n/a" if value is None else repr(value)
        print(f"  {name:8s} = {shown} cm^-1")
    b0, d0 = molmodel.rotational_constants(c, 0)
    b1, d1 = molmodel.rotational_constants(c, args.v1)
    gap = molmodel.vibrational_term(c, args.v1) - molmodel.vibrational_term(c, 0)
    times = molmodel.characteristic_times(c, args.v1)
    print(f"B_0 = {b0:.7f} cm^-1   D_0 = {d0:.3e} cm^-1")
    print(f"B_{args.v1} = {b1:.7f} cm^-1   D_{args.v1} = {d1:.3e} cm^-1")
    print(f"G({args.v1}) - G(0) = {gap:.4f} cm^-1")
    if math.isinf(times.revival_ps):
        print("revival time: unbounded (B_v1 equals B_0, no rephasing)")
    else:
        print(f"revival time    T_RoVib = {times.revival_ps:.1f} ps")
    print(f"rotational time T_rot   = {times.rotational_ps:.3f} ps")
    return EXIT_OK


def cmd_branching(args) -> int:
    p = excitation.PolarizabilityDerivatives(args.a_perp_prime, args.delta_a_prime)
    ratio = excitation.branching_ratio(p)
    if math.isinf(ratio):
        print("no O/S coupling (anisotropy derivative is zero); amplitude ratio infinite")
        return EXIT_OK
    print(f"Q : O/S amplitude ratio  N   = {ratio:.4f}")
    print(f"intensity ratio          N^2 = {ratio**2:.4f}")
    print(f"O : Q : S ~ 1 : {ratio**2:.1f} : 1")
    return EXIT_OK


def cmd_spectrum(args) -> int:
    cfg = _load_config(args.config)
    out = _outdir(cfg, args.output)
    model = ForwardModel(cfg)
    spec = model.two_photon()
    pulses.write_spectrum_csv(spec, out / "two_photon.csv")
    (out / "plot_two_photon.py").write_text(_PLOT_SPECTRUM, encoding="utf-8")
    fwhm = spec.intensity_fwhm_cm1()
    _write_metadata(
        out / "spectrum_metadata.json",
        cfg,
        {"intensity_fwhm_cm1": fwhm, "peak_cm1": spec.peak_cm1()},
    )
    print(f"two-photon spectrum written to {out / 'two_photon.csv'}")
    print(f"|A2|^2 FWHM = {fwhm:.2f} cm^-1, peak at {spec.peak_cm1():.2f} cm^-1")
    return EXIT_OK


def cmd_husimi(args) -> int:
    cfg = _load_config(args.config)
    out = _outdir(cfg, args.output)
    model = ForwardModel(cfg)
    window = args.window_fwhm
    hm_pulses = pulses.husimi_map([model.pump, model.stokes], window_fwhm_fs=window)
    pulses.write_husimi_csv(hm_pulses, out / "husimi_pulses.csv")
    spec = model.two_photon()
    window_spec = window if window is not None else min(model.pump.fwhm_fs, model.stokes.fwhm_fs)
    hm_spec = pulses.husimi_map(spec, window_fwhm_fs=window_spec)
    pulses.write_husimi_csv(hm_spec, out / "husimi_spectrum.csv")
    for name in ("husimi_pulses", "husimi_spectrum"):
        (out / f"plot_{name}.py").write_text(_PLOT_HUSIMI.format(csv=f"{name}.csv"),
                                             encoding="utf-8")
    _write_metadata(
        out / "husimi_metadata.json",
        cfg,
        {
            "window_fwhm_fs_pulses": hm_pulses.window_fwhm_fs,
            "window_fwhm_fs_spectrum": hm_spec.window_fwhm_fs,
            "window_note": "minimum-uncertainty Gaussian; default matches the "
                           "shortest transform-limited pulse duration",
        },
    )
    print(f"husimi maps written to {out}")
    return EXIT_OK


def cmd_trace(args) -> int:
    cfg = _load_config(args.config)
    out = _outdir(cfg, args.output)
    model = ForwardModel(cfg)
    trace = model.simulate(workers=args.workers)
    dynamics.write_trace_csv(trace, out / "trace.csv", timestamp=_timestamp())
    (out / "plot_trace.py").write_text(_PLOT_TRACE, encoding="utf-8")
    times = model.characteristic_times()
    derived = {
        "revival_time_ps": times.revival_ps,
        "rotational_time_ps": times.rotational_ps,
        "dephasing_estimate_ps": times.dephasing_estimate_ps,
        "n_lines": len(model.line_table(check=False)),
        "nu_ref_cm1": trace.nu_ref_cm1,
    }
    if "aliasing_warning" in trace.metadata:
        derived["aliasing_warning"] = trace.metadata["aliasing_warning"]
    _write_metadata(out / "trace_metadata.json", cfg, derived)
    excitation.write_lines_csv(model.line_table(check=False), out / "lines.csv")
    print(f"trace written to {out / 'trace.csv'} ({len(trace)} points)")
    if "aliasing_warning" in trace.metadata:
        print(f"warning: {trace.metadata['aliasing_warning']}", file=sys.stderr)
    return EXIT_OK


def cmd_revivals(args) -> int:
    cfg = _load_config(args.config)
    out = _outdir(cfg, args.output)
    model = ForwardModel(cfg)
    if args.trace:
        trace = dynamics.read_trace_csv(args.trace)
    else:
        trace = model.simulate()
    times = model.characteristic_times()
    if math.isinf(times.revival_ps):
        print("no revival (B_v1 equals B_0)", file=sys.stderr)
        return EXIT_NUMERICAL
    report = analysis.revival_report(trace, times.revival_ps, q_max=args.q_max)
    (out / "revivals.json").write_text(report.to_json() + "\n", encoding="utf-8")
    print(report.table())
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _load_config(args.config)
    out = _outdir(cfg, args.output)
    times, signal = fitting.read_fit_data(args.data)
    params = fitting.default_parameters(
        gamma_e=args.init_gamma_e,
        tau_c=args.init_tau_c,
        with_beta_e=args.with_beta_e,
    )
    if args.free:
        wanted = set(args.free.split(","))
        unknown = wanted - set(params)
        if unknown:
            raise ConfigError(f"--free: unknown parameters {sorted(unknown)}")
        params = {
            n: fitting.FitParameter(p.name, p.value, p.lower, p.upper, free=(n in wanted))
            for n, p in params.items()
        }
    problem = fitting.FitProblem(times_ps=times, signal=signal, config=cfg, parameters=params)
    result = fitting.fit(problem, seed=args.seed, restarts=args.restarts)
    (out / "fit_result.json").write_text(result.to_json() + "\n", encoding="utf-8")
    print(result.to_json())
    if not result.identifiable:
        print("data flagged non-identifiable (constant signal)", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="rovib",
        description="Ro-vibrational CARS trace simulation and parameter retrieval",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="print constants and derived time scales")
    p.add_argument("state")
    p.add_argument("--db", default=None, help="constants database JSON (default: bundled)")
    p.add_argument("--gamma-e", type=float, default=None, dest="gamma_e")
    p.add_argument("--beta-e", type=float, default=None, dest="beta_e")
    p.add_argument("--v1", type=int, default=1)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("branching", help="Q to O/S amplitude and intensity ratios")
    p.add_argument("--a-perp-prime", type=float, default=8.7)
    p.add_argument("--delta-a-prime", type=float, default=13.3)
    p.set_defaults(func=cmd_branching)

    for name, fn, extra in (
        ("spectrum", cmd_spectrum, ()),
        ("husimi", cmd_husimi, ("window",)),
        ("trace", cmd_trace, ("workers",)),
        ("revivals", cmd_revivals, ("trace", "qmax")),
        ("fit", cmd_fit, ("fit",)),
    ):
        p = sub.add_parser(name, help=f"run the {name} pipeline")
        p.add_argument("--config", default=None, help="JSON run configuration")
        p.add_argument("-o", "--output", default=None, help="output directory override")
        if "window" in extra:
            p.add_argument("--window-fwhm", type=float, default=None, dest="window_fwhm")
        if "workers" in extra:
            p.add_argument("--workers", type=int, default=None)
        if "trace" in extra:
            p.add_argument("--trace", default=None, help="analyze an existing trace CSV")
        if "qmax" in extra:
            p.add_argument("--q-max", type=int, default=9, dest="q_max")
        if "fit" in extra:
            p.add_argument("--data", required=True, help="two-column CSV (time_ps, signal)")
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--restarts", type=int, default=3)
            p.add_argument("--free", default=None,
                           help="comma list of free parameters (default: all four)")
            p.add_argument("--init-gamma-e", type=float, default=0.0, dest="init_gamma_e")
            p.add_argument("--init-tau-c", type=float, default=150.0, dest="init_tau_c")
            p.add_argument("--with-beta-e", action="store_true", dest="with_beta_e")
        p.set_defaults(func=fn)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (pulses.ResolutionError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"numerical/validation error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


# ---------------------------------------------------------------------------
# emitted plot scripts (read the CSVs; no dependency from the package itself)

_PLOT_SPECTRUM = """\
import matplotlib.pyplot as plt
import numpy as np

data = np.genfromtxt("two_photon.csv", delimiter=",", names=True)
fig, ax = plt.subplots(figsize=(7, 4))
ax.plot(data["omega_cm1"], data["intensity"] / data["intensity"].max())
ax.set_xlabel("Raman detuning (cm$^{-1}$)")
ax.set_ylabel("normalized $|A_2|^2$")
ax.set_title("two-photon spectrum")
fig.tight_layout()
fig.savefig("two_photon.png", dpi=150)
print("wrote two_photon.png")
"""

_PLOT_TRACE = """\
import matplotlib.pyplot as plt
import numpy as np

rows = np.genfromtxt("trace.csv", delimiter=",", names=True, comments="#")
fig, ax = plt.subplots(figsize=(9, 4))
ax.plot(rows["time_ps"], rows["signal"] / rows["signal"].max(), lw=0.6)
ax.set_xlabel("probe delay (ps)")
ax.set_ylabel("normalized CARS signal")
ax.set_yscale("log")
fig.tight_layout()
fig.savefig("trace.png", dpi=150)
print("wrote trace.png")
"""

_PLOT_HUSIMI = """\
import matplotlib.pyplot as plt
import numpy as np

raw = np.genfromtxt("{csv}", delimiter=",")
times, freqs, z = raw[0, 1:], raw[1:, 0], raw[1:, 1:]
fig, ax = plt.subplots(figsize=(7, 5))
pc = ax.pcolormesh(times, freqs, z, shading="auto", cmap="magma")
fig.colorbar(pc, ax=ax, label="intensity")
ax.set_xlabel("time (fs)")
ax.set_ylabel("frequency (cm$^{-1}$)")
fig.tight_layout()
fig.savefig("{csv}".replace(".csv", ".png"), dpi=150)
print("wrote", "{csv}".replace(".csv", ".png"))
"""


if __name__ == "__main__":
    raise SystemExit(main())
