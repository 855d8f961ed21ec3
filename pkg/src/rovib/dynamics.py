"""Time evolution of the vibrational coherence as a phased line sum.

Each Raman line contributes amplitude * exp(-i 2 pi c (nu - nu_ref) t) in a
rotating frame at the pure vibrational gap nu_ref, so picosecond sampling
suffices for nanosecond scans; the optical carrier never enters any
observable.  Collisional decay multiplies the summed coherence amplitude by
exp(-t / tau_c), hence the intensity by exp(-2 t / tau_c).

Internally the phases are anchored at the amplitude-weighted line center
rather than at nu_ref itself; the (anchor - nu_ref) rotation is applied as
a unit-modulus scalar afterwards.  This keeps |rho|^2 numerically
insensitive to the frame choice to round-off, not merely to quadrature
accuracy.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from .excitation import LineTable
from .units import C_CM_PER_PS, TWO_PI

__all__ = [
    "DecayModel",
    "CoherenceTrace",
    "coherence_at",
    "signal_trace",
    "write_trace_csv",
    "read_trace_csv",
]


@dataclass(frozen=True)
class DecayModel:
    """Collisional coherence decay; tau_c_ps=None disables it."""

    tau_c_ps: float | None = None

    def __post_init__(self):
        if self.tau_c_ps is not None and self.tau_c_ps <= 0:
            raise ValueError("tau_c must be positive (or None for no decay)")

    def amplitude_factor(self, t_ps):
        if self.tau_c_ps is None:
            return np.ones_like(np.asarray(t_ps, dtype=float))
        return np.exp(-np.asarray(t_ps, dtype=float) / self.tau_c_ps)


@dataclass(frozen=True)
class CoherenceTrace:
    """Uniformly sampled rotating-frame coherence and its intensity.

    signal equals |rho|^2 exactly unless a probe convolution was applied
    (then the smearing is recorded in the metadata).  The common factor
    exp(-i w01 t) is factored out; nu_ref_cm1 records the frame.
    """

    times_ps: np.ndarray = field(repr=False)
    rho: np.ndarray = field(repr=False)
    signal: np.ndarray = field(repr=False)
    nu_ref_cm1: float = 0.0
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times_ps)


def _phase_sum(table: LineTable, t):
    """Line sum with anchored phases; returns rho without decay."""
    nus = table.wavenumbers()
    amps = table.amplitudes()
    anchor = float(nus.mean())
    det = nus - anchor
    inner = np.exp(-1j * TWO_PI * C_CM_PER_PS * np.outer(t, det)) @ amps
    rot = np.exp(-1j * TWO_PI * C_CM_PER_PS * (anchor - table.nu_ref_cm1) * t)
    return rot * inner


def coherence_at(table: LineTable, decay: DecayModel, t_ps):
    """Rotating-frame coherence at one time or an array of times (ps)."""
    t = np.atleast_1d(np.asarray(t_ps, dtype=float))
    rho = _phase_sum(table, t) * decay.amplitude_factor(t)
    if np.isscalar(t_ps) or np.ndim(t_ps) == 0:
        return complex(rho[0])
    return rho


def _worker_count(workers: int | None) -> int:
    env = os.environ.get("ROVIB_THREADS")
    cap = int(env) if env else None
    if workers is None:
        workers = cap if cap is not None else 1
    if cap is not None:
        workers = min(workers, cap)
    return max(1, workers)


def signal_trace(
    table: LineTable,
    decay: DecayModel,
    t0_ps: float,
    t1_ps: float,
    dt_ps: float,
    probe_fwhm_fs: float | None = None,
    workers: int | None = None,
) -> CoherenceTrace:
    """Sample the coherence on a uniform grid and form the CARS intensity.

    If probe_fwhm_fs is given, |rho|^2 is convolved with a normalized
    Gaussian of that FWHM to emulate probe-duration smearing (off by
    default; picosecond features do not need it).

    A metadata warning is recorded when the fastest beat between two lines
    has a period shorter than two samples; the trace is still produced.
    Evaluation may be split across worker threads (capped by the
    ROVIB_THREADS environment variable); the per-point line sum keeps a
    fixed order, so partitioning never changes the result.
    """
    if dt_ps <= 0:
        raise ValueError("dt must be positive")
    if t1_ps <= t0_ps:
        raise ValueError("t1 must exceed t0")
    if t0_ps < 0:
        raise ValueError("trace must start at t >= 0")

    n = int(np.floor((t1_ps - t0_ps) / dt_ps + 1e-9)) + 1
    t = t0_ps + dt_ps * np.arange(n)

    metadata = dict(table.metadata)
    metadata["nu_ref_cm1"] = repr(table.nu_ref_cm1)
    metadata["decay"] = (
        "none"
        if decay.tau_c_ps is None
        else f"tau_c_ps={decay.tau_c_ps!r} (amplitude exp(-t/tau_c), intensity exp(-2t/tau_c))"
    )
    nus = table.wavenumbers()
    span = float(nus.max() - nus.min())
    if span > 0 and 1.0 / (C_CM_PER_PS * span) < 2.0 * dt_ps:
        metadata["aliasing_warning"] = (
            f"fastest line beat period {1.0 / (C_CM_PER_PS * span):.4f} ps "
            f"is under two samples at dt={dt_ps} ps"
        )

    nw = _worker_count(workers)
    if nw == 1 or n < 4 * nw:
        rho = _phase_sum(table, t)
    else:
        from concurrent.futures import ThreadPoolExecutor

        chunks = np.array_split(np.arange(n), nw)
        rho = np.empty(n, dtype=complex)
        with ThreadPoolExecutor(max_workers=nw) as ex:
            for idx, part in zip(
                chunks, ex.map(lambda ix: _phase_sum(table, t[ix]), chunks)
            ):
                rho[idx] = part
    rho = rho * decay.amplitude_factor(t)

    signal = np.abs(rho) ** 2
    if probe_fwhm_fs is not None:
        from scipy.ndimage import gaussian_filter1d

        sigma_samples = (probe_fwhm_fs * 1e-3) / 2.3548200450309493 / dt_ps
        signal = gaussian_filter1d(signal, sigma_samples, mode="nearest")
        metadata["probe_fwhm_fs"] = repr(probe_fwhm_fs)

    return CoherenceTrace(
        times_ps=t, rho=rho, signal=signal, nu_ref_cm1=table.nu_ref_cm1, metadata=metadata
    )


# ---------------------------------------------------------------------------
# CSV round trip; '#' lines carry metadata, the generated line is volatile

def write_trace_csv(trace: CoherenceTrace, path, timestamp: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if timestamp is not None:
            fh.write(f"# generated: {timestamp}\n")
        for k, v in trace.metadata.items():
            fh.write(f"# {k}: {v}\n")
        fh.write("time_ps,re_rho,im_rho,signal\n")
        for t, r, s in zip(trace.times_ps, trace.rho, trace.signal):
            fh.write(f"{float(t)!r},{r.real!r},{r.imag!r},{float(s)!r}\n")


def read_trace_csv(path) -> CoherenceTrace:
    metadata: dict[str, str] = {}
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    k, v = body.split(":", 1)
                    if k.strip() == "generated":
                        continue
                    metadata[k.strip()] = v.strip()
                continue
            if line.startswith("time_ps") or not line:
                continue
            rows.append([float(x) for x in line.split(",")])
    data = np.array(rows)
    if data.size == 0:
        raise ValueError(f"no data rows in {path}")
    rho = data[:, 1] + 1j * data[:, 2]
    nu_ref = float(metadata.get("nu_ref_cm1", "0.0"))
    return CoherenceTrace(
        times_ps=data[:, 0], rho=rho, signal=data[:, 3], nu_ref_cm1=nu_ref, metadata=metadata
    )
