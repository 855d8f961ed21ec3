"""Parameter retrieval from CARS traces by bounded derivative-free search.

The model is the peak-normalized intensity of the forward pipeline; free
parameters are gamma_e (cm^-1), tau_c (ps), an overall scale, and a time
offset.  beta_e can be force-enabled as a fifth parameter to confirm that
it does not matter.  The search is Nelder-Mead in normalized coordinates
(each parameter divided by a characteristic scale) with bound clipping and
a few jittered restarts; the best run wins.  Because the objective is
exactly quadratic in the overall scale, that parameter is profiled out
analytically at every step when it is free.

Uncertainties come from the finite-difference curvature of the residual
sum at the optimum and are therefore approximate (quadratic expansion,
no correlation reporting).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from . import dynamics
from .pipeline import ForwardModel, RunConfig

__all__ = [
    "FitParameter",
    "FitProblem",
    "FitResult",
    "fit",
    "profile_parameter",
    "read_fit_data",
    "synthetic_problem",
]

#: characteristic step scales per parameter (normalized coordinates)
DEFAULT_SCALES = {
    "gamma_e": 1e-5,
    "tau_c": 50.0,
    "scale": 0.2,
    "t_offset": 0.5,
    "beta_e": 1e-7,
}

DEFAULT_BOUNDS = {
    "gamma_e": (-2e-4, 1e-4),
    "tau_c": (10.0, 5000.0),
    "scale": (1e-3, 1e3),
    "t_offset": (-10.0, 10.0),
    "beta_e": (-1e-5, 1e-5),
}


@dataclass(frozen=True)
class FitParameter:
    name: str
    value: float          # initial guess, or the fixed value when not free
    lower: float
    upper: float
    free: bool = True

    def __post_init__(self):
        if not self.lower <= self.value <= self.upper:
            raise ValueError(
                f"{self.name}: initial value {self.value} outside [{self.lower}, {self.upper}]"
            )


def default_parameters(
    gamma_e: float = 0.0,
    tau_c: float = 150.0,
    scale: float = 1.0,
    t_offset: float = 0.0,
    with_beta_e: bool = False,
) -> dict[str, FitParameter]:
    names = ["gamma_e", "tau_c", "scale", "t_offset"] + (["beta_e"] if with_beta_e else [])
    inits = {"gamma_e": gamma_e, "tau_c": tau_c, "scale": scale, "t_offset": t_offset,
             "beta_e": 0.0}
    return {
        n: FitParameter(n, inits[n], DEFAULT_BOUNDS[n][0], DEFAULT_BOUNDS[n][1])
        for n in names
    }


@dataclass(frozen=True)
class FitProblem:
    """Data plus fixed model configuration plus parameter setup.

    The config's own tau_c/gamma_e play no role during fitting; those enter
    through the parameters.  Needs at least ten times more data points than
    free parameters.
    """

    times_ps: np.ndarray = field(repr=False)
    signal: np.ndarray = field(repr=False)
    config: RunConfig = field(default_factory=RunConfig)
    parameters: dict[str, FitParameter] = field(default_factory=default_parameters)

    def __post_init__(self):
        t = np.asarray(self.times_ps, dtype=float)
        if np.any(np.diff(t) <= 0):
            raise ValueError("data times must be strictly increasing")
        nfree = sum(p.free for p in self.parameters.values())
        if len(t) < 10 * max(nfree, 1):
            raise ValueError("need at least 10x more data points than free parameters")

    def free_names(self) -> list[str]:
        return [n for n, p in self.parameters.items() if p.free]


@dataclass(frozen=True)
class FitResult:
    params: dict[str, float]
    uncertainties: dict[str, float]
    rss: float
    converged: bool
    identifiable: bool
    n_iterations: int
    n_evaluations: int
    initial_rss: float
    seed: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "params": self.params,
                "uncertainties": self.uncertainties,
                "rss": self.rss,
                "initial_rss": self.initial_rss,
                "converged": self.converged,
                "identifiable": self.identifiable,
                "n_iterations": self.n_iterations,
                "n_evaluations": self.n_evaluations,
                "seed": self.seed,
            },
            indent=2,
        )


class _TraceModel:
    """Peak-normalized model signal on shifted data times, pulse side cached."""

    def __init__(self, problem: FitProblem):
        self.problem = problem
        self.model = ForwardModel(problem.config)
        self.model.two_photon()  # build the cache eagerly
        # one checked amplitude assignment; later evaluations skip the
        # interpolation self-check (line positions move by < 0.1 cm^-1)
        self.model.line_table(check=True)
        self.times = np.asarray(problem.times_ps, dtype=float)
        self.data = np.asarray(problem.signal, dtype=float)

    def signal(self, gamma_e: float, tau_c: float, t_offset: float,
               beta_e: float | None = None) -> np.ndarray:
        table = self.model.line_table(gamma_e=gamma_e, beta_e=beta_e, check=False)
        t = self.times - t_offset
        rho = dynamics._phase_sum(table, t)
        amp = np.exp(-t / tau_c)
        sig = np.abs(rho) ** 2 * amp**2
        peak = sig.max()
        return sig / peak if peak > 0 else sig


def _objective_factory(model: _TraceModel, params: dict[str, FitParameter]):
    free = [n for n, p in params.items() if p.free]
    fixed = {n: p.value for n, p in params.items() if not p.free}
    profile_scale = "scale" in free
    data = model.data

    def to_params(x_phys: np.ndarray) -> dict[str, float]:
        vals = dict(fixed)
        vals.update({n: float(v) for n, v in zip(free, x_phys)})
        return vals

    def residual(vals: dict[str, float]) -> tuple[float, dict[str, float]]:
        m = model.signal(
            vals["gamma_e"], vals["tau_c"], vals["t_offset"], vals.get("beta_e")
        )
        if profile_scale:
            denom = float(m @ m)
            s = float(m @ data) / denom if denom > 0 else vals["scale"]
            lo, hi = params["scale"].lower, params["scale"].upper
            s = min(max(s, lo), hi)
            vals = dict(vals, scale=s)
        r = vals["scale"] * m - data
        return float(r @ r), vals

    return free, to_params, residual, profile_scale


def fit(
    problem: FitProblem,
    seed: int = 0,
    restarts: int = 3,
    maxiter: int = 2000,
    xatol: float = 2e-4,
    fatol_rel: float = 1e-10,
) -> FitResult:
    """Least-squares retrieval of the free parameters.

    Runs 1 + ``restarts`` Nelder-Mead searches (the extra ones start from
    seeded jitter around the initial guess) and keeps the best.  xatol is
    in normalized parameter units; fatol is relative to the initial
    residual.  Identical problem, options and seed give an identical
    result.
    """
    data = np.asarray(problem.signal, dtype=float)
    if np.ptp(data) == 0.0:
        values = {n: p.value for n, p in problem.parameters.items()}
        return FitResult(
            params=values,
            uncertainties={n: math.nan for n in problem.free_names()},
            rss=float(np.sum((values["scale"] * data - data) ** 2)),
            converged=False,
            identifiable=False,
            n_iterations=0,
            n_evaluations=0,
            initial_rss=0.0,
            seed=seed,
        )

    model = _TraceModel(problem)
    params = problem.parameters
    free, to_params, residual, profile_scale = _objective_factory(model, params)
    scales = np.array([DEFAULT_SCALES[n] for n in free])
    lo = np.array([params[n].lower for n in free]) / scales
    hi = np.array([params[n].upper for n in free]) / scales
    x0 = np.array([params[n].value for n in free]) / scales

    search_idx = [i for i, n in enumerate(free) if not (profile_scale and n == "scale")]

    best = None
    initial_rss = None
    rng = np.random.default_rng(seed)
    total_iter = 0
    total_eval = 0

    for attempt in range(restarts + 1):
        if attempt == 0:
            start = x0.copy()
        else:
            start = x0 + rng.uniform(-1.0, 1.0, size=len(free))
            start = np.clip(start, lo, hi)

        xfull = start.copy()

        def obj(xs):
            xfull[search_idx] = xs
            rss, _ = residual(to_params(np.clip(xfull, lo, hi) * scales))
            return rss

        if initial_rss is None:
            initial_rss = obj(start[search_idx])
            total_eval += 1

        res = minimize(
            obj,
            start[search_idx],
            method="Nelder-Mead",
            bounds=list(zip(lo[search_idx], hi[search_idx])),
            options={
                "maxiter": maxiter,
                "xatol": xatol,
                "fatol": max(fatol_rel * initial_rss, 1e-300),
                "adaptive": len(search_idx) > 3,
            },
        )
        total_iter += res.nit
        total_eval += res.nfev
        xfull[search_idx] = res.x
        rss, vals = residual(to_params(np.clip(xfull, lo, hi) * scales))
        if best is None or rss < best[0]:
            best = (rss, vals, bool(res.success))

    rss, vals, success = best
    # the quoted result must never be worse than the starting point
    start_rss, start_vals = residual(to_params(x0 * scales))
    if start_rss < rss:
        rss, vals = start_rss, start_vals
        success = False

    sigma = _uncertainties(model, params, free, vals, rss)
    return FitResult(
        params=vals,
        uncertainties=sigma,
        rss=rss,
        converged=success,
        identifiable=True,
        n_iterations=total_iter,
        n_evaluations=total_eval,
        initial_rss=initial_rss,
        seed=seed,
    )


def _uncertainties(model, params, free, vals, rss) -> dict[str, float]:
    """Curvature-based one-sigma estimates at the optimum (approximate)."""
    n_data = len(model.data)
    dof = max(n_data - len(free), 1)
    s2 = rss / dof

    def full_rss(vec):
        v = dict(vals)
        v.update({n: float(x) for n, x in zip(free, vec)})
        m = model.signal(v["gamma_e"], v["tau_c"], v["t_offset"], v.get("beta_e"))
        r = v["scale"] * m - model.data
        return float(r @ r)

    x = np.array([vals[n] for n in free])
    h = np.array([DEFAULT_SCALES[n] * 1e-2 for n in free])
    k = len(free)
    H = np.empty((k, k))
    f0 = full_rss(x)
    for i in range(k):
        ei = np.zeros(k); ei[i] = h[i]
        fpp = full_rss(x + ei); fmm = full_rss(x - ei)
        H[i, i] = (fpp - 2 * f0 + fmm) / h[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k); ej[j] = h[j]
            fpq = full_rss(x + ei + ej)
            fpm = full_rss(x + ei - ej)
            fmp = full_rss(x - ei + ej)
            fmq = full_rss(x - ei - ej)
            H[i, j] = H[j, i] = (fpq - fpm - fmp + fmq) / (4 * h[i] * h[j])
    try:
        cov = 2.0 * s2 * np.linalg.pinv(H)
        diag = np.abs(np.diag(cov))
        sig = np.sqrt(diag)
    except np.linalg.LinAlgError:
        sig = np.full(k, math.nan)
    out = {n: float(s) for n, s in zip(free, sig)}
    for n, s in out.items():
        if not math.isfinite(s) or s == 0.0:
            out[n] = math.nan
    return out


def profile_parameter(
    problem: FitProblem, name: str, grid, seed: int = 0, restarts: int = 1, **fit_opts
) -> list[tuple[float, float]]:
    """Residual profile: fix ``name`` at each grid value, refit the rest."""
    if name not in problem.parameters or not problem.parameters[name].free:
        raise ValueError(f"{name!r} is not a free parameter of this problem")
    out = []
    for value in grid:
        p = problem.parameters[name]
        fixed = FitParameter(
            name, float(value),
            min(p.lower, float(value)), max(p.upper, float(value)), free=False,
        )
        params = dict(problem.parameters)
        params[name] = fixed
        sub = replace(problem, parameters=params)
        res = fit(sub, seed=seed, restarts=restarts, **fit_opts)
        out.append((float(value), res.rss))
    return out


# ---------------------------------------------------------------------------
# helpers

def read_fit_data(path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column CSV (time_ps, signal); '#' comment lines are skipped."""
    times, vals = [], []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            try:
                t, v = float(parts[0]), float(parts[1])
            except (IndexError, ValueError):
                continue  # header row
            times.append(t)
            vals.append(v)
    if not times:
        raise ValueError(f"no numeric rows found in {path}")
    return np.asarray(times), np.asarray(vals)


def synthetic_problem(
    config: RunConfig,
    gamma_e_true: float = -2.6e-5,
    tau_c_true: float = 256.0,
    noise: float = 0.01,
    seed: int = 0,
    parameters: dict[str, FitParameter] | None = None,
) -> tuple[FitProblem, dict[str, float]]:
    """Generate a noisy peak-normalized trace from the model itself.

    Returns the ready-to-fit problem and the generating truth.  Noise is
    additive Gaussian with standard deviation ``noise`` in units of the
    normalized peak.
    """
    cfg = replace(config, gamma_e_cm1=gamma_e_true, tau_c_ps=tau_c_true)
    trace = ForwardModel(cfg).simulate()
    sig = trace.signal / trace.signal.max()
    rng = np.random.default_rng(seed)
    data = sig + rng.normal(0.0, noise, size=len(sig)) if noise > 0 else sig
    problem = FitProblem(
        times_ps=trace.times_ps,
        signal=data,
        config=config,
        parameters=parameters if parameters is not None else default_parameters(),
    )
    truth = {"gamma_e": gamma_e_true, "tau_c": tau_c_true, "scale": 1.0, "t_offset": 0.0}
    return problem, truth
