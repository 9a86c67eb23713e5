"""Perturbation measurement in the moving frame and decay-rate fitting.

Deviations are taken in the frame xi = x + c*t that rides with the front.
Two references are supported:

* the solved grid profile, resampled at xi by monotone cubic interpolation
  (the direct reading of the stability statement; its measurement floor is
  the interpolation plus profile error, a few 1e-6 at m = 10), and
* the front evolved from the profile itself under the same scheme (the
  discrete realization of the shifted front; common discretization error
  cancels, so exponential decay is visible down to round-off).

Weighted norms use the unclamped exponential w1(xi) = exp(-gamma*(xi-xi0)).
The energy functional p*|V1|_{L1,w1} + q*|V2|_{L1,w1} with the positive
pair (p, q) from the spectral analysis is the quantity the weighted
estimates bound; for ordered (one-sided) perturbations it decreases
monotonically after the initial transient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import FrameShiftError, ParameterError
from .evolve import FieldState
from .profile import WaveProfile
from .spectral import Weight


@dataclass(frozen=True)
class PerturbationField:
    """Deviation from the front in the moving frame at one instant."""

    t: float
    xi: np.ndarray        # moving-frame coordinates of the retained nodes
    values: np.ndarray    # (n, N_overlap)

    @property
    def n(self) -> int:
        return self.values.shape[0]


def moving_frame_deviation(snapshot: FieldState, profile: WaveProfile,
                           c: float) -> PerturbationField:
    """Snapshot minus the grid profile resampled at xi = x + c*t.

    Monotone cubic interpolation keeps the resampled front overshoot-free.
    Only nodes whose shifted coordinate falls inside the profile window are
    retained; if fewer than half the profile's nodes overlap, the frame has
    slid too far for a meaningful comparison.
    """
    if not snapshot.grid.compatible(profile.grid):
        raise ParameterError("snapshot and profile grids must share spacing")
    xi = snapshot.grid.xi + c * snapshot.t
    inside = (xi >= profile.grid.lo) & (xi <= profile.grid.hi)
    n_over = int(np.count_nonzero(inside))
    if n_over < profile.grid.n_points // 2:
        raise FrameShiftError(
            f"overlap of {n_over} nodes is less than half the profile "
            f"window ({profile.grid.n_points} nodes) at t = {snapshot.t:g}")
    interps = profile.interpolators()
    dev = np.empty((profile.n, n_over))
    for i in range(profile.n):
        dev[i] = snapshot.values[i, inside] - interps[i](xi[inside])
    return PerturbationField(t=snapshot.t, xi=xi[inside], values=dev)


def reference_deviation(snapshot: FieldState, reference: FieldState,
                        c: float) -> PerturbationField:
    """Deviation against an evolved reference front on the same grid.

    No resampling: both states live on the same nodes, so the common
    discretization error subtracts exactly.  Coordinates are still reported
    in the moving frame for weighting.
    """
    if snapshot.grid != reference.grid:
        raise ParameterError("snapshot and reference must share the grid")
    if abs(snapshot.t - reference.t) > 1e-12:
        raise ParameterError("snapshot and reference are at different times")
    xi = snapshot.grid.xi + c * snapshot.t
    return PerturbationField(t=snapshot.t, xi=xi,
                             values=snapshot.values - reference.values)


@dataclass(frozen=True)
class NormSample:
    t: float
    linf: np.ndarray   # (n,)
    l1: np.ndarray
    l2: np.ndarray
    l1w: Optional[np.ndarray] = None


def perturbation_norms(dev: PerturbationField,
                       weight: Optional[Weight] = None) -> NormSample:
    """Trapezoid L1/L2/weighted-L1 and max norms, per component."""
    vals = dev.values
    if not np.all(np.isfinite(vals)):
        raise ParameterError("deviation contains nonfinite values")
    h = float(dev.xi[1] - dev.xi[0]) if dev.xi.size > 1 else 1.0
    absv = np.abs(vals)
    linf = absv.max(axis=1)
    l1 = np.trapezoid(absv, dx=h, axis=1)
    l2 = np.sqrt(np.trapezoid(vals ** 2, dx=h, axis=1))
    l1w = None
    if weight is not None:
        w1 = weight.omega1(dev.xi)
        l1w = np.trapezoid(w1[None, :] * absv, dx=h, axis=1)
    return NormSample(t=dev.t, linf=linf, l1=l1, l2=l2, l1w=l1w)


def energy_functional(dev: PerturbationField, pq, weight: Weight) -> float:
    """Positive combination of the weighted-L1 component norms."""
    pq = np.asarray(pq, dtype=float)
    if np.any(pq <= 0):
        raise ParameterError("energy coefficients must be strictly positive")
    sample = perturbation_norms(dev, weight)
    return float(np.dot(pq, sample.l1w))


@dataclass
class NormTrace:
    """Norm time series; one row per sample instant."""

    times: np.ndarray
    linf: np.ndarray          # (T, n)
    l1: np.ndarray
    l2: np.ndarray
    l1w: Optional[np.ndarray] = None
    energy: Optional[np.ndarray] = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise ParameterError("sample times must be strictly increasing")

    @classmethod
    def from_samples(cls, samples: Sequence[NormSample],
                     energy: Optional[Sequence[float]] = None) -> "NormTrace":
        times = np.array([s.t for s in samples])
        linf = np.stack([s.linf for s in samples])
        l1 = np.stack([s.l1 for s in samples])
        l2 = np.stack([s.l2 for s in samples])
        l1w = None
        if samples and samples[0].l1w is not None:
            l1w = np.stack([s.l1w for s in samples])
        e = None if energy is None else np.asarray(energy, dtype=float)
        return cls(times=times, linf=linf, l1=l1, l2=l2, l1w=l1w, energy=e)

    def norm(self, name: str) -> np.ndarray:
        arr = getattr(self, name, None)
        if arr is None:
            raise ParameterError(f"trace has no {name!r} norms")
        return arr

    def save(self, path):
        n = self.linf.shape[1]
        cols = ["t"]
        for name in ("linf", "l1", "l2") + (("l1w",) if self.l1w is not None else ()):
            cols += [f"{name}{i + 1}" for i in range(n)]
        if self.energy is not None:
            cols.append("energy")
        with open(path, "w") as fh:
            fh.write("\t".join(cols) + "\n")
            for k, t in enumerate(self.times):
                row = [f"{t:.17g}"]
                for name in ("linf", "l1", "l2"):
                    row += [f"{v:.17g}" for v in getattr(self, name)[k]]
                if self.l1w is not None:
                    row += [f"{v:.17g}" for v in self.l1w[k]]
                if self.energy is not None:
                    row.append(f"{self.energy[k]:.17g}")
                fh.write("\t".join(row) + "\n")


@dataclass(frozen=True)
class DecayFit:
    """Least-squares line through (t, log norm): norm ~ C * exp(-mu*t)."""

    mu: float
    C: float
    r2: float
    window: tuple
    degenerate: bool = False

    def to_record(self) -> dict:
        return {"mu": self.mu, "C": self.C, "r2": self.r2,
                "window": list(self.window), "degenerate": self.degenerate}


def fit_decay_rate(trace: NormTrace, norm: str = "linf", component: int = 0,
                   window: tuple = None) -> DecayFit:
    """Fit an exponential decay constant on a time window.

    Requires at least 10 strictly positive samples in the window.  A flat
    trace has no identifiable rate and is reported as degenerate rather
    than fitted.
    """
    arr = trace.norm(norm)
    y = arr[:, component] if arr.ndim == 2 else arr
    if window is None:
        window = (0.1 * trace.times[-1], 0.8 * trace.times[-1])
    sel = (trace.times >= window[0]) & (trace.times <= window[1])
    if int(sel.sum()) < 10:
        raise ParameterError(
            f"window {window} holds {int(sel.sum())} samples; need >= 10")
    yv = y[sel]
    if np.any(yv <= 0):
        raise ParameterError("norms must be strictly positive inside the "
                             "fit window for a log-linear fit")
    t = trace.times[sel]
    logy = np.log(yv)
    A = np.vstack([t, np.ones(t.size)]).T
    coef, *_ = np.linalg.lstsq(A, logy, rcond=None)
    pred = A @ coef
    ss_tot = float(np.sum((logy - logy.mean()) ** 2))
    if ss_tot == 0.0:
        return DecayFit(mu=-float(coef[0]), C=float(np.exp(coef[1])),
                        r2=float("nan"), window=tuple(window), degenerate=True)
    r2 = 1.0 - float(np.sum((logy - pred) ** 2)) / ss_tot
    return DecayFit(mu=-float(coef[0]), C=float(np.exp(coef[1])), r2=r2,
                    window=tuple(window))


def squeeze_check(run_minus: Sequence[FieldState], run: Sequence[FieldState],
                  run_plus: Sequence[FieldState],
                  run_front: Optional[Sequence[FieldState]] = None,
                  K=None) -> dict:
    """Worst violation of the squeeze orderings across aligned snapshots.

    Checks lower <= middle <= upper at every node and time, plus the front
    sandwich lower <= front <= upper when the evolved front is supplied,
    and 0 <= lower, upper <= K when K is given.  Returns the worst positive
    part per relation and overall.
    """
    lengths = {len(run_minus), len(run), len(run_plus)}
    if run_front is not None:
        lengths.add(len(run_front))
    if len(lengths) != 1:
        raise ParameterError("runs must have the same number of snapshots")
    worst = {"minus_vs_mid": 0.0, "mid_vs_plus": 0.0}
    if run_front is not None:
        worst["minus_vs_front"] = 0.0
        worst["front_vs_plus"] = 0.0
    if K is not None:
        worst["below_zero"] = 0.0
        worst["above_K"] = 0.0
        Kcol = np.asarray(K, dtype=float)[:, None]
    for k in range(len(run)):
        lo, mid, hi = run_minus[k].values, run[k].values, run_plus[k].values
        worst["minus_vs_mid"] = max(worst["minus_vs_mid"],
                                    float(np.max(lo - mid)))
        worst["mid_vs_plus"] = max(worst["mid_vs_plus"],
                                   float(np.max(mid - hi)))
        if run_front is not None:
            fr = run_front[k].values
            worst["minus_vs_front"] = max(worst["minus_vs_front"],
                                          float(np.max(lo - fr)))
            worst["front_vs_plus"] = max(worst["front_vs_plus"],
                                         float(np.max(fr - hi)))
        if K is not None:
            worst["below_zero"] = max(worst["below_zero"], float(np.max(-lo)))
            worst["above_K"] = max(worst["above_K"], float(np.max(hi - Kcol)))
    worst["overall"] = max(worst.values())
    return worst


def build_trace(snapshots: Sequence[FieldState], profile: WaveProfile,
                c: float, weight: Optional[Weight] = None,
                pq=None, reference: Optional[Sequence[FieldState]] = None
                ) -> NormTrace:
    """Norm trace over a run, against the grid profile or an evolved
    reference (when ``reference`` is given)."""
    samples, energies = [], []
    for k, snap in enumerate(snapshots):
        if reference is not None:
            dev = reference_deviation(snap, reference[k], c)
        else:
            dev = moving_frame_deviation(snap, profile, c)
        samples.append(perturbation_norms(dev, weight))
        if weight is not None and pq is not None:
            energies.append(energy_functional(dev, pq, weight))
    return NormTrace.from_samples(
        samples, energies if energies else None)
