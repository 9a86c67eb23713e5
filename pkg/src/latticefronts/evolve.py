"""Cauchy problem for the lattice diffusion system by method of lines.

States live on a grid with spacing h = 1/m; the coupling operator

    D[v](x) = v(x + 1) - 2*v(x) + v(x - 1)

shifts by exactly m nodes.  Out-of-range reads clamp to the equilibria:
0 on the left (ahead of the front) and K on the right (behind it).  With
m = 1 the right-hand side at integer nodes is exactly the lattice system's
vector field.  Time stepping is classical RK4 (or explicit Euler); the
order interval [0, K] is invariant for the dynamics, and any round-off
overshoot is clipped and audited rather than silently absorbed.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .errors import BlowUpError, ConfigError, DomainError, ParameterError
from .grids import ProfileGrid
from .model import ReactionSystem
from .profile import WaveProfile


@dataclass(frozen=True)
class FieldState:
    """Solution snapshot: per-component node values at one time."""

    grid: ProfileGrid
    t: float
    values: np.ndarray  # (n, N)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[1] != self.grid.n_points:
            raise ParameterError(
                f"values shape {vals.shape} does not match the grid "
                f"({self.grid.n_points} nodes)")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class EvolveConfig:
    dt: float
    t_end: float
    stepper: str = "rk4"
    snapshot_every: int = 20
    boundary: str = "equilibrium-clamp"

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.t_end < 0:
            raise ConfigError("t_end must be nonnegative")
        if self.stepper not in ("rk4", "explicit-euler"):
            raise ConfigError(f"unknown stepper {self.stepper!r}")
        if self.boundary != "equilibrium-clamp":
            raise ConfigError(f"unknown boundary closure {self.boundary!r}")
        if self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be >= 1")

    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


def stable_dt_bound(sys: ReactionSystem, samples: int = 101) -> float:
    """Explicit-stepping bound 0.2 / (4*max(d) + Lip(f)); the shift operator
    has spectral radius at most 4*d_i and Lip(f) is the largest row sum of
    |grad f| over the rectangle."""
    axes = [np.linspace(0.0, Ki, samples) for Ki in sys.K]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh])
    grad = np.abs(np.asarray(sys.grad_f(pts)))
    lip = float(np.max(grad.sum(axis=1)))
    return 0.2 / (4.0 * float(np.max(sys.d)) + lip)


def validate_config(sys: ReactionSystem, cfg: EvolveConfig) -> None:
    bound = stable_dt_bound(sys)
    if cfg.dt > bound:
        raise ConfigError(
            f"dt = {cfg.dt:g} exceeds the explicit stability bound "
            f"{bound:.6g} = 0.2/(4*max(d) + Lip(f))")


def discrete_laplacian(sys: ReactionSystem, state: FieldState,
                       i: Optional[int] = None) -> np.ndarray:
    """Unit-shift second difference with equilibrium closure (0 left, K right).

    Returns the array for component ``i``, or the full (n, N) stack when
    ``i`` is None.
    """
    vals = state.values
    m = state.grid.m
    N = vals.shape[1]
    idx = list(range(vals.shape[0])) if i is None else [i]
    out = np.empty((len(idx), N))
    for row, ci in enumerate(idx):
        pad = np.concatenate([np.zeros(m), vals[ci], np.full(m, sys.K[ci])])
        out[row] = pad[2 * m:] - 2.0 * pad[m:-m] + pad[:N]
    return out if i is None else out[0]


def _rhs(sys: ReactionSystem, grid: ProfileGrid, vals: np.ndarray) -> np.ndarray:
    m = grid.m
    N = vals.shape[1]
    out = np.empty_like(vals)
    for ci in range(vals.shape[0]):
        pad = np.concatenate([np.zeros(m), vals[ci], np.full(m, sys.K[ci])])
        out[ci] = pad[2 * m:] - 2.0 * pad[m:-m] + pad[:N]
    return sys.d[:, None] * out + np.asarray(sys.f(vals))


@dataclass
class ClipAudit:
    """Accounting of rectangle-overshoot clipping across a run."""

    total_magnitude: float = 0.0
    clipped_node_steps: int = 0
    node_steps: int = 0
    max_single: float = 0.0

    def absorb(self, other: "ClipAudit"):
        self.total_magnitude += other.total_magnitude
        self.clipped_node_steps += other.clipped_node_steps
        self.node_steps += other.node_steps
        self.max_single = max(self.max_single, other.max_single)

    @property
    def per_node_step(self) -> float:
        return self.total_magnitude / self.node_steps if self.node_steps else 0.0


_OVERSHOOT_PRE_TOL = 1e-9


def step(sys: ReactionSystem, state: FieldState, cfg: EvolveConfig):
    """One explicit step; returns (new_state, clip_audit_for_step)."""
    v = state.values
    K = sys.K[:, None]
    if float(np.max(v - K)) > _OVERSHOOT_PRE_TOL or float(np.min(v)) < -_OVERSHOOT_PRE_TOL:
        raise DomainError("state leaves the rectangle [0, K] beyond tolerance")
    dt = cfg.dt
    grid = state.grid
    if cfg.stepper == "rk4":
        k1 = _rhs(sys, grid, v)
        k2 = _rhs(sys, grid, v + 0.5 * dt * k1)
        k3 = _rhs(sys, grid, v + 0.5 * dt * k2)
        k4 = _rhs(sys, grid, v + dt * k3)
        new = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    else:
        new = v + dt * _rhs(sys, grid, v)
    if not np.all(np.isfinite(new)):
        bad = np.argwhere(~np.isfinite(new))[0]
        raise BlowUpError(
            f"nonfinite value in component {bad[0] + 1} at node "
            f"xi = {grid.xi[bad[1]]:g}, t = {state.t + dt:g}",
            node=int(bad[1]), t=state.t + dt)
    over = np.maximum(new - K, 0.0) + np.maximum(-new, 0.0)
    audit = ClipAudit(total_magnitude=float(over.sum()),
                      clipped_node_steps=int(np.count_nonzero(over)),
                      node_steps=new.size,
                      max_single=float(over.max()))
    new = np.clip(new, 0.0, K)
    return FieldState(grid=grid, t=state.t + dt, values=new), audit


@dataclass
class EvolveResult:
    snapshots: List[FieldState]
    clip: ClipAudit
    steps: int

    @property
    def final(self) -> FieldState:
        return self.snapshots[-1]


def integrate(sys: ReactionSystem, state0: FieldState,
              cfg: EvolveConfig) -> EvolveResult:
    """March to t_end, keeping a snapshot every ``snapshot_every`` steps
    (plus the initial and final states)."""
    validate_config(sys, cfg)
    snaps = [state0]
    state = state0
    audit = ClipAudit()
    n = cfg.n_steps()
    for s in range(1, n + 1):
        state, a = step(sys, state, cfg)
        audit.absorb(a)
        if s % cfg.snapshot_every == 0 or s == n:
            snaps.append(state)
    return EvolveResult(snapshots=snaps, clip=audit, steps=n)


def comparison_harness(sys: ReactionSystem, lower0: FieldState,
                       upper0: FieldState, cfg: EvolveConfig) -> dict:
    """Integrate an ordered pair in lockstep; the order must persist.

    Returns the worst positive part of (lower - upper) over every step and
    node, together with both trajectories' snapshots.
    """
    if float(np.max(lower0.values - upper0.values)) > 0:
        raise ParameterError("initial data are not ordered: lower0 > upper0")
    validate_config(sys, cfg)
    lo, hi = lower0, upper0
    audit = ClipAudit()
    worst = 0.0
    snaps_lo, snaps_hi = [lo], [hi]
    n = cfg.n_steps()
    for s in range(1, n + 1):
        lo, a1 = step(sys, lo, cfg)
        hi, a2 = step(sys, hi, cfg)
        audit.absorb(a1)
        audit.absorb(a2)
        worst = max(worst, float(np.max(lo.values - hi.values)))
        if s % cfg.snapshot_every == 0 or s == n:
            snaps_lo.append(lo)
            snaps_hi.append(hi)
    return {"max_violation": worst, "lower": snaps_lo, "upper": snaps_hi,
            "clip": audit}


def split_initial_data(v0: FieldState, front: FieldState):
    """Min/max splitting against the front: the ordered pair that squeezes
    the solution from below and above."""
    if v0.grid != front.grid:
        raise ParameterError("split requires a common grid")
    lower = FieldState(grid=v0.grid, t=v0.t,
                       values=np.minimum(v0.values, front.values))
    upper = FieldState(grid=v0.grid, t=v0.t,
                       values=np.maximum(v0.values, front.values))
    return lower, upper


# ---------------------------------------------------------------------------
# Initial data


@dataclass(frozen=True)
class Perturbation:
    """Localized deviation added to the front: a compactly supported cosine
    bump or a Gaussian.  ``center=None`` places it at the front's half-rise
    point."""

    kind: str = "cosine"
    amplitude: float = 0.0
    center: Optional[float] = None
    width: float = 5.0

    def __post_init__(self):
        if self.kind not in ("cosine", "gaussian", "none"):
            raise ParameterError(f"unknown perturbation kind {self.kind!r}")
        if self.width <= 0:
            raise ParameterError("width must be positive")

    def profile_values(self, x: np.ndarray, center: float) -> np.ndarray:
        if self.kind == "none" or self.amplitude == 0.0:
            return np.zeros_like(x)
        if self.kind == "cosine":
            s = np.abs(x - center) <= self.width
            out = np.zeros_like(x)
            out[s] = self.amplitude * 0.5 \
                * (1.0 + np.cos(np.pi * (x[s] - center) / self.width))
            return out
        return self.amplitude * np.exp(-0.5 * ((x - center) / self.width) ** 2)


def evolution_grid(profile: WaveProfile, t_end: float,
                   pad: float = 20.0) -> ProfileGrid:
    """Profile grid extended leftward by c*t_end + pad, so the leftward-
    moving front never feels the boundary over the run."""
    return profile.grid.extended_left(profile.c * t_end + pad)


def front_on_grid(profile: WaveProfile, grid: ProfileGrid) -> FieldState:
    """Profile resampled/extended onto an evolution grid: node values are
    copied on the shared lattice, the left extension follows the
    exponential tail, the right extension holds the last value."""
    if not grid.compatible(profile.grid):
        raise ParameterError("evolution grid must share the profile's spacing")
    N = grid.n_points
    vals = np.empty((profile.n, N))
    xi = grid.xi
    lam1 = profile.spectral.lambda1 if profile.spectral else None
    left = max(profile.grid.j_lo - grid.j_lo, 0)
    right = min(profile.grid.j_hi, grid.j_hi) - grid.j_lo + 1
    src_lo = grid.j_lo + left - profile.grid.j_lo
    for i in range(profile.n):
        src = profile.values[i]
        vals[i, left:right] = src[src_lo:src_lo + (right - left)]
        if lam1 is not None:
            vals[i, :left] = src[0] * np.exp(lam1 * (xi[:left] - profile.grid.lo))
        else:
            vals[i, :left] = src[0]
        vals[i, right:] = src[-1]
    return FieldState(grid=grid, t=0.0, values=vals)


def make_initial_data(profile: WaveProfile, perturbation: Perturbation,
                      grid: Optional[ProfileGrid] = None,
                      t_end: Optional[float] = None,
                      pad: float = 20.0, sys: Optional[ReactionSystem] = None):
    """Front plus perturbation, validated against the rectangle.

    The perturbation must fit inside [0, K] as added (no clamping); data
    outside the rectangle are rejected with the offending node.  Returns
    (state, front_state); the unperturbed front state is the reference for
    deviation measurements.
    """
    if grid is None:
        if t_end is None:
            raise ParameterError("supply a grid or t_end to size one")
        grid = evolution_grid(profile, t_end, pad)
    front = front_on_grid(profile, grid)
    if perturbation.center is None:
        # front half-rise point of the first component
        target = profile.values[0, -1] / 2.0
        center = float(profile.grid.xi[int(np.argmin(
            np.abs(profile.values[0] - target)))])
    else:
        center = perturbation.center
    bump = perturbation.profile_values(grid.xi, center)
    vals = front.values + bump[None, :]
    K = profile.values[:, -1] if sys is None else sys.K
    over = np.maximum(vals - np.asarray(K)[:, None], 0.0) + np.maximum(-vals, 0.0)
    if float(over.max()) > 0.0:
        bad = np.argwhere(over > 0)[0]
        raise DomainError(
            f"initial data leave [0, K] at component {bad[0] + 1}, node "
            f"xi = {grid.xi[bad[1]]:g} by {float(over.max()):.3e}; "
            "shrink or recenter the perturbation")
    state = FieldState(grid=grid, t=0.0, values=vals)
    # membership proxies: discrete H1 and weighted-L1 norms must be finite
    dv = np.diff(vals - front.values, axis=1) / grid.h
    h1 = float(np.sqrt(np.sum((vals - front.values) ** 2) * grid.h
                       + np.sum(dv ** 2) * grid.h))
    if not math.isfinite(h1):
        raise DomainError("perturbation has no finite discrete H1 norm")
    return state, front


# ---------------------------------------------------------------------------
# Snapshot serialization: versioned text and binary formats.

SNAPSHOT_TEXT_VERSION = 1
SNAPSHOT_MAGIC = b"LFSNAP01"


def save_snapshots_text(snapshots: List[FieldState], path):
    """All snapshots in one delimited-text stream; blocks separated by a
    't' header line."""
    with open(path, "w") as fh:
        fh.write(f"# latticefronts-snapshots v{SNAPSHOT_TEXT_VERSION}\n")
        g = snapshots[0].grid
        fh.write(f"# m {g.m}\n# j_lo {g.j_lo}\n# j_hi {g.j_hi}\n")
        fh.write(f"# n {snapshots[0].n}\n")
        for snap in snapshots:
            fh.write(f"# t {snap.t:.17g}\n")
            for j in range(g.n_points):
                row = "\t".join(f"{snap.values[i, j]:.17g}"
                                for i in range(snap.n))
                fh.write(row + "\n")


def load_snapshots_text(path) -> List[FieldState]:
    meta, blocks, current = {}, [], None
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# t "):
                current = {"t": float(line[4:]), "rows": []}
                blocks.append(current)
            elif line.startswith("# "):
                key, val = line[2:].split(" ", 1)
                meta[key] = val
            elif line:
                current["rows"].append([float(tk) for tk in line.split("\t")])
    grid = ProfileGrid(int(meta["m"]), j_lo=int(meta["j_lo"]),
                       j_hi=int(meta["j_hi"]))
    return [FieldState(grid=grid, t=b["t"], values=np.array(b["rows"]).T)
            for b in blocks]


def save_snapshots_binary(snapshots: List[FieldState], path):
    """Compact block format: magic, grid header, then per snapshot a time
    stamp and the row-major float64 payload."""
    g = snapshots[0].grid
    n = snapshots[0].n
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<iiiii", g.m, g.j_lo, g.j_hi, n, len(snapshots)))
        for snap in snapshots:
            fh.write(struct.pack("<d", snap.t))
            fh.write(np.ascontiguousarray(snap.values, dtype="<f8").tobytes())


def load_snapshots_binary(path) -> List[FieldState]:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != SNAPSHOT_MAGIC:
            raise ParameterError(f"not a snapshot block file: magic {magic!r}")
        m, j_lo, j_hi, n, count = struct.unpack("<iiiii", fh.read(20))
        grid = ProfileGrid(m, j_lo=j_lo, j_hi=j_hi)
        N = grid.n_points
        out = []
        for _ in range(count):
            (t,) = struct.unpack("<d", fh.read(8))
            payload = np.frombuffer(fh.read(8 * n * N), dtype="<f8")
            out.append(FieldState(grid=grid, t=t,
                                  values=payload.reshape(n, N).copy()))
    return out
