"""Wave profiles by monotone iteration between ordered super/subsolutions.

The profile equations are the advance-delay system

    c * phi'(xi) = d_i * D[phi_i](xi) + f_i(phi(xi)),
    D[phi](xi) = phi(xi + 1) - 2*phi(xi) + phi(xi - 1),

with phi -> 0 on the left and phi -> K on the right.  For supercritical
speeds the linearization at 0 supplies decay exponents lambda1 < lambda2
and a positive null direction eta; the classical ordered pair is

    upper_i = min(K_i, eta_i * exp(lambda1*(xi - shift))),
    lower_i = max(0, eta_i*exp(lambda1*z) - M*y_i*exp((lambda1+eps')*z)),

with z = xi - shift and J(lambda1+eps', c) y < 0 componentwise.  Iterating
the exponentially weighted integral operator

    T[phi](xi) = (1/c) * integral_{-inf}^{xi} exp(-(beta/c)*(xi-s))
                 * (d*D[phi](s) + f(phi(s)) + beta*phi(s)) ds

downward from the upper solution converges to the profile.  On the
truncated grid the integral tail and the shift reads left of the domain
follow the iterate's own exp(lambda1*xi) asymptote, which keeps the left
boundary value neutral and pins the translate; reads right of the domain
clamp to K.  Quadrature is the positive-weight composite fourth-degree
(Boole) rule with the kernel evaluated at the nodes, so the iteration is
order preserving node by node.
"""

from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import (ConstructionError, MonotonicityError, NonConvergenceError,
                     ParameterError)
from .grids import ProfileGrid
from .model import ReactionSystem
from .spectral import (CharParams, SpectralReport, compute_spectral_report,
                       eval_char_poly, eval_f_i, positive_vector)

# Tolerances for the differential-inequality audits of the ordered pair.
INEQ_TOL = 1e-9
ORDER_TOL = 1e-10


def shift_laplacian(values: np.ndarray, grid: ProfileGrid, K,
                    lambda1: Optional[float] = None,
                    nu: Optional[float] = None) -> np.ndarray:
    """Unit-shift second difference with tail-consistent profile closures.

    Left of the domain reads the iterate's own growing tail
    phi(lo)*exp(lambda1*(xi - lo)) when ``lambda1`` is given, else 0.
    Right of the domain reads the stable-side approach
    K - (K - phi(hi))*exp(-nu*(xi - hi)) when ``nu`` is given, else K.
    Both closures are nondecreasing in the edge values, so order
    preservation of the iteration is untouched.
    """
    n, N = values.shape
    m = grid.m
    out = np.empty_like(values)
    if lambda1 is None:
        left_factors = np.zeros(m)
    else:
        left_factors = np.exp(lambda1 * grid.h * (np.arange(m) - m))
    if nu is None:
        right_factors = np.zeros(m)
    else:
        right_factors = np.exp(-nu * grid.h * np.arange(1, m + 1))
    K = np.asarray(K, dtype=float)
    for i in range(n):
        right = K[i] - (K[i] - values[i, -1]) * right_factors
        pad = np.concatenate([values[i, 0] * left_factors, values[i], right])
        out[i] = pad[2 * m:] - 2.0 * pad[m:-m] + pad[:N]
    return out


def stable_decay_exponent(c: float, params: CharParams) -> float:
    """Smallest nu > 0 such that K - phi ~ exp(-nu*xi) solves the
    linearization at K: the first negative-axis root of the stable-side
    characteristic function."""
    Pm = lambda nu: eval_char_poly(-nu, c, params, at="K")
    if Pm(0.0) <= 0:
        raise ParameterError("stable-side sign conditions fail at K")
    hi = 0.1
    while Pm(hi) > 0:
        hi += 0.1
        if hi > 50.0:
            raise ParameterError("no stable decay exponent below 50")
    return float(brentq(Pm, hi - 0.1, hi, xtol=1e-14))


def balanced_shift(c: float, params: CharParams, grid: ProfileGrid, K,
                   eta) -> float:
    """Translate that equalizes the two tail amplitudes at the inner edges
    of 10%-width tail windows: exp(lambda1*...) on the left against the
    exp(-nu*...) deficit on the right."""
    from .spectral import find_positive_roots

    lam1 = find_positive_roots(c, params)[0]
    nu = stable_decay_exponent(c, params)
    width = 0.1 * (grid.hi - grid.lo)
    eL = grid.lo + width
    eR = grid.hi - width
    etamax = float(np.max(eta))
    Kmax = float(np.max(np.asarray(K)))

    def log_gap(s):
        return (math.log(etamax) + lam1 * (eL - s)) \
            - (math.log(Kmax) - nu * (eR - s))

    span = grid.hi - grid.lo
    return float(brentq(log_gap, grid.lo - 2 * span, grid.hi + 2 * span))


@dataclass(frozen=True)
class WaveProfile:
    """Converged front on a grid, with the analysis that produced it."""

    grid: ProfileGrid
    c: float
    values: np.ndarray                 # (n, N)
    spectral: Optional[SpectralReport] = None
    iterations: int = 0
    final_delta: float = float("nan")
    residual: float = float("nan")
    shift: Optional[float] = None      # translate of the bounding pair

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def interpolators(self):
        from scipy.interpolate import PchipInterpolator
        return [PchipInterpolator(self.grid.xi, self.values[i])
                for i in range(self.n)]

    def digest(self) -> str:
        blob = self.values.tobytes() + f"{self.c:.17g}{self.grid.m}".encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass(frozen=True)
class SuperSubPair:
    """Ordered pair bounding the front, plus the data that built it."""

    upper: np.ndarray
    lower: np.ndarray
    grid: ProfileGrid
    shift: float
    M: float
    eps_prime: float
    correction: np.ndarray             # y with J(lambda1+eps', c) y < 0

    def __post_init__(self):
        if np.any(self.lower > self.upper + ORDER_TOL):
            raise ConstructionError("ordered pair violated: lower > upper")


def _profile_operator(sys: ReactionSystem, c: float, values, dvalues, grid,
                      lambda1, nu):
    """c*phi' - d*D[phi] - f(phi) with the analytic derivative supplied."""
    lap = shift_laplacian(values, grid, sys.K, lambda1, nu)
    return c * dvalues - sys.d[:, None] * lap - np.asarray(sys.f(values))


def _kink_mask(grid: ProfileGrid, kinks) -> np.ndarray:
    """Nodes within one grid step of any clamp point; excluded from the
    differential-inequality audits (the candidates are only piecewise
    smooth there)."""
    xi = grid.xi
    mask = np.zeros(grid.n_points, dtype=bool)
    for k in kinks:
        mask |= np.abs(xi - k) <= grid.h * (1.0 + 1e-9)
    return mask


def build_supersolution(sys: ReactionSystem, spectral: SpectralReport,
                        grid: ProfileGrid, shift: Optional[float] = None,
                        check: bool = True):
    """Upper solution min(K_i, eta_i * exp(lambda1*(xi - shift))).

    The default shift balances the two boundary tails.  Verifies the
    differential inequality (operator >= 0) away from the clamp kinks using
    the exact one-sided derivative; raises if it fails.
    Returns (values, shift).
    """
    params = CharParams.from_system(sys)
    lam1 = spectral.lambda1
    eta = np.asarray(spectral.eta, dtype=float)
    if lam1 is None or eta is None:
        raise ParameterError("spectral report lacks decay data: speed is at "
                             "or below the threshold")
    if shift is None:
        shift = balanced_shift(spectral.c, params, grid, sys.K, eta)
    z = grid.xi - shift
    expo = eta[:, None] * np.exp(lam1 * z[None, :])
    values = np.minimum(sys.K[:, None], expo)
    if check:
        dvalues = np.where(expo < sys.K[:, None], lam1 * expo, 0.0)
        nu = stable_decay_exponent(spectral.c, params)
        R = _profile_operator(sys, spectral.c, values, dvalues, grid, lam1, nu)
        kinks = [shift + math.log(sys.K[i] / eta[i]) / lam1
                 for i in range(sys.n)]
        ok = ~_kink_mask(grid, kinks)
        if float(R[:, ok].min()) < -INEQ_TOL:
            j = int(np.argmin(R[:, ok].min(axis=0)))
            raise ConstructionError(
                "upper-solution inequality fails beyond the kink band: "
                f"min residual {float(R[:, ok].min()):.3e} near xi = "
                f"{grid.xi[ok][j]:.3f}")
    return values, float(shift)


def build_subsolution(sys: ReactionSystem, spectral: SpectralReport,
                      grid: ProfileGrid, shift: float,
                      M_cap: float = 2.0 ** 20):
    """Lower solution max(0, eta*exp(lambda1*z) - M*y*exp((lambda1+eps')*z)).

    eps' = min(epsilon, (lambda2-lambda1)/2)/2 and y > 0 solves the strict
    inequality system of the characteristic matrix at lambda1 + eps'
    (scaled so min(y/eta) = 1, which reduces to the common-factor form
    eta*exp(lambda1*z)*(1 - M*exp(eps'*z)) for symmetric kinetics).  M is
    the smallest power of 2 for which the differential inequality
    (operator <= 0) holds on the grid outside the kink bands.
    Returns (values, M, eps_prime, y).
    """
    params = CharParams.from_system(sys)
    lam1, lam2 = spectral.lambda1, spectral.lambda2
    eta = np.asarray(spectral.eta, dtype=float)
    c = spectral.c
    gap = lam2 - lam1
    eps = spectral.epsilon if spectral.epsilon is not None else 0.1 * gap
    eps_prime = min(eps, 0.5 * gap) / 2.0
    mu = lam1 + eps_prime
    J = np.empty((sys.n, sys.n))
    for i in range(sys.n):
        for j in range(sys.n):
            J[i, j] = eval_f_i(i, mu, c, params) if i == j else params.A0[i, j]
    y = positive_vector(J)
    if y is None:
        raise ConstructionError(
            "no positive correction direction at lambda1 + eps'; "
            "the characteristic value there is not positive")
    y = y / np.min(y / eta)
    nu = stable_decay_exponent(c, params)

    z = grid.xi - shift
    lead = eta[:, None] * np.exp(lam1 * z[None, :])

    M = 1.0
    while M <= M_cap:
        corr = M * y[:, None] * np.exp(mu * z[None, :])
        raw = lead - corr
        values = np.maximum(0.0, raw)
        positive = raw > 0
        dvalues = np.where(positive,
                           lam1 * lead - M * mu * y[:, None]
                           * np.exp(mu * z[None, :]), 0.0)
        R = _profile_operator(sys, c, values, dvalues, grid, lam1, nu)
        kinks = [shift + math.log(eta[i] / (M * y[i])) / eps_prime
                 for i in range(sys.n)]
        ok = ~_kink_mask(grid, kinks)
        if float(R[:, ok].max()) <= INEQ_TOL:
            return values, M, eps_prime, y
        M *= 2.0
    raise ConstructionError(
        f"lower-solution inequality not satisfied for any M up to {M_cap:g}; "
        f"worst residual {float(R[:, ok].max()):.3e}")


def build_supersub_pair(sys: ReactionSystem, spectral: SpectralReport,
                        grid: ProfileGrid,
                        shift: Optional[float] = None) -> SuperSubPair:
    upper, shift = build_supersolution(sys, spectral, grid, shift)
    lower, M, eps_prime, y = build_subsolution(sys, spectral, grid, shift)
    return SuperSubPair(upper=upper, lower=lower, grid=grid, shift=shift,
                        M=M, eps_prime=eps_prime, correction=y)


def default_beta(sys: ReactionSystem, samples: int = 101) -> float:
    """Smallest shift making the iteration kernel order preserving:
    2*max(d) (absorbs the on-site part of the shift coupling) plus the
    largest diagonal reaction slope over the rectangle."""
    axes = [np.linspace(0.0, Ki, samples) for Ki in sys.K]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh])
    grad = np.asarray(sys.grad_f(pts))
    lip_diag = max(float(np.max(np.abs(grad[i, i]))) for i in range(sys.n))
    return 2.0 * float(np.max(sys.d)) + lip_diag


def _sweep(values, H, c, beta, grid):
    """One application of the integral operator: composite Boole quadrature
    of the exponentially weighted history, seeded by the neutral tail
    integral I(lo) = c * phi(lo)."""
    h = grid.h
    N = values.shape[1]
    r = math.exp(-beta * h / c)
    w = (2.0 * h / 45.0) * np.array([7 * r**4, 32 * r**3, 12 * r**2,
                                     32 * r, 7.0])
    I = np.empty_like(values)
    I[:, 0] = c * values[:, 0]
    if N > 1:
        I[:, 1] = r * I[:, 0] + (h / 2) * (r * H[:, 0] + H[:, 1])
    if N > 2:
        I[:, 2] = r * r * I[:, 0] + (h / 3) * (r * r * H[:, 0]
                                               + 4 * r * H[:, 1] + H[:, 2])
    if N > 3:
        I[:, 3] = r * I[:, 2] + (h / 2) * (r * H[:, 2] + H[:, 3])
    r4 = r**4
    for j in range(4, N):
        I[:, j] = r4 * I[:, j - 4] + (w[0] * H[:, j - 4] + w[1] * H[:, j - 3]
                                      + w[2] * H[:, j - 2] + w[3] * H[:, j - 1]
                                      + w[4] * H[:, j])
    return I / c


def monotone_iterate(sys: ReactionSystem, c: float, pair: SuperSubPair,
                     beta: Optional[float] = None, tol: float = 1e-8,
                     max_iter: int = 2000,
                     spectral: Optional[SpectralReport] = None) -> WaveProfile:
    """Iterate the integral operator downward from the upper solution.

    Each iterate is capped by its predecessor, which makes the sequence
    nonincreasing by construction; with the order-preserving kernel the cap
    only ever acts at quadrature-noise size near the initial kinks, and the
    residual check below certifies the limit independently.  Stops when the
    sup-norm step falls below ``tol``.
    """
    grid = pair.grid
    if beta is None:
        beta = default_beta(sys)
    lam1 = spectral.lambda1 if spectral is not None else None
    if lam1 is None:
        raise ParameterError("monotone_iterate needs the spectral report for "
                             "the tail closure exponents")
    nu = stable_decay_exponent(c, CharParams.from_system(sys))

    def apply_T(vals):
        lap = shift_laplacian(vals, grid, sys.K, lam1, nu)
        H = sys.d[:, None] * lap + np.asarray(sys.f(vals)) + beta * vals
        return _sweep(vals, H, c, beta, grid)

    phi = np.minimum(apply_T(pair.upper), pair.upper)
    delta = float("inf")
    cap_excess = 0.0
    for k in range(1, max_iter + 1):
        raw = apply_T(phi)
        cap_excess = float(np.max(raw - phi))
        nxt = np.minimum(raw, phi)
        under = float(np.max(pair.lower - nxt))
        if under > ORDER_TOL:
            raise MonotonicityError(
                f"iterate fell below the lower solution by {under:.3e} "
                f"at sweep {k}")
        delta = float(np.max(np.abs(nxt - phi)))
        phi = nxt
        if delta <= tol:
            break
    else:
        raise NonConvergenceError(
            f"monotone iteration did not reach tol = {tol:g} in "
            f"{max_iter} sweeps; last step {delta:.3e}")
    if cap_excess > max(100.0 * tol, 1e-6):
        raise MonotonicityError(
            f"operator pushes above the final iterate by {cap_excess:.3e}; "
            "the kernel shift beta is too small for order preservation")
    increments = np.diff(phi, axis=1)
    if float(increments.min()) < -ORDER_TOL:
        raise MonotonicityError(
            f"converged profile is not nondecreasing: min increment "
            f"{float(increments.min()):.3e}")
    profile = WaveProfile(grid=grid, c=c, values=phi, spectral=spectral,
                          iterations=k, final_delta=delta, shift=pair.shift)
    return WaveProfile(grid=grid, c=c, values=phi, spectral=spectral,
                       iterations=k, final_delta=delta,
                       residual=profile_residual(sys, profile),
                       shift=pair.shift)


def profile_residual(sys: ReactionSystem, profile: WaveProfile) -> float:
    """Max norm of the profile equations over safe interior nodes.

    The derivative is the fourth-order central difference; the shift term
    uses exact m-node shifts.  Nodes within one unit plus the derivative
    stencil width of either boundary are excluded, so neither closure
    values nor the anchored edge nodes enter the measurement.
    """
    grid = profile.grid
    m = grid.m
    if m < 4:
        raise ParameterError("residual measurement needs m >= 4")
    N = grid.n_points
    if N < 2 * m + 5:
        raise ParameterError("grid too small for an interior residual")
    phi = profile.values
    h = grid.h
    dphi = (phi[:, :-4] - 8 * phi[:, 1:-3] + 8 * phi[:, 3:-1] - phi[:, 4:]) \
        / (12 * h)
    lap = shift_laplacian(phi, grid, sys.K)[:, 2:-2]
    R = profile.c * dphi - sys.d[:, None] * lap \
        - np.asarray(sys.f(phi[:, 2:-2]))
    return float(np.max(np.abs(R[:, m:R.shape[1] - m])))


@dataclass(frozen=True)
class BoundaryVerdict:
    passed: bool
    left_worst: float
    right_worst: float
    tol: float
    tail_fraction: float


def check_boundary_limits(profile: WaveProfile, tail_fraction: float = 0.05,
                          tol: float = 1e-4, K=None) -> BoundaryVerdict:
    """Do the two tails sit within ``tol`` of 0 and K?

    ``K`` defaults to the profile's right-edge values; pass the system's
    equilibrium for an independent check.
    """
    if not (0.0 < tail_fraction < 0.25):
        raise ParameterError("tail_fraction must lie in (0, 0.25)")
    if K is None:
        K = profile.values[:, -1]
    K = np.asarray(K, dtype=float)
    n_tail = max(1, int(tail_fraction * profile.grid.n_points))
    left = float(np.max(np.abs(profile.values[:, :n_tail])))
    right = float(np.max(np.abs(profile.values[:, -n_tail:] - K[:, None])))
    return BoundaryVerdict(passed=(left <= tol and right <= tol),
                           left_worst=left, right_worst=right, tol=tol,
                           tail_fraction=tail_fraction)


def solve_profile(sys: ReactionSystem, c: Optional[float] = None,
                  c_multiplier: Optional[float] = None, m: int = 10,
                  L: float = 40.0, tol: float = 1e-8, max_iter: int = 2000,
                  shift: Optional[float] = None,
                  beta: Optional[float] = None,
                  epsilon: Optional[float] = None,
                  spectral: Optional[SpectralReport] = None) -> WaveProfile:
    """End-to-end profile solve: analysis, ordered pair, monotone iteration.

    Refuses speeds not comfortably above the threshold (c must exceed
    c_star * (1 + 1e-6)); critical and subcritical fronts are out of scope.
    """
    params = CharParams.from_system(sys)
    if spectral is None:
        spectral = compute_spectral_report(params, c=c,
                                           c_multiplier=c_multiplier,
                                           epsilon=epsilon)
    c = spectral.c
    if not c > spectral.c_star * (1.0 + 1e-6):
        raise ParameterError(
            f"speed c = {c:g} is not above the threshold "
            f"c_star = {spectral.c_star:g} with working margin; "
            "no supercritical front to compute")
    grid = ProfileGrid(m, L)
    pair = build_supersub_pair(sys, spectral, grid, shift=shift)
    profile = monotone_iterate(sys, c, pair, beta=beta, tol=tol,
                               max_iter=max_iter, spectral=spectral)
    # The weight switch point needs the solved profile; attach it now.
    from .spectral import select_weight_params
    gamma, xi0, pq = select_weight_params(c, params, spectral.epsilon,
                                          system=sys, profile=profile)
    return WaveProfile(grid=profile.grid, c=profile.c, values=profile.values,
                       spectral=spectral.with_xi0(xi0),
                       iterations=profile.iterations,
                       final_delta=profile.final_delta,
                       residual=profile.residual, shift=profile.shift)


def truncation_study(sys: ReactionSystem, c_multiplier: float = 1.1,
                     m: int = 10, L: float = 40.0, factor: float = 1.5,
                     tol: float = 1e-8, **kw) -> float:
    """Max mismatch between solves at widths L and factor*L on the shared
    window; monitors the truncation bias of the finite domain."""
    p1 = solve_profile(sys, c_multiplier=c_multiplier, m=m, L=L, tol=tol, **kw)
    L2 = math.ceil(factor * L)
    # hold the translate fixed so the comparison sees pure truncation bias
    p2 = solve_profile(sys, c_multiplier=c_multiplier, m=m, L=L2, tol=tol,
                       shift=p1.shift, **kw)
    off = p1.grid.j_lo - p2.grid.j_lo
    seg = p2.values[:, off:off + p1.grid.n_points]
    return float(np.max(np.abs(seg - p1.values)))


# ---------------------------------------------------------------------------
# Serialization: delimited text, one row per node, header with the context.

PROFILE_FORMAT_VERSION = 1


def save_profile(profile: WaveProfile, path):
    rec = profile.spectral.to_record() if profile.spectral else {}
    with open(path, "w") as fh:
        fh.write(f"# latticefronts-profile v{PROFILE_FORMAT_VERSION}\n")
        fh.write(f"# c {profile.c:.17g}\n")
        fh.write(f"# m {profile.grid.m}\n")
        fh.write(f"# j_lo {profile.grid.j_lo}\n")
        fh.write(f"# j_hi {profile.grid.j_hi}\n")
        fh.write(f"# n {profile.n}\n")
        fh.write(f"# iterations {profile.iterations}\n")
        fh.write(f"# final_delta {profile.final_delta:.17g}\n")
        fh.write(f"# residual {profile.residual:.17g}\n")
        if profile.shift is not None:
            fh.write(f"# shift {profile.shift:.17g}\n")
        if profile.spectral is not None:
            fh.write(f"# spectral_digest {profile.spectral.digest()}\n")
            for key, val in rec.items():
                fh.write(f"# spectral.{key} {val}\n")
        cols = "\t".join(f"phi{i + 1}" for i in range(profile.n))
        fh.write(f"xi\t{cols}\n")
        for j, x in enumerate(profile.grid.xi):
            row = "\t".join(f"{profile.values[i, j]:.17g}"
                            for i in range(profile.n))
            fh.write(f"{x:.17g}\t{row}\n")


def load_profile(path) -> WaveProfile:
    meta = {}
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line.startswith("# "):
                parts = line[2:].split(" ", 1)
                if len(parts) == 2:
                    meta[parts[0]] = parts[1]
            elif line and not line.startswith("xi"):
                rows.append([float(tk) for tk in line.split("\t")])
    data = np.array(rows).T
    grid = ProfileGrid(int(meta["m"]), j_lo=int(meta["j_lo"]),
                       j_hi=int(meta["j_hi"]))
    shift = float(meta["shift"]) if "shift" in meta else None
    return WaveProfile(grid=grid, c=float(meta["c"]), values=data[1:],
                       iterations=int(meta.get("iterations", 0)),
                       final_delta=float(meta.get("final_delta", "nan")),
                       residual=float(meta.get("residual", "nan")),
                       shift=shift)
