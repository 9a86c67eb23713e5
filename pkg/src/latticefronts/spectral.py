"""Linearization analysis of the wave profile equations at the equilibria.

The traveling-wave ansatz turns the lattice system into advance-delay
profile equations; substituting pure exponentials exp(lambda*xi) into their
linearization at an equilibrium gives the characteristic function

    P(lambda, c) = det J(lambda, c),
    J(lambda, c)[i, i] = d_i*(e**lambda + e**-lambda - 2) - c*lambda + A[i, i],
    J(lambda, c)[i, j] = A[i, j]   (i != j),

with A the Jacobian of the kinetics at that equilibrium.  For two
components P factors as f1*f2 - beta1*beta2 with
f_i(lambda, c) = d_i*(e**lambda + e**-lambda - 2) + alpha_i - c*lambda.

This module locates the threshold speed (tangency of P in lambda), the
decay exponents lambda1 < lambda2 for supercritical speeds, the stable-side
root lambda_bar, the exponential weight used by the stability monitors, and
positive vectors solving the strict inequality system A x < 0 that closes
the weighted energy argument.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .errors import BracketError, DomainError, ParameterError

_LAMBDA_CAP = 50.0  # declared search bound for all root brackets


@dataclass(frozen=True)
class CharParams:
    """Inputs of the characteristic functions: diffusions and Jacobians."""

    n: int
    d: np.ndarray
    A0: np.ndarray
    AK: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        A0 = np.asarray(self.A0, dtype=float)
        AK = np.asarray(self.AK, dtype=float)
        if d.shape != (self.n,):
            raise ParameterError(f"d must have shape ({self.n},)")
        if A0.shape != (self.n, self.n) or AK.shape != (self.n, self.n):
            raise ParameterError(f"A0, AK must have shape ({self.n}, {self.n})")
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "A0", A0)
        object.__setattr__(self, "AK", AK)

    @classmethod
    def from_system(cls, sys) -> "CharParams":
        jac = sys.jacobians()
        return cls(n=sys.n, d=sys.d, A0=jac.A0, AK=jac.AK)

    def _matrix(self, at: str) -> np.ndarray:
        if at == "zero":
            return self.A0
        if at == "K":
            return self.AK
        raise ParameterError(f"at must be 'zero' or 'K', got {at!r}")


def eval_f_i(i: int, lam, c: float, params: CharParams, at: str = "zero"):
    """Diagonal characteristic factor d_i*(e^l + e^-l - 2) + alpha_i - c*l."""
    lam = np.asarray(lam, dtype=float)
    A = params._matrix(at)
    out = params.d[i] * (np.exp(lam) + np.exp(-lam) - 2.0) + A[i, i] - c * lam
    return out if out.ndim else float(out)


def char_matrix(lam: float, c: float, params: CharParams, at: str = "zero") -> np.ndarray:
    """Full characteristic matrix J(lambda, c) at one lambda."""
    A = params._matrix(at)
    J = A.astype(float).copy()
    shift = np.exp(lam) + np.exp(-lam) - 2.0
    for i in range(params.n):
        J[i, i] = params.d[i] * shift - c * lam + A[i, i]
    return J


def eval_char_poly(lam, c: float, params: CharParams, at: str = "zero"):
    """P(lambda, c) = det J(lambda, c); product form for two components."""
    if params.n == 2:
        A = params._matrix(at)
        f1 = eval_f_i(0, lam, c, params, at)
        f2 = eval_f_i(1, lam, c, params, at)
        out = np.asarray(f1) * np.asarray(f2) - A[0, 1] * A[1, 0]
        return out if out.ndim else float(out)
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    dets = np.array([np.linalg.det(char_matrix(l, c, params, at)) for l in lam])
    return dets if dets.size > 1 else float(dets[0])


def _golden_max(fun, a: float, b: float, tol: float = 1e-12, max_iter: int = 200):
    """Golden-section maximization of a unimodal function on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = fun(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = fun(x1)
    xm = 0.5 * (a + b)
    return xm, fun(xm)


def _require_positive_diffusion(params: CharParams, what: str):
    if np.any(params.d <= 0):
        raise ParameterError(
            f"{what} requires strictly positive diffusion coefficients; "
            f"got d = {params.d.tolist()}"
        )


def _diag_factor_root(i: int, c: float, params: CharParams, at: str = "zero") -> float:
    """Positive root of the diagonal factor f_i(., c); unique when it exists."""
    f = lambda lam: eval_f_i(i, lam, c, params, at)
    if f(0.0) >= 0:
        raise ParameterError(
            f"f_{i + 1}(0, c) = {f(0.0):g} >= 0; negative diagonal rate required")
    hi = 1.0
    while f(hi) <= 0:
        hi *= 2.0
        if hi > _LAMBDA_CAP:
            raise BracketError(
                f"no sign change of diagonal factor f_{i + 1}(., c={c:g}) on "
                f"(0, {_LAMBDA_CAP:g}]; bracket for its positive root failed")
    root = brentq(f, hi / 2.0 if f(hi / 2.0) < 0 else 1e-14, hi, xtol=1e-14)
    # One Newton polish; the analytic slope is cheap and sharpens the root
    # to machine precision.
    slope = params.d[i] * (math.exp(root) - math.exp(-root)) - c
    if slope != 0:
        root -= f(root) / slope
    return float(root)


def lambda_m_plus(c: float, params: CharParams, at: str = "zero") -> float:
    """Smallest positive root over i of the diagonal factors f_i(., c)."""
    _require_positive_diffusion(params, "diagonal-factor root bracketing")
    return min(_diag_factor_root(i, c, params, at) for i in range(params.n))


def find_positive_roots(c: float, params: CharParams,
                        res_tol: float = 1e-10) -> Optional[tuple]:
    """Two positive roots lambda1 < lambda2 of P(., c), or None below threshold.

    For supercritical speeds P is negative at 0, rises to a positive maximum
    inside (0, lambda_m_plus) and returns to -beta1*beta2 < 0 there; the two
    crossings bracket the interval where P > 0.  Returns None when the
    interior maximum is negative.
    """
    if c <= 0:
        raise ParameterError("wave speed c must be positive")
    if params.n != 2:
        raise ParameterError("decay-exponent roots are defined for n = 2; "
                             "use the majorant interval for general systems")
    lam_hi = lambda_m_plus(c, params)
    P = lambda lam: eval_char_poly(lam, c, params, at="zero")
    if P(0.0) >= 0:
        raise ParameterError(
            "characteristic value at lambda=0 must be negative "
            "(unstable-side cross terms must dominate the diagonal product)")

    grid = np.linspace(0.0, lam_hi, 2049)
    vals = np.asarray(P(grid))
    k = int(np.argmax(vals))
    a = grid[max(k - 1, 0)]
    b = grid[min(k + 1, len(grid) - 1)]
    lam_max, p_max = _golden_max(P, a, b)
    scale = float(np.max(np.abs(vals)))
    if p_max <= 0:
        return None

    lam1 = brentq(P, 0.0, lam_max, xtol=1e-15, rtol=8.9e-16)
    lam2 = brentq(P, lam_max, lam_hi, xtol=1e-15, rtol=8.9e-16)

    def polish(lam):
        # Newton against the analytic slope; kept only while it reduces |P|
        # (near the tangency the roots almost coalesce and Newton can jump).
        for _ in range(2):
            f1 = eval_f_i(0, lam, c, params)
            f2 = eval_f_i(1, lam, c, params)
            dshift = math.exp(lam) - math.exp(-lam)
            slope = (params.d[0] * dshift - c) * f2 + f1 * (params.d[1] * dshift - c)
            if slope == 0:
                break
            cand = lam - P(lam) / slope
            if abs(P(cand)) < abs(P(lam)):
                lam = cand
            else:
                break
        return lam

    lam1, lam2 = polish(lam1), polish(lam2)
    if abs(P(lam1)) > res_tol * scale or abs(P(lam2)) > res_tol * scale:
        raise BracketError(
            f"root residuals {P(lam1):.3e}, {P(lam2):.3e} exceed "
            f"{res_tol:g} * {scale:.3e}")
    if not (0.0 < lam1 <= lam2):
        return None
    return float(lam1), float(lam2)


def _interior_max(c: float, params: CharParams):
    """Max of P(., c) over (0, lambda_m_plus); helper for the tangency search."""
    lam_hi = lambda_m_plus(c, params)
    P = lambda lam: eval_char_poly(lam, c, params, at="zero")
    grid = np.linspace(0.0, lam_hi, 2049)
    vals = np.asarray(P(grid))
    k = int(np.argmax(vals[1:-1])) + 1
    lam_max, p_max = _golden_max(P, grid[k - 1], grid[k + 1])
    return lam_max, p_max


def compute_c_star(params: CharParams, c_tol: float = 1e-8,
                   c_max: float = 1e6) -> float:
    """Threshold speed: the c at which P(., c) is tangent to zero from below.

    The interior maximum of P over (0, lambda_m_plus) is strictly increasing
    in c, negative for small c and positive for large c; bisection on c
    locates the tangency to ``c_tol``.
    """
    _require_positive_diffusion(params, "threshold-speed computation")
    if params.n != 2:
        raise ParameterError("tangency threshold is defined for n = 2; "
                             "use compute_c_star_lower for general systems")
    g = lambda c: _interior_max(c, params)[1]
    lo = 1e-6
    g_lo = g(lo)
    if g_lo >= 0:
        raise ParameterError(
            f"interior maximum already nonnegative at c = {lo:g} "
            f"(value {g_lo:.3e}); no tangency in range")
    hi = 1.0
    g_hi = g(hi)
    while g_hi <= 0:
        hi *= 2.0
        if hi > c_max:
            raise BracketError(
                f"interior maximum stays negative up to c = {c_max:g} "
                f"(last value {g_hi:.3e}); threshold out of range")
        g_hi = g(hi)
    while hi - lo > c_tol:
        mid = 0.5 * (lo + hi)
        if g(mid) > 0:
            hi = mid
        else:
            lo = mid
    # The upper endpoint keeps the interior maximum nonnegative, so the two
    # decay exponents still exist at the returned threshold itself.
    return hi


def compute_c_star_lower(params: CharParams) -> float:
    """Speed below which no interval of negative diagonals exists.

    Minimizes (d_M*(e^l + e^-l - 2) + alpha_M)/l over l > 0 with d_M the
    largest diffusion coefficient and alpha_M the largest diagonal rate at
    the zero state.  Boundary behavior: 0 when alpha_M == 0 (infimum at
    l -> 0+) or when d_M == 0 with alpha_M > 0 (infimum at l -> inf);
    -inf when alpha_M < 0.
    """
    d_M = float(np.max(params.d))
    alpha_M = float(np.max(np.diag(params.A0)))
    if alpha_M < 0:
        return float("-inf")
    if alpha_M == 0.0 or d_M == 0.0:
        return 0.0

    def q(lam):
        return (d_M * (math.exp(lam) + math.exp(-lam) - 2.0) + alpha_M) / lam

    hi = 1.0
    while q(2.0 * hi) <= q(hi):
        hi *= 2.0
        if hi > 256.0:
            raise BracketError("minimizer bracket for the speed quotient failed")
    lam_min, neg = _golden_max(lambda l: -q(l), 1e-12, 2.0 * hi, tol=1e-14)
    return float(-neg)


def find_lambda_bar(c: float, params: CharParams, eps_check: float = 1e-3) -> float:
    """Positive root of the stable-side characteristic function P_bar.

    Returns the root lambda_bar with P_bar < 0 immediately to its left: the
    unique sign change beyond the largest positive root of the stable-side
    diagonal factors, where both factors have turned positive and their
    product climbs back through the cross term.
    """
    if c <= 0:
        raise ParameterError("wave speed c must be positive")
    _require_positive_diffusion(params, "stable-side root bracketing")
    AK = params.AK
    if not (AK[0, 0] < 0 and AK[1, 1] < 0 and params.n == 2):
        raise ParameterError("stable-side root requires n = 2 with negative "
                             "diagonal rates at K")
    cross = AK[0, 1] * AK[1, 0]
    if not (AK[0, 0] * AK[1, 1] > cross > 0):
        raise ParameterError(
            "stable-side sign conditions violated: need "
            "alpha1_bar*alpha2_bar > beta1_bar*beta2_bar > 0")
    Pbar = lambda lam: eval_char_poly(lam, c, params, at="K")
    lam_lo = max(_diag_factor_root(i, c, params, at="K") for i in range(2))
    assert Pbar(lam_lo) < 0
    hi = lam_lo + 0.5
    while Pbar(hi) <= 0:
        hi += 0.5
        if hi > _LAMBDA_CAP:
            raise BracketError(
                f"no sign change of the stable-side characteristic function on "
                f"({lam_lo:g}, {_LAMBDA_CAP:g}]")
    root = float(brentq(Pbar, lam_lo, hi, xtol=1e-14))
    if not Pbar(root - eps_check) < 0:
        raise BracketError(
            f"root verification failed: P_bar({root - eps_check:g}) = "
            f"{Pbar(root - eps_check):.3e} not negative")
    return root


# ---------------------------------------------------------------------------
# Positive vectors for strict inequality systems


@dataclass(frozen=True)
class SignConditionEntry:
    k: int
    j: int
    determinant: float
    passed: bool


@dataclass(frozen=True)
class SignConditionCheck:
    ok: bool
    entries: tuple

    def __bool__(self):
        return self.ok


def _check_sign_pattern(A: np.ndarray):
    n = A.shape[0]
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DomainError("matrix must be square")
    for i in range(n):
        if A[i, i] > 0:
            raise DomainError(f"diagonal entry A[{i},{i}] = {A[i, i]:g} must be <= 0")
        for j in range(n):
            if i != j and A[i, j] < 0:
                raise DomainError(
                    f"off-diagonal entry A[{i},{j}] = {A[i, j]:g} must be >= 0")


def check_sign_determinants(A) -> SignConditionCheck:
    """Alternating-sign determinant conditions for solvability of Ax < 0, x > 0.

    For each k and each j > k the submatrix on rows/columns {1..k, j} must
    satisfy (-1)**(k-1) * det > 0.  For n = 2 this is exactly det A > 0.
    The n = 1 condition set is empty (vacuously true); pair with the
    constructive check of :func:`positive_vector` for that corner.
    """
    A = np.asarray(A, dtype=float)
    _check_sign_pattern(A)
    n = A.shape[0]
    entries = []
    ok = True
    for k in range(1, n):
        for j in range(k + 1, n + 1):
            idx = list(range(k)) + [j - 1]
            sub = A[np.ix_(idx, idx)]
            det = float(np.linalg.det(sub))
            passed = ((-1.0) ** (k - 1)) * det > 0
            ok = ok and passed
            entries.append(SignConditionEntry(k=k, j=j, determinant=det,
                                              passed=passed))
    return SignConditionCheck(ok=ok, entries=tuple(entries))


def positive_vector(A, tol: float = 1e-12) -> Optional[np.ndarray]:
    """Strictly positive x with Ax < 0 componentwise, or None if none exists.

    Requires nonpositive diagonal and nonnegative off-diagonal entries.  When
    the determinant conditions hold, -A is inverse-positive and
    x = (-A)^{-1} * ones solves Ax = -ones; the output is normalized to
    max(x) = 1 and verified against A x < -tol*|A|*|x| before being returned,
    so near-degenerate inputs fall back to None rather than a bogus vector.
    """
    A = np.asarray(A, dtype=float)
    check = check_sign_determinants(A)
    if not check.ok:
        return None
    try:
        x = np.linalg.solve(-A, np.ones(A.shape[0]))
    except np.linalg.LinAlgError:
        return None
    if not np.all(x > 0):
        return None
    x = x / np.max(x)
    bound = -tol * np.linalg.norm(A, np.inf) * np.max(np.abs(x))
    if not np.all(A @ x < bound):
        return None
    return x


# ---------------------------------------------------------------------------
# Stability weight


@dataclass(frozen=True)
class Weight:
    """Exponential stability weight: omega = exp(-gamma*(xi - xi0)) left of xi0, 1 after.

    ``omega1`` is the unclamped exponential used inside the weighted-L1
    monitors; omega = max(omega1, 1).
    """

    gamma: float
    xi0: float

    def omega(self, xi):
        xi = np.asarray(xi, dtype=float)
        out = np.where(xi <= self.xi0, np.exp(-self.gamma * (xi - self.xi0)), 1.0)
        return out if out.ndim else float(out)

    def omega1(self, xi):
        xi = np.asarray(xi, dtype=float)
        out = np.exp(-self.gamma * (xi - self.xi0))
        return out if out.ndim else float(out)

    def __call__(self, xi):
        return self.omega(xi)


def build_weight(gamma: float, xi0: float) -> Weight:
    if not gamma > 0:
        raise ParameterError(f"weight exponent gamma must be positive, got {gamma}")
    return Weight(gamma=float(gamma), xi0=float(xi0))


def kernel_eigenvector(lambda1: float, c: float, params: CharParams) -> np.ndarray:
    """Positive null vector of J(lambda1, c) for the two-component system.

    With P(lambda1, c) = 0 the matrix has the explicit null direction
    (beta1, -f1(lambda1, c)); both entries are positive when beta1 > 0 and
    f1(lambda1, c) < 0.  Normalized to max-norm 1.
    """
    if params.n != 2:
        raise ParameterError("kernel eigenvector is defined for n = 2")
    beta1 = params.A0[0, 1]
    f1 = eval_f_i(0, lambda1, c, params)
    if beta1 <= 0 or f1 >= 0:
        raise ParameterError(
            f"positivity failure: beta1 = {beta1:g} must be > 0 and "
            f"f1(lambda1, c) = {f1:g} must be < 0")
    eta = np.array([beta1, -f1], dtype=float)
    eta /= np.max(eta)
    residual = float(np.max(np.abs(char_matrix(lambda1, c, params) @ eta)))
    if residual > 1e-8:
        raise ParameterError(
            f"null-vector residual {residual:.3e} exceeds 1e-8; "
            "lambda1 is not a characteristic root to tolerance")
    return eta


def select_weight_params(c: float, params: CharParams, epsilon: Optional[float] = None,
                         system=None, profile=None):
    """Weight exponent gamma, switch point xi0, and energy coefficients (p, q).

    gamma = lambda1 + epsilon stays strictly inside (lambda1, lambda2) so the
    characteristic value P(gamma, c) is positive and both diagonal factors
    are negative; (p, q) solves the transposed strict inequality system

        p*f1(gamma, c) + q*beta2 < 0,    p*beta1 + q*f2(gamma, c) < 0.

    The switch point is chosen constructively when a solved profile is
    supplied: the smallest grid point beyond which the four stable-side
    integrand combinations stay positive, plus one unit of margin.  Without
    a profile, xi0 is returned as None.
    """
    roots = find_positive_roots(c, params)
    if roots is None:
        raise ParameterError(f"speed c = {c:g} is at or below the threshold; "
                             "no positive decay exponents exist")
    lam1, lam2 = roots
    gap = lam2 - lam1
    if epsilon is None:
        epsilon = 0.1 * gap
    if not (0.0 < epsilon < 0.5 * gap):
        raise ParameterError(
            f"epsilon = {epsilon:g} outside the admissible range "
            f"(0, {0.5 * gap:g}) = (0, (lambda2 - lambda1)/2)")
    gamma = lam1 + epsilon
    f1 = eval_f_i(0, gamma, c, params)
    f2 = eval_f_i(1, gamma, c, params)
    Pg = eval_char_poly(gamma, c, params)
    if not (Pg > 0 and f1 < 0 and f2 < 0):
        raise ParameterError(
            f"weight exponent gamma = {gamma:g} invalid: P(gamma) = {Pg:.3e}, "
            f"f1 = {f1:.3e}, f2 = {f2:.3e}; shrink epsilon")
    beta1, beta2 = params.A0[0, 1], params.A0[1, 0]
    pq = positive_vector(np.array([[f1, beta2], [beta1, f2]]))
    if pq is None:
        raise ParameterError("no positive energy coefficients at this gamma; "
                             "shrink epsilon")

    xi0 = None
    if profile is not None and system is not None:
        grad = np.asarray(system.grad_f(profile.values))  # (2, 2, N)
        h1, h2 = grad[0, 0], grad[0, 1]
        g1, g2 = grad[1, 0], grad[1, 1]
        combos = np.stack([
            -h1 - g1,
            -h2 - g2,
            -h1 - 0.5 * h2 - 0.5 * g1,
            -0.5 * h2 - 0.5 * g1 - g2,
        ])
        positive = np.all(combos > 0, axis=0)
        if not positive[-1]:
            raise ParameterError(
                "stable-side integrand combinations are not positive at the "
                "right edge of the profile grid; enlarge the domain")
        # smallest grid point from which positivity holds everywhere rightward
        suffix_ok = np.cumprod(positive[::-1]).astype(bool)[::-1]
        idx = int(np.argmax(suffix_ok))
        xi = profile.grid.xi
        xi0 = float(xi[idx] + 1.0)
    return float(gamma), xi0, pq


# ---------------------------------------------------------------------------
# Report


@dataclass(frozen=True)
class SpectralReport:
    """Flat record of the linearization analysis at one speed."""

    n: int
    c: float
    c_star: float
    c_star_lower: float
    lambda1: Optional[float] = None
    lambda2: Optional[float] = None
    lambda_bar: Optional[float] = None
    epsilon: Optional[float] = None
    gamma: Optional[float] = None
    xi0: Optional[float] = None
    eta: Optional[np.ndarray] = None
    pq: Optional[np.ndarray] = None

    def to_record(self) -> dict:
        rec = {"n": self.n, "c": self.c, "c_star": self.c_star,
               "c_star_lower": self.c_star_lower}
        for name in ("lambda1", "lambda2", "lambda_bar", "epsilon", "gamma", "xi0"):
            val = getattr(self, name)
            rec[name] = None if val is None else float(val)
        for name in ("eta", "pq"):
            vec = getattr(self, name)
            if vec is None:
                rec[name] = None
            else:
                rec[name] = [float(v) for v in np.asarray(vec)]
        return rec

    def digest(self) -> str:
        blob = json.dumps(self.to_record(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def with_xi0(self, xi0: float) -> "SpectralReport":
        return replace(self, xi0=xi0)


def compute_spectral_report(params: CharParams, c: Optional[float] = None,
                            c_multiplier: Optional[float] = None,
                            epsilon: Optional[float] = None) -> SpectralReport:
    """Full two-component analysis at an explicit speed or a multiple of c*."""
    if params.n != 2:
        raise ParameterError("spectral reports cover n = 2; use "
                             "compute_c_star_lower and positive_vector for "
                             "general systems")
    c_star = compute_c_star(params)
    c_lower = compute_c_star_lower(params)
    if c is None:
        if c_multiplier is None:
            raise ParameterError("provide either c or c_multiplier")
        c = c_multiplier * c_star
    roots = find_positive_roots(c, params)
    if roots is None:
        return SpectralReport(n=2, c=float(c), c_star=c_star, c_star_lower=c_lower)
    lam1, lam2 = roots
    gamma, xi0, pq = select_weight_params(c, params, epsilon)
    eta = kernel_eigenvector(lam1, c, params)
    return SpectralReport(
        n=2, c=float(c), c_star=c_star, c_star_lower=c_lower,
        lambda1=lam1, lambda2=lam2, lambda_bar=find_lambda_bar(c, params),
        epsilon=float(gamma - lam1), gamma=gamma, xi0=xi0, eta=eta, pq=pq,
    )
