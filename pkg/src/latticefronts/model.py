"""Cooperative reaction systems on the order interval [0, K].

A :class:`ReactionSystem` bundles the diffusion coefficients, the reaction
vector field f with its first and second partials, and the positive
equilibrium K of a system

    du_i/dt = d_i * (discrete Laplacian of u_i) + f_i(u),   i = 1..n,

whose kinetics vanish at 0 and at K.  The module ships two epidemic-type
two-component models (saturating Holling-II incidence and Ricker-type
recruitment) with closed-form equilibria and derivatives, and an auditor
that samples the structural hypotheses (cooperativity, sign patterns of the
linearizations, concavity, stable-side column sums) the wave machinery
relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, ParameterError

# Closed-form equilibria make the residual at 0 and K pure round-off; the
# tolerance only needs to absorb that.
EQUILIBRIUM_RTOL = 1e-12


def _as_vector(x, n, name):
    v = np.asarray(x, dtype=float)
    if v.shape != (n,):
        raise ParameterError(f"{name} must have shape ({n},), got {v.shape}")
    return v


@dataclass(frozen=True)
class EpidemicForm:
    """Scalar decomposition f = (-a1*u1 + hbar(u2), -a2*u2 + gbar(u1)).

    Present only for systems built from one-variable transmission and
    recruitment curves; enables the scalar hypothesis checks (B1)-(B4).
    """

    a1: float
    a2: float
    hbar: Callable
    gbar: Callable
    hbar_d1: Callable
    hbar_d2: Callable
    gbar_d1: Callable
    gbar_d2: Callable


@dataclass(frozen=True)
class ReactionSystem:
    """Immutable n-component reaction system with explicit derivatives.

    ``f``, ``grad_f`` and ``hess_f`` accept a state of shape (n,) or a batch
    of states stacked as (n, N) and return arrays of shape (n,), (n, n) and
    (n, n, n) with the batch axis appended.  ``grad_f(u)[i, j]`` is
    d f_i / d u_j and ``hess_f(u)[i, j, k]`` is d^2 f_i / (d u_j d u_k).
    """

    n: int
    d: np.ndarray
    f: Callable
    grad_f: Callable
    hess_f: Callable
    K: np.ndarray
    label: str = "custom"
    epidemic: Optional[EpidemicForm] = None

    def __post_init__(self):
        object.__setattr__(self, "d", _as_vector(self.d, self.n, "d"))
        object.__setattr__(self, "K", _as_vector(self.K, self.n, "K"))
        if np.any(self.d < 0):
            raise ParameterError("diffusion coefficients must satisfy d_i >= 0")
        if np.any(self.K <= 0):
            raise ParameterError("equilibrium must satisfy K_i > 0")
        tol = EQUILIBRIUM_RTOL * self.scale()
        r0 = float(np.max(np.abs(np.asarray(self.f(np.zeros(self.n))))))
        rK = float(np.max(np.abs(np.asarray(self.f(self.K.copy())))))
        if r0 > tol or rK > tol:
            raise ParameterError(
                f"kinetics do not vanish at the equilibria: |f(0)|={r0:.3e}, "
                f"|f(K)|={rK:.3e}, tolerance {tol:.3e}"
            )

    def scale(self) -> float:
        """Magnitude used to normalize equilibrium residuals."""
        return max(1.0, float(np.max(np.abs(self.K))))

    def jacobians(self) -> "JacobianData":
        return JacobianData.from_system(self)


@dataclass(frozen=True)
class JacobianData:
    """Jacobians of the kinetics at the two equilibria."""

    A0: np.ndarray
    AK: np.ndarray

    @classmethod
    def from_system(cls, sys: ReactionSystem) -> "JacobianData":
        A0 = np.asarray(sys.grad_f(np.zeros(sys.n)), dtype=float)
        AK = np.asarray(sys.grad_f(sys.K.copy()), dtype=float)
        return cls(A0=A0, AK=AK)

    # Two-component naming: alpha_i are the diagonal rates, beta_1 the
    # cross-activation of component 1 by component 2 and beta_2 vice versa.
    @property
    def alpha1(self):
        return self.A0[0, 0]

    @property
    def alpha2(self):
        return self.A0[1, 1]

    @property
    def beta1(self):
        return self.A0[0, 1]

    @property
    def beta2(self):
        return self.A0[1, 0]

    @property
    def alpha1_bar(self):
        return self.AK[0, 0]

    @property
    def alpha2_bar(self):
        return self.AK[1, 1]

    @property
    def beta1_bar(self):
        return self.AK[0, 1]

    @property
    def beta2_bar(self):
        return self.AK[1, 0]


def equilibrium_residual(sys: ReactionSystem, point) -> float:
    """Max-norm of the kinetics at ``point``; 0 exactly at an equilibrium.

    ``point`` must lie in the rectangle [0, K] componentwise.
    """
    p = _as_vector(point, sys.n, "point")
    slack = 1e-12 * sys.scale()
    if np.any(p < -slack) or np.any(p > sys.K + slack):
        raise DomainError(f"point {p} lies outside the rectangle [0, K]")
    return float(np.max(np.abs(np.asarray(sys.f(p)))))


# ---------------------------------------------------------------------------
# Built-in models


def make_holling2_model(a1, a2, d1, d2, alpha1, alpha2, beta1, beta2,
                        gamma1, gamma2) -> ReactionSystem:
    """Two-component epidemic model with saturating (Holling-II) responses.

    Kinetics
        f1(u) = -a1*u1 + alpha1*u2 / (beta1 + gamma1*u2),
        f2(u) = -a2*u2 + alpha2*u1 / (beta2 + gamma2*u1).

    Requires alpha1*alpha2 > a1*a2*beta1*beta2, which makes the positive
    equilibrium

        K1 = (alpha1*alpha2 - a1*a2*beta1*beta2) / (a1*(a2*beta1*gamma2 + alpha2*gamma1)),
        K2 = (alpha1*alpha2 - a1*a2*beta1*beta2) / (a2*(a1*beta2*gamma1 + alpha1*gamma2)).
    """
    params = dict(a1=a1, a2=a2, d1=d1, d2=d2, alpha1=alpha1, alpha2=alpha2,
                  beta1=beta1, beta2=beta2, gamma1=gamma1, gamma2=gamma2)
    for name, value in params.items():
        if not value > 0:
            raise ParameterError(f"parameter {name} must be positive, got {value}")
    excess = alpha1 * alpha2 - a1 * a2 * beta1 * beta2
    if not excess > 0:
        raise ParameterError(
            "no positive equilibrium: requires alpha1*alpha2 > a1*a2*beta1*beta2 "
            f"(got alpha1*alpha2 = {alpha1 * alpha2:g}, "
            f"a1*a2*beta1*beta2 = {a1 * a2 * beta1 * beta2:g})"
        )
    K1 = excess / (a1 * (a2 * beta1 * gamma2 + alpha2 * gamma1))
    K2 = excess / (a2 * (a1 * beta2 * gamma1 + alpha1 * gamma2))

    def hbar(x):
        return alpha1 * x / (beta1 + gamma1 * x)

    def gbar(x):
        return alpha2 * x / (beta2 + gamma2 * x)

    def hbar_d1(x):
        return alpha1 * beta1 / (beta1 + gamma1 * x) ** 2

    def gbar_d1(x):
        return alpha2 * beta2 / (beta2 + gamma2 * x) ** 2

    def hbar_d2(x):
        return -2.0 * alpha1 * beta1 * gamma1 / (beta1 + gamma1 * x) ** 3

    def gbar_d2(x):
        return -2.0 * alpha2 * beta2 * gamma2 / (beta2 + gamma2 * x) ** 3

    def f(u):
        u = np.asarray(u, dtype=float)
        return np.stack([-a1 * u[0] + hbar(u[1]), -a2 * u[1] + gbar(u[0])])

    def grad_f(u):
        u = np.asarray(u, dtype=float)
        return np.stack([
            np.stack([np.full_like(u[0], -a1), hbar_d1(u[1])]),
            np.stack([gbar_d1(u[0]), np.full_like(u[0], -a2)]),
        ])

    def hess_f(u):
        u = np.asarray(u, dtype=float)
        H = np.zeros((2, 2, 2) + u.shape[1:])
        H[0, 1, 1] = hbar_d2(u[1])
        H[1, 0, 0] = gbar_d2(u[0])
        return H

    return ReactionSystem(
        n=2, d=[d1, d2], f=f, grad_f=grad_f, hess_f=hess_f, K=[K1, K2],
        label="holling2",
        epidemic=EpidemicForm(a1, a2, hbar, gbar, hbar_d1, hbar_d2,
                              gbar_d1, gbar_d2),
    )


def make_ricker_model(a, a1, a2, d1, d2, p, q, m) -> ReactionSystem:
    """Two-component epidemic model with linear transmission and Ricker recruitment.

    Kinetics
        f1(u) = -a1*u1 + a*u2,
        f2(u) = -a2*u2 + p*u1*exp(-q*u1**m).

    Requires 1 < a*p/(a1*a2) <= e**(1/m); the positive equilibrium is then

        K1 = ((1/q) * log(a*p/(a1*a2)))**(1/m),   K2 = a1*K1/a,

    and the recruitment curve is nondecreasing up to K1.
    """
    params = dict(a=a, a1=a1, a2=a2, d1=d1, d2=d2, p=p, q=q, m=m)
    for name, value in params.items():
        if not value > 0:
            raise ParameterError(f"parameter {name} must be positive, got {value}")
    ratio = a * p / (a1 * a2)
    if not (1.0 < ratio <= math.exp(1.0 / m)):
        raise ParameterError(
            f"a*p/(a1*a2) = {ratio:g} outside the admissible interval "
            f"(1, e**(1/m)] = (1, {math.exp(1.0 / m):g}]"
        )
    K1 = (math.log(ratio) / q) ** (1.0 / m)
    K2 = a1 * K1 / a

    def hbar(x):
        return a * np.asarray(x, dtype=float)

    def gbar(x):
        x = np.asarray(x, dtype=float)
        return p * x * np.exp(-q * x ** m)

    def hbar_d1(x):
        return np.full_like(np.asarray(x, dtype=float), a)

    def hbar_d2(x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def gbar_d1(x):
        x = np.asarray(x, dtype=float)
        return p * (1.0 - q * m * x ** m) * np.exp(-q * x ** m)

    def gbar_d2(x):
        # x**(m-1) is singular at 0 for m < 1; the one-sided limit is used.
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = p * q * m * x ** (m - 1.0) * np.exp(-q * x ** m) \
                * (q * m * x ** m - 1.0 - m)
        if m > 1:
            val = np.where(x == 0, 0.0, val)
        elif m == 1:
            val = np.where(x == 0, -2.0 * p * q, val)
        else:
            val = np.where(x == 0, -np.inf, val)
        return val

    def f(u):
        u = np.asarray(u, dtype=float)
        return np.stack([-a1 * u[0] + hbar(u[1]), -a2 * u[1] + gbar(u[0])])

    def grad_f(u):
        u = np.asarray(u, dtype=float)
        return np.stack([
            np.stack([np.full_like(u[0], -a1), hbar_d1(u[1])]),
            np.stack([gbar_d1(u[0]), np.full_like(u[0], -a2)]),
        ])

    def hess_f(u):
        u = np.asarray(u, dtype=float)
        H = np.zeros((2, 2, 2) + u.shape[1:])
        H[1, 0, 0] = gbar_d2(u[0])
        return H

    return ReactionSystem(
        n=2, d=[d1, d2], f=f, grad_f=grad_f, hess_f=hess_f, K=[K1, K2],
        label="ricker",
        epidemic=EpidemicForm(a1, a2, hbar, gbar, hbar_d1, hbar_d2,
                              gbar_d1, gbar_d2),
    )


# ---------------------------------------------------------------------------
# Hypothesis audit


@dataclass(frozen=True)
class Witness:
    """Sample point and quantity that violated a hypothesis."""

    point: tuple
    quantity: str
    value: float


@dataclass(frozen=True)
class HypothesisVerdict:
    name: str
    passed: bool
    detail: str
    witness: Optional[Witness] = None


@dataclass
class HypothesisReport:
    """Per-hypothesis verdicts from a sampled audit of the rectangle [0, K].

    A failed verdict always carries a witness.  ``caveats`` records checks
    that sampling cannot decide (e.g. global uniqueness of the equilibria).
    """

    verdicts: dict = field(default_factory=dict)
    sample_density: int = 0
    caveats: list = field(default_factory=list)

    def __getitem__(self, name: str) -> HypothesisVerdict:
        return self.verdicts[name]

    def __contains__(self, name: str) -> bool:
        return name in self.verdicts

    def names(self):
        return list(self.verdicts)

    def failures(self):
        return [v for v in self.verdicts.values() if not v.passed]

    def passed(self, names=None) -> bool:
        names = self.names() if names is None else names
        return all(self.verdicts[n].passed for n in names)

    def to_records(self):
        """One flat record per hypothesis, suitable for tabular output."""
        rows = []
        for v in self.verdicts.values():
            rows.append({
                "hypothesis": v.name,
                "passed": v.passed,
                "detail": v.detail,
                "witness_point": "" if v.witness is None
                                 else ";".join(f"{x:.17g}" for x in v.witness.point),
                "witness_quantity": "" if v.witness is None else v.witness.quantity,
                "witness_value": "" if v.witness is None
                                 else f"{v.witness.value:.17g}",
            })
        return rows


def _sample_rectangle(K, samples_per_axis):
    axes = [np.linspace(0.0, Ki, samples_per_axis) for Ki in K]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh])  # (n, samples_per_axis**n)


def audit_hypotheses(sys: ReactionSystem, samples_per_axis: int = 33) -> HypothesisReport:
    """Evaluate every applicable structural hypothesis on a sampled grid.

    Strict inequalities failing at equality are reported as failures.
    Failures are reported, never raised.
    """
    if samples_per_axis < 2:
        raise ParameterError("samples_per_axis must be at least 2")
    if samples_per_axis ** sys.n > 2_000_000:
        raise ParameterError("sample grid too large; lower samples_per_axis")

    report = HypothesisReport(sample_density=samples_per_axis)
    pts = _sample_rectangle(sys.K, samples_per_axis)
    grad = np.asarray(sys.grad_f(pts))      # (n, n, P)
    hess = np.asarray(sys.hess_f(pts))      # (n, n, n, P)
    jac = sys.jacobians()
    tol = EQUILIBRIUM_RTOL * sys.scale()

    def add(name, passed, detail, witness=None):
        if not passed and witness is None:
            witness = Witness(tuple(sys.K), detail, float("nan"))
        report.verdicts[name] = HypothesisVerdict(name, bool(passed), detail, witness)

    # --- equilibria (two-component H1 and general A1 share the check)
    r0 = float(np.max(np.abs(np.asarray(sys.f(np.zeros(sys.n))))))
    rK = float(np.max(np.abs(np.asarray(sys.f(sys.K.copy())))))
    eq_ok = r0 <= tol and rK <= tol
    eq_detail = f"|f(0)|={r0:.3e}, |f(K)|={rK:.3e}, tol={tol:.3e}"
    eq_witness = None
    if not eq_ok:
        bad = sys.K if rK > r0 else np.zeros(sys.n)
        eq_witness = Witness(tuple(bad), "max |f_i|", max(r0, rK))

    # --- cooperativity: off-diagonal first partials nonnegative on [0, K]
    offdiag_vals = []
    offdiag_labels = []
    for i in range(sys.n):
        for j in range(sys.n):
            if i != j:
                offdiag_vals.append(grad[i, j])
                offdiag_labels.append(f"df{i + 1}/du{j + 1}")
    offdiag_vals = np.stack(offdiag_vals)
    worst_flat = int(np.argmin(offdiag_vals))
    row, col = divmod(worst_flat, offdiag_vals.shape[1])
    coop_worst = float(offdiag_vals[row, col])
    coop_ok = coop_worst >= 0
    coop_witness = None if coop_ok else Witness(
        tuple(pts[:, col]), offdiag_labels[row], coop_worst)
    coop_detail = f"min off-diagonal partial = {coop_worst:.3e}"

    # --- concavity: all second partials nonpositive on [0, K]
    hc = hess.reshape(sys.n ** 3, -1)
    worst_flat = int(np.argmax(hc))
    hrow, hcol = divmod(worst_flat, hc.shape[1])
    i, jk = divmod(hrow, sys.n * sys.n)
    j, k = divmod(jk, sys.n)
    conc_worst = float(hc[hrow, hcol])
    conc_ok = conc_worst <= 0
    conc_witness = None if conc_ok else Witness(
        tuple(pts[:, hcol]), f"d2f{i + 1}/du{j + 1}du{k + 1}", conc_worst)
    conc_detail = f"max second partial = {conc_worst:.3e}"

    if sys.n == 2:
        add("H1", eq_ok, eq_detail, eq_witness)
        add("H2", coop_ok, coop_detail, coop_witness)

        a1_, a2_ = jac.alpha1, jac.alpha2
        b1_, b2_ = jac.beta1, jac.beta2
        ab1, ab2 = jac.alpha1_bar, jac.alpha2_bar
        bb1, bb2 = jac.beta1_bar, jac.beta2_bar
        h3_checks = [
            (a1_ < 0, "alpha1 < 0", a1_, (0.0, 0.0)),
            (a2_ < 0, "alpha2 < 0", a2_, (0.0, 0.0)),
            (ab1 < 0, "alpha1_bar < 0", ab1, tuple(sys.K)),
            (ab2 < 0, "alpha2_bar < 0", ab2, tuple(sys.K)),
            (a1_ * a2_ < b1_ * b2_, "alpha1*alpha2 - beta1*beta2 < 0",
             a1_ * a2_ - b1_ * b2_, (0.0, 0.0)),
            (ab1 * ab2 > bb1 * bb2, "alpha1_bar*alpha2_bar - beta1_bar*beta2_bar > 0",
             ab1 * ab2 - bb1 * bb2, tuple(sys.K)),
            (bb1 * bb2 > 0, "beta1_bar*beta2_bar > 0", bb1 * bb2, tuple(sys.K)),
        ]
        h3_ok = all(c[0] for c in h3_checks)
        h3_witness = None
        if not h3_ok:
            bad = next(c for c in h3_checks if not c[0])
            h3_witness = Witness(bad[3], bad[1], float(bad[2]))
        add("H3", h3_ok,
            f"unstable-side gap {b1_ * b2_ - a1_ * a2_:.3e}, "
            f"stable-side gap {ab1 * ab2 - bb1 * bb2:.3e}", h3_witness)

        combos = [
            ("alpha1_bar + beta2_bar", ab1 + bb2),
            ("alpha2_bar + beta1_bar", ab2 + bb1),
            ("2*alpha1_bar + beta1_bar + beta2_bar", 2 * ab1 + bb1 + bb2),
            ("2*alpha2_bar + beta1_bar + beta2_bar", 2 * ab2 + bb1 + bb2),
        ]
        combo_worst = max(combos, key=lambda c: c[1])
        h4_ok = conc_ok and combo_worst[1] < 0
        h4_witness = conc_witness
        if conc_ok and not h4_ok:
            h4_witness = Witness(tuple(sys.K), combo_worst[0] + " < 0",
                                 float(combo_worst[1]))
        add("H4", h4_ok,
            conc_detail + f"; worst stable-side combination {combo_worst[0]} = "
            f"{combo_worst[1]:.3e}", h4_witness)

    # --- n-component family
    add("A1", eq_ok, eq_detail, eq_witness)
    add("A2", coop_ok, coop_detail, coop_witness)

    colsums = jac.AK.sum(axis=0)
    # Row/column cross sums bound the stable-side quadratic form from above.
    cross = np.array([
        2 * jac.AK[j, j] + sum(jac.AK[i, j] + jac.AK[j, i]
                               for i in range(sys.n) if i != j)
        for j in range(sys.n)
    ])
    a4_lin_ok = bool(np.all(colsums < 0) and np.all(cross < 0))
    a4_ok = conc_ok and a4_lin_ok
    a4_witness = conc_witness
    if conc_ok and not a4_lin_ok:
        if np.any(colsums >= 0):
            j = int(np.argmax(colsums))
            a4_witness = Witness(tuple(sys.K), f"column sum {j + 1} < 0",
                                 float(colsums[j]))
        else:
            j = int(np.argmax(cross))
            a4_witness = Witness(tuple(sys.K), f"cross sum {j + 1} < 0",
                                 float(cross[j]))
    add("A4", a4_ok,
        conc_detail + f"; max column sum {np.max(colsums):.3e}, "
        f"max cross sum {np.max(cross):.3e}", a4_witness)

    # --- scalar epidemic family
    if sys.epidemic is not None:
        ep = sys.epidemic
        K1, K2 = float(sys.K[0]), float(sys.K[1])
        u = np.linspace(0.0, K1, samples_per_axis)
        v = np.linspace(0.0, K2, samples_per_axis)

        zeros = max(abs(float(ep.hbar(0.0))), abs(float(ep.gbar(0.0))))
        k2_res = abs(float(ep.gbar(K1)) / ep.a2 - K2)
        fix_res = abs(float(ep.hbar(float(ep.gbar(K1)) / ep.a2)) - ep.a1 * K1)
        interior = u[1:-1]
        chain = np.asarray(ep.hbar(np.asarray(ep.gbar(interior)) / ep.a2)) \
            - ep.a1 * interior
        idx = int(np.argmin(chain))
        ch_worst = float(chain[idx])
        ch_ok = ch_worst > 0
        b1_ok = zeros <= tol and k2_res <= tol * max(1.0, K2) \
            and fix_res <= tol * max(1.0, K1) and ch_ok
        b1_witness = None
        if not b1_ok:
            if not ch_ok:
                b1_witness = Witness((float(interior[idx]), 0.0),
                                     "hbar(gbar(u)/a2) - a1*u > 0", ch_worst)
            else:
                b1_witness = Witness((K1, K2), "equilibrium relations",
                                     max(zeros, k2_res, fix_res))
        add("B1", b1_ok,
            f"|hbar(0)|,|gbar(0)| <= {zeros:.1e}; equilibrium residuals "
            f"{k2_res:.1e}, {fix_res:.1e}; min chain excess {ch_worst:.3e}",
            b1_witness)

        b2_val = float(ep.hbar_d1(0.0)) * float(ep.gbar_d1(0.0)) - ep.a1 * ep.a2
        add("B2", b2_val > 0,
            f"hbar'(0)*gbar'(0) - a1*a2 = {b2_val:.3e}",
            None if b2_val > 0 else Witness((0.0, 0.0),
                                            "hbar'(0)*gbar'(0) > a1*a2", b2_val))

        b3_checks = [
            (np.asarray(ep.hbar_d1(v)), "hbar' >= 0", v),
            (-np.asarray(ep.hbar_d2(v)), "hbar'' <= 0", v),
            (np.asarray(ep.gbar_d1(u)), "gbar' >= 0", u),
            (-np.asarray(ep.gbar_d2(u)), "gbar'' <= 0", u),
        ]
        b3_ok, b3_witness, b3_worst = True, None, np.inf
        for vals, label, axis in b3_checks:
            idx = int(np.argmin(vals))
            if float(vals[idx]) < 0:
                b3_ok = False
                b3_witness = Witness((float(axis[idx]),), label, float(vals[idx]))
                break
            b3_worst = min(b3_worst, float(vals[idx]))
        add("B3", b3_ok, f"min monotonicity/concavity margin {b3_worst:.3e}",
            b3_witness)

        b4_val = min(ep.a1, ep.a2) - max(float(ep.gbar_d1(K1)),
                                         float(ep.hbar_d1(K2)))
        add("B4", b4_val > 0,
            f"min(a1,a2) - max(gbar'(K1), hbar'(K2)) = {b4_val:.3e}",
            None if b4_val > 0 else Witness(
                (K1, K2), "min(a1,a2) > max(gbar'(K1), hbar'(K2))", b4_val))

    # --- uniqueness caveat: scan sample cells for interior sign changes of
    # every component simultaneously (cannot certify global uniqueness).
    if sys.n == 2:
        fvals = np.asarray(sys.f(pts)).reshape(2, samples_per_axis, samples_per_axis)
        s1, s2 = np.sign(fvals[0]), np.sign(fvals[1])

        def straddles(s):
            c = np.stack([s[:-1, :-1], s[1:, :-1], s[:-1, 1:], s[1:, 1:]])
            return (c.min(axis=0) <= 0) & (c.max(axis=0) >= 0)

        both = straddles(s1) & straddles(s2)
        # Both nullclines pass through every cell near the two known roots;
        # only straddle cells away from 0 and K hint at a third equilibrium.
        c1 = pts[0].reshape(samples_per_axis, -1)
        c2 = pts[1].reshape(samples_per_axis, -1)
        cx = 0.5 * (c1[:-1, :-1] + c1[1:, 1:])
        cy = 0.5 * (c2[:-1, :-1] + c2[1:, 1:])
        cell = np.hypot(c1[1, 1] - c1[0, 0], c2[1, 1] - c2[0, 0])
        far = np.minimum(np.hypot(cx, cy),
                         np.hypot(cx - sys.K[0], cy - sys.K[1])) > 3.0 * cell
        both &= far
        if np.any(both):
            i, j = np.argwhere(both)[0]
            report.caveats.append(
                "possible additional interior equilibrium near "
                f"({cx[i, j]:.4g}, {cy[i, j]:.4g}); "
                "sampling cannot certify uniqueness of the equilibria"
            )
        else:
            report.caveats.append(
                "no additional interior equilibrium detected at this sampling "
                "density; global uniqueness not certified"
            )

    return report
