"""Convex invariant-cone descriptors, membership, transversality, and parameter schedules.

Cones are described structurally: eigenvalue-sum cones on the operator,
Ricci-pinched cones, linear images under the equivariant transform, inner
cones on the unit-trace slice, truncated shifted cones, and finite
intersections.  Membership classifies a point as interior, boundary or
outside by the signed value of its tightest constraint; transversality
margins measure the derivative of active constraints along the flow field.

The three explicit parameter schedules produce invariant image cones joining
the 2-nonnegative cone to arbitrarily thin cones around the identity ray;
Monte-Carlo positivity certificates sample admissible Ricci spectra and
report the minimum slack of the defining inequalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import Algebra, algebra_for, induced_rotation
from .operators import (CurvOp, TOL_FLOOR, decompose, identity_operator,
                        ode_field_raw, ricci, ricci_adjoint)
from .transform import (TransformParams, difference_eigenvalue_table,
                        difference_ricci_eigenvalues, field_ricci_eigenvalues,
                        inverse_transform, transform, transform_params)

DEFAULT_TOL = 1e-9
DEGENERACY_GAP_RTOL = 1e-8
BISECTION_TOL = 1e-10


# ---------------------------------------------------------------------------
# descriptors
# ---------------------------------------------------------------------------

class ConeDescriptor:
    """Base class for cone descriptions (structural, dimension-independent)."""

    def label(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class NonnegOp(ConeDescriptor):
    """Operators with nonnegative spectrum."""

    def label(self) -> str:
        return "nonneg"


@dataclass(frozen=True)
class TwoNonneg(ConeDescriptor):
    """Sum of the two smallest eigenvalues nonnegative."""

    def label(self) -> str:
        return "2nonneg"


@dataclass(frozen=True)
class ThreeNonneg(ConeDescriptor):
    """Sum of the three smallest eigenvalues nonnegative."""

    def label(self) -> str:
        return "3nonneg"


@dataclass(frozen=True)
class GeometricNonneg(ConeDescriptor):
    """Sums of nonnegative rank-one operators; sampling target only."""

    def label(self) -> str:
        return "geometric"


@dataclass(frozen=True)
class RicciPinched(ConeDescriptor):
    """Nonnegative operators whose Ricci tensor is pinched below by p scal/n."""

    p: float

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise ValueError(f"pinching constant must lie in [0, 1), got {self.p}")

    def label(self) -> str:
        return f"ricci-pinched:{self.p:g}"


@dataclass(frozen=True)
class LinearImage(ConeDescriptor):
    """Image of a base cone under the equivariant transform."""

    base: ConeDescriptor
    params: TransformParams

    def label(self) -> str:
        return f"image[{self.base.label()};a={self.params.a:g},b={self.params.b:g}]"


@dataclass(frozen=True)
class InnerCone(ConeDescriptor):
    """Cone over the unit-trace slice points at distance >= delta from the base boundary."""

    base: ConeDescriptor
    delta: float

    def __post_init__(self):
        if self.delta < 0.0:
            raise ValueError(f"inner-cone offset must be >= 0, got {self.delta}")

    def label(self) -> str:
        return f"inner[{self.base.label()};{self.delta:g}]"


@dataclass(frozen=True)
class TruncatedShifted(ConeDescriptor):
    """Operators R with R + id^id in the inner cone and tr2(R) above a floor."""

    base: ConeDescriptor
    delta: float
    trace_floor: float

    def label(self) -> str:
        return f"truncated[{self.base.label()};{self.delta:g};{self.trace_floor:g}]"


@dataclass(frozen=True)
class Intersection(ConeDescriptor):
    """Finite intersection of cones; membership is the conjunction."""

    members: tuple

    def label(self) -> str:
        return "cap(" + ",".join(m.label() for m in self.members) + ")"


_EIGEN_K = {NonnegOp: 1, TwoNonneg: 2, ThreeNonneg: 3}


# ---------------------------------------------------------------------------
# constraints and membership
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Constraint:
    """One scalar constraint: sum of the k smallest eigenvalues of a symmetric matrix.

    ``matrix`` is evaluated at the (possibly transform-pulled-back) state;
    ``rate_matrix`` is the same linear functional applied to the pulled-back
    flow field, available when a field was supplied.  ``gradient`` is the
    constraint gradient as a curvature operator (for first-order distance
    estimates).
    """

    name: str
    matrix: np.ndarray
    k: int
    value: float
    rate_matrix: np.ndarray | None
    gradient: CurvOp


def _eigen_sum_smallest(M: np.ndarray, k: int) -> float:
    w = np.linalg.eigvalsh(M)
    return float(w[:k].sum())


def _grad_eigen_sum(R: CurvOp, k: int) -> CurvOp:
    """Gradient of the sum of the k smallest operator eigenvalues at R."""
    w, V = np.linalg.eigh(R.coeffs)
    P = V[:, :k] @ V[:, :k].T
    return CurvOp(R.n, P)


def _grad_ricci_functional(R: CurvOp, S: np.ndarray, p: float) -> CurvOp:
    """Gradient of R -> <S, Ric(R) - (p/n) tr(Ric(R)) id> in tr(AB)."""
    n = R.n
    S_eff = S - (p / n) * np.trace(S) * np.eye(n)
    return ricci_adjoint(S_eff, n)


def _pull_gradient(g: CurvOp, chain: list[TransformParams]) -> CurvOp:
    # the transform is self-adjoint, so the chain of inverses is applied as-is
    for params in reversed(chain):
        g = inverse_transform(g, params)
    return g


def _constraints(R: CurvOp, Xdot: CurvOp | None, cone: ConeDescriptor,
                 algebra: Algebra, chain: list[TransformParams] | None = None,
                 prefix: str = "") -> list[Constraint]:
    chain = chain or []
    kind = type(cone)
    if kind in _EIGEN_K:
        k = _EIGEN_K[kind]
        w, V = np.linalg.eigh(R.coeffs)
        grad = _pull_gradient(CurvOp(R.n, V[:, :k] @ V[:, :k].T), chain)
        return [Constraint(name=prefix + f"eigsum{k}", matrix=R.coeffs, k=k,
                           value=float(w[:k].sum()),
                           rate_matrix=None if Xdot is None else Xdot.coeffs,
                           gradient=grad)]
    if kind is RicciPinched:
        out = []
        w, V = np.linalg.eigh(R.coeffs)
        out.append(Constraint(name=prefix + "eigsum1", matrix=R.coeffs, k=1,
                              value=float(w[0]),
                              rate_matrix=None if Xdot is None else Xdot.coeffs,
                              gradient=_pull_gradient(CurvOp(R.n, np.outer(V[:, 0], V[:, 0])),
                                                      chain)))
        n = R.n
        ric = ricci(R, algebra)
        M = ric - (cone.p / n) * np.trace(ric) * np.eye(n)
        wr, Vr = np.linalg.eigh(M)
        if Xdot is None:
            rate = None
        else:
            ricd = ricci(Xdot, algebra)
            rate = ricd - (cone.p / n) * np.trace(ricd) * np.eye(n)
        v0 = Vr[:, 0]
        out.append(Constraint(name=prefix + "ricci-pinch", matrix=M, k=1,
                              value=float(wr[0]), rate_matrix=rate,
                              gradient=_pull_gradient(
                                  _grad_ricci_functional(R, np.outer(v0, v0), cone.p), chain)))
        return out
    if kind is LinearImage:
        S = inverse_transform(R, cone.params, algebra)
        Sdot = None if Xdot is None else inverse_transform(Xdot, cone.params, algebra)
        return _constraints(S, Sdot, cone.base, algebra, chain + [cone.params],
                            prefix=prefix + "image.")
    if kind is Intersection:
        out = []
        for idx, member in enumerate(cone.members):
            out.extend(_constraints(R, Xdot, member, algebra, chain,
                                    prefix=prefix + f"m{idx}."))
        return out
    raise ValueError(f"no eigenvalue-sum constraint structure for {cone.label()}")


@dataclass(frozen=True)
class Membership:
    """Classification of a point relative to a cone."""

    status: str                 # "interior" | "boundary" | "outside"
    margin: float               # signed value of the tightest constraint
    active: tuple[str, ...]     # constraints within tolerance of zero
    violation: float | None     # positive violation magnitude when outside

    @property
    def inside(self) -> bool:
        return self.status != "outside"


def _classify(values: dict[str, float], tol_eff: float) -> Membership:
    margin = min(values.values())
    name_min = min(values, key=values.get)
    if margin > tol_eff:
        return Membership("interior", margin, (), None)
    if margin >= -tol_eff:
        active = tuple(name for name, v in values.items() if v <= tol_eff)
        return Membership("boundary", margin, active, None)
    return Membership("outside", margin, (name_min,), -margin)


def membership(R: CurvOp, cone: ConeDescriptor, tol: float = DEFAULT_TOL,
               algebra: Algebra | None = None) -> Membership:
    """Classify R as interior / boundary / outside of the cone.

    ``tol`` is relative to the norm of R (floor 1e-14).  The margin is the
    signed value of the tightest constraint; for inner cones it is a
    first-order distance estimate on the unit-trace slice minus delta.
    """
    alg = algebra or algebra_for(R.n)
    scale = max(R.norm(), TOL_FLOOR)
    tol_eff = max(tol * scale, TOL_FLOOR)
    kind = type(cone)
    if kind is InnerCone:
        tr = R.tr2()
        if tr <= tol_eff:
            return Membership("outside", -math.inf, ("trace",), math.inf)
        Rn = R * (1.0 / tr)
        cons = _constraints(Rn, None, cone.base, alg)
        values = {c.name: c.value / max(c.gradient.norm(), TOL_FLOOR) - cone.delta
                  for c in cons}
        return _classify(values, max(tol, TOL_FLOOR))
    if kind is TruncatedShifted:
        inner = membership(R + identity_operator(R.n), InnerCone(cone.base, cone.delta),
                           tol, alg)
        values = {"inner": inner.margin, "trace-floor": R.tr2() - cone.trace_floor}
        return _classify(values, tol_eff)
    if kind is GeometricNonneg:
        raise ValueError("geometric nonnegativity has no constraint-functional membership; "
                         "it is a sampling target only")
    cons = _constraints(R, None, cone, alg)
    return _classify({c.name: c.value for c in cons}, tol_eff)


# ---------------------------------------------------------------------------
# transversality
# ---------------------------------------------------------------------------

def _compressed_rate(M: np.ndarray, Mdot: np.ndarray, k: int, gap: float) -> float:
    """Derivative of the sum of the k smallest eigenvalues of M along Mdot.

    At degeneracy across the k-th level, minimizes over k-dimensional
    subspaces of the degenerate eigenspace (smallest eigenvalues of the
    compressed block).
    """
    w, V = np.linalg.eigh(M)
    group = np.abs(w - w[k - 1]) <= gap
    fixed = (~group) & (np.arange(len(w)) < k)
    rate = 0.0
    if fixed.any():
        Vf = V[:, fixed]
        rate += float(np.trace(Vf.T @ Mdot @ Vf))
    r = k - int(fixed.sum())
    if r > 0:
        Vg = V[:, group]
        block = Vg.T @ Mdot @ Vg
        bw = np.linalg.eigvalsh(0.5 * (block + block.T))
        rate += float(bw[:r].sum())
    return rate


def transversality_margin(R: CurvOp, cone: ConeDescriptor, tol: float = DEFAULT_TOL,
                          algebra: Algebra | None = None) -> float:
    """Minimal derivative of the active constraints along the flow field at R.

    Requires a boundary point; positive margin certifies strict inward motion.
    """
    alg = algebra or algebra_for(R.n)
    mem = membership(R, cone, tol, alg)
    if mem.status != "boundary":
        raise ValueError(f"transversality requires a boundary point, got {mem.status}")
    X = ode_field_raw(R, alg)   # projection is a no-op on Bianchi input
    cons = _constraints(R, X, cone, alg)
    scale = max(R.norm(), TOL_FLOOR)
    tol_eff = max(tol * scale, TOL_FLOOR)
    margins = []
    for c in cons:
        if c.value > tol_eff:
            continue
        gap = max(DEGENERACY_GAP_RTOL * float(np.linalg.norm(c.matrix)), TOL_FLOOR)
        margins.append(_compressed_rate(c.matrix, c.rate_matrix, c.k, gap))
    return min(margins)


# ---------------------------------------------------------------------------
# boundary and interior sampling
# ---------------------------------------------------------------------------

def boundary_sample(cone: ConeDescriptor, n: int, rng: np.random.Generator,
                    algebra: Algebra | None = None,
                    tol: float = BISECTION_TOL) -> CurvOp | None:
    """Random boundary point: Gaussian draw, then bisection toward the identity.

    Returns None when the draw already lies inside the cone (no crossing on
    the segment).  The result is normalized to unit norm.
    """
    from .operators import random_operator  # local import to avoid cycle at module load

    alg = algebra or algebra_for(n)
    G = random_operator(n, rng)
    G = G * (1.0 / G.norm())
    if membership(G, cone, algebra=alg).inside:
        return None
    I = identity_operator(n)
    I = I * (1.0 / I.norm())
    lo, hi = 0.0, 1.0      # segment (1-t) G + t I; inside at t = 1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        P = G * (1.0 - mid) + I * mid
        if membership(P, cone, algebra=alg).inside:
            hi = mid
        else:
            lo = mid
    W = G * (1.0 - hi) + I * hi
    return W * (1.0 / W.norm())


def interior_sample(cone: ConeDescriptor, n: int, rng: np.random.Generator,
                    algebra: Algebra | None = None) -> CurvOp:
    """Random interior point: a unit-norm draw pulled toward the identity ray.

    Draws outside the cone are first bisected onto the boundary; blending any
    inside point with the (interior) identity direction stays interior by
    convexity.
    """
    from .operators import random_operator

    alg = algebra or algebra_for(n)
    I = identity_operator(n)
    I = I * (1.0 / I.norm())
    G = random_operator(n, rng)
    G = G * (1.0 / G.norm())
    t = float(rng.uniform(0.15, 0.85))
    if not membership(G, cone, algebra=alg).inside:
        lo, hi = 0.0, 1.0
        while hi - lo > BISECTION_TOL:
            mid = 0.5 * (lo + hi)
            if membership(G * (1.0 - mid) + I * mid, cone, algebra=alg).inside:
                hi = mid
            else:
                lo = mid
        G = G * (1.0 - hi) + I * hi
        G = G * (1.0 / G.norm())
    P = G * (1.0 - t) + I * t
    return P * (1.0 / P.norm())


def geometric_sample(n: int, rng: np.random.Generator, terms: int | None = None,
                     algebra: Algebra | None = None) -> CurvOp:
    """Sum of nonnegative rank-one operators on decomposable bivectors."""
    alg = algebra or algebra_for(n)
    k = int(terms) if terms is not None else int(rng.integers(1, 2 * n))
    M = np.zeros((alg.N, alg.N))
    for _ in range(k):
        v = rng.standard_normal(n)
        w = rng.standard_normal(n)
        omega = np.outer(v, w) - np.outer(w, v)          # so(n) element of v ^ w
        coords = alg.basis.so_coords(omega)
        c = float(rng.uniform(0.1, 1.0))
        M += c * np.outer(coords, coords)
    return CurvOp(n, M)


# ---------------------------------------------------------------------------
# parameter schedules
# ---------------------------------------------------------------------------

PROP_STAGE = "prop"
FIRST_FAMILY = "first-family"
SECOND_FAMILY = "second-family"
TWO_POSITIVE_EXTENSION = "two-positive-extension"
STAGES = (PROP_STAGE, FIRST_FAMILY, SECOND_FAMILY, TWO_POSITIVE_EXTENSION)


@dataclass(frozen=True)
class Schedule:
    """Resolved (a, b, p) values of one schedule stage at one parameter."""

    stage: str
    n: int
    parameter: float
    a: float
    b: float
    p: float | None

    @property
    def transform(self) -> TransformParams:
        return transform_params(self.a, self.b, self.n)


def prop_stage_b_max(n: int) -> float:
    """Largest admissible b of the first stage: (sqrt(2n(n-2)+4) - 2)/(n(n-2))."""
    return (math.sqrt(2.0 * n * (n - 2) + 4.0) - 2.0) / (n * (n - 2))


def schedule(stage: str, n: int, parameter: float) -> Schedule:
    """Resolve a stage parameter to the transform parameters and pinching constant.

    Stages:
        prop:          b in (0, b_max], 2a = 2b + (n-2)b^2, base cone 2-nonneg.
        first-family:  b in [0, 1/2], a = ((n-2)b^2+2b)/(2+2(n-2)b^2),
                       p = (n-2)b^2/(1+(n-2)b^2), base cone Ricci-pinched.
        second-family: s >= 0, b = 1/2, a = (1+s)/2, p = 1 - 4/(n+2+4s).
        two-positive-extension: single map at the prop-stage maximum b.
    """
    if n < 3:
        raise ValueError(f"dimension must be >= 3, got {n}")
    t = float(parameter)
    if stage == PROP_STAGE:
        bmax = prop_stage_b_max(n)
        if not 0.0 < t <= bmax + 1e-15:
            raise ValueError(f"prop-stage parameter must lie in (0, {bmax:.12g}], got {t}")
        return Schedule(stage, n, t, a=t + 0.5 * (n - 2) * t * t, b=t, p=None)
    if stage == FIRST_FAMILY:
        if not 0.0 <= t <= 0.5:
            raise ValueError(f"first-family parameter must lie in [0, 1/2], got {t}")
        q = (n - 2) * t * t
        return Schedule(stage, n, t, a=(q + 2.0 * t) / (2.0 + 2.0 * q), b=t,
                        p=q / (1.0 + q))
    if stage == SECOND_FAMILY:
        if t < 0.0:
            raise ValueError(f"second-family parameter must be >= 0, got {t}")
        return Schedule(stage, n, t, a=(1.0 + t) / 2.0, b=0.5,
                        p=1.0 - 4.0 / (n + 2.0 + 4.0 * t))
    if stage == TWO_POSITIVE_EXTENSION:
        bmax = prop_stage_b_max(n)
        base = schedule(PROP_STAGE, n, bmax)
        return Schedule(stage, n, t, a=base.a, b=base.b, p=None)
    raise ValueError(f"unknown stage {stage!r}; expected one of {STAGES}")


def stage_cone(stage: str, n: int, parameter: float) -> ConeDescriptor:
    """Cone descriptor for one point of a schedule stage."""
    sched = schedule(stage, n, parameter)
    if stage == PROP_STAGE:
        return LinearImage(TwoNonneg(), sched.transform)
    if stage in (FIRST_FAMILY, SECOND_FAMILY):
        return LinearImage(RicciPinched(sched.p), sched.transform)
    if stage == TWO_POSITIVE_EXTENSION:
        # intersection family: pinched image cones cut with the extended 2-nonneg image
        inner = stage_cone(FIRST_FAMILY if parameter <= 0.5 else SECOND_FAMILY, n,
                           parameter if parameter <= 0.5 else parameter - 0.5)
        return Intersection((inner, LinearImage(TwoNonneg(), sched.transform)))
    raise ValueError(f"unknown stage {stage!r}")


def pinching_parameterization(n: int, count: int) -> list[tuple[str, float, ConeDescriptor]]:
    """Composed three-stage grid of cones, ordered from widest to thinnest.

    Returns (stage, parameter, cone) triples: the prop stage sweeps b up to
    its maximum, then the first family sweeps b in (0, 1/2], then the second
    family sweeps s upward.
    """
    per = max(count // 3, 2)
    grid: list[tuple[str, float, ConeDescriptor]] = []
    bmax = prop_stage_b_max(n)
    for b in np.linspace(bmax / per, bmax, per):
        grid.append((PROP_STAGE, float(b), stage_cone(PROP_STAGE, n, float(b))))
    for b in np.linspace(0.5 / per, 0.5, per):
        grid.append((FIRST_FAMILY, float(b), stage_cone(FIRST_FAMILY, n, float(b))))
    for s in np.geomspace(0.5, 50.0, per):
        grid.append((SECOND_FAMILY, float(s), stage_cone(SECOND_FAMILY, n, float(s))))
    return grid


# ---------------------------------------------------------------------------
# admissible spectrum sampling and positivity certificates
# ---------------------------------------------------------------------------

def sample_pinched_spectra(n: int, count: int, p: float, rng: np.random.Generator,
                           pin_active: bool = False) -> np.ndarray:
    """Traceless-Ricci spectra with lambda_bar = 1 and every entry >= -(1-p).

    Entries are -(1-p) plus a uniformly scaled positive simplex draw; with
    ``pin_active`` the first entry sits exactly on the pinching bound.
    """
    t = 1.0 - p
    g = rng.standard_exponential((count, n))
    if pin_active:
        g[:, 0] = 0.0
    g *= (n * t) / g.sum(axis=1, keepdims=True)
    return -t + g


@dataclass
class CertificateReport:
    """Outcome of a Monte-Carlo positivity certificate at one grid point."""

    stage: str
    n: int
    params: dict
    samples: int
    seed: int
    min_slack: float
    argmin_spectrum: list
    failures: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "stage": self.stage, "n": self.n, "params": self.params,
            "samples": self.samples, "seed": self.seed,
            "min_slack": self.min_slack, "argmin_spectrum": self.argmin_spectrum,
            "failures": self.failures, "checks": self.checks,
        }


def _preservation_slack(lam: np.ndarray, sched: Schedule) -> np.ndarray:
    """Slack of the Ricci-pinching preservation inequality at the active index 0.

    Evaluated on Ricci-type operators built from the spectra: the Ricci
    eigenvalue of the pulled-back field at the pinned direction must exceed
    p scal / n of the pulled-back field.
    """
    n = sched.n
    params = sched.transform
    lbar = np.ones(lam.shape[0])
    ric_x = field_ricci_eigenvalues(lam, lbar, n)            # Ric(R^2 + R#)
    r_i = difference_ricci_eigenvalues(lam, lbar, params)    # Ric of the difference
    ric_total = ric_x + r_i
    scal_total = ric_total.sum(axis=1)
    return ric_total[:, 0] - sched.p * scal_total / n


def positivity_certificate(stage: str, n: int, parameter: float,
                           spectrum_samples: int, rng_seed: int) -> CertificateReport:
    """Sample admissible Ricci spectra and report the minimum slack of the stage.

    For every stage the eigenvalues of the difference operator are required
    nonnegative on admissible spectra; the two pinched families additionally
    require the pinching to be strictly preserved at active boundary spectra.
    Scalar closed-form identities of the schedule are reported under
    ``checks``.
    """
    from .seeding import stream

    sched = schedule(stage, n, parameter)
    params = sched.transform
    p_eff = sched.p if sched.p is not None else 0.0
    rng = stream(rng_seed, 0)
    failures: list[dict] = []
    checks: dict[str, float] = {}

    if stage == TWO_POSITIVE_EXTENSION:
        return _extension_certificate(sched, spectrum_samples, rng_seed)

    n_active = spectrum_samples // 2 if sched.p is not None else 0
    n_general = spectrum_samples - n_active
    lam = sample_pinched_spectra(n, n_general, p_eff, rng)
    d = difference_eigenvalue_table(lam, np.ones(n_general), params)
    iu = np.triu_indices(n, k=1)
    d_pairs = d[:, iu[0], iu[1]]
    d_min = d_pairs.min(axis=1)
    min_slack = float(d_min.min())
    arg = int(d_min.argmin())
    argmin_spectrum = [float(x) for x in lam[arg]]
    for idx in np.nonzero(d_min < 0)[0][:10]:
        failures.append({"kind": "difference-eigenvalue", "slack": float(d_min[idx]),
                         "spectrum": [float(x) for x in lam[idx]]})

    if sched.p is not None and n_active > 0:
        lam_a = sample_pinched_spectra(n, n_active, p_eff, stream(rng_seed, 1),
                                       pin_active=True)
        pres = _preservation_slack(lam_a, sched)
        pres_min = float(pres.min())
        checks["min_preservation_slack"] = pres_min
        if pres_min < min_slack:
            min_slack = pres_min
            argmin_spectrum = [float(x) for x in lam_a[int(pres.argmin())]]
        for idx in np.nonzero(pres < 0)[0][:10]:
            failures.append({"kind": "pinching-preservation", "slack": float(pres[idx]),
                             "spectrum": [float(x) for x in lam_a[idx]]})

    if stage == FIRST_FAMILY:
        b = sched.b
        checks["pinching_identity"] = abs(
            sched.p ** 2 + (n - 2) * b * b * (1.0 - sched.p) ** 2 - sched.p)
    if stage == SECOND_FAMILY:
        s = sched.parameter
        bound = (5.0 + s * (n - 6) + 4.0 * s * s - 4.0 * s) / (n + 2.0 + 4.0 * s)
        checks["eigenvalue_lower_bound_slack"] = float((d_min - bound).min())
    if stage == PROP_STAGE:
        bmax = prop_stage_b_max(n)
        checks["b_max_identity"] = abs(
            (n - 2) * bmax * bmax - (2.0 / n) * (1.0 - 2.0 * bmax))

    return CertificateReport(stage=stage, n=n, samples=spectrum_samples, seed=rng_seed,
                             params={"a": sched.a, "b": sched.b, "p": sched.p,
                                     "parameter": sched.parameter},
                             min_slack=min_slack, argmin_spectrum=argmin_spectrum,
                             failures=failures, checks=checks)


def _extension_certificate(sched: Schedule, samples: int, seed: int) -> CertificateReport:
    """Certificate that the extended map sends 2-nonnegative operators to positive ones.

    Also checks the two standalone spectral estimates for 2-nonnegative R:
    the smallest operator eigenvalue is >= -2 scal(R)/(n(n-1)-2) and the
    smallest Ricci eigenvalue is >= (n-3) |min eigenvalue|.
    """
    from .seeding import stream
    from .operators import scal as scal_of

    n = sched.n
    rng = stream(seed, 0)
    alg = algebra_for(n)
    cone = TwoNonneg()
    params = sched.transform
    min_slack = math.inf
    argmin: list = []
    failures: list[dict] = []
    est_slack = math.inf
    ric_slack = math.inf
    produced = 0
    while produced < samples:
        B = boundary_sample(cone, n, rng, alg) if produced % 2 == 0 else None
        R = B if B is not None else interior_sample(cone, n, rng, alg)
        produced += 1
        lmin = float(np.linalg.eigvalsh(transform(R, params, alg).coeffs)[0])
        if lmin < min_slack:
            min_slack = lmin
            argmin = [float(x) for x in np.linalg.eigvalsh(R.coeffs)]
        if lmin <= 0:
            failures.append({"kind": "image-positivity", "slack": lmin})
        w = np.linalg.eigvalsh(R.coeffs)
        est_slack = min(est_slack,
                        float(w[0] + 2.0 * scal_of(R) / (n * (n - 1) - 2.0)))
        ric_min = float(np.linalg.eigvalsh(ricci(R, alg))[0])
        ric_slack = min(ric_slack, ric_min - (n - 3) * abs(min(float(w[0]), 0.0)))
    return CertificateReport(
        stage=TWO_POSITIVE_EXTENSION, n=n, samples=samples, seed=seed,
        params={"a": sched.a, "b": sched.b, "p": None, "parameter": sched.parameter},
        min_slack=float(min_slack), argmin_spectrum=argmin, failures=failures,
        checks={"eigenvalue_estimate_slack": float(est_slack),
                "ricci_estimate_slack": float(ric_slack)})


def conjugate(R: CurvOp, Q: np.ndarray, algebra: Algebra | None = None) -> CurvOp:
    """Conjugate a curvature operator by the bivector action of Q in O(n)."""
    alg = algebra or algebra_for(R.n)
    L = induced_rotation(Q, alg.basis)
    return CurvOp(R.n, L @ R.coeffs @ L.T)
