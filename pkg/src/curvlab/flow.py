"""Numerical integration of the quadratic operator flow and cone-event tracking.

The raw flow dR/dt = R^2 + R#R blows up in finite time whenever the scalar
curvature is positive; the normalized variant projects the field onto the
tangent space of the unit sphere and converges to a fixed ray instead.  An
adaptive embedded Runge-Kutta 5(4) pair integrates either form, re-projecting
the state onto Bianchi operators after each accepted step.  Watched cones get
their membership margins tracked along the trajectory; boundary crossings are
located by bisection on a cubic Hermite interpolant.

Also here: pinching-stage reports along trajectories and the randomized
boundary search for cones that the flow exits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import Algebra, algebra_for
from .cones import (ConeDescriptor, boundary_sample, membership,
                    transversality_margin)
from .operators import (CurvOp, TOL_FLOOR, bianchi_project, decompose,
                        identity_operator, ode_field, ode_field_raw)

BLOW_UP_NORM = 1e12
EVENT_TIME_TOL = 1e-8
CONVERGED_FIELD_NORM = 1e-10
CONVERGED_DISTANCE = 1e-3
MAX_STORED_SAMPLES = 1000
MEMBERSHIP_TOL = 1e-9

TERMINATION_TIME_LIMIT = "TimeLimit"
TERMINATION_BLOW_UP = "BlowUp"
TERMINATION_CONVERGED = "ConvergedToIdentityRay"
TERMINATION_CONE_EXIT = "ConeExit"
TERMINATION_STEP_UNDERFLOW = "StepUnderflow"

# Dormand-Prince 5(4) tableau; the fifth-order solution is propagated and the
# first stage of the next step reuses the last stage (FSAL).
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640,
                   -92097 / 339200, 187 / 2100, 1 / 40])


@dataclass(frozen=True)
class ConeEvent:
    time: float
    cone_label: str
    transition: str     # "exit" | "enter"


@dataclass
class Trajectory:
    """Time-stamped operator samples with cone events and run metadata."""

    n: int
    times: list[float]
    states: list[CurvOp]
    events: list[ConeEvent]
    termination: str
    meta: dict
    requested: list[tuple[float, CurvOp]] = field(default_factory=list)

    @property
    def samples(self) -> list[tuple[float, CurvOp]]:
        return list(zip(self.times, self.states))


def _hermite(y0: np.ndarray, y1: np.ndarray, f0: np.ndarray, f1: np.ndarray,
             h: float, theta: float) -> np.ndarray:
    t = theta
    h00 = 2 * t ** 3 - 3 * t ** 2 + 1
    h10 = t ** 3 - 2 * t ** 2 + t
    h01 = -2 * t ** 3 + 3 * t ** 2
    h11 = t ** 3 - t ** 2
    return h00 * y0 + h * h10 * f0 + h01 * y1 + h * h11 * f1


def _thin(times: list[float], states: list[CurvOp], keep: int):
    if len(times) <= keep:
        return times, states
    idx = np.unique(np.round(np.linspace(0, len(times) - 1, keep)).astype(int))
    return [times[i] for i in idx], [states[i] for i in idx]


class _Watch:
    def __init__(self, cone: ConeDescriptor, mem_inside: bool):
        self.cone = cone
        self.inside = mem_inside
        self.inside_at_start = mem_inside


def integrate(R0: CurvOp, horizon: float, rtol: float = 1e-9, atol: float = 1e-12,
              max_dt: float = math.inf, normalized: bool = False,
              watch: tuple[ConeDescriptor, ...] = (),
              sample_times: list[float] | None = None,
              blow_up_norm: float = BLOW_UP_NORM,
              algebra: Algebra | None = None) -> Trajectory:
    """Integrate the quadratic flow from R0 with adaptive embedded RK 5(4).

    In normalized mode the state is kept on the unit sphere of tr(AB) and the
    field is the tangential projection; termination on the identity ray is
    declared when the tangential field norm falls below 1e-10 within 1e-3 of
    the normalized identity.  Blow-up is declared at norm 1e12.  Watched cone
    boundary crossings are bisected to time tolerance 1e-8; an exit from a
    cone containing the initial state terminates the run.
    """
    if horizon <= 0:
        raise ValueError(f"horizon must be positive, got {horizon}")
    alg = algebra or algebra_for(R0.n)
    n = R0.n
    N = alg.N
    ident = identity_operator(n)
    ident_unit = ident.coeffs / np.linalg.norm(ident.coeffs)

    def project(y: np.ndarray) -> np.ndarray:
        M = bianchi_project(y.reshape(N, N), n, alg).coeffs
        if normalized:
            M = M / max(np.linalg.norm(M), TOL_FLOOR)
        return M.reshape(-1)

    def rhs(y: np.ndarray) -> np.ndarray:
        R = CurvOp(n, y.reshape(N, N))
        X = ode_field_raw(R, alg).coeffs
        if normalized:
            X = X - float(np.sum(X * R.coeffs)) * R.coeffs
        return X.reshape(-1)

    y = R0.coeffs.reshape(-1).astype(float).copy()
    y = project(y)
    t = 0.0
    times = [0.0]
    states = [CurvOp(n, y.reshape(N, N).copy())]
    events: list[ConeEvent] = []
    watches = [_Watch(c, membership(CurvOp(n, y.reshape(N, N)), c, MEMBERSHIP_TOL, alg).inside)
               for c in watch]
    wanted = sorted(sample_times) if sample_times else []
    requested: list[tuple[float, CurvOp]] = []
    termination = TERMINATION_TIME_LIMIT

    f = rhs(y)
    h = min(0.01 / max(np.linalg.norm(f), 1e-3), max_dt, horizon)
    n_steps = 0
    k = np.zeros((7, y.size))

    while t < horizon:
        h = min(h, horizon - t, max_dt)
        if h < 1e-14 * max(abs(t), 1.0):
            termination = TERMINATION_STEP_UNDERFLOW
            break
        k[0] = f
        for s in range(1, 7):
            k[s] = rhs(y + h * (_DP_A[s] @ k[:s]))
        y5 = y + h * (_DP_B5 @ k)
        y4 = y + h * (_DP_B4 @ k)
        sc = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        err = float(np.sqrt(np.mean(((y5 - y4) / sc) ** 2)))
        if err > 1.0:
            h *= max(0.2, 0.9 * err ** -0.2)
            continue

        y_new = project(y5)
        t_new = t + h
        f_new = rhs(y_new)
        n_steps += 1

        # honor requested sample times inside the step via the interpolant
        while wanted and wanted[0] <= t_new:
            tq = wanted.pop(0)
            theta = (tq - t) / h
            yq = _hermite(y, y_new, f, f_new, h, theta)
            if normalized:
                yq = yq / max(np.linalg.norm(yq), TOL_FLOOR)
            requested.append((tq, CurvOp(n, yq.reshape(N, N))))

        exit_fired = None
        for wobj in watches:
            inside_new = membership(CurvOp(n, y_new.reshape(N, N)), wobj.cone,
                                    MEMBERSHIP_TOL, alg).inside
            if inside_new != wobj.inside:
                t_ev = _locate_event(y, y_new, f, f_new, h, t, wobj.cone, n, N,
                                     normalized, alg)
                transition = "exit" if wobj.inside else "enter"
                events.append(ConeEvent(t_ev, wobj.cone.label(), transition))
                if transition == "exit" and wobj.inside_at_start:
                    exit_fired = t_ev
                wobj.inside = inside_new

        t, y, f = t_new, y_new, f_new
        times.append(t)
        states.append(CurvOp(n, y.reshape(N, N).copy()))

        if exit_fired is not None:
            termination = TERMINATION_CONE_EXIT
            break
        norm = float(np.linalg.norm(y))
        if not normalized and norm > blow_up_norm:
            termination = TERMINATION_BLOW_UP
            break
        if normalized and np.linalg.norm(f) < CONVERGED_FIELD_NORM:
            if np.linalg.norm(y - ident_unit.reshape(-1)) <= CONVERGED_DISTANCE:
                termination = TERMINATION_CONVERGED
                break
        h = min(h * min(5.0, max(0.2, 0.9 * max(err, 1e-10) ** -0.2)), max_dt)

    times, states = _thin(times, states, MAX_STORED_SAMPLES)
    meta = {"rtol": rtol, "atol": atol, "max_dt": max_dt, "normalized": normalized,
            "horizon": horizon, "blow_up_norm": blow_up_norm, "steps": n_steps,
            "watched": [c.label() for c in watch]}
    return Trajectory(n=n, times=times, states=states, events=events,
                      termination=termination, meta=meta, requested=requested)


def _locate_event(y0, y1, f0, f1, h, t0, cone, n, N, normalized, alg) -> float:
    def inside_at(theta: float) -> bool:
        yq = _hermite(y0, y1, f0, f1, h, theta)
        if normalized:
            yq = yq / max(np.linalg.norm(yq), TOL_FLOOR)
        return membership(CurvOp(n, yq.reshape(N, N)), cone, MEMBERSHIP_TOL, alg).inside
    lo, hi = 0.0, 1.0
    inside_lo = inside_at(0.0)
    tol = EVENT_TIME_TOL / max(h, TOL_FLOOR)
    while hi - lo > max(tol, 1e-15):
        mid = 0.5 * (lo + hi)
        if inside_at(mid) == inside_lo:
            lo = mid
        else:
            hi = mid
    return t0 + h * 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# pinching reports
# ---------------------------------------------------------------------------

@dataclass
class PinchingReport:
    """Largest containing family cone per stored sample time."""

    entries: list[tuple[float, int, str | None, float | None]]
    monotone: bool


def pinching_report(traj: Trajectory,
                    family: list[tuple[str, float, ConeDescriptor]]) -> PinchingReport:
    """For each sample, the largest family index whose cone contains the state.

    The family is ordered from widest to thinnest; the report flags whether
    the contained index is non-decreasing along the trajectory.
    """
    alg = algebra_for(traj.n)
    entries = []
    last = -1
    monotone = True
    for t, R in zip(traj.times, traj.states):
        best = -1
        for idx, (stage, parameter, cone) in enumerate(family):
            if membership(R, cone, MEMBERSHIP_TOL, alg).inside:
                best = idx
        if best >= 0:
            stage, parameter, _ = family[best]
            entries.append((t, best, stage, parameter))
        else:
            entries.append((t, -1, None, None))
        if best < last:
            monotone = False
        last = best
    return PinchingReport(entries=entries, monotone=monotone)


# ---------------------------------------------------------------------------
# counterexample search
# ---------------------------------------------------------------------------

@dataclass
class SearchResult:
    """Most negative transversality margin found on a cone boundary."""

    found: bool
    witness: CurvOp | None
    margin: float
    field_norm: float
    evaluations: int
    seed: int
    budget: int
    cone_label: str
    trace: dict


def _batched_eigsum_boundary(k: int, n: int, rng: np.random.Generator, count: int,
                             alg: Algebra) -> list[CurvOp]:
    """Vectorized boundary sampling for plain eigenvalue-sum cones.

    Bianchi-projected Gaussian draws are bisected along the segment toward
    the identity on the whole batch at once (stacked eigvalsh).
    """
    N = alg.N
    G = rng.standard_normal((count, N, N))
    G = 0.5 * (G + np.transpose(G, (0, 2, 1)))
    stack = np.stack([bianchi_project(g, n, alg).coeffs for g in G])
    stack /= np.linalg.norm(stack, axis=(1, 2), keepdims=True)
    ident = np.eye(N) / math.sqrt(N)

    def margins(t: np.ndarray) -> np.ndarray:
        pts = (1.0 - t)[:, None, None] * stack + t[:, None, None] * ident
        w = np.linalg.eigvalsh(pts)
        return w[:, :k].sum(axis=1)

    outside = margins(np.zeros(count)) < 0.0
    lo = np.zeros(count)
    hi = np.ones(count)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        inside = margins(mid) >= 0.0
        hi = np.where(inside, mid, hi)
        lo = np.where(inside, lo, mid)
    out = []
    for i in np.nonzero(outside)[0]:
        W = (1.0 - hi[i]) * stack[i] + hi[i] * ident
        W /= np.linalg.norm(W)
        out.append(CurvOp(n, W))
    return out


def counterexample_search(cone: ConeDescriptor, n: int, budget: int, seed: int,
                          threshold_rel: float = 1e-6) -> SearchResult:
    """Randomized boundary sampling plus local descent on the transversality margin.

    Deterministic given (seed, budget).  ``found`` requires the witness margin
    to be below -threshold_rel * |X(witness)|.  A negative result reports the
    best margin seen.
    """
    from .cones import _EIGEN_K
    from .seeding import stream

    alg = algebra_for(n)
    rng = stream(seed, 0)
    best_margin = math.inf
    best_witness: CurvOp | None = None
    evaluations = 0          # every sampled candidate costs one unit of budget
    scan_budget = int(budget * 0.7)
    n_scanned = 0

    def margin_of(R: CurvOp) -> float:
        try:
            return transversality_margin(R, cone, MEMBERSHIP_TOL, alg)
        except ValueError:
            return math.inf

    eig_k = _EIGEN_K.get(type(cone))
    while evaluations < scan_budget:
        if eig_k is not None:
            batch = min(512, scan_budget - evaluations)
            witnesses = _batched_eigsum_boundary(eig_k, n, rng, batch, alg)
            evaluations += batch
        else:
            W = boundary_sample(cone, n, rng, alg)
            witnesses = [] if W is None else [W]
            evaluations += 1
        for W in witnesses:
            m = margin_of(W)
            n_scanned += 1
            if m < best_margin:
                best_margin = m
                best_witness = W

    # local descent: Gaussian perturbations re-projected to the boundary
    descent_rng = stream(seed, 1)
    step = 0.1
    while evaluations < budget and best_witness is not None:
        evaluations += 1
        G = descent_rng.standard_normal(best_witness.coeffs.shape)
        P = bianchi_project(0.5 * (G + G.T), n, alg)
        cand = best_witness + P * (step / max(P.norm(), TOL_FLOOR))
        cand = _reproject_boundary(cand, cone, n, alg)
        if cand is None:
            step = max(step * 0.7, 1e-4)
            continue
        m = margin_of(cand)
        n_scanned += 1
        if m < best_margin:
            best_margin = m
            best_witness = cand
        else:
            step = max(step * 0.95, 1e-4)

    if best_witness is None:
        return SearchResult(False, None, math.inf, 0.0, evaluations, seed, budget,
                            cone.label(), {"scanned": n_scanned})
    fnorm = ode_field(best_witness, alg).norm()
    found = best_margin < -threshold_rel * fnorm
    return SearchResult(found=found, witness=best_witness, margin=best_margin,
                        field_norm=fnorm, evaluations=evaluations, seed=seed,
                        budget=budget, cone_label=cone.label(),
                        trace={"scanned": n_scanned, "threshold_rel": threshold_rel})


def _reproject_boundary(R: CurvOp, cone: ConeDescriptor, n: int,
                        alg: Algebra) -> CurvOp | None:
    """Move R along the identity direction back onto the cone boundary."""
    from .cones import _EIGEN_K

    k = _EIGEN_K.get(type(cone))
    if k is not None:
        return _reproject_boundary_eigsum(R, k, n, alg)
    ident = identity_operator(n)
    ident = ident * (1.0 / ident.norm())
    R = R * (1.0 / R.norm())
    mem = membership(R, cone, MEMBERSHIP_TOL, alg)
    if mem.status == "boundary":
        return R
    if mem.status == "outside":
        lo, hi = 0.0, 1.0
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            if membership(R * (1.0 - mid) + ident * mid, cone, MEMBERSHIP_TOL, alg).inside:
                hi = mid
            else:
                lo = mid
        W = R * (1.0 - hi) + ident * hi
        return W * (1.0 / W.norm())
    # interior: march away from the identity direction until the boundary
    lo, hi = 0.0, 1.0
    direction = R - ident * float(np.sum(R.coeffs * ident.coeffs))
    dn = direction.norm()
    if dn < 1e-12:
        return None
    direction = direction * (1.0 / dn)
    hi = 1.0
    while membership(ident * (1.0 - hi) + direction * hi, cone, MEMBERSHIP_TOL, alg).inside:
        hi *= 2.0
        if hi > 1e6:
            return None
    lo = hi / 2.0
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if membership(ident * (1.0 - mid) + direction * mid, cone, MEMBERSHIP_TOL, alg).inside:
            lo = mid
        else:
            hi = mid
    W = ident * (1.0 - lo) + direction * lo
    return W * (1.0 / W.norm())


def _reproject_boundary_eigsum(R: CurvOp, k: int, n: int, alg: Algebra) -> CurvOp | None:
    """Boundary reprojection specialized to eigenvalue-sum cones.

    Bisects the eigenvalue-sum margin directly along the identity segment,
    on one side or the other depending on the sign at R.
    """
    N = alg.N
    M = R.coeffs / np.linalg.norm(R.coeffs)
    ident = np.eye(N) / math.sqrt(N)

    def margin(P: np.ndarray) -> float:
        return float(np.linalg.eigvalsh(P)[:k].sum())

    m0 = margin(M)
    scale_tol = MEMBERSHIP_TOL
    if abs(m0) <= scale_tol:
        return CurvOp(n, M)
    if m0 < 0:
        lo, hi = 0.0, 1.0     # outside at 0, inside at 1
        for _ in range(45):
            mid = 0.5 * (lo + hi)
            if margin((1.0 - mid) * M + mid * ident) >= 0.0:
                hi = mid
            else:
                lo = mid
        W = (1.0 - hi) * M + hi * ident
    else:
        direction = M - float(np.sum(M * ident)) * ident
        dn = np.linalg.norm(direction)
        if dn < 1e-12:
            return None
        direction /= dn
        hi = 1.0
        while margin((1.0 - hi) * ident + hi * direction) >= 0.0:
            hi *= 2.0
            if hi > 1e6:
                return None
        lo = hi / 2.0
        for _ in range(45):
            mid = 0.5 * (lo + hi)
            if margin((1.0 - mid) * ident + mid * direction) >= 0.0:
                lo = mid
            else:
                hi = mid
        W = (1.0 - lo) * ident + lo * direction
    W /= np.linalg.norm(W)
    return CurvOp(n, W)


# ---------------------------------------------------------------------------
# trajectory export
# ---------------------------------------------------------------------------

def trajectory_csv(traj: Trajectory,
                   family: list[tuple[str, float, ConeDescriptor]] | None = None) -> str:
    """CSV rows (t, norm, lambda_bar, sigma, min_eigenvalue, pinching_stage)."""
    import csv as _csv
    import io as _io

    report = pinching_report(traj, family) if family else None
    buf = _io.StringIO()
    w = _csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "norm", "lambda_bar", "sigma", "min_eigenvalue", "pinching_stage"])
    for idx, (t, R) in enumerate(zip(traj.times, traj.states)):
        dec = decompose(R)
        stage = ""
        if report is not None:
            _, best, stage_name, parameter = report.entries[idx]
            if stage_name is not None:
                stage = f"{stage_name}:{parameter:g}"
        w.writerow([format(t, ".17g"), format(R.norm(), ".17g"),
                    format(dec.lambda_bar, ".17g"), format(dec.sigma, ".17g"),
                    format(float(R.eigenvalues()[0]), ".17g"), stage])
    return buf.getvalue()


def trajectory_manifest(traj: Trajectory, seed: int | None = None) -> dict:
    """JSON-ready manifest: integrator settings, termination, events."""
    return {
        "n": traj.n,
        "settings": traj.meta,
        "seed": seed,
        "termination": traj.termination,
        "events": [{"t": e.time, "cone": e.cone_label, "transition": e.transition}
                   for e in traj.events],
        "stored_samples": len(traj.times),
        "final_time": traj.times[-1],
        "final_norm": traj.states[-1].norm(),
    }
