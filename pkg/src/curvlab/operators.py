"""Curvature operators on the bivector space: decomposition, sharp product, flow field.

A curvature operator is a symmetric N x N matrix in the pair basis whose
associated (0,4) tensor has no totally antisymmetric component (first Bianchi
identity).  The space splits orthogonally into multiples of the identity,
traceless-Ricci operators, and Weyl operators; the splitting, the sharp
product, the cubic potential and the quadratic vector field R^2 + R# are all
implemented here.

Conventions:
    * tr2(R) is the trace of the N x N matrix; scal(R) = tr(Ric(R)) = 2 tr2(R).
    * lambda_bar = tr(Ric)/n, sigma = |Ric0|^2 / n.
    * All tolerances are relative to the input norm with floor 1e-14.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .basis import Algebra, SoBasis, algebra_for, build_basis, wedge

SYMMETRY_RTOL = 1e-12
BIANCHI_RTOL = 1e-10
TOL_FLOOR = 1e-14


def _tol(scale: float, rtol: float) -> float:
    return max(rtol * scale, TOL_FLOOR)


@dataclass(frozen=True, eq=False)
class CurvOp:
    """Symmetric operator on the bivector space satisfying the Bianchi identity."""

    n: int
    coeffs: np.ndarray

    def __add__(self, other: "CurvOp") -> "CurvOp":
        return CurvOp(self.n, self.coeffs + other.coeffs)

    def __sub__(self, other: "CurvOp") -> "CurvOp":
        return CurvOp(self.n, self.coeffs - other.coeffs)

    def __mul__(self, c: float) -> "CurvOp":
        return CurvOp(self.n, self.coeffs * c)

    __rmul__ = __mul__

    def __neg__(self) -> "CurvOp":
        return CurvOp(self.n, -self.coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def tr2(self) -> float:
        """Trace over the bivector space (N x N matrix trace)."""
        return float(np.trace(self.coeffs))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.coeffs)

    def validate(self, algebra: Algebra | None = None) -> None:
        """Raise ValueError if symmetry or the Bianchi identity fail."""
        alg = algebra or algebra_for(self.n)
        if self.coeffs.shape != (alg.N, alg.N):
            raise ValueError(f"coefficient matrix must be {alg.N}x{alg.N}, got {self.coeffs.shape}")
        scale = self.norm()
        sym_err = float(np.linalg.norm(self.coeffs - self.coeffs.T))
        if sym_err > _tol(scale, SYMMETRY_RTOL):
            raise ValueError(f"operator not symmetric: |R - R^T| = {sym_err:.3e}")
        T = _operator_to_tensor(self.coeffs, alg.basis)
        res = float(np.linalg.norm(_alt_component(T)))
        if res > _tol(scale, BIANCHI_RTOL):
            raise ValueError(f"Bianchi residual {res:.3e} exceeds tolerance")


def make_operator(n: int, coeffs: np.ndarray, check: bool = True) -> CurvOp:
    """Public constructor; validates symmetry and the Bianchi identity."""
    R = CurvOp(int(n), np.asarray(coeffs, dtype=float))
    if check:
        R.validate()
    return R


def identity_operator(n: int) -> CurvOp:
    """The operator id ^ id, i.e. the identity matrix on bivectors."""
    return CurvOp(n, np.eye(algebra_for(n).N))


@dataclass(frozen=True, eq=False)
class Tensor4:
    """(0,4) tensor picture: antisymmetric in (i,j) and (k,l), pair-exchange symmetric."""

    n: int
    entries: np.ndarray

    def validate(self) -> None:
        T = self.entries
        scale = max(float(np.linalg.norm(T)), TOL_FLOOR)
        for name, other in (("(i,j) antisymmetry", -np.einsum("jikl->ijkl", T)),
                            ("(k,l) antisymmetry", -np.einsum("ijlk->ijkl", T)),
                            ("pair exchange", np.einsum("klij->ijkl", T))):
            err = float(np.linalg.norm(T - other))
            if err > _tol(scale, SYMMETRY_RTOL):
                raise ValueError(f"tensor violates {name}: residual {err:.3e}")


def _operator_to_tensor(coeffs: np.ndarray, basis: SoBasis) -> np.ndarray:
    n = basis.n
    i, j = basis.pairs[:, 0], basis.pairs[:, 1]
    T = np.zeros((n, n, n, n))
    T[i[:, None], j[:, None], i[None, :], j[None, :]] = coeffs
    T = T - np.einsum("jikl->ijkl", T)
    T = T - np.einsum("ijlk->ijkl", T)
    return T


def _tensor_to_operator(T: np.ndarray, basis: SoBasis) -> np.ndarray:
    i, j = basis.pairs[:, 0], basis.pairs[:, 1]
    return T[i[:, None], j[:, None], i[None, :], j[None, :]]


def to_tensor(R: CurvOp, algebra: Algebra | None = None) -> Tensor4:
    """(0,4) tensor with T_{ijkl} = <R(e_i ^ e_j), e_k ^ e_l>."""
    alg = algebra or algebra_for(R.n)
    return Tensor4(R.n, _operator_to_tensor(R.coeffs, alg.basis))


def from_tensor(T: Tensor4, algebra: Algebra | None = None, check: bool = True) -> CurvOp:
    """Inverse of :func:`to_tensor`; validates the tensor symmetries."""
    alg = algebra or algebra_for(T.n)
    if check:
        T.validate()
    return CurvOp(T.n, _tensor_to_operator(T.entries, alg.basis))


def _alt_component(T: np.ndarray) -> np.ndarray:
    """Totally antisymmetric component of a tensor with S^2(Lambda^2) symmetries."""
    return (T + np.einsum("iklj->ijkl", T) + np.einsum("iljk->ijkl", T)) / 3.0


def bianchi_project(S: np.ndarray | CurvOp, n: int | None = None,
                    algebra: Algebra | None = None) -> CurvOp:
    """Orthogonal projection of a symmetric bivector operator onto Bianchi operators.

    Works through the tensor picture: subtract the full antisymmetrization and
    convert back.  Idempotent; the identity map for n = 3.
    """
    if isinstance(S, CurvOp):
        n = S.n
        M = S.coeffs
    else:
        if n is None:
            raise ValueError("dimension n required for raw matrices")
        M = np.asarray(S, dtype=float)
    alg = algebra or algebra_for(n)
    M = 0.5 * (M + M.T)
    T = _operator_to_tensor(M, alg.basis)
    T -= _alt_component(T)
    return CurvOp(n, _tensor_to_operator(T, alg.basis))


def ricci(R: CurvOp, algebra: Algebra | None = None) -> np.ndarray:
    """Ricci tensor: Ric_{ij} = sum_k <R(e_i ^ e_k), e_j ^ e_k>."""
    alg = algebra or algebra_for(R.n)
    T = _operator_to_tensor(R.coeffs, alg.basis)
    return np.einsum("ikjk->ij", T)


def scal(R: CurvOp) -> float:
    """Scalar curvature, tr(Ric) = 2 tr2(R)."""
    return 2.0 * R.tr2()


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Orthogonal splitting of a curvature operator into its irreducible parts."""

    r_I: CurvOp
    r_ric0: CurvOp
    r_weyl: CurvOp
    lambda_bar: float
    sigma: float
    ric: np.ndarray
    ric0: np.ndarray


def decompose(R: CurvOp, algebra: Algebra | None = None) -> Decomposition:
    """Split R into identity, traceless-Ricci and Weyl parts.

    r_I = (lambda_bar/(n-1)) id^id and r_ric0 = (2/(n-2)) Ric0^id; the Weyl
    part is the remainder (identically zero for n = 3).
    """
    alg = algebra or algebra_for(R.n)
    n = R.n
    ric = ricci(R, alg)
    lambda_bar = float(np.trace(ric)) / n
    ric0 = ric - lambda_bar * np.eye(n)
    sigma = float(np.sum(ric0 * ric0)) / n
    r_I = CurvOp(n, (lambda_bar / (n - 1)) * alg.identity)
    r_ric0 = CurvOp(n, (2.0 / (n - 2)) * alg.wedge(ric0, np.eye(n)))
    if n == 3:
        r_weyl = CurvOp(n, np.zeros_like(R.coeffs))
    else:
        r_weyl = CurvOp(n, R.coeffs - r_I.coeffs - r_ric0.coeffs)
    return Decomposition(r_I=r_I, r_ric0=r_ric0, r_weyl=r_weyl,
                         lambda_bar=lambda_bar, sigma=sigma, ric=ric, ric0=ric0)


def sharp(R: CurvOp, S: CurvOp, algebra: Algebra | None = None) -> np.ndarray:
    """Sharp product of two curvature operators, as a symmetric N x N matrix.

    Entry (g, d) equals -tr(R C_g S C_d)/2 where C_g are the per-generator
    structure-constant matrices; the contraction runs over their sparse
    entries only (O(N^2 n^2)), then the result is symmetrized.
    """
    if R.n != S.n:
        raise ValueError(f"dimension mismatch: {R.n} vs {S.n}")
    alg = algebra or algebra_for(R.n)
    rows, cols, vals = (alg.constants.entry_rows, alg.constants.entry_cols,
                        alg.constants.entry_vals)
    GR = R.coeffs[cols[:, :, None, None], rows[None, None, :, :]]   # R[cols[d,u], rows[g,t]]
    GS = S.coeffs[cols[:, :, None, None], rows[None, None, :, :]]   # S[cols[g,t], rows[d,u]]
    M = -0.5 * np.einsum("gt,du,dugt,gtdu->gd", vals, vals, GR, GS,
                         optimize=alg.sharp_path(vals, GR, GS))
    return 0.5 * (M + M.T)


def sharp_dense_oracle(R: CurvOp, S: CurvOp, algebra: Algebra | None = None) -> np.ndarray:
    """Sharp product through the dense structure tensor (test oracle)."""
    alg = algebra or algebra_for(R.n)
    c3 = alg.constants.dense_tensor()
    M = -0.5 * np.einsum("ab,bmg,mq,qad->gd", R.coeffs, c3, S.coeffs, c3, optimize=True)
    return 0.5 * (M + M.T)


def sharp_bracket_oracle(R: CurvOp, S: CurvOp, algebra: Algebra | None = None) -> np.ndarray:
    """Sharp product straight from matrix commutators of so(n) elements.

    Independent of the stored structure constants; quadruple loop, intended
    for small n only.
    """
    alg = algebra or algebra_for(R.n)
    basis = alg.basis
    N = alg.N
    gens = basis.generators.astype(float)
    Rb = np.einsum("ma,mij->aij", R.coeffs, gens)     # R(b_a) as so(n) matrices
    Sb = np.einsum("mb,mij->bij", S.coeffs, gens)
    out = np.zeros((N, N))
    for a in range(N):
        for b in range(N):
            base = gens[a] @ gens[b] - gens[b] @ gens[a]
            lifted = Rb[a] @ Sb[b] - Sb[b] @ Rb[a]
            cvec = basis.so_coords(base)
            pvec = basis.so_coords(lifted)
            out += 0.5 * np.outer(cvec, pvec)
    return 0.5 * (out + out.T)


def sharp_invariant_form(R: CurvOp, S: CurvOp, algebra: Algebra | None = None) -> np.ndarray:
    """Sharp product as ad o (R ^ S) o ad* on the exterior square of so(n)."""
    alg = algebra or algebra_for(R.n)
    N = alg.N
    so_pairs = build_basis(N)   # pair-index structure of Lambda^2(so(n))
    i, j = so_pairs.pairs[:, 0], so_pairs.pairs[:, 1]
    c3 = alg.constants.dense_tensor()
    ad = c3[i, j, :].T          # ad(b_i ^ b_j) coordinates, shape (N, N(N-1)/2)
    W = wedge(R.coeffs, S.coeffs, so_pairs)
    return ad @ W @ ad.T


def ode_field(R: CurvOp, algebra: Algebra | None = None) -> CurvOp:
    """The quadratic vector field R^2 + R#R, Bianchi-projected as a safeguard."""
    alg = algebra or algebra_for(R.n)
    raw = R.coeffs @ R.coeffs + sharp(R, R, alg)
    return bianchi_project(raw, R.n, alg)


def ode_field_raw(R: CurvOp, algebra: Algebra | None = None) -> CurvOp:
    """R^2 + R#R without the projection safeguard (integrator hot path)."""
    alg = algebra or algebra_for(R.n)
    return CurvOp(R.n, R.coeffs @ R.coeffs + sharp(R, R, alg))


def trilinear(R1: CurvOp, R2: CurvOp, R3: CurvOp, algebra: Algebra | None = None) -> float:
    """tr((R1 R2 + R2 R1 + 2 R1#R2) R3); fully symmetric in its arguments."""
    if not (R1.n == R2.n == R3.n):
        raise ValueError("dimension mismatch")
    alg = algebra or algebra_for(R1.n)
    A = R1.coeffs @ R2.coeffs
    M = A + A.T + 2.0 * sharp(R1, R2, alg)
    return float(np.sum(M * R3.coeffs))


def potential(R: CurvOp, algebra: Algebra | None = None) -> float:
    """Cubic potential tr(R^3 + R R#)/3 whose gradient is the flow field."""
    alg = algebra or algebra_for(R.n)
    Rm = R.coeffs
    return float(np.trace(Rm @ Rm @ Rm) + np.sum(Rm * sharp(R, R, alg))) / 3.0


def ricci_adjoint(S: np.ndarray, n: int, algebra: Algebra | None = None) -> CurvOp:
    """Adjoint of the Ricci map under tr(AB): S -> 2 (S ^ id)."""
    alg = algebra or algebra_for(n)
    return CurvOp(n, 2.0 * alg.wedge(np.asarray(S, dtype=float), np.eye(n)))


# ---------------------------------------------------------------------------
# random sampling
# ---------------------------------------------------------------------------

def random_operator(n: int, rng: np.random.Generator, scale: float = 1.0) -> CurvOp:
    """Gaussian symmetric matrix projected onto Bianchi operators."""
    N = algebra_for(n).N
    G = rng.standard_normal((N, N))
    R = bianchi_project(0.5 * (G + G.T) * scale, n)
    return R


def random_weyl(n: int, rng: np.random.Generator) -> CurvOp:
    """Random operator in the Weyl subspace (requires n >= 4)."""
    if n < 4:
        raise ValueError("the Weyl subspace is trivial for n = 3")
    return decompose(random_operator(n, rng)).r_weyl


def random_ricci_type(n: int, rng: np.random.Generator) -> CurvOp:
    """Random operator with vanishing Weyl part."""
    dec = decompose(random_operator(n, rng))
    return dec.r_I + dec.r_ric0


def ricci_type_from_spectrum(n: int, lambda_bar: float, lambdas: np.ndarray) -> CurvOp:
    """Operator with vanishing Weyl part from Ricci data diag(lambda_bar + lambdas).

    ``lambdas`` are the traceless-Ricci eigenvalues and must sum to zero.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if abs(float(lambdas.sum())) > 1e-12 * max(1.0, float(np.abs(lambdas).max(initial=0.0))):
        raise ValueError("traceless-Ricci eigenvalues must sum to zero")
    alg = algebra_for(n)
    ric0 = np.diag(lambdas)
    coeffs = (lambda_bar / (n - 1)) * alg.identity + (2.0 / (n - 2)) * alg.wedge(ric0, np.eye(n))
    return CurvOp(n, coeffs)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def operator_to_json(R: CurvOp) -> str:
    """JSON form {n, coeffs}: row-major lower triangle as 17-digit decimal strings."""
    N = R.coeffs.shape[0]
    tri = [_fmt(R.coeffs[i, j]) for i in range(N) for j in range(i + 1)]
    return json.dumps({"n": R.n, "coeffs": tri})


def operator_from_json(text: str, check: bool = True) -> CurvOp:
    obj = json.loads(text)
    n = int(obj["n"])
    N = algebra_for(n).N
    vals = [float(v) for v in obj["coeffs"]]
    if len(vals) != N * (N + 1) // 2:
        raise ValueError(f"expected {N * (N + 1) // 2} lower-triangle entries, got {len(vals)}")
    M = np.zeros((N, N))
    it = iter(vals)
    for i in range(N):
        for j in range(i + 1):
            M[i, j] = next(it)
            M[j, i] = M[i, j]
    return make_operator(n, M, check=check)


def operator_to_csv(R: CurvOp) -> str:
    """Flat CSV form: header row, then one (row, col, value) line per lower-triangle entry."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", R.n])
    N = R.coeffs.shape[0]
    for i in range(N):
        for j in range(i + 1):
            w.writerow([i, j, _fmt(R.coeffs[i, j])])
    return buf.getvalue()


def operator_from_csv(text: str, check: bool = True) -> CurvOp:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][0] != "n":
        raise ValueError("missing dimension header")
    n = int(rows[0][1])
    N = algebra_for(n).N
    M = np.zeros((N, N))
    for i_s, j_s, v_s in rows[1:]:
        i, j = int(i_s), int(j_s)
        M[i, j] = M[j, i] = float(v_s)
    return make_operator(n, M, check=check)
