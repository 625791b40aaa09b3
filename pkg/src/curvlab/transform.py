"""Equivariant rescaling of the irreducible parts and the induced flow difference.

The linear map with parameters (a, b) acts as 1 + 2(n-1)a on the identity
part, 1 + (n-2)b on the traceless-Ricci part, and fixes Weyl operators.
Pulling the quadratic flow field back through this map and subtracting the
plain field gives a difference operator that is independent of the Weyl
curvature; it has a closed form in the Ricci data alone, plus explicit
eigenvalue formulas on Ricci eigenbases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import Algebra, algebra_for
from .operators import (CurvOp, decompose, identity_operator, ode_field,
                        ricci_type_from_spectrum, ricci)

SINGULAR_MARGIN = 1e-10


@dataclass(frozen=True)
class TransformParams:
    """Parameters (a, b) of the equivariant rescaling in dimension n."""

    a: float
    b: float
    n: int

    @property
    def identity_eigenvalue(self) -> float:
        return 1.0 + 2.0 * (self.n - 1) * self.a

    @property
    def ricci_eigenvalue(self) -> float:
        return 1.0 + (self.n - 2) * self.b

    def validate(self) -> None:
        if self.n < 3:
            raise ValueError(f"dimension must be >= 3, got {self.n}")
        for name, ev in (("identity part", self.identity_eigenvalue),
                         ("traceless-Ricci part", self.ricci_eigenvalue)):
            if abs(ev) < SINGULAR_MARGIN:
                raise ValueError(
                    f"parameters ({self.a}, {self.b}) are within {SINGULAR_MARGIN} "
                    f"of the singular hyperplane for the {name}")


def transform_params(a: float, b: float, n: int) -> TransformParams:
    p = TransformParams(float(a), float(b), int(n))
    p.validate()
    return p


def transform(R: CurvOp, params: TransformParams, algebra: Algebra | None = None) -> CurvOp:
    """R + 2(n-1)a R_I + (n-2)b R_ric0."""
    params.validate()
    alg = algebra or algebra_for(R.n)
    dec = decompose(R, alg)
    n = R.n
    return CurvOp(n, R.coeffs + 2.0 * (n - 1) * params.a * dec.r_I.coeffs
                  + (n - 2) * params.b * dec.r_ric0.coeffs)


def inverse_transform(R: CurvOp, params: TransformParams,
                      algebra: Algebra | None = None) -> CurvOp:
    """Inverse of :func:`transform`: divide the parts by their eigenvalues."""
    params.validate()
    alg = algebra or algebra_for(R.n)
    dec = decompose(R, alg)
    return CurvOp(R.n, dec.r_weyl.coeffs
                  + dec.r_I.coeffs / params.identity_eigenvalue
                  + dec.r_ric0.coeffs / params.ricci_eigenvalue)


def pullback_field(R: CurvOp, params: TransformParams,
                   algebra: Algebra | None = None) -> CurvOp:
    """The flow field conjugated by the transform: inv(X(transform(R)))."""
    alg = algebra or algebra_for(R.n)
    return inverse_transform(ode_field(transform(R, params, alg), alg), params, alg)


def difference_by_definition(R: CurvOp, params: TransformParams,
                             algebra: Algebra | None = None) -> CurvOp:
    """Pulled-back field minus the plain field, by direct composition."""
    alg = algebra or algebra_for(R.n)
    return pullback_field(R, params, alg) - ode_field(R, alg)


def difference_closed_form(R: CurvOp, params: TransformParams,
                           algebra: Algebra | None = None) -> CurvOp:
    """Closed form of the difference, assembled from the Ricci data of R.

    Independent of the Weyl part by construction:

        ((n-2)b^2 - 2(a-b)) Ric0^Ric0 + 2a Ric^Ric + 2b^2 Ric0^2^id
        + tr(Ric0^2)/(n + 2n(n-1)a) * (n b^2(1-2b) - 2(a-b)(1-2b+n b^2)) id^id
    """
    params.validate()
    alg = algebra or algebra_for(R.n)
    n, a, b = R.n, params.a, params.b
    dec = decompose(R, alg)
    ric0 = dec.ric0
    eye = np.eye(n)
    coeffs = (((n - 2) * b * b - 2.0 * (a - b)) * alg.wedge(ric0, ric0)
              + 2.0 * a * alg.wedge(dec.ric, dec.ric)
              + 2.0 * b * b * alg.wedge(ric0 @ ric0, eye))
    i_coeff = (np.sum(ric0 * ric0) / (n + 2.0 * n * (n - 1) * a)
               * (n * b * b * (1.0 - 2.0 * b)
                  - 2.0 * (a - b) * (1.0 - 2.0 * b + n * b * b)))
    return CurvOp(n, coeffs + i_coeff * alg.identity)


# ---------------------------------------------------------------------------
# eigenvalue formulas on a Ricci eigenbasis
# ---------------------------------------------------------------------------

def _check_spectrum(lambdas: np.ndarray) -> np.ndarray:
    lambdas = np.atleast_2d(np.asarray(lambdas, dtype=float))
    sums = np.abs(lambdas.sum(axis=-1))
    if np.any(sums > 1e-12 * np.maximum(1.0, np.abs(lambdas).max(axis=-1))):
        raise ValueError("traceless-Ricci eigenvalues must sum to zero")
    return lambdas


def difference_eigenvalue_table(lambdas: np.ndarray, lambda_bar: float | np.ndarray,
                                params: TransformParams) -> np.ndarray:
    """Eigenvalues d_ij of the difference on the bivectors of a Ricci eigenbasis.

    Accepts a single spectrum (n,) or a batch (S, n); returns the matching
    (n, n) or (S, n, n) symmetric array (diagonal entries are not meaningful).
    """
    params.validate()
    lam = _check_spectrum(lambdas)
    lbar = np.asarray(lambda_bar, dtype=float).reshape(-1, 1, 1)
    n, a, b = params.n, params.a, params.b
    sigma = np.sum(lam * lam, axis=-1).reshape(-1, 1, 1) / n
    li = lam[:, :, None]
    lj = lam[:, None, :]
    const = (sigma / (1.0 + 2.0 * (n - 1) * a)
             * (n * b * b * (1.0 - 2.0 * b) - 2.0 * (a - b) * (1.0 - 2.0 * b + n * b * b)))
    d = (((n - 2) * b * b - 2.0 * (a - b)) * li * lj
         + 2.0 * a * (lbar + li) * (lbar + lj)
         + b * b * (li * li + lj * lj)
         + const)
    return d[0] if np.asarray(lambdas).ndim == 1 else d


def difference_ricci_eigenvalues(lambdas: np.ndarray, lambda_bar: float | np.ndarray,
                                 params: TransformParams) -> np.ndarray:
    """Eigenvalues r_i of the Ricci tensor of the difference operator."""
    params.validate()
    lam = _check_spectrum(lambdas)
    lbar = np.asarray(lambda_bar, dtype=float).reshape(-1, 1)
    n, a, b = params.n, params.a, params.b
    sigma = np.sum(lam * lam, axis=-1, keepdims=True) / n
    r = (-2.0 * b * lam * lam
         + 2.0 * a * lbar * (n - 2) * lam
         + 2.0 * a * (n - 1) * lbar * lbar
         + sigma / (1.0 + 2.0 * (n - 1) * a)
         * (n * n * b * b - 2.0 * (n - 1) * (a - b) * (1.0 - 2.0 * b)))
    return r[0] if np.asarray(lambdas).ndim == 1 else r


def d_spectrum(lambdas: np.ndarray, lambda_bar: float,
               params: TransformParams) -> dict[tuple[int, int], float]:
    """Eigenvalue map {(i, j): d_ij, i < j} of the difference operator."""
    d = difference_eigenvalue_table(lambdas, lambda_bar, params)
    n = params.n
    return {(i, j): float(d[i, j]) for i in range(n) for j in range(i + 1, n)}


def r_spectrum(lambdas: np.ndarray, lambda_bar: float,
               params: TransformParams) -> np.ndarray:
    """Eigenvalues of the Ricci tensor of the difference operator."""
    return difference_ricci_eigenvalues(lambdas, lambda_bar, params)


def difference_on_ricci_type(lambdas: np.ndarray, lambda_bar: float,
                             params: TransformParams) -> CurvOp:
    """Assemble the Ricci-type operator from its spectrum and apply the closed form."""
    return difference_closed_form(
        ricci_type_from_spectrum(params.n, lambda_bar, lambdas), params)


# ---------------------------------------------------------------------------
# closed forms for operators with vanishing Weyl part
# ---------------------------------------------------------------------------

def ricci_type_field(R: CurvOp, algebra: Algebra | None = None) -> CurvOp:
    """Closed form of R^2 + R# for an operator with vanishing Weyl part.

    (1/(n-2)) Ric0^Ric0 + (2 lbar/(n-1)) Ric0^id - (2/(n-2)^2) (Ric0^2)_0^id
    + (lbar^2/(n-1) + sigma/(n-2)) id^id
    """
    alg = algebra or algebra_for(R.n)
    n = R.n
    dec = decompose(R, alg)
    ric0 = dec.ric0
    eye = np.eye(n)
    sq0 = ric0 @ ric0 - (np.trace(ric0 @ ric0) / n) * eye
    coeffs = (alg.wedge(ric0, ric0) / (n - 2)
              + (2.0 * dec.lambda_bar / (n - 1)) * alg.wedge(ric0, eye)
              - (2.0 / (n - 2) ** 2) * alg.wedge(sq0, eye)
              + (dec.lambda_bar ** 2 / (n - 1) + dec.sigma / (n - 2)) * alg.identity)
    return CurvOp(n, coeffs)


def ricci_type_field_ricci(R: CurvOp, algebra: Algebra | None = None) -> np.ndarray:
    """Closed form of Ric(R^2 + R#) for an operator with vanishing Weyl part."""
    alg = algebra or algebra_for(R.n)
    n = R.n
    dec = decompose(R, alg)
    ric0 = dec.ric0
    sq0 = ric0 @ ric0 - (np.trace(ric0 @ ric0) / n) * np.eye(n)
    return (-(2.0 / (n - 2)) * sq0
            + ((n - 2) / (n - 1)) * dec.lambda_bar * ric0
            + (dec.lambda_bar ** 2 + dec.sigma) * np.eye(n))


def field_ricci_eigenvalues(lambdas: np.ndarray, lambda_bar: float | np.ndarray,
                            n: int) -> np.ndarray:
    """Ricci eigenvalues of R^2 + R# for the Ricci-type operator with given spectrum.

    Vectorized over a batch of spectra.
    """
    lam = _check_spectrum(lambdas)
    lbar = np.asarray(lambda_bar, dtype=float).reshape(-1, 1)
    sigma = np.sum(lam * lam, axis=-1, keepdims=True) / n
    out = (-(2.0 / (n - 2)) * (lam * lam - sigma)
           + ((n - 2) / (n - 1)) * lbar * lam
           + lbar * lbar + sigma)
    return out[0] if np.asarray(lambdas).ndim == 1 else out


def transform_difference_weyl_identity(R: CurvOp, params: TransformParams,
                                       algebra: Algebra | None = None) -> tuple[CurvOp, CurvOp]:
    """Both sides of the Weyl-projection identity for Ricci-type input.

    Returns (weyl part of the definition-path difference,
    ((n-2)b^2 + 2b) * weyl part of Ric0^Ric0).
    """
    alg = algebra or algebra_for(R.n)
    n, b = R.n, params.b
    lhs = decompose(difference_by_definition(R, params, alg), alg).r_weyl
    ric0 = decompose(R, alg).ric0
    rhs = decompose(CurvOp(n, alg.wedge(ric0, ric0)), alg).r_weyl * ((n - 2) * b * b + 2.0 * b)
    return lhs, rhs


def difference_ricci_closed_form(R: CurvOp, params: TransformParams,
                                 algebra: Algebra | None = None) -> np.ndarray:
    """Closed form of the Ricci tensor of the difference operator."""
    alg = algebra or algebra_for(R.n)
    n, a, b = R.n, params.a, params.b
    dec = decompose(R, alg)
    ric0 = dec.ric0
    sigma = dec.sigma
    lbar = dec.lambda_bar
    return (-2.0 * b * (ric0 @ ric0)
            + 2.0 * (n - 2) * a * lbar * ric0
            + 2.0 * (n - 1) * a * lbar * lbar * np.eye(n)
            + ((2.0 * (n - 1) * b + (n - 2) ** 2 * b * b
                - 2.0 * (n - 1) * a * (1.0 - 2.0 * b))
               / (1.0 + 2.0 * (n - 1) * a)) * sigma * np.eye(n))


__all__ = [
    "TransformParams", "transform_params", "transform", "inverse_transform",
    "pullback_field", "difference_by_definition", "difference_closed_form",
    "difference_eigenvalue_table", "difference_ricci_eigenvalues",
    "d_spectrum", "r_spectrum", "difference_on_ricci_type",
    "ricci_type_field", "ricci_type_field_ricci", "field_ricci_eigenvalues",
    "transform_difference_weyl_identity", "difference_ricci_closed_form",
]
