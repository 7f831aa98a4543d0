"""Attenuation and bias-factor algebra for linear-type measurement error.

Closed forms: lambda = gamma1 Var(X|z) / (gamma1^2 Var(X|z) + Var(U)) and the
weighted exchangeability probability difference P_RD = lambda * gamma1,
which equals the R^2 of regressing the measured on the true exposure given z.
The polynomial extension treats the highest power q via
P_RDq = gamma1^(2q) Var(X^q) / Var(Xep^q).

The decomposition operations reconstruct the naive exposure coefficient from
plug-in OLS fits: the calibration model, the pseudo-confounder projection,
and the calibration-residual projection (exposure-error route), or the
confounder-calibration residual projection (confounder-error route).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .model import Dataset, Link
from .regress import ols, design_with_intercept


@dataclass(frozen=True)
class BiasFactorReport:
    lambda_: float
    gamma1: float
    p_rd: float
    r_squared_check: float
    surrogate_lower: float
    surrogate_upper: float


def lambda_closed_form(gamma1: float, var_x: float, var_u: float) -> float:
    """gamma1 Var(X|z) / (gamma1^2 Var(X|z) + Var(U))."""
    if var_x < 0 or var_u < 0:
        raise ParameterError("variances must be >= 0")
    denom = gamma1 * gamma1 * var_x + var_u
    if denom == 0:
        raise ParameterError("degenerate error model: gamma1^2 Var(X) + Var(U) = 0")
    return gamma1 * var_x / denom


def p_rd_identity(gamma1: float, var_x: float, var_u: float) -> float:
    """P_RD = lambda * gamma1 = gamma1^2 Var(X) / (gamma1^2 Var(X) + Var(U)),
    the R^2 of the measured-on-true regression given z.

    Computed as the single ratio so 0 <= P_RD <= 1 holds exactly in floats.
    """
    if var_x < 0 or var_u < 0:
        raise ParameterError("variances must be >= 0")
    signal = gamma1 * gamma1 * var_x
    denom = signal + var_u
    if denom == 0:
        raise ParameterError("degenerate error model: gamma1^2 Var(X) + Var(U) = 0")
    return signal / denom


def p_rd_polynomial(q: int, gamma1: float, var_xq: float, var_uq: float) -> float:
    """P_RD for the highest polynomial power q.

    var_xq is Var(X^q | z); var_uq is the non-signal variance of the measured
    power, Var(Xep^q | z) - gamma1^(2q) Var(X^q | z). For q = 1 that is
    Var(U) and the identity reduces to p_rd_identity.
    """
    if q < 1:
        raise ParameterError("q must be >= 1")
    if var_xq < 0 or var_uq < 0:
        raise ParameterError("variances must be >= 0")
    signal = gamma1 ** (2 * q) * var_xq
    denom = signal + var_uq
    if denom == 0:
        raise ParameterError("degenerate polynomial error model: zero total variance")
    return signal / denom


def p_rd_polynomial_from_data(q: int, x, xep, gamma1: float | None = None) -> float:
    """Plug-in version: moments of X^q and Xep^q estimated from columns.

    gamma1 defaults to the fitted slope of Xep on X.
    """
    x = np.asarray(x, dtype=float)
    xep = np.asarray(xep, dtype=float)
    if gamma1 is None:
        gamma1 = float(ols(design_with_intercept(x), xep).coefficients[1])
    xq = x**q
    xepq = xep**q
    var_xq = float(np.var(xq))
    var_total = float(np.var(xepq))
    var_uq = max(var_total - gamma1 ** (2 * q) * var_xq, 0.0)
    return p_rd_polynomial(q, gamma1, var_xq, var_uq)


def surrogate_bounds(p_rd: float, gamma1: float) -> tuple[float, float]:
    """Bounds on AEE(Xep)/AEE(X) over admissible p_rd in [0, 1].

    The realized ratio is p_rd / gamma1; the bounds are 0 and 1/gamma1
    (ordered by sign), so for gamma1 >= 1 the surrogate never exceeds the
    true effect.
    """
    if gamma1 == 0:
        raise ParameterError("gamma1 must be nonzero")
    if not 0.0 <= p_rd <= 1.0:
        raise ParameterError("p_rd must lie in [0, 1]")
    extreme = 1.0 / gamma1
    return (min(0.0, extreme), max(0.0, extreme))


def surrogate_ratio(p_rd: float, gamma1: float) -> float:
    """AEE(Xep)/AEE(X) = p_rd / gamma1 on the risk-difference scale."""
    if gamma1 == 0:
        raise ParameterError("gamma1 must be nonzero")
    return p_rd / gamma1


@dataclass(frozen=True)
class RrPrediction:
    value: float
    approximate: bool  # the logit link only supports the small-effect approximation


def predict_naive_slope_rr(beta1: float, gamma1: float, p_rr: float, link: Link) -> RrPrediction:
    """Predicted log-scale naive coefficient (p_rr / gamma1) * beta1.

    Exact for the log link; for logit it is the rare-outcome/small-effect
    approximation and the result is flagged.
    """
    if link not in (Link.LOG, Link.LOGIT):
        raise ParameterError("link must be log or logit")
    if gamma1 == 0:
        raise ParameterError("gamma1 must be nonzero")
    return RrPrediction(value=(p_rr / gamma1) * beta1, approximate=link is Link.LOGIT)


def report(gamma1: float, var_x: float, var_u: float) -> BiasFactorReport:
    lam = lambda_closed_form(gamma1, var_x, var_u)
    p_rd = lam * gamma1
    lo, hi = surrogate_bounds(min(max(p_rd, 0.0), 1.0), gamma1)
    return BiasFactorReport(
        lambda_=lam,
        gamma1=gamma1,
        p_rd=p_rd,
        r_squared_check=p_rd,
        surrogate_lower=lo,
        surrogate_upper=hi,
    )


def report_from_data(x, xep, adjust=None) -> BiasFactorReport:
    """Data-driven report: gamma1 and Var(U) from the measured-on-true fit,
    Var(X|z) from the residual variance of X on the adjustment columns."""
    x = np.asarray(x, dtype=float)
    xep = np.asarray(xep, dtype=float)
    adj = [np.asarray(a, dtype=float) for a in (adjust or [])]
    meas_fit = ols(design_with_intercept(x, *adj), xep)
    gamma1 = float(meas_fit.coefficients[1])
    var_u = float(meas_fit.residual_variance)
    if adj:
        x_fit = ols(design_with_intercept(*adj), x)
        var_x = float(x_fit.residual_variance)
    else:
        var_x = float(np.var(x, ddof=1))
    lam = lambda_closed_form(gamma1, var_x, var_u)
    p_rd = lam * gamma1
    lo, hi = surrogate_bounds(min(max(p_rd, 0.0), 1.0), gamma1)
    return BiasFactorReport(
        lambda_=lam,
        gamma1=gamma1,
        p_rd=p_rd,
        r_squared_check=float(meas_fit.r_squared),
        surrogate_lower=lo,
        surrogate_upper=hi,
    )


def figure2_grid(gammas=(0.5, 0.75, 1.0, 1.5, 2.0), points: int = 101):
    """(gamma1, p, lambda) rows of the lambda = p / gamma1 line family."""
    ps = np.linspace(0.0, 1.0, points)
    rows = []
    for g in gammas:
        for p in ps:
            rows.append((float(g), float(p), float(p / g)))
    return rows


# ---------------------------------------------------------------------------
# Naive-coefficient decompositions


@dataclass(frozen=True)
class EpcDecomposition:
    """Exposure-error route: beta1_ep = beta1 * (gamma1_star
    + gamma_v_star * rho_v + rho_u)."""

    beta1: float
    gamma1_star: float
    gamma_v_star: float
    rho_v: float
    rho_u: float
    predicted_naive: float
    direct_naive: float


def epc_decomposition(d: Dataset, adjustment: list[str]) -> EpcDecomposition:
    """Reconstruct the naive exposure coefficient through the calibration fit,
    the pseudo-confounder projection (V on Xep + z'), and the calibration
    residual projection (U* on Xep + z').

    The reconstruction is an identity only when the correct outcome model's
    residual is unrelated to the measured exposure given z'; worlds where V
    affects the outcome directly need V inside ``adjustment``. In that case
    the pseudo-confounder projection is structurally zero (V is conditioned
    away) and only the calibration-residual route remains.
    """
    d.require("X", "Xep", "V", "Y", *adjustment)
    v_adjusted = "V" in adjustment
    z = [d[c] for c in adjustment]
    xep = d["Xep"]
    v = d["V"]
    # V enters the calibration once, whether or not it sits in z'
    calib_cols = [xep, v] + [d[c] for c in adjustment if c != "V"]

    correct = ols(design_with_intercept(d["X"], *z), d["Y"])
    beta1 = float(correct.coefficients[1])

    calib = ols(design_with_intercept(*calib_cols), d["X"])
    gamma1_star = float(calib.coefficients[1])
    gamma_v_star = float(calib.coefficients[2])
    u_star = d["X"] - calib.predict(design_with_intercept(*calib_cols))

    rho_v = 0.0 if v_adjusted else float(
        ols(design_with_intercept(xep, *z), v).coefficients[1]
    )
    rho_u = float(ols(design_with_intercept(xep, *z), u_star).coefficients[1])

    predicted = beta1 * (gamma1_star + gamma_v_star * rho_v + rho_u)
    direct = float(ols(design_with_intercept(xep, *z), d["Y"]).coefficients[1])
    return EpcDecomposition(
        beta1=beta1,
        gamma1_star=gamma1_star,
        gamma_v_star=gamma_v_star,
        rho_v=rho_v,
        rho_u=rho_u,
        predicted_naive=predicted,
        direct_naive=direct,
    )


@dataclass(frozen=True)
class EcDecomposition:
    """Confounder-error route: beta1_ep ~= beta1 * (gamma1_star + rho_u)
    + beta_c * rho_ec, with beta_c * rho_ec the residual-confounding term."""

    beta1: float
    beta_c: float
    gamma1_star: float
    rho_u: float
    rho_ec: float
    ec_term: float
    predicted_naive: float
    direct_naive: float


def ec_decomposition(d: Dataset, adjustment: list[str] | None = None) -> EcDecomposition:
    """Reconstruct the naive exposure coefficient when the confounder is
    error-prone. ``adjustment`` lists z minus C columns (defaults to none)."""
    extra = list(adjustment or [])
    d.require("X", "Xep", "C", "Cep", "Y", *extra)
    z = [d[c] for c in extra]
    xep = d["Xep"]
    cep = d["Cep"]

    correct = ols(design_with_intercept(d["X"], d["C"], *z), d["Y"])
    beta1 = float(correct.coefficients[1])
    beta_c = float(correct.coefficients[2])

    x_calib = ols(design_with_intercept(xep, cep, *z), d["X"])
    gamma1_star = float(x_calib.coefficients[1])
    u_star = d["X"] - x_calib.predict(design_with_intercept(xep, cep, *z))

    c_calib = ols(design_with_intercept(cep, *z), d["C"])
    uc_star = d["C"] - c_calib.predict(design_with_intercept(cep, *z))

    rho_u = float(ols(design_with_intercept(xep, cep, *z), u_star).coefficients[1])
    rho_ec = float(ols(design_with_intercept(xep, cep, *z), uc_star).coefficients[1])

    ec_term = beta_c * rho_ec
    predicted = beta1 * (gamma1_star + rho_u) + ec_term
    direct = float(ols(design_with_intercept(xep, cep, *z), d["Y"]).coefficients[1])
    return EcDecomposition(
        beta1=beta1,
        beta_c=beta_c,
        gamma1_star=gamma1_star,
        rho_u=rho_u,
        rho_ec=rho_ec,
        ec_term=ec_term,
        predicted_naive=predicted,
        direct_naive=direct,
    )
