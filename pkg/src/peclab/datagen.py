"""Dataset materialization: the discrete exposure-only world and the
continuous simulation worlds.

Generation order is fixed by the structural dependencies: C, V first, then X
(or the measured exposure under pure Berkson wiring), then Y, then the
error-prone columns. Every draw is keyed by (seed, replication, column), so
replications are independent and reproducible in isolation.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError, PeclabError
from .model import (
    Dataset,
    DistributionSpec,
    ErrorKind,
    ErrorModel,
    Link,
    Scenario,
    validate_scenario,
)
from .rng import ColumnTag, StreamKey, sample, uniforms


class ScenarioInvalid(PeclabError):
    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


def generate_table2_world(n: int, seed: int, *, discrete_uniform: bool = False) -> Dataset:
    """The discrete exposure-only world: X = round(U(8,10)), Y = 0.1X + 0.1W,
    Xep = X + U with W, U = round(U(-1,1)).

    All three laws are three-point (1/4, 1/2, 1/4). ``discrete_uniform``
    switches X, W, U to equal-weight draws on their supports instead; that
    reading is inconsistent with the published probability grid (it gives
    each support point mass 1/3) and exists only for comparison.
    """
    if n < 1:
        raise ParameterError("n must be >= 1")

    def draw(tag: ColumnTag, lo: float, hi: float) -> np.ndarray:
        if discrete_uniform:
            u = uniforms(StreamKey(seed, 0, tag), n)
            levels = np.arange(lo, hi + 1)
            return levels[np.minimum((u * levels.size).astype(int), levels.size - 1)]
        return sample(DistributionSpec.rounded_uniform(lo, hi), StreamKey(seed, 0, tag), n)

    x = draw(ColumnTag.X, 8, 10)
    w = draw(ColumnTag.W, -1, 1)
    u = draw(ColumnTag.U, -1, 1)
    y = 0.1 * x + 0.1 * w
    return Dataset(
        {"X": x, "Xep": x + u, "Y": y},
        provenance=f"table2-world(n={n}, seed={seed}, discrete_uniform={discrete_uniform})",
    )


def _apply_error(
    error: ErrorModel,
    true_vals: np.ndarray,
    v: np.ndarray,
    key: StreamKey,
) -> np.ndarray:
    """Measured column for a non-Berkson error model (or the identity)."""
    n = true_vals.shape[0]
    if error.kind is ErrorKind.NONE:
        return true_vals.copy()
    u = sample(error.noiseU, key, n)
    if error.kind in (ErrorKind.NON_BERKSON_LINEAR, ErrorKind.SHARED_V):
        return error.gamma0 + error.gamma1 * true_vals + error.gammaV * v + u
    raise ParameterError(f"unsupported error kind {error.kind} here")


def generate_scenario(s: Scenario, replication_index: int = 0) -> Dataset:
    """Materialize one replication of a scenario.

    The outcome link decides the response type: identity gives an additive
    continuous Y, logit a Bernoulli draw at the logistic mean (noise inside
    the linear predictor), log a Bernoulli draw at exp(lp) for rare-outcome
    worlds.
    """
    violations = validate_scenario(s)
    if violations:
        raise ScenarioInvalid(violations)
    n = s.n
    key = lambda tag: StreamKey(s.seed, replication_index, tag)

    c_base = sample(s.c_model.noise, key(ColumnTag.C), n)
    v = sample(s.v_model, key(ColumnTag.V), n)
    c = s.c_model.intercept + s.c_model.coef_v * v + c_base

    x_mean = s.x_model.intercept + s.x_model.coef_c * c + s.x_model.coef_v * v
    x_draw = x_mean + sample(s.x_model.noise, key(ColumnTag.X_NOISE), n)

    if s.exposure_error.kind is ErrorKind.PURE_BERKSON:
        # the structural equation generates the measured value; truth is
        # measured-plus-noise
        xep = x_draw
        u = sample(s.exposure_error.noiseU, key(ColumnTag.U_X), n)
        x = (
            s.exposure_error.gamma0
            + s.exposure_error.gamma1 * xep
            + s.exposure_error.gammaV * v
            + u
        )
    else:
        x = x_draw
        xep = _apply_error(s.exposure_error, x, v, key(ColumnTag.U_X))

    eps = sample(s.outcome.noise, key(ColumnTag.Y_NOISE), n)
    lp = s.outcome.linear_predictor(x, c=c, v=v, eps=eps)
    if s.outcome.link is Link.IDENTITY:
        y = lp
    elif s.outcome.link is Link.LOGIT:
        p = 1.0 / (1.0 + np.exp(-lp))
        y = (uniforms(key(ColumnTag.BERNOULLI), n) < p).astype(float)
    elif s.outcome.link is Link.LOG:
        p = np.exp(lp)
        if np.any(p > 1.0):
            raise ParameterError(
                "log link produced probabilities > 1; the outcome model is "
                "valid only for rare outcomes"
            )
        y = (uniforms(key(ColumnTag.BERNOULLI), n) < p).astype(float)
    else:
        raise ParameterError(f"unsupported link {s.outcome.link}")

    if s.confounder_error.kind is ErrorKind.PURE_BERKSON:
        raise ParameterError("pure Berkson confounder error is not supported")
    if s.v_error.kind is ErrorKind.PURE_BERKSON:
        raise ParameterError("pure Berkson V error is not supported")
    cep = _apply_error(s.confounder_error, c, v, key(ColumnTag.U_C))
    vep = _apply_error(s.v_error, v, v, key(ColumnTag.U_V))

    return Dataset(
        {"X": x, "Xep": xep, "C": c, "Cep": cep, "V": v, "Vep": vep, "Y": y},
        provenance=f"{s.name}[rep={replication_index}, seed={s.seed}]",
    )


def generate_binary_scenario(s: Scenario, replication_index: int = 0) -> Dataset:
    """generate_scenario for logit-link scenarios, with the link checked."""
    if s.outcome.link is not Link.LOGIT:
        raise ParameterError("generate_binary_scenario requires a logit-link outcome")
    return generate_scenario(s, replication_index)
