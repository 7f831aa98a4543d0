"""Core domain types: distributions, outcome/error models, scenarios, datasets.

All types are immutable value objects after construction and safe to share
across threads. Scenarios round-trip through a line-oriented text format
(``section.key = value``, see docs/scenario-format.md); datasets round-trip
through CSV with the canonical column header ``X,Xep,C,Cep,V,Vep,Y``.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum

import numpy as np

from .errors import ParameterError, ScenarioFormatError, SchemaError

# Canonical dataset column order. Generated datasets may omit the C/V block
# (the discrete exposure-only world has no confounders).
COLUMN_ORDER = ("X", "Xep", "C", "Cep", "V", "Vep", "Y")


class Link(str, Enum):
    IDENTITY = "identity"
    LOGIT = "logit"
    LOG = "log"


class ErrorKind(str, Enum):
    NONE = "none"
    NON_BERKSON_LINEAR = "nonBerksonLinear"
    PURE_BERKSON = "pureBerkson"
    SHARED_V = "sharedV"


class Estimand(str, Enum):
    RISK_DIFFERENCE = "riskDifference"
    RISK_RATIO = "riskRatio"


class Method(str, Enum):
    NAIVE = "naive"
    CALIBRATED = "calibrated"
    G_COMPUTATION = "gComputation"
    IPW_GPS = "ipwGps"
    ORACLE = "oracle"


@dataclass(frozen=True)
class DistributionSpec:
    """One of four sampling families.

    family/parameter meaning:
      normal(p1=mu, p2=sigma), gamma(p1=shape, p2=scale),
      roundedUniform(p1=lo, p2=hi)  -> round(Uniform(lo, hi)),
      pointMass(p1=c).

    roundedUniform with integer endpoints hi - lo = 2 is the three-point law
    (1/4, 1/2, 1/4) on {lo, lo+1, hi}.
    """

    family: str
    p1: float = 0.0
    p2: float = 0.0

    @classmethod
    def normal(cls, mu: float, sigma: float) -> "DistributionSpec":
        return cls("normal", float(mu), float(sigma))

    @classmethod
    def gamma(cls, shape: float, scale: float) -> "DistributionSpec":
        return cls("gamma", float(shape), float(scale))

    @classmethod
    def rounded_uniform(cls, lo: float, hi: float) -> "DistributionSpec":
        return cls("roundedUniform", float(lo), float(hi))

    @classmethod
    def point_mass(cls, c: float) -> "DistributionSpec":
        return cls("pointMass", float(c))

    def violations(self) -> list[str]:
        v = []
        if self.family == "normal":
            if self.p2 < 0:
                v.append("normal sigma must be >= 0")
        elif self.family == "gamma":
            if self.p1 <= 0:
                v.append("gamma shape must be > 0")
            if self.p2 <= 0:
                v.append("gamma scale must be > 0")
        elif self.family == "roundedUniform":
            if not self.p1 < self.p2:
                v.append("roundedUniform requires lo < hi")
        elif self.family == "pointMass":
            pass
        else:
            v.append(f"unknown distribution family {self.family!r}")
        return v

    def check(self) -> None:
        v = self.violations()
        if v:
            raise ParameterError("; ".join(v))

    def _rounded_cells(self) -> tuple[np.ndarray, np.ndarray]:
        """Integer support and probabilities of round(Uniform(lo, hi))."""
        lo, hi = self.p1, self.p2
        ks = np.arange(math.ceil(lo - 0.5), math.floor(hi + 0.5) + 1, dtype=float)
        width = np.minimum(hi, ks + 0.5) - np.maximum(lo, ks - 0.5)
        probs = np.clip(width, 0.0, None) / (hi - lo)
        keep = probs > 0
        return ks[keep], probs[keep]

    def mean(self) -> float:
        if self.family == "normal":
            return self.p1
        if self.family == "gamma":
            return self.p1 * self.p2
        if self.family == "pointMass":
            return self.p1
        ks, probs = self._rounded_cells()
        return float(np.dot(ks, probs))

    def variance(self) -> float:
        if self.family == "normal":
            return self.p2**2
        if self.family == "gamma":
            return self.p1 * self.p2**2
        if self.family == "pointMass":
            return 0.0
        ks, probs = self._rounded_cells()
        m = float(np.dot(ks, probs))
        return float(np.dot(ks**2, probs) - m**2)

    def is_discrete(self) -> bool:
        return self.family in ("roundedUniform", "pointMass")

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """(values, probabilities) for discrete families."""
        if self.family == "pointMass":
            return np.array([self.p1]), np.array([1.0])
        if self.family == "roundedUniform":
            return self._rounded_cells()
        raise ParameterError(f"{self.family} has no discrete support")

    def density(self, x: np.ndarray) -> np.ndarray:
        """Probability density for the continuous families."""
        x = np.asarray(x, dtype=float)
        if self.family == "normal":
            if self.p2 == 0:
                raise ParameterError("degenerate normal has no density")
            z = (x - self.p1) / self.p2
            return np.exp(-0.5 * z * z) / (self.p2 * math.sqrt(2 * math.pi))
        if self.family == "gamma":
            shape, scale = self.p1, self.p2
            out = np.zeros_like(x)
            pos = x > 0
            xp = x[pos]
            out[pos] = np.exp(
                (shape - 1) * np.log(xp) - xp / scale - math.lgamma(shape) - shape * math.log(scale)
            )
            return out
        raise ParameterError(f"{self.family} is not a continuous family")


@dataclass(frozen=True)
class OutcomeModel:
    """Structural outcome model Y(x) for a given confounder/covariate draw.

    identity link: Y = beta0 + beta_x*X + beta_x2*X^2 + beta_c*C + beta_v*V
                       + noise_scale*eps
    logit link:    Y ~ Bernoulli(sigmoid(same linear predictor)), the noise
                   draw sits inside the linear predictor
    log link:      Y ~ Bernoulli(exp(same linear predictor)), valid only for
                   rare outcomes (all probabilities <= 1)

    noise (eps) is mean zero; noise_scale lets the discrete-world model put
    0.1*W into the outcome while W itself stays a unit three-point law.
    """

    link: Link = Link.IDENTITY
    beta0: float = 0.0
    beta_x: float = 0.0
    beta_x2: float = 0.0
    beta_c: float = 0.0
    beta_v: float = 0.0
    noise: DistributionSpec = field(default_factory=lambda: DistributionSpec.point_mass(0.0))
    noise_scale: float = 1.0

    def violations(self) -> list[str]:
        v = [f"outcome.noise: {msg}" for msg in self.noise.violations()]
        if not v and abs(self.noise.mean()) > 1e-9:
            v.append("outcome noise must have mean 0")
        return v

    def linear_predictor(self, x, x2=None, c=0.0, v=0.0, eps=0.0):
        x = np.asarray(x, dtype=float)
        quad = self.beta_x2 * (x * x if x2 is None else x2)
        return (
            self.beta0
            + self.beta_x * x
            + quad
            + self.beta_c * np.asarray(c, dtype=float)
            + self.beta_v * np.asarray(v, dtype=float)
            + self.noise_scale * np.asarray(eps, dtype=float)
        )


@dataclass(frozen=True)
class ErrorModel:
    """Measurement error model attached to one true variable T.

    none:              T^ep = T
    nonBerksonLinear / sharedV:
                       T^ep = gamma0 + gamma1*T + gammaV*V + U
    pureBerkson:       the measured value is generated first and
                       T = gamma0 + gamma1*T^ep + gammaV*V + U
    """

    kind: ErrorKind = ErrorKind.NONE
    gamma0: float = 0.0
    gamma1: float = 1.0
    gammaV: float = 0.0
    noiseU: DistributionSpec = field(default_factory=lambda: DistributionSpec.point_mass(0.0))

    def violations(self, label: str = "error") -> list[str]:
        v = [f"{label}.noiseU: {msg}" for msg in self.noiseU.violations()]
        if self.kind in (ErrorKind.NON_BERKSON_LINEAR, ErrorKind.SHARED_V, ErrorKind.PURE_BERKSON):
            if self.gamma1 == 0:
                v.append(f"{label}.gamma1 must be nonzero")
        return v


@dataclass(frozen=True)
class StructuralSpec:
    """Linear structural equation T = intercept + coef_c*C + coef_v*V + noise."""

    intercept: float = 0.0
    coef_c: float = 0.0
    coef_v: float = 0.0
    noise: DistributionSpec = field(default_factory=lambda: DistributionSpec.point_mass(0.0))

    def violations(self, label: str) -> list[str]:
        return [f"{label}.noise: {msg}" for msg in self.noise.violations()]


@dataclass(frozen=True)
class Scenario:
    """A complete data-generating process for one simulation study."""

    name: str
    outcome: OutcomeModel
    exposure_error: ErrorModel = field(default_factory=ErrorModel)
    confounder_error: ErrorModel = field(default_factory=ErrorModel)
    v_error: ErrorModel = field(default_factory=ErrorModel)
    x_model: StructuralSpec = field(default_factory=StructuralSpec)
    c_model: StructuralSpec = field(default_factory=StructuralSpec)
    v_model: DistributionSpec = field(default_factory=lambda: DistributionSpec.point_mass(0.0))
    n: int = 1
    replications: int = 1
    seed: int = 0


def validate_scenario(s: Scenario) -> list[str]:
    """Every invariant violation as a human-readable message; empty iff generable."""
    v: list[str] = []
    if s.n < 1:
        v.append("n must be >= 1")
    if s.replications < 1:
        v.append("replications must be >= 1")
    v.extend(s.outcome.violations())
    v.extend(s.exposure_error.violations("exposure_error"))
    v.extend(s.confounder_error.violations("confounder_error"))
    v.extend(s.v_error.violations("v_error"))
    v.extend(s.x_model.violations("x_model"))
    v.extend(s.c_model.violations("c_model"))
    v.extend(f"v_model: {msg}" for msg in s.v_model.violations())
    if s.c_model.coef_c != 0:
        v.append("c_model.coef_c must be 0 (C cannot depend on itself)")
    if s.v_error.gammaV != 0:
        v.append("v_error.gammaV must be 0 (the V slope is gamma1)")
    if s.outcome.link is Link.LOG and s.outcome.noise.family == "normal":
        # exp(lp) must stay a probability; enforced again at generation time
        pass
    return v


# ---------------------------------------------------------------------------
# Dataset


class Dataset:
    """Columnar table of generated or user-supplied variables.

    Columns are float vectors of equal length keyed by the canonical names in
    COLUMN_ORDER plus any derived columns (X_RC, ...). Instances are treated
    as immutable; derived columns are added by constructing a new Dataset.
    """

    def __init__(self, columns: dict[str, np.ndarray], provenance: str = ""):
        if not columns:
            raise SchemaError("dataset must have at least one column")
        clean: dict[str, np.ndarray] = {}
        n = None
        for name, col in columns.items():
            arr = np.asarray(col, dtype=float)
            if arr.ndim != 1:
                raise SchemaError(f"column {name!r} is not a vector")
            if n is None:
                n = arr.shape[0]
            elif arr.shape[0] != n:
                raise SchemaError(
                    f"column {name!r} has length {arr.shape[0]}, expected {n}"
                )
            if not np.all(np.isfinite(arr)):
                raise SchemaError(f"column {name!r} contains NaN or infinite values")
            clean[name] = arr
        self._columns = clean
        self.provenance = provenance

    @property
    def n(self) -> int:
        return next(iter(self._columns.values())).shape[0]

    @property
    def names(self) -> list[str]:
        ordered = [c for c in COLUMN_ORDER if c in self._columns]
        extra = [c for c in self._columns if c not in COLUMN_ORDER]
        return ordered + extra

    def __contains__(self, name: str) -> bool:
        return name in self._columns

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self._columns[name]
        except KeyError:
            raise SchemaError(f"dataset has no column {name!r}") from None

    def require(self, *names: str) -> None:
        missing = [c for c in names if c not in self._columns]
        if missing:
            raise SchemaError(f"dataset is missing column(s): {', '.join(missing)}")

    def with_columns(self, new: dict[str, np.ndarray], provenance: str | None = None) -> "Dataset":
        merged = dict(self._columns)
        merged.update(new)
        return Dataset(merged, self.provenance if provenance is None else provenance)

    def matrix(self, names: list[str]) -> np.ndarray:
        self.require(*names)
        return np.column_stack([self._columns[c] for c in names])

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            self.write_csv(fh)

    def write_csv(self, fh) -> None:
        names = self.names
        fh.write(",".join(names) + "\n")
        cols = [self._columns[c] for c in names]
        for row in zip(*cols):
            fh.write(",".join(format(x, ".17g") for x in row) + "\n")

    @classmethod
    def from_csv(cls, path, provenance: str | None = None) -> "Dataset":
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
            if not header:
                raise SchemaError(f"{path}: empty CSV")
            names = [c.strip() for c in header.split(",")]
            try:
                data = np.loadtxt(fh, delimiter=",", ndmin=2)
            except ValueError as exc:
                raise SchemaError(f"{path}: malformed CSV ({exc})") from None
        if data.size == 0:
            raise SchemaError(f"{path}: no data rows")
        if data.shape[1] != len(names):
            raise SchemaError(
                f"{path}: {len(names)} header fields but {data.shape[1]} columns"
            )
        columns = {name: data[:, i] for i, name in enumerate(names)}
        return cls(columns, provenance if provenance is not None else str(path))


@dataclass(frozen=True)
class EffectEstimate:
    """A single causal-contrast estimate on the risk difference or ratio scale."""

    estimand: Estimand
    method: Method
    value: float
    delta: float = 1.0
    mc_sd: float | None = None

    def __post_init__(self):
        if self.delta <= 0:
            raise ParameterError("delta must be > 0")
        if self.estimand is Estimand.RISK_RATIO and self.value <= 0:
            raise ParameterError("risk ratio must be > 0")


# ---------------------------------------------------------------------------
# Scenario text format ("section.key = value"; docs/scenario-format.md)

_SECTION_FIELDS = {
    "outcome": OutcomeModel,
    "exposure_error": ErrorModel,
    "confounder_error": ErrorModel,
    "v_error": ErrorModel,
    "x_model": StructuralSpec,
    "c_model": StructuralSpec,
}

_ENUM_FIELDS = {"link": Link, "kind": ErrorKind}


def _format_value(value) -> str:
    if isinstance(value, DistributionSpec):
        if value.family == "pointMass":
            return f"pointMass({value.p1!r})"
        return f"{value.family}({value.p1!r}, {value.p2!r})"
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_distribution(text: str, where: str) -> DistributionSpec:
    text = text.strip()
    if "(" not in text or not text.endswith(")"):
        raise ScenarioFormatError(f"{where}: expected family(args), got {text!r}")
    family, args = text[:-1].split("(", 1)
    family = family.strip()
    parts = [p.strip() for p in args.split(",") if p.strip()]
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise ScenarioFormatError(f"{where}: non-numeric parameter in {text!r}") from None
    if family == "pointMass":
        if len(nums) != 1:
            raise ScenarioFormatError(f"{where}: pointMass takes one parameter")
        return DistributionSpec.point_mass(nums[0])
    if family in ("normal", "gamma", "roundedUniform"):
        if len(nums) != 2:
            raise ScenarioFormatError(f"{where}: {family} takes two parameters")
        return DistributionSpec(family, nums[0], nums[1])
    raise ScenarioFormatError(f"{where}: unknown distribution family {family!r}")


def format_scenario(s: Scenario) -> str:
    out = io.StringIO()
    out.write(f"scenario.name = {s.name}\n")
    out.write(f"scenario.n = {s.n}\n")
    out.write(f"scenario.replications = {s.replications}\n")
    out.write(f"scenario.seed = {s.seed}\n")
    out.write(f"scenario.v_model = {_format_value(s.v_model)}\n")
    for section, obj in (
        ("outcome", s.outcome),
        ("exposure_error", s.exposure_error),
        ("confounder_error", s.confounder_error),
        ("v_error", s.v_error),
        ("x_model", s.x_model),
        ("c_model", s.c_model),
    ):
        out.write("\n")
        for f in fields(obj):
            out.write(f"{section}.{f.name} = {_format_value(getattr(obj, f.name))}\n")
    return out.getvalue()


def parse_scenario(text: str) -> Scenario:
    entries: dict[str, dict[str, str]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ScenarioFormatError(f"line {lineno}: expected 'section.key = value'")
        lhs, value = line.split("=", 1)
        lhs = lhs.strip()
        if "." not in lhs:
            raise ScenarioFormatError(f"line {lineno}: key {lhs!r} has no section")
        section, key = lhs.split(".", 1)
        entries.setdefault(section.strip(), {})[key.strip()] = value.strip()

    def build(section: str, cls):
        raw = entries.pop(section, {})
        kwargs = {}
        valid = {f.name: f for f in fields(cls)}
        for key, value in raw.items():
            if key not in valid:
                raise ScenarioFormatError(f"{section}.{key}: unknown key")
            f = valid[key]
            where = f"{section}.{key}"
            if key in _ENUM_FIELDS:
                try:
                    kwargs[key] = _ENUM_FIELDS[key](value)
                except ValueError:
                    raise ScenarioFormatError(f"{where}: invalid value {value!r}") from None
            elif f.type == "DistributionSpec" or key in ("noise", "noiseU"):
                kwargs[key] = _parse_distribution(value, where)
            else:
                try:
                    kwargs[key] = float(value)
                except ValueError:
                    raise ScenarioFormatError(f"{where}: expected a number, got {value!r}") from None
        return cls(**kwargs)

    meta = entries.pop("scenario", {})
    name = meta.pop("name", "unnamed")
    try:
        n = int(meta.pop("n", "1"))
        replications = int(meta.pop("replications", "1"))
        seed = int(meta.pop("seed", "0"))
    except ValueError as exc:
        raise ScenarioFormatError(f"scenario section: {exc}") from None
    v_model = (
        _parse_distribution(meta.pop("v_model"), "scenario.v_model")
        if "v_model" in meta
        else DistributionSpec.point_mass(0.0)
    )
    if meta:
        raise ScenarioFormatError(f"scenario section: unknown key(s) {sorted(meta)}")

    scenario = Scenario(
        name=name,
        outcome=build("outcome", OutcomeModel),
        exposure_error=build("exposure_error", ErrorModel),
        confounder_error=build("confounder_error", ErrorModel),
        v_error=build("v_error", ErrorModel),
        x_model=build("x_model", StructuralSpec),
        c_model=build("c_model", StructuralSpec),
        v_model=v_model,
        n=n,
        replications=replications,
        seed=seed,
    )
    if entries:
        raise ScenarioFormatError(f"unknown section(s): {sorted(entries)}")
    return scenario


def load_scenario(path) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def save_scenario(s: Scenario, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_scenario(s))
