"""
Seirkit Pydantic Models

The model document shared by every command, request/response models for
the API and the run manifest.
"""
import hashlib
import json
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .catalogue import CompartmentalModel, catalogue_names, model_catalogue
from .epidemic import EpidemicParams, VaccinationPolicy
from .errors import ModelDefinitionError
from .periods import PeriodDistribution


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# =============================================================================
# Document Models
# =============================================================================

class PeriodSpec(_Strict):
    """A latent or infectious period law."""
    kind: Literal["constant", "exponential", "gamma"]
    value: Optional[float] = Field(None, ge=0)
    rate: Optional[float] = Field(None, gt=0)
    shape: Optional[int] = Field(None, ge=1)
    scale: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _fields_match_kind(self):
        needed = {"constant": ("value",), "exponential": ("rate",), "gamma": ("shape", "scale")}[self.kind]
        missing = [name for name in needed if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.kind} period needs {', '.join(missing)}")
        return self

    def to_period(self) -> PeriodDistribution:
        if self.kind == "constant":
            return PeriodDistribution.constant(self.value)
        if self.kind == "exponential":
            return PeriodDistribution.exponential(self.rate)
        return PeriodDistribution.gamma(self.shape, self.scale)


class VaccinationSpec(_Strict):
    """Vaccination before the outbreak."""
    coverage: float = Field(..., ge=0, le=1)
    susceptibility_efficacy: float = Field(1.0, ge=0, le=1)
    infectivity_efficacy: float = Field(0.0, ge=0, le=1)
    scheme: Literal["leaky", "all_or_nothing"] = "leaky"

    def to_policy(self) -> VaccinationPolicy:
        return VaccinationPolicy(**self.model_dump())


class ModelDocument(_Strict):
    """The JSON model document every command reads.

    ``params`` are the catalogue rate parameters; ``lambda`` doubles as the
    contact rate of the SEIR epidemic.
    """
    model: str
    params: Dict[str, float] = {}
    latent: Optional[PeriodSpec] = None
    infectious: Optional[PeriodSpec] = None
    population: int = Field(..., ge=1)
    initial_infectives: int = Field(1, ge=1)
    vaccination: Optional[VaccinationSpec] = None
    description: Optional[str] = Field(None, max_length=512)

    @model_validator(mode="after")
    def _known_model(self):
        if self.model not in catalogue_names():
            raise ValueError(f"unknown model {self.model!r}; known: {', '.join(catalogue_names())}")
        return self

    def catalogue_model(self) -> CompartmentalModel:
        return model_catalogue(self.model, self.params)

    def infectious_period(self) -> PeriodDistribution:
        if self.infectious is not None:
            return self.infectious.to_period()
        if "gamma" in self.params:
            return PeriodDistribution.exponential(self.params["gamma"])
        raise ModelDefinitionError("document needs an infectious period or a gamma rate")

    def latent_period(self) -> PeriodDistribution:
        if self.latent is not None:
            return self.latent.to_period()
        if "nu" in self.params:
            return PeriodDistribution.exponential(self.params["nu"])
        return PeriodDistribution.constant(0.0)

    def epidemic_params(self) -> EpidemicParams:
        if "lambda" not in self.params:
            raise ModelDefinitionError("document needs a contact rate 'lambda'")
        return EpidemicParams(
            contact_rate=self.params["lambda"],
            infectious=self.infectious_period(),
            latent=self.latent_period(),
            population=self.population,
            initial_infectives=self.initial_infectives,
        )

    def vaccination_policy(self) -> Optional[VaccinationPolicy]:
        return self.vaccination.to_policy() if self.vaccination else None

    def digest(self) -> str:
        """sha256 of the canonical JSON form."""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# =============================================================================
# Request Models
# =============================================================================

AnalyzeKey = Literal[
    "r0", "escape", "extinction", "takeoff", "malthus", "duration", "final-size",
    "asymptotics", "vaccination", "exact-pmf", "chain-binomial", "endemic", "ncrit",
    "covariance", "quasipotential",
]
Method = Literal["markov", "agent", "sellke"]
Suite = Literal["wald", "sellke-vs-agent", "mc-vs-exact", "lln", "clt", "ou-variance", "ldp-slope", "duration"]
Sampler = Literal["shortcut", "sellke", "agent"]


class AnalyzeRequest(_Strict):
    """Request to evaluate analytic quantities of a document."""
    document: ModelDocument
    which: List[AnalyzeKey] = Field(["r0"], min_length=1)


class SimulateRequest(_Strict):
    """Request to run replicas of a document."""
    document: ModelDocument
    method: Method = "sellke"
    replicas: int = Field(100, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    horizon: Optional[float] = Field(None, gt=0)


class ValidateRequest(_Strict):
    """Request to run one validation suite."""
    document: ModelDocument
    suite: Suite
    replicas: int = Field(1000, ge=1)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    theta: float = Field(1.0, ge=0)
    horizon: Optional[float] = Field(None, gt=0)
    init_fraction: Optional[float] = Field(None, gt=0, lt=1)
    sampler: Sampler = "shortcut"


# =============================================================================
# Response Models
# =============================================================================

class OutcomeRecord(BaseModel):
    final_size: int
    total_pressure: float
    extinction_time: float
    peak_infectives: int
    took_off: bool
    replica_index: int
    contacts: int = 0
    first_repeat_contact: Optional[int] = None


class SimulationSummary(BaseModel):
    """Aggregates printed after a simulate run."""
    method: str
    replicas: int
    master_seed: int
    mean_final_size: float
    sd_final_size: float
    takeoff_fraction: float
    mean_extinction_time: float


class SimulateResponse(BaseModel):
    summary: SimulationSummary
    outcomes: List[OutcomeRecord]


class SuiteReport(BaseModel):
    """Verdict of one validation suite; failures are content, not errors."""
    suite: str
    passed: bool
    statistics: Dict[str, Any] = {}
    p_value: Optional[float] = None
    master_seed: int
    replicas: int


class RunManifest(BaseModel):
    """What produced a run directory; every output is listed with its sha256."""
    command: str
    input_digest: str
    master_seed: Optional[int] = None
    replica_count: Optional[int] = None
    arguments: Dict[str, Any] = {}
    outputs: Dict[str, str] = {}
    version: str
