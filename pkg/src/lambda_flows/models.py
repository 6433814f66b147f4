"""
Data models for the lambda-flows library

Pydantic models for measure specifications, regime reports, Fleming-Viot
states, Eve reports, validation reports and run configuration. Everything a
command prints or writes as JSON is one of these.
"""

import math
from enum import Enum
from typing import Any, ClassVar, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

MASS_TOLERANCE = 1e-12
QUADRATURE_RTOL = 1e-9


class MeasureFamily(str, Enum):
    """Supported families of Lambda measures"""
    DIRAC0 = "dirac0"
    DIRAC = "dirac"
    LEBESGUE = "lebesgue"
    BETA = "beta"
    CUSTOM = "custom"


class MeasureSpec(BaseModel):
    """Measure object of a run configuration"""
    model_config = ConfigDict(extra="forbid", frozen=True)

    family: MeasureFamily = Field(..., description="Measure family")
    mass: float = Field(default=1.0, description="Total mass of a dirac0 or dirac measure")
    x: Optional[float] = Field(None, description="Atom location of a dirac measure")
    alpha: Optional[float] = Field(None, description="Beta(2-alpha, alpha) shorthand")
    a: Optional[float] = Field(None, description="First Beta parameter")
    b: Optional[float] = Field(None, description="Second Beta parameter")
    density_table: Optional[List[Tuple[float, float]]] = Field(
        None, description="Piecewise-linear density nodes (u, f(u)) for the custom family"
    )

    @model_validator(mode="after")
    def _check_family_fields(self) -> "MeasureSpec":
        if self.family == MeasureFamily.DIRAC and self.x is None:
            raise ValueError("dirac measure requires 'x'")
        if self.family == MeasureFamily.BETA:
            if self.alpha is None and (self.a is None or self.b is None):
                raise ValueError("beta measure requires 'alpha' or both 'a' and 'b'")
            if self.alpha is not None and (self.a is not None or self.b is not None):
                raise ValueError("beta measure takes 'alpha' or ('a', 'b'), not both")
        if self.family == MeasureFamily.CUSTOM and not self.density_table:
            raise ValueError("custom measure requires a non-empty 'density_table'")
        return self


class Regime(str, Enum):
    """Long-time regime of a Lambda Fleming-Viot"""
    DISCRETE = "DISCRETE"
    INTENSIVE_W_DUST = "INTENSIVE_W_DUST"
    INTENSIVE_INF = "INTENSIVE_INF"
    CDI = "CDI"
    UNDECIDED = "UNDECIDED"


class IntegralValue(BaseModel):
    """Outcome of one of the classification integrals"""
    value: Optional[float] = Field(None, description="Value when finite")
    divergent: Optional[bool] = Field(None, description="True when divergent, None when undecided")
    method: str = Field(..., description="analytic | shells | quadrature")
    detail: Dict[str, Any] = Field(default_factory=dict, description="Shell ratios and other evidence")


class RegimeClass(BaseModel):
    """Regime classification of a measure"""
    regime: Regime = Field(..., description="One of the four regimes")
    u_log_u_finite: Optional[bool] = Field(
        None, description="u log u test, evaluated only in INTENSIVE_W_DUST (None = not applicable)"
    )
    integral_report: Dict[str, IntegralValue] = Field(
        default_factory=dict, description="nu_mass, u_nu, inv_psi_tail, u_log_u_nu"
    )
    tolerance: float = Field(default=QUADRATURE_RTOL, description="Relative quadrature tolerance")


class MeasureState(BaseModel):
    """One time slice of a Lambda Fleming-Viot: atoms plus dust"""
    atoms: List[Tuple[float, float]] = Field(default_factory=list, description="(location, mass) pairs")
    dust: float = Field(..., ge=0.0, description="Mass of the Lebesgue part")

    @model_validator(mode="after")
    def _check_mass(self) -> "MeasureState":
        total = math.fsum(mass for _, mass in self.atoms) + self.dust
        if abs(total - 1.0) > MASS_TOLERANCE:
            raise ValueError(f"Masses sum to {total!r}, expected 1")
        locations = [x for x, _ in self.atoms]
        if len(set(locations)) != len(locations):
            raise ValueError("Atom locations must be distinct")
        for x, mass in self.atoms:
            if not 0.0 <= x <= 1.0 or mass <= 0.0:
                raise ValueError(f"Invalid atom ({x!r}, {mass!r})")
        return self

    @property
    def number_of_atoms(self) -> int:
        return len(self.atoms)

    def mass_of(self, location: float) -> float:
        """Mass of the atom at a location, 0 when there is none"""
        for x, mass in self.atoms:
            if x == location:
                return mass
        return 0.0


class EveCase(str, Enum):
    """Which half of the Eve definition applies"""
    PERSISTENT = "PERSISTENT"
    EXTINCTION = "EXTINCTION"


class EveRank(BaseModel):
    """One ranked Eve with the evidence behind its rank"""
    rank: int = Field(..., ge=1)
    location: float = Field(..., description="Type of the Eve in [0,1]")
    ancestor: int = Field(..., ge=1, description="Initial level carrying the type")
    evidence: Optional[float] = Field(
        None, description="Extinction time (None = alive at horizon) or persistent ratio"
    )


class EveReport(BaseModel):
    """Eves extracted from one Fleming-Viot run"""
    regime_case: EveCase
    ordered_eves: List[EveRank] = Field(default_factory=list)
    resolved_upto: int = Field(..., ge=0, description="Ranks certified at the horizon")
    ties: List[List[int]] = Field(default_factory=list, description="Ancestor groups extinct simultaneously")
    diagnostics: Dict[str, Any] = Field(default_factory=dict)


class TieReport(BaseModel):
    """Simultaneous extinctions observed in a CDI run"""
    tie_times: List[float] = Field(default_factory=list)
    tie_groups: List[List[int]] = Field(default_factory=list, description="Ancestors extinct at each tie time")

    @property
    def has_ties(self) -> bool:
        return bool(self.tie_times)

    def ties_among_first(self, k: int) -> bool:
        """Whether two of the first k ancestors died out simultaneously"""
        return any(sum(1 for i in group if i <= k) >= 2 for group in self.tie_groups)


class RegimeDiagnostics(BaseModel):
    """Regime-specific evidence computed from a run"""
    regime: Regime
    last_positive_jump_time: Optional[float] = None
    positive_jumps_after: Dict[str, int] = Field(default_factory=dict, description="grid time -> count")
    never_parent_levels: Optional[int] = None
    never_reproduced_types: Optional[int] = None
    positive_frequency_fraction: Optional[float] = None
    max_relative_atom_drop: Optional[float] = None


class Verdict(str, Enum):
    """Outcome of a validation test"""
    PASS = "PASS"
    FAIL = "FAIL"
    UNDECIDED = "UNDECIDED"


class ValidationThresholds(BaseModel):
    """Thresholds for the statistical validation suite"""
    model_config = ConfigDict(extra="forbid")

    tv_max: float = Field(default=0.02, gt=0.0, le=1.0, description="Total-variation pass threshold")
    se_multiplier: float = Field(default=3.0, gt=0.0, description="Allowed deviation in standard errors")
    ks_alpha: float = Field(default=0.001, gt=0.0, lt=1.0, description="KS uniformity level")
    rank_corr_alpha: float = Field(default=0.01, gt=0.0, lt=1.0, description="Rank-correlation level")
    speed_band: Tuple[float, float] = Field(default=(0.85, 1.15), description="Accepted #blocks/v(t) band")
    min_replicates: int = Field(default=100, ge=1, description="Replicates below which verdicts are UNDECIDED")
    min_runs: int = Field(default=100, ge=1, description="Runs below which Eve tests are UNDECIDED")
    eve_theta: float = Field(default=0.99, gt=0.0, le=1.0, description="Persistent-case ratio threshold")


class TestReport(BaseModel):
    """Machine-readable verdict of one validation test"""
    __test__: ClassVar[bool] = False

    test_id: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    statistic: Optional[float] = Field(None, description="Headline statistic")
    threshold: Optional[float] = Field(None, description="Threshold the statistic is compared to")
    details: Dict[str, Any] = Field(default_factory=dict, description="Per-cell statistics")
    verdict: Verdict
    sample_sizes: Dict[str, int] = Field(default_factory=dict)
    seeds: List[int] = Field(default_factory=list)


class Command(str, Enum):
    """CLI commands"""
    CLASSIFY = "classify"
    COALESCENT = "coalescent"
    LOOKDOWN = "lookdown"
    FV = "fv"
    EVES = "eves"
    VALIDATE = "validate"
    SPEED = "speed"


SEEDED_COMMANDS = {Command.COALESCENT, Command.LOOKDOWN, Command.FV, Command.VALIDATE, Command.SPEED}


class RunConfig(BaseModel):
    """Configuration of one CLI invocation"""
    model_config = ConfigDict(extra="forbid")

    command: Command
    measure: MeasureSpec
    n: int = Field(default=10, ge=2, description="Number of levels / sample size")
    window: Optional[Tuple[float, float]] = Field(None, description="Simulation window (s0, s1)")
    horizon: Optional[float] = Field(None, gt=0.0, description="Horizon; None runs until absorption/fixation")
    seed: Optional[int] = Field(None, ge=0, lt=2**64, description="Root seed")
    replicates: int = Field(default=1, ge=1)
    threads: int = Field(default=1, ge=1)
    out_dir: str = Field(default=".", description="Output directory")
    tests: List[str] = Field(default_factory=list, description="Validation tests to run (empty = default suite)")
    negative_controls: bool = Field(default=False, description="Add negative-control tests to the suite")
    thresholds: ValidationThresholds = Field(default_factory=ValidationThresholds)
    t_grid: List[float] = Field(default_factory=list, description="Time grid for curves and speed tests")
    epsilon: float = Field(default=0.0, ge=0.0, lt=1.0, description="Bridge-flow truncation")
    graph_file: Optional[str] = Field(None, description="Saved lookdown graph to replay")
    run_file: Optional[str] = Field(None, description="Saved run (graph JSONL) for Eve extraction")
    write_paths: bool = Field(default=False, description="Write per-path coalescent rows")
    max_time: float = Field(default=1e3, gt=0.0, description="Cap on adaptive horizons")

    @model_validator(mode="after")
    def _check_seed(self) -> "RunConfig":
        needs_seed = self.command in SEEDED_COMMANDS or (
            self.command == Command.EVES and self.run_file is None
        )
        if needs_seed and self.seed is None:
            raise ValueError(f"'seed' is mandatory for the {self.command.value} command")
        if self.window is not None and self.window[1] < self.window[0]:
            raise ValueError("window end precedes window start")
        return self
