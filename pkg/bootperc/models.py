from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, Field


class Command(str, Enum):
    CLASSIFY = "classify"
    STABLE_SET = "stable-set"
    CLOSURE = "closure"
    PROB = "prob"
    LC = "lc"
    SCALE = "scale"
    GROW = "grow"
    DROPLET = "droplet"
    ALPHA = "alpha"
    PATTERN = "pattern"
    BEAMS = "beams"
    AL_CHECK = "al-check"
    DECAY = "decay"
    ENUM_BEAMS = "enum-beams"


RANDOMIZED_COMMANDS = {
    Command.PROB,
    Command.LC,
    Command.SCALE,
    Command.GROW,
    Command.DROPLET,
    Command.PATTERN,
    Command.BEAMS,
    Command.AL_CHECK,
    Command.DECAY,
}


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


class RunConfig(BaseModel):
    """Fully resolved parameters of one run; embedded in every artifact."""

    command: Command = Field(..., description="Sub-command to dispatch to.")
    family: Optional[str] = Field(None, description="Family literal such as 'N[1,2,4]r=6'.")
    family_file: Optional[str] = Field(None, description="YAML file with explicit rules.")
    family2d: Optional[str] = Field(None, description="Two-dimensional family literal for decay runs.")
    p: Optional[float] = Field(None, description="Initial density (epsilon for decay runs).")
    p_list: Optional[List[float]] = Field(None, description="Strictly decreasing densities for scaling probes.")
    L: Optional[int] = Field(None, description="Box side.")
    trials: int = Field(1000, description="Monte Carlo trials (samples for al-check).")
    seed: Optional[int] = Field(None, description="Master seed; generated and recorded when absent.")
    target: Optional[float] = Field(None, description="Target percolation probability for L_c.")
    lmax: Optional[int] = Field(None, description="Largest box side tried by the L_c search.")
    rel_width: float = Field(0.0, description="Relative bracket width at which bisection stops.")
    base: Optional[List[int]] = Field(None, description="Base block extents for growth runs.")
    direction: str = Field("e3", description="Growth axis, e1..ed.")
    increment: int = Field(1, description="Layers added along the growth axis.")
    droplet: Optional[List[int]] = Field(None, description="Droplet extents.")
    max_s: int = Field(14, description="Largest s in the alpha table.")
    s: Optional[int] = Field(None, description="Pattern parameter s.")
    k: Optional[int] = Field(None, description="Strip length for patterns.")
    lam: Optional[float] = Field(None, description="Size factor of the scale check; None drops upper limits.")
    window: Optional[List[int]] = Field(None, description="Window sides (decay: one odd side; enum-beams: three).")
    n_grid: Optional[List[int]] = Field(None, description="Cluster sizes probed by decay runs.")
    h_max: Optional[int] = Field(None, description="Largest cross-section for beam counts.")
    k_max: Optional[int] = Field(None, description="Largest height for beam counts.")
    anchored: bool = Field(False, description="Count only intervals starting at the window floor.")
    coarse: bool = Field(True, description="Use coarse (b+1)-block beams.")
    coupled: bool = Field(True, description="Share one uniform field per trial across densities.")
    boundary: str = Field("closed", description="Box boundary: closed or torus.")
    input: Optional[str] = Field(None, description="Snapshot file read by the closure command.")
    confidence: Optional[float] = Field(None, description="Wilson interval confidence.")
    censor_cap: Optional[float] = Field(None, description="Largest tolerated censored fraction.")
    workers: Optional[int] = Field(None, description="Trial worker processes.")
    max_cells: Optional[int] = Field(None, description="Resource guard on box volume.")
    out: Optional[str] = Field(None, description="Artifact path.")
    format: OutputFormat = Field(OutputFormat.JSON, description="Artifact format.")


class TraceEntry(BaseModel):
    L: int
    succ: int
    trials: int
    ci: Tuple[float, float]


class LcResult(BaseModel):
    family: str
    p: float
    target: float
    bracket: Tuple[int, Optional[int]]
    trace: List[TraceEntry] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)


class EstimateResult(BaseModel):
    family: str
    successes: int
    trials: int
    point: str = Field(..., description="Exact fraction successes/trials.")
    estimate: float
    ci: Tuple[float, float]
    confidence: float


class ClassifyResult(BaseModel):
    family: str
    criticality: str
    case: str
    stable_set: str
    predicted_order: Optional[str] = None


class ArtifactHeader(BaseModel):
    bootperc: str
    seed: Optional[int]
    config: RunConfig
