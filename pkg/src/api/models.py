from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, field_validator

from config import settings


class RunConfig(BaseModel):
    n: int = Field(default_factory=lambda: settings.braid_index, ge=1)
    cell_budget: int = Field(default_factory=lambda: settings.cell_budget, gt=0)
    rewrite_budget: int = Field(default_factory=lambda: settings.rewrite_budget, gt=0)
    search_budget: int = Field(default_factory=lambda: settings.search_budget, gt=0)
    triple_budget: int = Field(default_factory=lambda: settings.triple_budget, gt=0)
    shortcut: bool = Field(default_factory=lambda: settings.shortcut)
    seed: int = Field(default_factory=lambda: settings.seed)
    oracle: bool = True

    def apply(self) -> None:
        """Push budgets into the process-wide settings used by the core modules."""
        settings.braid_index = self.n
        settings.cell_budget = self.cell_budget
        settings.rewrite_budget = self.rewrite_budget
        settings.search_budget = self.search_budget
        settings.triple_budget = self.triple_budget
        settings.shortcut = self.shortcut
        settings.seed = self.seed


class GraphSummary(BaseModel):
    name: str = ""
    vertices: int
    edges: int
    essential_vertices: int
    cactus: bool
    betti_number: Optional[int] = None
    subdivided_vertices: Optional[int] = None
    mode: Optional[str] = None
    critical_counts: List[int] = []


class RelatorModel(BaseModel):
    word: str
    source: Optional[str] = None
    tag: Optional[str] = None
    commutator: Optional[List[str]] = None


class PresentationModel(BaseModel):
    generators: List[str]
    relators: List[RelatorModel] = []
    free_rank: int = 0


class CertificateModel(BaseModel):
    generators: List[str]
    relators: List[str]
    alpha: List[int]
    beta: List[int]
    gamma: List[int]
    rho: List[int] = []
    lattice_basis: List[List[int]] = []
    hnf: List[List[int]] = []
    member: Optional[bool] = None
    verdict: str
    error: Optional[str] = None
    timestamp: Optional[str] = None

    @field_validator("alpha", "beta", "gamma")
    @classmethod
    def class_length(cls, v: List[int], info) -> List[int]:
        gens = info.data.get("generators")
        if gens is not None and v and len(v) != len(gens):
            raise ValueError(f"class has {len(v)} coefficients for {len(gens)} generators")
        return v


class RaagReport(BaseModel):
    ok: bool
    round_trips: List[str] = []
    relators: List[str] = []
    abelianization: List[str] = []
    notes: List[str] = []
    checked: Dict[str, int] = {}
    timestamp: Optional[str] = None


class VerdictModel(BaseModel):
    graph: GraphSummary
    n: int
    route: str
    nuclei: List[str] = []
    presentation: Optional[PresentationModel] = None
    raag: Optional[PresentationModel] = None
    raag_report: Optional[RaagReport] = None
    certificate: Optional[CertificateModel] = None
    oracle: Dict[str, Any] = {}
    notes: List[str] = []
    error: Optional[str] = None
    timestamp: Optional[str] = None
