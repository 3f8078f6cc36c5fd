# models/schemas.py - Validated input payloads for the CLI and JSON input files

from fractions import Fraction
from typing import Dict, List, Optional, Type, TypeVar

from pydantic import (BaseModel, ConfigDict, Field, PositiveInt, ValidationError,
                      field_validator, model_validator)

from ..config.settings import OutputFormat, RunConfig
from ..core.automorphisms.automorphism import Automorphism
from ..core.graphs.marked_graph import MarkedGraph, rose
from ..core.graphs.triangular_map import TriangularMap, parse_triangular
from ..core.trees.free_factor import FreeFactorSystem
from ..core.words.word_core import ALPHABET, Basis
from ..utils.error_handler import InputValidationError

Model = TypeVar('Model', bound=BaseModel)

EMPTY_WORDS = ("", "1", "ε")


def _check_word(text: str, rank: int):
    if text.strip() in EMPTY_WORDS:
        return
    allowed = ALPHABET[:rank]
    for ch in text.strip():
        if ch.lower() not in allowed:
            raise ValueError(f"symbol {ch!r} is not a generator of rank {rank}")


class InputModel(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)


class RunConfigInput(InputModel):
    """Per-run overrides; unset fields keep the configured value"""
    window: Optional[PositiveInt] = None
    margin: Optional[PositiveInt] = None
    d_max: Optional[PositiveInt] = None
    whitehead_depth: Optional[PositiveInt] = None
    marking_length_bound: Optional[PositiveInt] = None
    max_bounce_steps: Optional[PositiveInt] = None
    split_m_max: Optional[PositiveInt] = None
    bcc_radius: Optional[PositiveInt] = None
    support_state_cap: Optional[PositiveInt] = None
    conjugator_search_length: Optional[PositiveInt] = None
    format: Optional[OutputFormat] = None

    def apply(self, base: RunConfig) -> RunConfig:
        overrides = self.model_dump(exclude={'format'})
        overrides['output_format'] = self.format
        return base.with_overrides(**overrides)


class AutomorphismInput(InputModel):
    rank: Optional[PositiveInt] = None
    images: List[str] = Field(min_length=1)
    inverse_images: List[str] = Field(min_length=1)

    @model_validator(mode='after')
    def check_words(self):
        rank = self.rank or len(self.images)
        if len(self.images) != rank or len(self.inverse_images) != rank:
            raise ValueError(f"expected {rank} images and {rank} inverse images")
        for text in self.images + self.inverse_images:
            _check_word(text, rank)
        return self

    def to_automorphism(self) -> Automorphism:
        return Automorphism.parse(self.images, self.inverse_images)


class EdgeInput(InputModel):
    id: int
    origin: int
    terminus: int
    marking: str = ""
    name: Optional[str] = None
    length: str = "1"

    @field_validator('length')
    @classmethod
    def positive_length(cls, value: str) -> str:
        try:
            if Fraction(value) <= 0:
                raise ValueError
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"edge length must be a positive rational, got {value!r}")
        return value


class GraphInput(InputModel):
    rank: PositiveInt
    vertices: List[int] = Field(min_length=1)
    edges: List[EdgeInput] = Field(min_length=1)
    base: Optional[int] = None
    tree: List[int] = Field(default_factory=list)
    filtration: List[int] = Field(default_factory=list)

    @model_validator(mode='after')
    def check_structure(self):
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise ValueError("edge ids must be distinct")
        vertices = set(self.vertices)
        for e in self.edges:
            if e.origin not in vertices or e.terminus not in vertices:
                raise ValueError(f"edge {e.id} has an endpoint outside the vertex list")
            _check_word(e.marking, self.rank)
        if not set(self.tree) <= set(ids):
            raise ValueError("tree lists an unknown edge")
        return self

    def to_graph(self) -> MarkedGraph:
        graph = MarkedGraph.from_dict(self.model_dump(exclude_none=True))
        graph.validate_marking()
        return graph


class TriangularInput(InputModel):
    """A triangular map: prefix and suffix paths written with edge names.

    Without ``graph`` the host is the rose on the standard basis, filtered by
    ``order`` (generator names, bottom first).
    """
    graph: Optional[GraphInput] = None
    order: List[str] = Field(default_factory=list)
    prefixes: Dict[str, str] = Field(default_factory=dict)
    suffixes: Dict[str, str] = Field(default_factory=dict)

    def host(self, rank: int) -> MarkedGraph:
        if self.graph is not None:
            return self.graph.to_graph()
        basis = Basis.standard(rank)
        order = [basis.names.index(name) + 1 for name in self.order if name in basis.names]
        if self.order and sorted(order) != list(range(1, rank + 1)):
            raise InputValidationError("order must list every generator exactly once", order=self.order)
        return rose(rank, order=order)

    def to_map(self, rank: int) -> TriangularMap:
        return parse_triangular(self.host(rank), self.prefixes, self.suffixes)


class GeneratorInput(AutomorphismInput):
    triangular: Optional[TriangularInput] = None


class KolchinInput(InputModel):
    rank: PositiveInt
    generators: List[GeneratorInput] = Field(min_length=1)
    config: Optional[RunConfigInput] = None
    free_factor_system: Optional[List[List[str]]] = None

    @model_validator(mode='after')
    def check_ranks(self):
        for i, g in enumerate(self.generators, start=1):
            if len(g.images) != self.rank:
                raise ValueError(f"generator {i} has {len(g.images)} images, expected {self.rank}")
            for text in g.images + g.inverse_images:
                _check_word(text, self.rank)
        for factor in self.free_factor_system or []:
            for text in factor:
                _check_word(text, self.rank)
        return self

    def automorphisms(self) -> List[Automorphism]:
        return [g.to_automorphism() for g in self.generators]

    def supplied_maps(self) -> Dict[int, TriangularMap]:
        return {i: g.triangular.to_map(self.rank)
                for i, g in enumerate(self.generators) if g.triangular is not None}

    def initial_system(self) -> Optional[FreeFactorSystem]:
        if self.free_factor_system is None:
            return None
        return FreeFactorSystem.parse(self.rank, self.free_factor_system)

    def run_config(self, base: RunConfig) -> RunConfig:
        return self.config.apply(base) if self.config else base


def parse_input(model: Type[Model], data) -> Model:
    """Validate a payload, turning pydantic errors into InputValidationError"""
    try:
        return model.model_validate(data)
    except ValidationError as e:
        problems = [f"{'.'.join(str(p) for p in err['loc']) or 'input'}: {err['msg']}"
                    for err in e.errors()]
        raise InputValidationError(f"invalid {model.__name__}", problems=problems)
