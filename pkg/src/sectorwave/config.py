"""Strict JSON run configuration: unknown keys are errors, not silent no-ops."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .analyticity import DEFAULT_EPSILONS
from .errors import SectorwaveError
from .solver import SolitaryWaveProblem, problem_from_config


class ConfigError(SectorwaveError, ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


Number2 = tuple[float, float]


class TermSpec(_Strict):
    l: int = Field(ge=2)
    coeff: Union[Number2, float] = (1.0, 0.0)
    modulus_form: bool = False


class GridSpec(_Strict):
    L: float = Field(gt=0)
    N: int = Field(ge=2)


class SolverSpec(_Strict):
    method: Literal["petviashvili", "picard"] = "petviashvili"
    tol: float = Field(default=1e-10, gt=0)
    max_iter: int = Field(default=500, ge=0)
    damping: float = Field(default=0.5, gt=0, le=1)


class GuessSpec(_Strict):
    amplitude: Optional[float] = None
    width: Optional[float] = Field(default=None, gt=0)
    phase: float = 0.0


class ProblemSpec(_Strict):
    family: Literal["kdv_type", "long_wave_type", "direct"]
    symbol: dict
    V: Union[Number2, float]
    nonlinearity: list[TermSpec] = Field(min_length=1)
    grid: GridSpec
    solver: SolverSpec = SolverSpec()
    guess: Optional[GuessSpec] = None

    def build(self) -> SolitaryWaveProblem:
        cfg = self.model_dump(exclude={"solver", "guess"})
        return problem_from_config(cfg)


class DiagnosticsSpec(_Strict):
    decay: bool = True
    strip: bool = True
    ledger: bool = True
    poles: bool = True
    sector: bool = True


class LedgerSpec(_Strict):
    s: float = Field(default=1.0, ge=0)
    N_max: int = Field(default=15, ge=0, le=20)
    epsilons: list[float] = Field(default_factory=lambda: list(DEFAULT_EPSILONS), min_length=1)

    @field_validator("epsilons")
    @classmethod
    def _positive(cls, v):
        if any(e <= 0 for e in v):
            raise ValueError("epsilons must be positive")
        return sorted(set(v))


class PoleSpec(_Strict):
    center: float = 0.0
    max_degree: int = Field(default=8, ge=1, le=12)


class SweepSpec(_Strict):
    case: Literal["gkdv", "sharpness", "problem"] = "problem"
    l: list[int] = Field(default_factory=list)
    V: list[float] = Field(default_factory=list)
    theta: list[float] = Field(default_factory=list)


class RunConfig(_Strict):
    problem: Optional[ProblemSpec] = None
    diagnostics: DiagnosticsSpec = DiagnosticsSpec()
    ledger_params: LedgerSpec = LedgerSpec()
    poles: PoleSpec = PoleSpec()
    sweep: Optional[SweepSpec] = None
    output_dir: str = "."
    seed: int = 0


def parse_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from None


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(data)


def _describe(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "invalid config: " + "; ".join(parts)
