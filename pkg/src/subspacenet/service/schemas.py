"""Request and response models of the experiment service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: Literal["ok"] = "ok"
    version: str


class ValidateRequest(BaseModel):
    config_text: str


class ValidateResponse(BaseModel):
    valid: bool
    errors: list[str] = Field(default_factory=list)


class RunRequest(BaseModel):
    config_text: str
    seed: int | None = None  # overrides scenario.seed when given


class DivergenceInfo(BaseModel):
    algorithm: str
    run_index: int
    iteration: int
    node: int


class RunResponse(BaseModel):
    status: Literal["ok", "diverged"]
    files: dict[str, str]
    output_directory: str
    steady_state_db: dict[str, float] | None = None
    transfers_per_iteration: dict[str, int] | None = None
    divergence: DivergenceInfo | None = None


class DumpRequest(BaseModel):
    config_text: str
    seed: int | None = None


class DumpResponse(BaseModel):
    filename: str
    content: str
    output_directory: str
