"""HTTP facade over the experiment runner.

Configuration problems (parse, validation, structural setup) map to 422
responses. A diverging run is a regular 200 response with status "diverged"
and a summary file naming the algorithm, run and iteration, mirroring the
command-line exit-code contract.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import ExperimentConfig, parse_config
from ..errors import ConfigError, DivergenceDetected, SubspaceNetError
from ..reporting import divergence_summary, experiment_files
from ..runner import dump_scenario_text, run_experiment
from .schemas import (
    DivergenceInfo,
    DumpRequest,
    DumpResponse,
    HealthResponse,
    RunRequest,
    RunResponse,
    ValidateRequest,
    ValidateResponse,
)


def _load_config(text: str, seed: int | None) -> ExperimentConfig:
    config = parse_config(text)
    if seed is not None:
        if seed < 0:
            raise HTTPException(status_code=422, detail="seed override must be >= 0")
        config = config.with_seed(seed)
    return config


def create_app() -> FastAPI:
    app = FastAPI(title="subspacenet", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(version=__version__)

    @app.post("/experiments/validate", response_model=ValidateResponse)
    def validate(request: ValidateRequest) -> ValidateResponse:
        try:
            parse_config(request.config_text)
        except ConfigError as exc:
            return ValidateResponse(valid=False, errors=[str(exc)])
        return ValidateResponse(valid=True)

    @app.post("/experiments/run", response_model=RunResponse)
    def run(request: RunRequest) -> RunResponse:
        try:
            config = _load_config(request.config_text, request.seed)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        try:
            result = run_experiment(config)
        except DivergenceDetected as exc:
            return RunResponse(
                status="diverged",
                files={"summary.txt": divergence_summary(exc)},
                output_directory=config.output.directory,
                divergence=DivergenceInfo(
                    algorithm=exc.algorithm or "",
                    run_index=exc.run_index or 0,
                    iteration=exc.iteration or 0,
                    node=exc.node or 0,
                ),
            )
        except SubspaceNetError as exc:
            # structural setup problems surface before the first iteration
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return RunResponse(
            status="ok",
            files=experiment_files(result),
            output_directory=config.output.directory,
            steady_state_db=result.steady_state_db,
            transfers_per_iteration=result.transfers_per_iteration,
        )

    @app.post("/scenarios/dump", response_model=DumpResponse)
    def dump(request: DumpRequest) -> DumpResponse:
        try:
            config = _load_config(request.config_text, request.seed)
            text = dump_scenario_text(config)
        except ConfigError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        except SubspaceNetError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return DumpResponse(
            filename="scenario.txt",
            content=text,
            output_directory=config.output.directory,
        )

    return app


app = create_app()
