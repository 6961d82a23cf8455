"""HTTP facade over the experiment runners.

One POST endpoint per run kind; the CLI talks to this app in-process by
default and over the network when pointed at a live server.  Config
problems and failed hypotheses both map to 422 with a ``kind`` tag so
clients can tell "fix the request" from "the generated set is unsuitable".
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..experiments import RUNNERS
from ..experiments.config import ConfigError, HypothesisError
from .models import RunRequest, RunResponse

__all__ = ["create_app", "ENDPOINT_MODES"]

ENDPOINT_MODES = {
    "diffprod": "difference_product",
    "sumprod": "sum_product",
    "energy": "energy_bounds",
    "content": "elekes_content",
    "incidence": "incidence_ratio",
}


def create_app() -> FastAPI:
    app = FastAPI(title="sumprodlab", version=__version__)

    @app.get("/health")
    def health() -> dict:
        return {
            "status": "ok",
            "version": __version__,
            "runs": sorted(ENDPOINT_MODES),
        }

    @app.post("/runs/{name}", response_model=RunResponse)
    def run(name: str, request: RunRequest) -> RunResponse:
        mode = ENDPOINT_MODES.get(name)
        if mode is None:
            raise HTTPException(
                status_code=404,
                detail={
                    "kind": "route",
                    "message": f"unknown run {name!r}; expected one of "
                    f"{sorted(ENDPOINT_MODES)}",
                },
            )
        try:
            cfg = request.to_config(mode)
            report = RUNNERS[mode](cfg)
        except ConfigError as exc:
            raise HTTPException(
                status_code=422,
                detail={"kind": "config", "message": str(exc)},
            ) from exc
        except HypothesisError as exc:
            raise HTTPException(
                status_code=422,
                detail={
                    "kind": "hypothesis",
                    "message": str(exc),
                    "measured": exc.measured,
                },
            ) from exc
        return RunResponse(
            report=report.to_obj(),
            hard_pass=report.ledger.all_hard_pass(),
            max_slack=report.ledger.max_log_slack(),
            flagged=report.ledger.flagged_names(),
            summary=report.summary_lines(),
            ledger_csv=report.ledger.to_csv(),
            profiles=dict(report.profiles),
        )

    return app
