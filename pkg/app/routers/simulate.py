"""
Seirkit Simulate Router

Replica runs over HTTP, bounded in size.
"""
from fastapi import APIRouter, HTTPException

from .. import commands
from ..config import get_settings
from ..errors import SeirkitError
from ..models import OutcomeRecord, SimulateRequest, SimulateResponse

router = APIRouter(prefix="/api/v1", tags=["simulate"])


@router.post("/simulate", response_model=SimulateResponse)
def simulate(request: SimulateRequest):
    """
    Run replicas and return the summary with one record per replica.
    """
    settings = get_settings()
    if request.replicas > settings.max_http_replicas:
        raise HTTPException(
            status_code=400,
            detail=f"at most {settings.max_http_replicas} replicas per request; use the CLI for more",
        )

    try:
        _, outcomes, summary = commands.simulate(
            request.document, request.method, request.replicas, request.seed, request.horizon,
            parallelism=1,
        )
    except SeirkitError as exc:
        raise HTTPException(status_code=400, detail=str(exc))

    return {
        "summary": summary,
        "outcomes": [OutcomeRecord(**o.to_record()) for o in outcomes],
    }
