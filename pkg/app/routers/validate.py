"""
Seirkit Validate Router
"""
from fastapi import APIRouter, HTTPException

from .. import commands
from ..errors import SeirkitError
from ..models import SuiteReport, ValidateRequest

router = APIRouter(prefix="/api/v1", tags=["validate"])


@router.post("/validate", response_model=SuiteReport)
def validate(request: ValidateRequest):
    """
    Run one validation suite. A failed check comes back as passed=false with status 200.
    """
    try:
        return commands.validate(
            request.document, request.suite, request.replicas, request.seed,
            theta=request.theta, horizon=request.horizon, init_fraction=request.init_fraction,
            parallelism=1, sampler=request.sampler,
        )
    except SeirkitError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
