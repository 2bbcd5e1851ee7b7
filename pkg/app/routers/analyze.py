"""
Seirkit Analyze Router

Analytic quantities of a model document.
"""
from fastapi import APIRouter, HTTPException

from .. import commands
from ..errors import SeirkitError
from ..export import to_jsonable
from ..models import AnalyzeRequest

router = APIRouter(prefix="/api/v1", tags=["analyze"])


@router.post("/analyze")
def analyze(request: AnalyzeRequest):
    """
    Evaluate the requested quantities and name the formula behind each.
    """
    try:
        report = commands.analyze(request.document, request.which)
    except SeirkitError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return to_jsonable(report)
