from typing import List

from fastapi import APIRouter, HTTPException

from models import CriticalRequest, CriticalResult, SplittingPoint, SplittingScanRequest, SweepSpec, SweepTable
from services import scan
from utils.errors import SpectraError

router = APIRouter(tags=["Parameter Scans"])


@router.post("/sweep", response_model=SweepTable)
async def sweep(spec: SweepSpec):
    try:
        return scan.sweep(spec)
    except SpectraError as e:
        raise HTTPException(status_code=e.http_status, detail=str(e))


@router.post("/locate-critical", response_model=CriticalResult)
async def locate_critical(request: CriticalRequest):
    try:
        return scan.locate_critical(request.model, request.phys, request.parameter)
    except SpectraError as e:
        raise HTTPException(status_code=e.http_status, detail=str(e))


@router.post("/splitting-scan", response_model=List[SplittingPoint])
async def splitting_scan(request: SplittingScanRequest):
    try:
        return scan.splitting_scan(request.model, request.phys, request.theta_grid)
    except SpectraError as e:
        raise HTTPException(status_code=e.http_status, detail=str(e))
