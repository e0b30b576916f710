from typing import List

from fastapi import APIRouter, HTTPException

from models import DerivedParams, NonrelResidual, PhysParams, SpectrumRequest, SpectrumTable, SplittingGap
from services import analytic
from services.params import derive, ensure_valid
from utils.errors import SpectraError

router = APIRouter(tags=["Closed-form Spectra"])


@router.post("/derive-params", response_model=DerivedParams)
async def derive_params(phys: PhysParams):
    try:
        ensure_valid(phys)
    except SpectraError as e:
        raise HTTPException(status_code=e.http_status, detail=str(e))
    return derive(phys)


@router.post("/spectrum", response_model=SpectrumTable)
async def spectrum(request: SpectrumRequest):
    try:
        return analytic.spectrum(request.model, request.phys, request.n1_max, request.n2_max, request.n_max,
                                 request.substitute_critical)
    except SpectraError as e:
        raise HTTPException(status_code=e.http_status, detail=str(e))


@router.post("/zeeman-splitting", response_model=List[SplittingGap])
async def zeeman_splitting(request: SpectrumRequest):
    """
    Gap E^2(sigma=+1) - E^2(sigma=-1) for every (n1, n2) of the requested table.
    """
    try:
        table = analytic.spectrum(request.model, request.phys, request.n1_max, request.n2_max, request.n_max,
                                  request.substitute_critical)
        return analytic.zeeman_splitting(table)
    except SpectraError as e:
        raise HTTPException(status_code=e.http_status, detail=str(e))


@router.post("/nonrel-consistency", response_model=List[NonrelResidual])
async def nonrel_consistency(request: SpectrumRequest):
    try:
        table = analytic.spectrum(request.model, request.phys, request.n1_max, request.n2_max, request.n_max,
                                  request.substitute_critical)
        return analytic.nonrel_consistency(table)
    except SpectraError as e:
        raise HTTPException(status_code=e.http_status, detail=str(e))
