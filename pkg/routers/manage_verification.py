import logging

from fastapi import APIRouter, HTTPException

from models import (
    FockCheckRequest,
    FockCheckResult,
    GaugeCompareRequest,
    GaugeComparison,
    OracleSplitting,
    VerificationReport,
    VerifyRequest,
)
from services import oracle
from services.fock import algebra_checks
from utils.errors import SpectraError

router = APIRouter(tags=["Fock Verification"])


@router.post("/verify", response_model=VerificationReport)
def verify(request: VerifyRequest):
    try:
        return oracle.verify(request.model, request.phys, request.k, request.tol, request.schedule, request.l_ref,
                             request.shift_order)
    except SpectraError as e:
        logging.info(f"Verification of {request.model.value} refused: {e}")
        raise HTTPException(status_code=e.http_status, detail=str(e))


@router.post("/oracle-splitting", response_model=OracleSplitting)
def oracle_splitting(request: VerifyRequest):
    try:
        return oracle.oracle_splitting(request.model, request.phys, request.k, request.tol, request.schedule,
                                       request.l_ref, request.shift_order)
    except SpectraError as e:
        raise HTTPException(status_code=e.http_status, detail=str(e))


@router.post("/gauge-compare", response_model=GaugeComparison)
def gauge_compare(request: GaugeCompareRequest):
    try:
        return oracle.gauge_compare(request.pair, request.phys, request.cutoff, request.l_ref)
    except SpectraError as e:
        raise HTTPException(status_code=e.http_status, detail=str(e))


@router.post("/fock-check", response_model=FockCheckResult)
def fock_check(request: FockCheckRequest):
    try:
        return algebra_checks(request.cutoff, request.theta, request.margin, request.l_ref, request.phys)
    except SpectraError as e:
        raise HTTPException(status_code=e.http_status, detail=str(e))
