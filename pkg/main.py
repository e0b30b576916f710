import logging
import secrets
from typing import Annotated

from fastapi import Depends, FastAPI, HTTPException, status
from fastapi.security import HTTPBasic, HTTPBasicCredentials

import config
from routers import manage_scans, manage_spectra, manage_verification

basic_auth = HTTPBasic(realm="ncspectra")

app = FastAPI(
    title="ncspectra",
    description="Closed-form noncommutative Landau and Klein-Gordon oscillator spectra with a truncated-Fock check.",
)


def _matches(given: str, expected: str) -> bool:
    return secrets.compare_digest(given.encode("utf8"), expected.encode("utf8"))


def require_credentials(credentials: Annotated[HTTPBasicCredentials, Depends(basic_auth)]) -> str:
    """
    Checks HTTP Basic credentials against NCSPECTRA_USERNAME / NCSPECTRA_PASSWORD. Both fields are always
    compared. DEBUG_MODE accepts any credentials.
    :return: The authenticated username.
    """
    valid = _matches(credentials.username, config.API_USERNAME) & _matches(credentials.password, config.API_PASSWORD)
    if not valid and not config.DEBUG_MODE:
        logging.warning(f"Rejected API credentials for user '{credentials.username}'")
        raise HTTPException(
            status_code=status.HTTP_401_UNAUTHORIZED,
            detail="Invalid API credentials",
            headers={"WWW-Authenticate": 'Basic realm="ncspectra"'},
        )
    return credentials.username


for router in (manage_spectra.router, manage_verification.router, manage_scans.router):
    app.include_router(router, dependencies=[Depends(require_credentials)])
