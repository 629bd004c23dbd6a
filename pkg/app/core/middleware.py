"""
GridComply Middleware
"""
from starlette.middleware.base import BaseHTTPMiddleware
from starlette.requests import Request
from starlette.responses import Response
import logging
import time

logger = logging.getLogger(__name__)

# Fits and pipeline runs above this are worth a look
SLOW_REQUEST_S = 5.0


class RequestLoggingMiddleware(BaseHTTPMiddleware):
    """Log every request with its compute time"""

    async def dispatch(self, request: Request, call_next) -> Response:
        started = time.perf_counter()
        response = await call_next(request)
        elapsed = time.perf_counter() - started

        response.headers["X-Compute-Time"] = f"{elapsed:.4f}"
        level = logging.WARNING if elapsed > SLOW_REQUEST_S else logging.INFO
        client = request.client.host if request.client else "unknown"
        logger.log(
            level,
            f"{request.method} {request.url.path} - {response.status_code} - {elapsed:.3f}s - {client}"
        )
        return response
