"""Human review service: annotation store and HTTP API."""

from emphst.review.store import InvalidPayload, ReviewStore, StoreError, UnknownSample  # noqa: F401
from emphst.review.service import create_app, serve_review  # noqa: F401
