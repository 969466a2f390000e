# app/auth/rate_limit.py
from slowapi import Limiter
from slowapi.util import get_remote_address

from app.config import settings

# Las ejecuciones Monte Carlo son costosas: se limita por IP cliente
limiter = Limiter(key_func=get_remote_address, enabled=settings.rate_limit_enabled)
