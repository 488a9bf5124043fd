"""
Access to the THERMALQAS settings block with library-safe fallbacks
"""
from typing import Any

from django.conf import settings
from django.core.exceptions import ImproperlyConfigured


def domain_setting(key: str, default: Any = None) -> Any:
    """Read ``settings.THERMALQAS[key]``, falling back when settings are not configured"""
    try:
        block = getattr(settings, 'THERMALQAS', {})
    except ImproperlyConfigured:
        return default
    return block.get(key, default)
