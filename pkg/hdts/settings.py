from __future__ import annotations

import os
from typing import Mapping

from pydantic import BaseModel, Field

from hdts.services.generators import DEFAULT_DMAX
from hdts.services.subcats import Variant


DMAX_ENV = "HDTS_DMAX"


class ConfigurationError(ValueError):
    pass


class Settings(BaseModel):
    dmax: int = Field(default=DEFAULT_DMAX, ge=1, le=8)
    variant: Variant = "wts"

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None) -> Settings:
        environ = os.environ if environ is None else environ
        raw = environ.get(DMAX_ENV)
        if raw is None or not raw.strip():
            return cls()
        try:
            return cls(dmax=int(raw))
        except ValueError as exc:
            raise ConfigurationError(f"{DMAX_ENV}={raw!r} is not a dimension bound between 1 and 8") from exc

    def override(self, dmax: int | None = None, variant: Variant | None = None) -> Settings:
        updates = {}
        if dmax is not None:
            updates["dmax"] = dmax
        if variant is not None:
            updates["variant"] = variant
        try:
            return Settings(**{**self.model_dump(), **updates})
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from exc
