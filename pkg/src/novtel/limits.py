"""Resource caps, overridable through the environment."""

import os
from contextlib import contextmanager

from .errors import ResourceCapExceeded

_DEFAULTS = {"max_slices": 2000, "max_terms": 5000}
_ENV = {"max_slices": "NOVTEL_MAX_SLICES", "max_terms": "NOVTEL_MAX_TERMS"}
_overrides: dict = {}


def cap(name: str) -> int:
    if name in _overrides:
        return _overrides[name]
    raw = os.environ.get(_ENV[name])
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"{_ENV[name]} must be a positive integer, got {raw!r}") from None
        if value <= 0:
            raise ValueError(f"{_ENV[name]} must be positive")
        return value
    return _DEFAULTS[name]


@contextmanager
def caps(**values):
    old = dict(_overrides)
    try:
        for k, v in values.items():
            if k not in _DEFAULTS:
                raise KeyError(k)
            if v is not None:
                _overrides[k] = int(v)
        yield
    finally:
        _overrides.clear()
        _overrides.update(old)


def check_slices(n: int, what: str = "slices") -> None:
    limit = cap("max_slices")
    if n > limit:
        raise ResourceCapExceeded(f"{what}: {n} exceeds max_slices = {limit}")


def check_terms(mats, what: str = "matrix entries") -> None:
    limit = cap("max_terms")
    for m in mats:
        for row in m.rows:
            for x in row:
                if len(x.terms) > limit:
                    raise ResourceCapExceeded(
                        f"{what}: a scalar with {len(x.terms)} terms exceeds max_terms = {limit}")
