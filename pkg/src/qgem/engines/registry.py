"""Engine registration and discovery."""

from __future__ import annotations

from typing import Iterable

_REGISTRY: dict[str, type] = {}
_ALIASES: dict[str, str] = {}


def register(
    name: str, engine_cls: type, *, aliases: Iterable[str] | None = None
) -> None:
    """Register an engine class under the given name."""
    _REGISTRY[name] = engine_cls
    for alias in aliases or ():
        _ALIASES[alias] = name


def get(name: str) -> type:
    """Retrieve a registered engine class by name or alias.

    Raises KeyError if the engine is not registered.
    """
    canonical = _ALIASES.get(name, name)
    if canonical not in _REGISTRY:
        raise KeyError(f"Engine {name!r} not registered. Available: {available()}")
    return _REGISTRY[canonical]


def canonical_name(name: str) -> str:
    return get(name).name


def available() -> list[str]:
    """Return all registered engine names and aliases."""
    return sorted(set(_REGISTRY) | set(_ALIASES))


def _register_builtins() -> None:
    from qgem.engines.closed import ClosedFormEngine
    from qgem.engines.oracle import StateVectorEngine

    register("closed", ClosedFormEngine, aliases=("analytic",))
    register("oracle", StateVectorEngine, aliases=("statevector",))


_register_builtins()
