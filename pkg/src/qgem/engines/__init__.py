from qgem.engines.base import Engine, SystemState
from qgem.engines.registry import available, get, register

__all__ = ["Engine", "SystemState", "available", "get", "register"]
