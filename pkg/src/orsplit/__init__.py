"""Or-parallel tree search with environment copying and stack splitting."""

from .engine import SOLUTION, EngineState, SearchProgram, Store, run_sequential
from .orframes import Strategy
from .scheduler import Reposition, RunResult, Runtime, SchedulerConfig, run_parallel

__all__ = [
    "SOLUTION", "EngineState", "SearchProgram", "Store", "run_sequential",
    "Strategy", "Reposition", "RunResult", "Runtime", "SchedulerConfig",
    "run_parallel",
]
