"""
Replicate worker pool

Replicates are independent tasks. With more than one thread they run in a
ProcessPoolExecutor; results always come back in payload order so outputs do
not depend on scheduling.
"""

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional, TypeVar, Union

from .errors import ConfigError
from .log import get_logger
from .measure import LambdaMeasure, make_measure
from .models import MeasureSpec

logger = get_logger("parallel")

THREADS_ENV = "LAMBDA_FLOWS_THREADS"

P = TypeVar("P")
R = TypeVar("R")

MeasureRef = Union[MeasureSpec, LambdaMeasure]

_measure_cache: Dict[str, LambdaMeasure] = {}


def resolve_threads(flag: Optional[int] = None) -> int:
    """--threads flag, then LAMBDA_FLOWS_THREADS, then 1"""
    if flag is not None:
        threads = flag
    else:
        raw = os.environ.get(THREADS_ENV)
        if raw is None or raw.strip() == "":
            return 1
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if threads < 1:
        raise ConfigError(f"Thread count must be at least 1, got {threads}")
    return threads


def measure_ref(m: LambdaMeasure) -> MeasureRef:
    """What a payload carries for a measure: its MeasureSpec when it has one"""
    return m.spec if m.spec is not None else m


def resolve_measure(ref: MeasureRef) -> LambdaMeasure:
    """Rebuilds (once per process) the measure a payload refers to"""
    if isinstance(ref, LambdaMeasure):
        return ref
    key = ref.model_dump_json()
    if key not in _measure_cache:
        _measure_cache[key] = make_measure(ref)
    return _measure_cache[key]


def map_replicates(
    task: Callable[[P], R], payloads: Iterable[P], threads: int = 1
) -> List[R]:
    """
    Apply task to every payload

    Args:
        task: Module-level function (it must pickle when threads > 1)
        payloads: One payload per replicate
        threads: Worker processes; 1 maps in-process

    Returns:
        Results in payload order
    """
    items = list(payloads)
    if threads > 1 and any(_holds_bare_measure(p) for p in items):
        logger.warning("Measure without a MeasureSpec cannot be shipped to workers; running in-process")
        threads = 1
    if threads <= 1 or len(items) <= 1:
        return [task(p) for p in items]
    chunksize = max(1, len(items) // (4 * threads))
    logger.info("Running %d replicates on %d workers", len(items), threads)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(task, items, chunksize=chunksize))


def _holds_bare_measure(payload: Any) -> bool:
    if isinstance(payload, LambdaMeasure):
        return True
    if isinstance(payload, (tuple, list)):
        return any(isinstance(item, LambdaMeasure) for item in payload)
    if isinstance(payload, dict):
        return any(isinstance(item, LambdaMeasure) for item in payload.values())
    return False
