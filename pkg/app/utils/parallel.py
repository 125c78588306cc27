# app/utils/parallel.py
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from app.config import settings
from app.logger import get_logger

log = get_logger("parallel")

T = TypeVar("T")
R = TypeVar("R")


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """
    Параллельный map с сохранением порядка. Потоки: numpy/LAPACK отпускают GIL.
    Порядок результатов не зависит от числа воркеров, поэтому
    последующая свёртка детерминирована.
    """
    items = list(items)
    workers = workers or settings.solver_workers
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    log.debug(f"🧵 {len(items)} задач на {workers} воркерах")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
