import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from rotalg.config.settings import Config

T = TypeVar("T")
R = TypeVar("R")

logger = logging.getLogger(__name__)


def map_ordered(fn: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """并发执行 fn，结果按输入顺序返回。
    - 线程数上限来自 Config.get_worker_count()（ROTALG_THREADS 优先）
    - 单线程或单任务时直接顺序执行
    - 任一任务抛出的异常原样向上传递
    """
    items = list(items)
    if workers is None:
        workers = Config.get_worker_count()
    workers = max(1, min(int(workers), len(items) or 1))
    if workers == 1:
        return [fn(item) for item in items]
    logger.debug(f"并发计算 {len(items)} 个任务，线程数 {workers}")
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="rotalg") as pool:
        return list(pool.map(fn, items))
