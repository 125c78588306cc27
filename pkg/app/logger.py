# app/logger.py
import logging
import os
from logging.handlers import RotatingFileHandler
from pathlib import Path


BASE_DIR = Path(__file__).resolve().parent.parent
LOG_DIR = Path(os.environ.get("SOLVER_LOG_DIR", BASE_DIR / "logs"))

LOG_FILE = LOG_DIR / "solver.log"


class SafeRotatingFileHandler(RotatingFileHandler):
    """
    RotatingFileHandler, который не роняет расчёт, если файл занят
    другим процессом (параллельные воркеры Celery, WinError 32).
    """

    def doRollover(self):
        try:
            super().doRollover()
        except (PermissionError, FileNotFoundError):
            # ротацию пропускаем, пишем дальше в текущий файл
            if self.stream is None and not self.delay:
                self.stream = self._open()


def setup_logger(name: str = "solver", level: int = logging.INFO) -> logging.Logger:
    """
    Инициализация логгера с ротацией по размеру и консольным выводом.
    Повторный вызов возвращает уже настроенный логгер.
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.propagate = False

    if logger.handlers:
        return logger

    # --- Консоль ---
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(logging.Formatter("%(asctime)s | %(levelname)s | %(message)s"))
    console_handler.setLevel(level)
    logger.addHandler(console_handler)

    # --- Файл логов ---
    try:
        LOG_DIR.mkdir(parents=True, exist_ok=True)
        file_handler = SafeRotatingFileHandler(
            filename=str(LOG_FILE),
            maxBytes=5 * 1024 * 1024,
            backupCount=5,
            encoding="utf-8",
            delay=True,
        )
        file_handler.setFormatter(logging.Formatter(
            "%(asctime)s | %(levelname)s | %(name)s | %(module)s:%(lineno)d | %(message)s"
        ))
        file_handler.setLevel(level)
        logger.addHandler(file_handler)
    except OSError:
        logger.warning("⚠️ Каталог логов недоступен, пишем только в консоль")

    return logger


logger = setup_logger()


def get_logger(module: str) -> logging.Logger:
    """Дочерний логгер модуля: solver.<module>"""
    return logger.getChild(module)
