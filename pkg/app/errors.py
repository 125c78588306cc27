# app/errors.py


class SolverError(Exception):
    """Базовая ошибка решателя. `exit_code` используется CLI."""

    exit_code = 2

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        return {"error": type(self).__name__, "detail": str(self), **self.details}


# =========================
# Ошибки входных данных (exit 1)
# =========================
class ConfigurationError(SolverError):
    """Некорректные параметры, сетка или конфигурация"""
    exit_code = 1


class TruncationError(ConfigurationError):
    """Хвост e^{-2 t_max} не пренебрежимо мал"""


class DomainError(SolverError):
    """Аргумент вне области определения формулы"""
    exit_code = 1


class PreconditionError(SolverError):
    """Данные не удовлетворяют граничным флагам"""
    exit_code = 1


class IngestionError(SolverError):
    """Правая часть не вычисляется в узле сектора"""
    exit_code = 1


# =========================
# Численные отказы (exit 2)
# =========================
class EigenvalueProximityError(SolverError):
    """λ слишком близко к собственному значению A"""


class SpectralConditionError(SolverError):
    """Нарушено условие ωμ < τ или спектры не разделены"""


class RegionTooSmallError(SolverError):
    """Поиск корней нашёл меньше корней, чем запрошено"""


class DivergenceError(SolverError):
    """Итерация Неймана не сходится"""
