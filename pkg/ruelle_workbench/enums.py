from enum import Enum, auto


class StrEnum(str, Enum):
    """
    StrEnum subclasses that create variants using `auto()` will have values equal to their names
    """

    # noinspection PyMethodParameters
    def _generate_next_value_(name, start, count, last_values) -> str:  # type: ignore
        """
        Uses the name as the automatic value, rather than an integer
        """
        return name


class Normalization(StrEnum):
    eval_at_1 = auto()
    unit_integral = auto()


class JuliaCase(StrEnum):
    fixed_a = auto()
    mapped_a = auto()


class OutputFormat(StrEnum):
    csv = auto()
    json = auto()


class ReferenceMeasure(StrEnum):
    """
    The measure a Monte Carlo residual integrates against
    """

    balanced = auto()
    lebesgue = auto()


class CascadeInit(StrEnum):
    """
    Starting function of the cascade iteration
    """

    unitbox = auto()
