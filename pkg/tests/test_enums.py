from enum import auto

from ruelle_workbench.enums import CascadeInit, JuliaCase, Normalization, OutputFormat, ReferenceMeasure, StrEnum


def test_str_enum() -> None:
    class MyStrEnum(StrEnum):
        choice_one = auto()
        choice_two = auto()

    values = [value for value in MyStrEnum]
    assert values == ["choice_one", "choice_two"]


def test_workbench_enums_use_their_names() -> None:
    assert Normalization.eval_at_1 == "eval_at_1"
    assert JuliaCase("mapped_a") is JuliaCase.mapped_a
    assert [f.value for f in OutputFormat] == ["csv", "json"]
    assert ReferenceMeasure.lebesgue.value == "lebesgue"
    assert [i.value for i in CascadeInit] == ["unitbox"]
