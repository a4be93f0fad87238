import pytest

from src.validators import (
    BudgetExceededError,
    InvariantError,
    PreconditionError,
    ValidationError,
    validate_braid_index,
    validate_budget,
    validate_coefficients,
    validate_counts,
    validate_generator_name,
)


def test_exit_codes():
    assert ValidationError.exit_code == 1
    assert PreconditionError.exit_code == 2
    assert BudgetExceededError.exit_code == 3
    assert InvariantError.exit_code == 4


def test_braid_index():
    assert validate_braid_index(4) == 4
    for bad in (0, -1, True, 2.5, "4"):
        with pytest.raises(ValidationError):
            validate_braid_index(bad)


def test_counts():
    assert validate_counts([0, 2, 1], 3) == (0, 2, 1)
    with pytest.raises(ValidationError):
        validate_counts([0, 1], 3)
    with pytest.raises(ValidationError):
        validate_counts([0, -1])


def test_generator_name():
    assert validate_generator_name(" g12 ") == "g12"
    with pytest.raises(ValidationError):
        validate_generator_name("x1")


def test_coefficients_both_forms():
    assert validate_coefficients("g0=1,g3=-2", 4) == [1, 0, 0, -2]
    assert validate_coefficients("1, 0, -1", 3) == [1, 0, -1]
    with pytest.raises(ValidationError):
        validate_coefficients("g4=1", 4)
    with pytest.raises(ValidationError):
        validate_coefficients("g0=1,g0=2", 4)
    with pytest.raises(ValidationError):
        validate_coefficients("1,2", 3)
    with pytest.raises(ValidationError):
        validate_coefficients("", 3)


def test_budget():
    assert validate_budget("cells", 10) == 10
    with pytest.raises(ValidationError):
        validate_budget("cells", 0)
