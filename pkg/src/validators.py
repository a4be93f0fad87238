import re
from pathlib import Path
from typing import Dict, List, Optional, Sequence


class BraidLabError(Exception):
    """Base error for braid group computations"""
    exit_code = 1


class ValidationError(BraidLabError):
    """Custom validation error"""
    exit_code = 1


class PreconditionError(BraidLabError):
    """Operation used outside of its domain"""
    exit_code = 2


class BudgetExceededError(BraidLabError):
    """A configured resource cap was hit"""
    exit_code = 3


class InvariantError(BraidLabError):
    """A property guaranteed by theory did not hold"""
    exit_code = 4


def validate_braid_index(n: int, minimum: int = 1, maximum: Optional[int] = None) -> int:
    """Validate braid index"""
    if isinstance(n, bool) or not isinstance(n, int):
        raise ValidationError(f"Braid index must be an integer, got {n!r}")

    if n < minimum:
        raise ValidationError(f"Braid index must be at least {minimum}, got {n}")

    if maximum is not None and n > maximum:
        raise ValidationError(f"Braid index must be at most {maximum}, got {n}")

    return n


def validate_counts(counts: Sequence[int], length: Optional[int] = None) -> tuple:
    """Validate a vector of blocked-vertex counts"""
    counts = tuple(counts)

    if length is not None and len(counts) != length:
        raise ValidationError(f"Count vector {counts} must have length {length}")

    for c in counts:
        if isinstance(c, bool) or not isinstance(c, int) or c < 0:
            raise ValidationError(f"Count vector {counts} must hold non-negative integers")

    return counts


def validate_generator_name(name: str) -> str:
    """Validate a generator label such as g12"""
    name = name.strip()

    if not re.match(r'^g\d+$', name):
        raise ValidationError(f"Invalid generator label: {name!r} (expected g<index>)")

    return name


def validate_coefficients(text: str, size: int) -> List[int]:
    """Parse a cohomology class given as 'g0=1,g4=-1' or a plain comma list"""
    if text is None or not text.strip():
        raise ValidationError("Coefficient list cannot be empty")

    text = text.strip()
    values = [0] * size

    if "=" not in text:
        parts = [p for p in re.split(r'[,\s]+', text) if p]
        if len(parts) != size:
            raise ValidationError(f"Expected {size} coefficients, got {len(parts)}")
        try:
            return [int(p) for p in parts]
        except ValueError as e:
            raise ValidationError(f"Invalid coefficient list: {e}")

    seen: Dict[int, int] = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise ValidationError(f"Invalid coefficient entry: {item!r}")
        label, value = item.split("=", 1)
        index = int(validate_generator_name(label)[1:])
        if index >= size:
            raise ValidationError(f"Generator {label} out of range (presentation has {size})")
        if index in seen:
            raise ValidationError(f"Generator {label} given twice")
        try:
            seen[index] = int(value)
        except ValueError:
            raise ValidationError(f"Invalid coefficient for {label}: {value!r}")

    for index, value in seen.items():
        values[index] = value

    return values


def validate_budget(name: str, value: int) -> int:
    """Validate a positive resource cap"""
    if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
        raise ValidationError(f"Budget {name} must be a positive integer, got {value!r}")

    return value


def validate_file_path(path: str, must_exist: bool = False) -> Path:
    """Validate file path"""
    try:
        path_obj = Path(path).resolve()
    except Exception as e:
        raise ValidationError(f"Invalid file path: {e}")

    if must_exist and not path_obj.exists():
        raise ValidationError(f"File does not exist: {path}")

    return path_obj
