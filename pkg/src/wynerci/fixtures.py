"""Reference curves digitised from the published figures, shipped as CSV."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from importlib import resources

FIXTURE_NAMES = (
    "fig1_exact", "fig1_mi",
    "fig2_lower", "fig2_mi", "fig2_upper",
    "fig3_lower", "fig3_mi",
)

# sweep column each fixture is compared against
FIXTURE_COLUMNS = {
    "fig1_exact": "exact",
    "fig1_mi": "mi",
    "fig2_lower": "lower_unclamped",
    "fig2_mi": "mi",
    "fig2_upper": "upper",
    "fig3_lower": "lower",
    "fig3_mi": "mi",
}


def format_number(value: float) -> str:
    """Shortest round-trip decimal, with integral values written without ``.0``."""
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


@dataclass(frozen=True)
class FixtureTable:
    source: str
    rows: tuple   # ((param, value), ...)

    def __post_init__(self):
        params = [p for p, _ in self.rows]
        if any(b <= a for a, b in zip(params, params[1:])):
            raise ValueError(f"{self.source}: parameter values must be strictly increasing")
        if not all(math.isfinite(v) for _, v in self.rows):
            raise ValueError(f"{self.source}: non-finite reference value")

    @property
    def params(self) -> list[float]:
        return [p for p, _ in self.rows]

    def value_at(self, param: float, tol: float = 1e-9) -> float:
        for p, v in self.rows:
            if abs(p - param) <= tol:
                return v
        raise KeyError(param)

    def to_csv(self) -> str:
        out = ["param,value"]
        out += [f"{format_number(p)},{format_number(v)}" for p, v in self.rows]
        return "\n".join(out) + "\n"


def parse_fixture(text: str, source: str) -> FixtureTable:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != ["param", "value"]:
        raise ValueError(f"{source}: expected header 'param,value', got {header}")
    rows = tuple((float(p), float(v)) for p, v in reader)
    return FixtureTable(source, rows)


def fixture_text(name: str) -> str:
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURE_NAMES)}")
    return resources.files("wynerci").joinpath("fixtures", f"{name}.csv").read_text(encoding="utf-8")


def load_fixture(name: str) -> FixtureTable:
    return parse_fixture(fixture_text(name), name)
