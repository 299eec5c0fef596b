"""JSON spec/system files and CSV profile export.

Spec files describe a system to build; system files additionally record the
built block geometry and can be reloaded losslessly.  All rationals cross the
file boundary as "p/q" strings, JSON is dumped in one canonical form (sorted
keys, compact separators, trailing newline), and loading a system file
rebuilds it from its own spec and cross-checks the stored geometry, so
build -> dump -> load -> dump is byte-identical.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .constructions import (
    ACTIVE_ALL,
    ACTIVE_SELF_POWERS,
    DEFAULT_GEOMETRY_BUDGET,
    IdentitySystem,
    Schedule,
    StackedSystem,
    System,
    TwoBlockSystem,
    build_stacked,
    build_two_block,
)
from .estimators import NumericRateRow
from .geometry import rational_from_str, rational_to_str
from .symbolic import DEFAULT_DPS, RateBound

SYSTEM_FORMAT = "mmdim-system/1"

KIND_GEOMETRIC = "geometric"
KIND_QUADRATIC = "quadratic"
KIND_SPARSE = "sparse"
KIND_TWO_BLOCK = "two_block"
KIND_IDENTITY = "identity"
SPEC_KINDS = (KIND_GEOMETRIC, KIND_QUADRATIC, KIND_SPARSE, KIND_TWO_BLOCK, KIND_IDENTITY)

PROFILE_COLUMNS = (
    "k",
    "eps_exact",
    "eps_float",
    "lower_rate",
    "upper_rate",
    "lower_ratio",
    "upper_ratio",
    "source",
)
SOURCE_SYMBOLIC = "symbolic"
SOURCE_NUMERIC = "numeric"


class SpecFileError(ValueError):
    pass


def _require_int(data: dict, field: str, minimum: int) -> int:
    value = data[field]
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise SpecFileError(f"field {field!r} must be an integer >= {minimum}")
    return value


def _require_rational(data: dict, field: str) -> Fraction:
    value = data[field]
    if not isinstance(value, str):
        raise SpecFileError(f'field {field!r} must be a "p/q" string')
    try:
        return rational_from_str(value)
    except ValueError as exc:
        raise SpecFileError(f"field {field!r}: {exc}") from exc


def _parse_leg_override(data: dict) -> tuple[tuple[int, int], ...] | None:
    raw = data.get("legScheduleOverride")
    if raw is None:
        return None
    if not isinstance(raw, dict) or not raw:
        raise SpecFileError(
            "field 'legScheduleOverride' must be a non-empty object {k: L}"
        )
    pairs = []
    for key, value in raw.items():
        try:
            k = int(key)
        except ValueError:
            raise SpecFileError(f"legScheduleOverride key {key!r} is not an integer")
        if k < 1:
            raise SpecFileError(f"legScheduleOverride key {key!r} must be >= 1")
        if not isinstance(value, int) or isinstance(value, bool) or value < 3 or value % 2 == 0:
            raise SpecFileError(
                f"legScheduleOverride[{key}] must be an odd integer >= 3"
            )
        pairs.append((k, value))
    return tuple(sorted(pairs))


@dataclass(frozen=True)
class SystemSpec:
    """Validated contents of a spec file; one kind, only its own fields."""

    kind: str
    n: int
    B: Fraction | None = None
    r: Fraction | None = None
    k_max: int | None = None
    alpha: Fraction | None = None
    beta: Fraction | None = None
    leg_override: tuple[tuple[int, int], ...] | None = None

    @staticmethod
    def from_jsonable(data: object) -> "SystemSpec":
        if not isinstance(data, dict):
            raise SpecFileError("spec must be a JSON object")
        kind = data.get("kind")
        if kind not in SPEC_KINDS:
            raise SpecFileError(f"field 'kind' must be one of {SPEC_KINDS}, got {kind!r}")
        allowed = {"kind", "n"}
        if kind in (KIND_GEOMETRIC, KIND_QUADRATIC, KIND_SPARSE):
            allowed |= {"B", "kMax", "legScheduleOverride"}
        if kind in (KIND_GEOMETRIC, KIND_SPARSE):
            allowed |= {"r"}
        if kind == KIND_TWO_BLOCK:
            allowed |= {"alpha", "beta", "kMax"}
        extra = sorted(set(data) - allowed)
        if extra:
            hint = ""
            if kind == KIND_QUADRATIC and "r" in extra:
                hint = " (quadratic schedules take no rate r)"
            raise SpecFileError(
                f"field(s) {', '.join(map(repr, extra))} do not apply to kind {kind!r}{hint}"
            )
        if "n" not in data:
            raise SpecFileError("field 'n' is required")
        n = _require_int(data, "n", 2)

        if kind == KIND_IDENTITY:
            return SystemSpec(kind=kind, n=n)

        if "kMax" not in data:
            raise SpecFileError("field 'kMax' is required")
        k_max = _require_int(data, "kMax", 1)

        if kind == KIND_TWO_BLOCK:
            for field in ("alpha", "beta"):
                if field not in data:
                    raise SpecFileError(f"field {field!r} is required for two_block")
            return SystemSpec(
                kind=kind,
                n=n,
                k_max=k_max,
                alpha=_require_rational(data, "alpha"),
                beta=_require_rational(data, "beta"),
            )

        if "B" not in data:
            raise SpecFileError("field 'B' is required")
        B = _require_rational(data, "B")
        r = None
        if kind == KIND_GEOMETRIC:
            if "r" not in data:
                raise SpecFileError("field 'r' is required for geometric schedules")
            r = _require_rational(data, "r")
        elif kind == KIND_SPARSE and "r" in data:
            r = _require_rational(data, "r")
        return SystemSpec(
            kind=kind, n=n, B=B, r=r, k_max=k_max, leg_override=_parse_leg_override(data)
        )

    def to_jsonable(self) -> dict:
        out: dict = {"kind": self.kind, "n": self.n}
        if self.k_max is not None:
            out["kMax"] = self.k_max
        if self.B is not None:
            out["B"] = rational_to_str(self.B)
        if self.r is not None:
            out["r"] = rational_to_str(self.r)
        if self.alpha is not None:
            out["alpha"] = rational_to_str(self.alpha)
        if self.beta is not None:
            out["beta"] = rational_to_str(self.beta)
        if self.leg_override is not None:
            out["legScheduleOverride"] = {str(k): L for k, L in self.leg_override}
        return out


def build_system(spec: SystemSpec, geometry_budget: int = DEFAULT_GEOMETRY_BUDGET) -> System:
    if spec.kind == KIND_IDENTITY:
        return IdentitySystem(spec.n)
    if spec.kind == KIND_TWO_BLOCK:
        return build_two_block(spec.alpha, spec.beta, spec.n, spec.k_max, geometry_budget)
    if spec.kind == KIND_GEOMETRIC:
        schedule = Schedule.geometric(spec.B, spec.r, leg_override=spec.leg_override)
    elif spec.kind == KIND_QUADRATIC:
        schedule = Schedule.quadratic(spec.B, leg_override=spec.leg_override)
    else:  # sparse: self-power activity over either size law
        if spec.r is not None:
            schedule = Schedule.geometric(
                spec.B, spec.r, active=ACTIVE_SELF_POWERS, leg_override=spec.leg_override
            )
        else:
            schedule = Schedule.quadratic(
                spec.B, active=ACTIVE_SELF_POWERS, leg_override=spec.leg_override
            )
    return build_stacked(schedule, spec.n, spec.k_max, geometry_budget)


def _schedule_payload(schedule: Schedule) -> dict:
    if schedule.active in (ACTIVE_ALL, ACTIVE_SELF_POWERS):
        active = schedule.active
    else:
        active = sorted(schedule.active)
    out = {"kind": schedule.kind, "B": rational_to_str(schedule.B), "active": active}
    if schedule.r is not None:
        out["r"] = rational_to_str(schedule.r)
    if schedule.leg_override is not None:
        out["legScheduleOverride"] = {str(k): L for k, L in schedule.leg_override}
    return out


def _system_payload(system: System) -> dict:
    if isinstance(system, IdentitySystem):
        return {"kind": system.kind, "n": system.n}
    if isinstance(system, StackedSystem):
        blocks = []
        for block in system.blocks:
            entry = {
                "k": block.k,
                "anchor": rational_to_str(block.cube.lo),
                "side": rational_to_str(block.cube.side),
                "L": block.L,
                "eps": rational_to_str(block.eps),
                "active": block.active,
                "materialized": block.materialized,
            }
            if block.horseshoe is not None:
                entry["assignment"] = [
                    [strip, list(leg)] for strip, leg in block.horseshoe.assignment
                ]
            blocks.append(entry)
        return {
            "kind": system.kind,
            "n": system.n,
            "kMax": system.k_max,
            "geometryBudget": system.geometry_budget,
            "schedule": _schedule_payload(system.schedule),
            "blocks": blocks,
        }
    if isinstance(system, TwoBlockSystem):
        return {
            "kind": system.kind,
            "n": system.n,
            "kMax": system.k_max,
            "alpha": rational_to_str(system.alpha),
            "beta": rational_to_str(system.beta),
            "lower": _system_payload(system.lower),
            "upper": _system_payload(system.upper),
        }
    raise TypeError(f"unknown system type {type(system).__name__}")


def system_to_jsonable(system: System, spec: SystemSpec) -> dict:
    return {
        "format": SYSTEM_FORMAT,
        "spec": spec.to_jsonable(),
        "system": _system_payload(system),
    }


def _stored_budget(payload: dict) -> int:
    while payload.get("kind") == "two-block":
        payload = payload["lower"]
    return payload.get("geometryBudget", DEFAULT_GEOMETRY_BUDGET)


def load_system(data: object) -> tuple[SystemSpec, System]:
    """Rebuild a system file's contents, verifying the stored geometry."""
    if not isinstance(data, dict):
        raise SpecFileError("system file must be a JSON object")
    if data.get("format") != SYSTEM_FORMAT:
        raise SpecFileError(
            f"field 'format' must be {SYSTEM_FORMAT!r}, got {data.get('format')!r}"
        )
    if "spec" not in data or "system" not in data:
        raise SpecFileError("system file needs 'spec' and 'system' fields")
    spec = SystemSpec.from_jsonable(data["spec"])
    system = build_system(spec, _stored_budget(data["system"]))
    if system_to_jsonable(system, spec) != data:
        raise SpecFileError("stored system geometry does not match its spec rebuild")
    return spec, system


def canonical_dumps(obj: object) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def read_json(path: str) -> object:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecFileError(f"{path}: not valid JSON ({exc})") from exc


def write_json(path: str, obj: object) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_dumps(obj))


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def symbolic_csv_rows(profile: Sequence[RateBound], dps: int = DEFAULT_DPS) -> list[dict]:
    rows = []
    for b in profile:
        eps_float = b.eps_float(dps)
        rows.append(
            {
                "k": str(b.k),
                "eps_exact": rational_to_str(b.eps_exact) if b.eps_exact is not None else "",
                "eps_float": _fmt(eps_float) if eps_float == eps_float else "",
                "lower_rate": _fmt(b.lower_rate.to_float(dps)),
                "upper_rate": _fmt(b.upper_rate.to_float(dps)),
                "lower_ratio": _fmt(b.lower_ratio(dps)),
                "upper_ratio": _fmt(b.upper_ratio(dps)),
                "source": SOURCE_SYMBOLIC,
            }
        )
    return rows


def numeric_csv_rows(rows: Sequence[NumericRateRow]) -> list[dict]:
    out = []
    for row in rows:
        if row.error is not None:
            out.append(
                {
                    "k": str(row.k),
                    "eps_exact": rational_to_str(row.eps_exact) if row.eps_exact is not None else "",
                    "eps_float": "",
                    "lower_rate": "",
                    "upper_rate": "",
                    "lower_ratio": "",
                    "upper_ratio": "",
                    "source": SOURCE_NUMERIC,
                }
            )
            continue
        out.append(
            {
                "k": str(row.k),
                "eps_exact": rational_to_str(row.eps_exact) if row.eps_exact is not None else "",
                "eps_float": _fmt(float(row.eps_exact)) if row.eps_exact is not None else "",
                "lower_rate": _fmt(row.rate),
                "upper_rate": _fmt(row.rate),
                "lower_ratio": _fmt(row.ratio),
                "upper_ratio": _fmt(row.upper_ratio),
                "source": SOURCE_NUMERIC,
            }
        )
    return out


def write_profile_csv(fh, rows: Sequence[dict]) -> None:
    writer = csv.DictWriter(fh, fieldnames=PROFILE_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
