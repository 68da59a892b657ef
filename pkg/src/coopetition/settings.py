"""Numerical knobs shared by the equilibrium solvers and the oracle."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace

from .errors import ValidationError


@dataclass(frozen=True)
class SolverSettings:
    # period-2 best-response dynamics
    br_tolerance: float = 1e-10
    max_br_iterations: int = 500
    damping: float = 0.0
    scan_points: int = 64
    line_search_tolerance: float = 1e-11
    # brute-force verification
    oracle_grid_n: int = 2000
    deviation_tolerance: float = 1e-4
    # period-1 projected gradient ascent
    fd_step: float = 1e-4
    step_fraction: float = 0.05
    step_floor: float = 1e-7
    step_growth: float = 1.5
    region_tolerance: float = 1e-7
    region_max_iterations: int = 400
    seed_points: int = 9

    def __post_init__(self):
        if not self.br_tolerance > 0:
            raise ValidationError("settings.br_tolerance must be positive")
        if self.max_br_iterations < 1:
            raise ValidationError("settings.max_br_iterations must be >= 1")
        if not 0.0 <= self.damping < 1.0:
            raise ValidationError("settings.damping must lie in [0, 1)")
        if self.oracle_grid_n < 100:
            raise ValidationError("settings.oracle_grid_n must be >= 100")
        if self.scan_points < 3:
            raise ValidationError("settings.scan_points must be >= 3")
        if not self.fd_step > 0 or not self.step_fraction > 0:
            raise ValidationError("settings.fd_step and step_fraction must be positive")
        if self.step_growth < 1.0:
            raise ValidationError("settings.step_growth must be >= 1")
        if self.seed_points < 1 or self.region_max_iterations < 1:
            raise ValidationError("settings.seed_points and region_max_iterations must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict | None) -> "SolverSettings":
        d = dict(d or {})
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(d) - set(known)
        if unknown:
            raise ValidationError(f"settings: unknown field(s) {sorted(unknown)}")
        defaults = cls()
        for name, value in d.items():
            want = type(getattr(defaults, name))
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(f"settings.{name} must be a number, got {value!r}")
            if want is int:
                if value != int(value):
                    raise ValidationError(f"settings.{name} must be an integer")
                d[name] = int(value)
            else:
                d[name] = float(value)
        return cls(**d)

    def with_overrides(self, **kw) -> "SolverSettings":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})
