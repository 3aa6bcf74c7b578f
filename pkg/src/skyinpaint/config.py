"""Run configuration shared by the CLI stages, serializable to JSON."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .render import GreyscaleParams
from .solver import DEFAULT_EPSILON, DEFAULT_MAX_ITERATIONS, SolverConfig, available_workers

DEFAULT_WIDTH = 3600
DEFAULT_HEIGHT = 901

_GREY = GreyscaleParams()


@dataclass
class RunConfig:
    width: int = DEFAULT_WIDTH
    height: int = DEFAULT_HEIGHT
    epsilon: float = DEFAULT_EPSILON
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    # None means "all available cores", resolved at solve time
    workers: int | None = None
    deterministic_reductions: bool = True
    greyscale: str = _GREY.mode
    pclip: tuple[float, float] = (_GREY.lo_percentile, _GREY.hi_percentile)
    show_mask: bool = False
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    emit_residual_history: bool = False
    history_path: str | None = None

    def __post_init__(self):
        self.pclip = tuple(float(v) for v in self.pclip)
        self.inputs = [str(p) for p in self.inputs]
        self.outputs = [str(p) for p in self.outputs]

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            epsilon=self.epsilon,
            max_iterations=self.max_iterations,
            workers=self.workers or available_workers(),
            deterministic_reductions=self.deterministic_reductions,
            record_history=self.emit_residual_history,
        )

    def greyscale_params(self) -> GreyscaleParams:
        return GreyscaleParams(self.greyscale, *self.pclip)

    def to_json(self) -> str:
        d = asdict(self)
        d["pclip"] = list(self.pclip)
        return json.dumps(d, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        d = json.loads(text)
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.from_json(Path(path).read_text())

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")
