"""Validated run configuration for the command line.

Subvolume specs:

    all         every site
    none        no site
    2-5         inclusive site range
    0,3,7       explicit sites
    random      random proper subvolume per trial
    random:k    random subvolume of k sites per trial
"""

from typing import Literal, get_args

from pydantic import BaseModel, Field, field_validator, model_validator

from src.algebra.moments import MAX_MOMENT
from src.algebra.operators import Statistics
from src.stochastic.config import AmplitudeKind
from src.stochastic.engine import MIN_SAMPLES

Command = Literal["moments", "table1", "spectrum", "measure", "mc", "golden"]
COMMANDS = get_args(Command)


def parse_subvolume(spec: str, n_sites: int) -> tuple[tuple[int, ...] | None, int | None]:
    """(fixed sites, None) or (None, random size or None)."""
    spec = spec.strip().lower()
    if spec == "all":
        return tuple(range(n_sites)), None
    if spec == "none":
        return (), None
    if spec == "random":
        return None, None
    if spec.startswith("random:"):
        size = int(spec.split(":", 1)[1])
        if not 0 <= size <= n_sites:
            raise ValueError(f"Random subvolume size {size} outside [0, {n_sites}]")
        return None, size
    if "-" in spec and "," not in spec:
        low, high = (int(part) for part in spec.split("-", 1))
        if low > high:
            raise ValueError(f"Empty site range {spec!r}")
        sites = tuple(range(low, high + 1))
    else:
        sites = tuple(int(part) for part in spec.split(",") if part)
    for s in sites:
        if not 0 <= s < n_sites:
            raise ValueError(f"Site {s} outside lattice of {n_sites} sites")
    if len(set(sites)) != len(sites):
        raise ValueError(f"Repeated site in {spec!r}")
    return sites, None


class RunConfig(BaseModel):
    command: Command
    stats: Statistics = Statistics.FERMION
    n_sites: int = Field(10, ge=2)
    subvolume: str = "random"
    k_max: int = Field(4, ge=1, le=MAX_MOMENT)
    trials: int = Field(1, ge=1)
    samples: int = Field(100_000, ge=MIN_SAMPLES)
    amplitudes: AmplitudeKind = AmplitudeKind.GAUSSIAN
    seed: int | None = Field(None, ge=0)
    format: Literal["json", "csv", "table"] = "table"
    out: str | None = None
    threads: int = Field(1, ge=1)
    cutoff: int | None = Field(None, ge=1)
    drop_mode: int | None = Field(None, ge=1)
    observable: Literal["position", "random"] = "position"
    ipr_trend: bool = False
    verbose: bool = False

    @field_validator("subvolume")
    @classmethod
    def subvolume_not_blank(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("subvolume spec must not be empty")
        return v.strip().lower()

    @model_validator(mode="after")
    def check_consistency(self) -> "RunConfig":
        parse_subvolume(self.subvolume, self.n_sites)
        if self.command == "mc" and self.seed is None:
            raise ValueError("--seed is required for the mc command")
        if self.ipr_trend and self.command != "mc":
            raise ValueError(f"--ipr-trend does not apply to {self.command}")
        if self.drop_mode is not None:
            if self.command not in ("moments", "spectrum", "measure"):
                raise ValueError(f"--drop-mode does not apply to {self.command}")
            if self.drop_mode >= self.n_sites:
                raise ValueError(f"--drop-mode must be in 1..{self.n_sites - 1}")
        return self

    @property
    def master_seed(self) -> int:
        return 0 if self.seed is None else self.seed

    @property
    def fixed_sites(self) -> tuple[int, ...] | None:
        return parse_subvolume(self.subvolume, self.n_sites)[0]

    @property
    def random_size(self) -> int | None:
        return parse_subvolume(self.subvolume, self.n_sites)[1]

    def header(self) -> dict:
        """Parameter echo for output headers (without the timestamp)."""
        return self.model_dump(mode="json")
