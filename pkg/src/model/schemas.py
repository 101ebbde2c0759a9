"""JSON document for a basis set and a subvolume.

    {"n_sites": 4, "modes": [[re, im], ...], "subvolume": [0, 2]}

``modes`` lists the basis row-major: M * n_sites complex entries as
[real, imaginary] pairs.
"""

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from src.model.basis import BasisSet
from src.model.lattice import Lattice, Subvolume


class BasisDocument(BaseModel):
    n_sites: int = Field(..., ge=2)
    modes: list[tuple[float, float]]
    subvolume: list[int] = Field(default_factory=list)

    @field_validator("modes")
    @classmethod
    def modes_not_empty(cls, v: list[tuple[float, float]]) -> list[tuple[float, float]]:
        if not v:
            raise ValueError("modes must not be empty")
        return v

    @model_validator(mode="after")
    def modes_fill_rows(self) -> "BasisDocument":
        if len(self.modes) % self.n_sites != 0:
            raise ValueError(
                f"{len(self.modes)} mode entries do not fill rows of {self.n_sites} sites"
            )
        return self


def to_document(basis: BasisSet, v: Subvolume | None = None) -> BasisDocument:
    flat = basis.modes.reshape(-1)
    return BasisDocument(
        n_sites=basis.lattice.n_sites,
        modes=[(float(z.real), float(z.imag)) for z in flat],
        subvolume=list(v.sites) if v is not None else [],
    )


def from_document(doc: BasisDocument) -> tuple[BasisSet, Subvolume]:
    lattice = Lattice(doc.n_sites)
    pairs = np.array(doc.modes, dtype=float)
    modes = (pairs[:, 0] + 1j * pairs[:, 1]).reshape(-1, doc.n_sites)
    return BasisSet(lattice, modes), Subvolume(lattice, tuple(doc.subvolume))
