"""Versioned JSON model files.

    {
      "version": 1,
      "z": {"modulus": 1.0, "argument": 1.5707963267948966},
      "columns": [{"k": 1, "factors": [{"kind": "beta_plus", "param": 0.5}]}],
      "quadrature": {"abs_tol": 1e-12}
    }
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from pydantic import BaseModel, Field, ValidationError, field_validator

from src.config import Settings
from src.kernel.factors import FactorKind, PsiFactor, PsiSequence, SpectralParameter
from src.kernel.quadrature import QuadratureSpec

MODEL_FILE_VERSION = 1


class ModelFileError(ValueError):
    """Raised when a model file cannot be read or fails validation."""
    pass


class FactorEntry(BaseModel):
    kind: FactorKind
    param: float = Field(gt=0)


class ColumnEntry(BaseModel):
    k: int
    factors: list[FactorEntry] = Field(default_factory=list)


class SpectralEntry(BaseModel):
    modulus: float = Field(default=1.0, gt=0)
    argument: float = Field(default=math.pi / 2, gt=0, lt=math.pi)


class QuadratureOverrides(BaseModel):
    abs_tol: float | None = Field(default=None, gt=0)
    nodes_per_panel: int | None = Field(default=None, ge=2)
    max_panels: int | None = Field(default=None, ge=1)


class ModelFile(BaseModel):
    version: int = MODEL_FILE_VERSION
    z: SpectralEntry = Field(default_factory=SpectralEntry)
    columns: list[ColumnEntry] = Field(default_factory=list)
    quadrature: QuadratureOverrides = Field(default_factory=QuadratureOverrides)

    @field_validator("version")
    @classmethod
    def _known_version(cls, v: int) -> int:
        if v != MODEL_FILE_VERSION:
            raise ValueError(f"unsupported model file version {v}")
        return v

    @field_validator("columns")
    @classmethod
    def _unique_columns(cls, v: list[ColumnEntry]) -> list[ColumnEntry]:
        ks = [c.k for c in v]
        if len(ks) != len(set(ks)):
            raise ValueError("duplicate column index")
        return v

    # --- Conversions ---

    @classmethod
    def from_model(cls, sequence: PsiSequence, z: SpectralParameter) -> ModelFile:
        return cls(
            z=SpectralEntry(modulus=z.modulus, argument=z.argument),
            columns=[
                ColumnEntry(k=k, factors=[FactorEntry(kind=f.kind, param=f.param) for f in fs])
                for k, fs in sequence.factors.items()
            ],
        )

    def sequence(self) -> PsiSequence:
        return PsiSequence(factors={
            c.k: tuple(PsiFactor(f.kind, f.param) for f in c.factors) for c in self.columns
        })

    def spectral(self) -> SpectralParameter:
        return SpectralParameter(self.z.modulus, self.z.argument)

    def quadrature_spec(self, settings: Settings) -> QuadratureSpec:
        q = self.quadrature
        return QuadratureSpec(
            max_panels=q.max_panels or settings.quad_max_panels,
            abs_tol=q.abs_tol or settings.quad_abs_tol,
            nodes_per_panel=q.nodes_per_panel or settings.quad_nodes_per_panel,
        )


def load_model(path: Path | str) -> ModelFile:
    """Read and validate a model file.

    Raises:
        ModelFileError: On missing files, bad JSON or schema violations.
    """
    p = Path(path)
    try:
        return ModelFile.model_validate_json(p.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise ModelFileError(f"model file not found: {p}") from exc
    except ValidationError as exc:
        raise ModelFileError(f"invalid model file {p}: {exc}") from exc


def save_model(model: ModelFile, path: Path | str) -> None:
    """Write a model file with sorted keys so equal models give equal bytes."""
    data = model.model_dump(mode="json", exclude_none=True)
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
