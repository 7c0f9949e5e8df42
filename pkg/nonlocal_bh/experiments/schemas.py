from __future__ import annotations

from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field

# CSV 헤더 순서. ref_rmse 는 reference 모드에서만 뒤에 붙는다.
CSV_COLUMNS = ("dim", "N", "delta", "c", "problem", "rmse", "bd_error", "bd_dn_error")
REFERENCE_COLUMN = "ref_rmse"


class ErrorReport(BaseModel):
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    dim: int
    n_cells: int = Field(alias="N")
    delta: float
    c: float
    problem: str
    rmse: float = Field(ge=0)
    bd_error: float = Field(ge=0)
    bd_dn_error: float = Field(ge=0)
    ref_rmse: Optional[float] = Field(default=None, ge=0)
    residual_norm: float = Field(default=0.0, ge=0)

    def csv_row(self, *, with_reference: bool = False) -> dict:
        row = self.model_dump(by_alias=True)
        ordered = {col: row[col] for col in CSV_COLUMNS}
        if with_reference:
            ordered[REFERENCE_COLUMN] = self.ref_rmse
        return ordered


class StudySummary(BaseModel):
    study: str
    output_path: Path
    reports: List[ErrorReport]
    slope: Optional[float] = None
