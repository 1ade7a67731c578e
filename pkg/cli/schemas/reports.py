"""
Pydantic schemas for the quantize and stats command reports.
"""
from typing import Literal, Optional

from pydantic import BaseModel, Field


class QuantizeSummary(BaseModel):
    """Usage summary written by `pivq quantize --stats`."""
    method: Literal["nearest", "matching"]
    samples: int = Field(..., ge=0)
    codebook_size: int = Field(..., ge=1)
    k_data: int = Field(..., ge=0, description="Distinct codes over the whole dataset")
    max_k_img: int = Field(..., ge=0, description="Largest number of distinct codes in one sample")
    total_distance: float = Field(..., ge=0.0)

    model_config = {
        "json_schema_extra": {
            "example": {
                "method": "matching",
                "samples": 2,
                "codebook_size": 4,
                "k_data": 4,
                "max_k_img": 2,
                "total_distance": 0.5,
            }
        }
    }


class StatsReport(BaseModel):
    """Output of `pivq stats`; capacities are evaluated at the measured k_data."""
    k_data: int = Field(..., ge=0)
    max_k_img: int = Field(..., ge=0)
    nearest_capacity_bits: Optional[float] = None
    matching_capacity_bits: Optional[float] = None
