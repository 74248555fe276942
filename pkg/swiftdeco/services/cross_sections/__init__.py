"""Differential cross-section models"""

from pathlib import Path
from typing import Optional

from swiftdeco.core.constants import (MODEL_GAUSSIAN_FORWARD, MODEL_ISOTROPIC,
                                      MODEL_TABULATED)
from swiftdeco.core.exceptions import ParseError
from swiftdeco.schemas.xsection import CrossSectionSpec
from swiftdeco.services.cross_sections.base import BaseCrossSectionModel
from swiftdeco.services.cross_sections.gaussian_forward import \
    GaussianForwardCrossSection
from swiftdeco.services.cross_sections.isotropic import IsotropicCrossSection
from swiftdeco.services.cross_sections.tabulated import TabulatedCrossSection


def get_cross_section_model(
    spec: CrossSectionSpec, d: int, base_dir: Optional[Path] = None
) -> BaseCrossSectionModel:
    """
    Build a cross-section model from its scenario description.

    Args:
        spec: Model kind and parameters
        d: Spatial dimension
        base_dir: Directory that relative table paths are resolved against

    Returns:
        Instance of the matching model

    Raises:
        ParseError: If the model kind is not recognized
    """
    if spec.kind == MODEL_ISOTROPIC:
        return IsotropicCrossSection(spec.sigma0, d)
    if spec.kind == MODEL_GAUSSIAN_FORWARD:
        return GaussianForwardCrossSection(spec.sigma0, spec.theta0, d)
    if spec.kind == MODEL_TABULATED:
        path = Path(spec.table)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return TabulatedCrossSection.from_csv(path, d)
    raise ParseError(f"Unknown cross-section model: {spec.kind}", key="model")


__all__ = [
    "BaseCrossSectionModel",
    "IsotropicCrossSection",
    "GaussianForwardCrossSection",
    "TabulatedCrossSection",
    "get_cross_section_model",
]
