"""Decoherence rate schema"""

from pydantic import Field

from swiftdeco.schemas.common import ArrayModel, FloatArray


class DecoherenceRate(ArrayModel):
    """Complex decoherence rate F(s) = re + i im"""

    re: float = Field(..., ge=0)
    im: float
    s: FloatArray
    order: int = 0

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)
