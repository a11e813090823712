from typing import Any, Dict, List, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_serializer, model_validator


class Partition(BaseModel):
    """Integer partition stored without trailing zeros; parts beyond the length read as 0"""
    model_config = ConfigDict(frozen=True)

    parts: Tuple[int, ...] = Field(default=(), description="Weakly decreasing positive parts")

    @model_validator(mode="before")
    @classmethod
    def _accept_sequence(cls, data: Any) -> Any:
        if isinstance(data, (list, tuple)):
            return {"parts": tuple(data)}
        return data

    @field_validator("parts", mode="before")
    @classmethod
    def _drop_trailing_zeros(cls, value: Any) -> Tuple[int, ...]:
        parts = [int(p) for p in value]
        while parts and parts[-1] == 0:
            parts.pop()
        return tuple(parts)

    @field_validator("parts")
    @classmethod
    def _weakly_decreasing(cls, parts: Tuple[int, ...]) -> Tuple[int, ...]:
        for i, part in enumerate(parts):
            if part < 0:
                raise ValueError(f"Negative part {part} in {parts}")
            if i and parts[i - 1] < part:
                raise ValueError(f"Parts must be weakly decreasing: {parts}")
        return parts

    @model_serializer
    def _as_list(self) -> List[int]:
        return list(self.parts)

    @classmethod
    def of(cls, *parts: int) -> "Partition":
        return cls(parts=parts)

    @classmethod
    def trusted(cls, parts: Tuple[int, ...]) -> "Partition":
        """Wrap parts already known to be a canonical partition, skipping validation"""
        return cls.model_construct(parts=parts)

    @classmethod
    def from_multiplicities(cls, multiplicities: Dict[int, int]) -> "Partition":
        """Build 1^{m_1} 2^{m_2} ... from {part: multiplicity}"""
        parts: List[int] = []
        for part in sorted(multiplicities, reverse=True):
            if part < 1 or multiplicities[part] < 0:
                raise ValueError(f"Invalid multiplicity entry {part}: {multiplicities[part]}")
            parts.extend([part] * multiplicities[part])
        return cls.trusted(tuple(parts))

    def __getitem__(self, i: int) -> int:
        if i < 0:
            raise IndexError("Partition parts are indexed from 0")
        return self.parts[i] if i < len(self.parts) else 0

    def __str__(self) -> str:
        return "(" + ",".join(str(p) for p in self.parts) + ")" if self.parts else "∅"

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    @property
    def first_row(self) -> int:
        return self.parts[0] if self.parts else 0

    def conjugate(self) -> "Partition":
        if not self.parts:
            return self
        return Partition.trusted(
            tuple(sum(1 for p in self.parts if p > j) for j in range(self.parts[0]))
        )

    def multiplicities(self) -> Dict[int, int]:
        counts: Dict[int, int] = {}
        for part in self.parts:
            counts[part] = counts.get(part, 0) + 1
        return counts

    def contains(self, other: "Partition") -> bool:
        """True iff other ⊂ self"""
        if other.length > self.length:
            return False
        return all(o <= s for o, s in zip(other.parts, self.parts))
