"""Input record types: calendar months, job transitions, employment spells, profiles."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})$")


@dataclass(frozen=True, order=True)
class Month:
    """A calendar month. Ordered, hashable, validated at construction."""

    year: int
    month: int

    def __post_init__(self) -> None:
        if not 1 <= self.month <= 12:
            raise ValueError(f"month out of range 1..12: {self.month!r}")

    @property
    def index(self) -> int:
        """Months since year 0, usable for arithmetic."""
        return self.year * 12 + (self.month - 1)

    @classmethod
    def from_index(cls, idx: int) -> "Month":
        return cls(idx // 12, idx % 12 + 1)

    @classmethod
    def parse(cls, text: str) -> "Month":
        m = _MONTH_RE.match(text.strip())
        if m is None:
            raise ValueError(f"not a YYYY-MM month: {text!r}")
        return cls(int(m.group(1)), int(m.group(2)))

    def plus(self, months: int) -> "Month":
        return Month.from_index(self.index + months)

    def __str__(self) -> str:
        return f"{self.year:04d}-{self.month:02d}"


@dataclass(frozen=True)
class TransitionRecord:
    """One member's job change: they left ``from_firm`` and started at ``to_firm``.

    Self-loops (from_firm == to_firm) are legal here and dropped when the
    network is built.
    """

    member_id: str
    from_firm: str
    to_firm: str
    start_month: Month


@dataclass(frozen=True)
class EmploymentSpell:
    """A member's tenure at one firm; ``end_month=None`` means still employed."""

    member_id: str
    firm: str
    start_month: Month
    end_month: Month | None = None

    def __post_init__(self) -> None:
        if self.end_month is not None and self.end_month < self.start_month:
            raise ValueError(
                f"spell ends before it starts: {self.start_month} > {self.end_month}"
            )

    def covers(self, t: Month) -> bool:
        if t < self.start_month:
            return False
        return self.end_month is None or t <= self.end_month


@dataclass(frozen=True)
class MemberProfile:
    """Self-reported member attributes; empty strings mean not reported."""

    member_id: str
    region: str = ""
    industry: str = ""
    degree: str = ""
    skills: tuple[str, ...] = ()

    @property
    def has_degree(self) -> bool:
        return bool(self.degree.strip())


@dataclass
class IngestReport:
    """Row-level rejections collected while loading a delimited file.

    Rejections are never silent: every bad row is recorded with its line
    number and reason.
    """

    source: str = ""
    accepted: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)

    def reject(self, line_no: int, reason: str) -> None:
        self.rejected.append((line_no, reason))

    @property
    def n_rejected(self) -> int:
        return len(self.rejected)

    def as_dict(self) -> dict:
        return {
            "source": self.source,
            "accepted": self.accepted,
            "rejected": [
                {"line": line_no, "reason": reason} for line_no, reason in self.rejected
            ],
        }
