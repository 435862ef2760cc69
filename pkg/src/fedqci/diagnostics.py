from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    """A finding about a topology or a use-case.

    ``code`` is stable and machine-readable, ``subject`` names the offending
    entity (link, node, country or use-case id) and ``witness`` optionally
    lists the node/link ids that demonstrate the finding (a path, a cut or a
    component).
    """

    code: str
    subject: str
    detail: str = ""
    witness: tuple[str, ...] = ()

    def __str__(self) -> str:
        text = f"{self.code}({self.subject})"
        if self.detail:
            text += f": {self.detail}"
        return text
