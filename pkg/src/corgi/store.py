"""Append-only session persistence.

One JSON record per line. Learned rules reload only into their own session
lineage, never the shared base knowledge base. A truncated or corrupt final
record is skipped with a warning instead of failing the whole load.
"""

from __future__ import annotations

import json
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple


@dataclass
class SessionRecord:
    session_id: str
    status: str
    transcript: List[Tuple[str, str]]
    learned_rules: List[str]
    created_at: float = field(default_factory=time.time)

    def to_json(self) -> str:
        return json.dumps({
            "session_id": self.session_id, "status": self.status,
            "transcript": [[s, t] for s, t in self.transcript],
            "learned_rules": self.learned_rules,
            "created_at": self.created_at,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "SessionRecord":
        raw = json.loads(text)
        return cls(session_id=raw["session_id"], status=raw["status"],
                   transcript=[(s, t) for s, t in raw["transcript"]],
                   learned_rules=list(raw["learned_rules"]),
                   created_at=raw.get("created_at", 0.0))


def persist_session(record: SessionRecord, store_path) -> None:
    path = Path(store_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(record.to_json() + "\n")


def load_sessions(store_path) -> List[SessionRecord]:
    path = Path(store_path)
    if not path.exists():
        return []
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(SessionRecord.from_json(line))
            except (json.JSONDecodeError, KeyError) as exc:
                warnings.warn(f"skipping corrupt session record at line "
                              f"{lineno}: {exc}", stacklevel=2)
    return records


def replay_record(base_kb, record: SessionRecord, guide_factory=None,
                  cfg=None, n: int = 3):
    """Re-run a stored session's user turns against a fresh overlay.

    The rebuilt session re-derives the record's learned rules inside its own
    lineage; the base knowledge base is never touched. Returns the replayed
    session, whose status should match the stored one under the same config
    and model.
    """
    from .dialog import start_session, user_answer

    user_lines = [text for speaker, text in record.transcript
                  if speaker == "user"]
    if not user_lines:
        raise ValueError("record has no user turns to replay")
    session, action = start_session(base_kb, user_lines[0],
                                    guide_factory=guide_factory, cfg=cfg, n=n)
    for line in user_lines[1:]:
        if session.status != "awaiting_user":
            break
        action = user_answer(session, line)
    return session
