"""Data-minimization checks (R18): find personal data in table schemas and samples.

Field names are split into lowercase tokens and matched against the token
sequences in ``data/pii_tokens.json``; categories earlier in that file win.
Sampled cell values are matched against fixed shape tests. A finding is
suppressed when its category is part of the declared collection purpose or
its (database, table, field) triple is allowlisted.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import date, datetime, timezone
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Sequence

from gdprscan.model import (
    AllowlistEntry,
    Database,
    DataPolicy,
    Exposure,
    PiiCategory,
    RuleId,
)


class Evidence(str, Enum):
    FIELD_NAME_MATCH = "field_name_match"
    VALUE_PATTERN_MATCH = "value_pattern_match"
    BOTH = "both"


@dataclass(frozen=True)
class PiiFinding:
    database_id: str
    table_name: str
    field_name: str
    category: PiiCategory
    evidence: Evidence


_CAMEL = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+")


def tokenize(name: str) -> list[str]:
    """``"userEmailAddr"`` -> ``["user", "email", "addr"]``; also splits ``_``, ``-``, spaces, dots."""
    tokens = []
    for chunk in re.split(r"[^A-Za-z0-9]+", name):
        tokens.extend(t.lower() for t in _CAMEL.findall(chunk))
    return tokens


class PiiClassifier:
    def __init__(self, table: Sequence[tuple[PiiCategory, Sequence[Sequence[str]]]]):
        self.table = [(cat, [tuple(s) for s in seqs]) for cat, seqs in table]

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "PiiClassifier":
        return cls(
            [
                (PiiCategory(entry["category"]), [[t.lower() for t in seq] for seq in entry["sequences"]])
                for entry in doc["categories"]
            ]
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "PiiClassifier":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def classify_field_name(self, name: str) -> Optional[PiiCategory]:
        tokens = tokenize(name)
        for category, sequences in self.table:
            for seq in sequences:
                n = len(seq)
                if any(tuple(tokens[i : i + n]) == seq for i in range(len(tokens) - n + 1)):
                    return category
        return None


@lru_cache(maxsize=1)
def default_classifier() -> PiiClassifier:
    text = resources.files("gdprscan").joinpath("data/pii_tokens.json").read_text(encoding="utf-8")
    return PiiClassifier.from_dict(json.loads(text))


def classify_field_name(name: str) -> Optional[PiiCategory]:
    return default_classifier().classify_field_name(name)


_EMAIL = re.compile(r"^[A-Za-z0-9._%+'-]+@[A-Za-z0-9-]+(\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}$")
_DOTTED_QUAD = re.compile(r"^(\d{1,3})\.(\d{1,3})\.(\d{1,3})\.(\d{1,3})$")
_PHONE_SHAPE = re.compile(r"^\+?[0-9 ().-]+$")
_ISO_DATE = re.compile(r"^(\d{4})-(\d{2})-(\d{2})$")


def _is_birth_date(value: str, today: date) -> bool:
    m = _ISO_DATE.match(value)
    if not m:
        return False
    try:
        parsed = date(int(m.group(1)), int(m.group(2)), int(m.group(3)))
    except ValueError:
        return False
    return 1900 <= parsed.year <= today.year


def classify_value(value: str, today: Optional[date] = None) -> Optional[PiiCategory]:
    """Shape tests in order: email, IPv4, ISO birth date, phone."""
    v = value.strip()
    if _EMAIL.match(v):
        return PiiCategory.EMAIL
    quad = _DOTTED_QUAD.match(v)
    if quad:
        # Dotted quads are never phone numbers, valid or not.
        return PiiCategory.IP_ADDRESS if all(int(o) <= 255 for o in quad.groups()) else None
    if _is_birth_date(v, today or datetime.now(timezone.utc).date()):
        return PiiCategory.BIRTH_DATE
    if _PHONE_SHAPE.match(v):
        digits = re.sub(r"\D", "", v)
        if 7 <= len(digits) <= 15:
            return PiiCategory.PHONE
    return None


def find_pii(
    db: Database, classifier: Optional[PiiClassifier] = None, today: Optional[date] = None
) -> list[PiiFinding]:
    """Unfiltered findings, one per (table, field, category)."""
    classifier = classifier or default_classifier()
    findings = []
    for table in db.tables:
        columns: dict[str, list[str]] = {}
        for row in table.sampled_rows:
            for k, v in row:
                columns.setdefault(k, []).append(v)
        for fd in table.fields:
            by_name = classifier.classify_field_name(fd.name)
            by_value: list[PiiCategory] = []
            for cell in columns.get(fd.name, ()):
                cat = classify_value(cell, today)
                if cat is not None and cat not in by_value:
                    by_value.append(cat)
            if by_name is not None:
                ev = Evidence.BOTH if by_name in by_value else Evidence.FIELD_NAME_MATCH
                findings.append(PiiFinding(db.ref.id, table.name, fd.name, by_name, ev))
            for cat in by_value:
                if cat is not by_name:
                    findings.append(PiiFinding(db.ref.id, table.name, fd.name, cat, Evidence.VALUE_PATTERN_MATCH))
    return findings


def eval_data_minimization(
    db: Database,
    policy: DataPolicy,
    classifier: Optional[PiiClassifier] = None,
    today: Optional[date] = None,
) -> list[Exposure]:
    out = []
    for f in find_pii(db, classifier, today):
        if f.category in policy.permitted_categories:
            continue
        if policy.allows(f.database_id, f.table_name, f.field_name):
            continue
        out.append(
            Exposure.create(
                RuleId.R18,
                db.ref,
                f"field {f.table_name}.{f.field_name} holds {f.category.value} "
                f"outside the declared purpose (evidence: {f.evidence.value})",
                f"{f.table_name}/{f.field_name}/{f.category.value}",
            )
        )
    return out


def policy_from_dict(doc: dict[str, Any]) -> DataPolicy:
    if not isinstance(doc, dict):
        raise ValueError("policy document must be an object")
    cats = doc.get("permitted_categories", [])
    entries = doc.get("allowlist", [])
    if not isinstance(cats, list) or not isinstance(entries, list):
        raise ValueError("permitted_categories and allowlist must be arrays")
    try:
        permitted = frozenset(PiiCategory(c) for c in cats)
    except ValueError as exc:
        raise ValueError(f"unknown personal data category: {exc}") from None
    allow = []
    for i, e in enumerate(entries):
        if not isinstance(e, dict) or set(e) != {"database_id", "table_name", "field_name"}:
            raise ValueError(f"allowlist/{i}: expected {{database_id, table_name, field_name}}")
        if not all(isinstance(v, str) for v in e.values()):
            raise ValueError(f"allowlist/{i}: components must be strings")
        allow.append(AllowlistEntry(e["database_id"], e["table_name"], e["field_name"]))
    return DataPolicy(permitted, frozenset(allow))


def policy_to_dict(policy: DataPolicy) -> dict[str, Any]:
    return {
        "permitted_categories": sorted(c.value for c in policy.permitted_categories),
        "allowlist": [
            {"database_id": e.database_id, "table_name": e.table_name, "field_name": e.field_name}
            for e in sorted(policy.allowlist, key=lambda e: (e.database_id, e.table_name, e.field_name))
        ],
    }


def load_policy(path: str | Path) -> DataPolicy:
    return policy_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
