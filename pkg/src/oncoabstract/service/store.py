"""Durable curation state: append-only JSONL event log + materialized view.

Every write is appended and fsynced before it is acknowledged; the in-memory
view is rebuilt by replaying the log at startup, so killing the process
after any acknowledged response loses nothing.  Replaying an event suffix is
a no-op because event ids are idempotency keys.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field

from ..corpus import CorpusBundle

STATUS_PENDING = "pending"
STATUS_ACCEPTED = "accepted"
STATUS_CORRECTED = "corrected"

VERDICT_ACCEPT = "accept"
VERDICT_CORRECT = "correct"


class UnknownItemError(KeyError):
    pass


class InvalidVerdictError(ValueError):
    pass


@dataclass
class CurationItem:
    extraction_id: str
    patient_id: str
    attribute: str
    predicted_class: str
    top5: list  # [(label, prob)]
    rationale: dict
    status: str = STATUS_PENDING
    corrected_class: str | None = None
    reviewer_id: str | None = None
    reviewed_at: float | None = None

    def to_dict(self) -> dict:
        return {
            "extraction_id": self.extraction_id,
            "patient_id": self.patient_id,
            "attribute": self.attribute,
            "predicted_class": self.predicted_class,
            "top5": [{"label": l, "prob": p} for l, p in self.top5],
            "rationale": self.rationale,
            "status": self.status,
            "corrected_class": self.corrected_class,
            "reviewer_id": self.reviewer_id,
            "reviewed_at": self.reviewed_at,
        }


@dataclass
class PredictionRecord:
    """One precomputed extraction, as loaded from inference output."""

    patient_id: str
    attribute: str
    predicted_class: str
    top5: list
    rationale: dict

    @property
    def extraction_id(self) -> str:
        return f"{self.patient_id}:{self.attribute}"


class EventLog:
    """Append-only JSONL file; the single serialized writer in the service."""

    def __init__(self, path: str):
        self.path = path
        self._lock = threading.Lock()
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        self._fh = open(path, "a", encoding="utf-8")

    def append(self, event: dict) -> None:
        line = json.dumps(event, ensure_ascii=False, separators=(",", ":"))
        with self._lock:
            self._fh.write(line + "\n")
            self._fh.flush()
            os.fsync(self._fh.fileno())

    def close(self) -> None:
        self._fh.close()

    @staticmethod
    def replay(path: str):
        if not os.path.exists(path):
            return
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    yield json.loads(line)


class CurationStore:
    """Materialized curation state over a corpus plus precomputed inference."""

    def __init__(self, bundle: CorpusBundle, predictions: list[PredictionRecord],
                 log_path: str):
        self.bundle = bundle
        self.items: dict[str, CurationItem] = {}
        for rec in sorted(predictions, key=lambda r: (r.patient_id, r.attribute)):
            self.items[rec.extraction_id] = CurationItem(
                extraction_id=rec.extraction_id, patient_id=rec.patient_id,
                attribute=rec.attribute, predicted_class=rec.predicted_class,
                top5=list(rec.top5), rationale=rec.rationale)
        self.seen_events: set[str] = set()
        self.event_counts: dict[str, int] = {}
        self.reviewer_verdicts: dict[str, int] = {}
        self._write_lock = threading.Lock()
        for event in EventLog.replay(log_path):
            self._apply(event)
        self.log = EventLog(log_path)

    # ------------------------------------------------------------------

    def _apply(self, event: dict) -> CurationItem | None:
        eid = event["event_id"]
        if eid in self.seen_events:
            return None
        self.seen_events.add(eid)
        self.event_counts[event["kind"]] = self.event_counts.get(event["kind"], 0) + 1
        if event["kind"] != "verdict":
            return None
        payload = event["payload"]
        item = self.items.get(payload["extraction_id"])
        if item is None:
            return None
        if payload["verdict"] == VERDICT_ACCEPT:
            item.status = STATUS_ACCEPTED
            item.corrected_class = None
        else:
            item.status = STATUS_CORRECTED
            item.corrected_class = payload["corrected_label"]
        item.reviewer_id = payload.get("reviewer_id")
        item.reviewed_at = event.get("ts")
        reviewer = payload.get("reviewer_id") or "anonymous"
        self.reviewer_verdicts[reviewer] = self.reviewer_verdicts.get(reviewer, 0) + 1
        return item

    def validate_verdict(self, extraction_id: str, verdict: str,
                         corrected_label: str | None) -> CurationItem:
        item = self.items.get(extraction_id)
        if item is None:
            raise UnknownItemError(extraction_id)
        if verdict not in (VERDICT_ACCEPT, VERDICT_CORRECT):
            raise InvalidVerdictError(f"verdict must be accept or correct, got {verdict!r}")
        if verdict == VERDICT_CORRECT:
            if corrected_label is None:
                raise InvalidVerdictError("corrected_label is required when verdict=correct")
            space = self.bundle.label_spaces[item.attribute]
            if corrected_label not in space.classes:
                raise InvalidVerdictError(
                    f"label {corrected_label!r} is outside the {item.attribute} label space")
        elif corrected_label is not None:
            raise InvalidVerdictError("corrected_label is only allowed when verdict=correct")
        return item

    def submit_verdict(self, extraction_id: str, event_id: str, verdict: str,
                       corrected_label: str | None, reviewer_id: str | None) -> CurationItem:
        """Validate, durably append, then apply; duplicate event ids no-op."""
        item = self.validate_verdict(extraction_id, verdict, corrected_label)
        with self._write_lock:
            if event_id in self.seen_events:
                return item
            event = {
                "event_id": event_id,
                "kind": "verdict",
                "payload": {
                    "extraction_id": extraction_id,
                    "verdict": verdict,
                    "corrected_label": corrected_label,
                    "reviewer_id": reviewer_id,
                },
                "ts": time.time(),
            }
            self.log.append(event)
            return self._apply(event)

    def record_inference(self, event_id: str, payload: dict) -> None:
        with self._write_lock:
            if event_id in self.seen_events:
                return
            event = {"event_id": event_id, "kind": "inference",
                     "payload": payload, "ts": time.time()}
            self.log.append(event)
            self._apply(event)

    # ------------------------------------------------------------------

    def queue(self, attribute: str | None = None, status: str | None = None,
              page: int = 0, page_size: int = 50):
        rows = [i for i in self.items.values()
                if (attribute is None or i.attribute == attribute)
                and (status is None or i.status == status)]
        rows.sort(key=lambda i: (i.patient_id, i.attribute))
        total = len(rows)
        start = page * page_size
        return rows[start:start + page_size], total

    def patient_items(self, patient_id: str) -> list[CurationItem]:
        rows = [i for i in self.items.values() if i.patient_id == patient_id]
        rows.sort(key=lambda i: i.attribute)
        return rows

    def stats(self) -> dict:
        by_status = {STATUS_PENDING: 0, STATUS_ACCEPTED: 0, STATUS_CORRECTED: 0}
        by_attribute: dict[str, dict] = {}
        for item in self.items.values():
            by_status[item.status] += 1
            attr = by_attribute.setdefault(item.attribute, {
                STATUS_PENDING: 0, STATUS_ACCEPTED: 0, STATUS_CORRECTED: 0})
            attr[item.status] += 1
        reviewed = by_status[STATUS_ACCEPTED] + by_status[STATUS_CORRECTED]
        return {
            "by_status": by_status,
            "by_attribute": by_attribute,
            "correction_rate": (by_status[STATUS_CORRECTED] / reviewed) if reviewed else 0.0,
            "reviewer_throughput": dict(sorted(self.reviewer_verdicts.items())),
            "total_events": sum(self.event_counts.values()),
        }

    def export_rows(self):
        for item in sorted(self.items.values(), key=lambda i: (i.patient_id, i.attribute)):
            if item.status == STATUS_PENDING:
                continue
            yield {
                "patient_id": item.patient_id,
                "attribute": item.attribute,
                "final_label": (item.corrected_class if item.status == STATUS_CORRECTED
                                else item.predicted_class),
                "source": item.status,
                "reviewer_id": item.reviewer_id,
                "reviewed_at": item.reviewed_at,
            }

    def close(self) -> None:
        self.log.close()
