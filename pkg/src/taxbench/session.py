"""In-memory sessions: one table + taxonomy per session, an append-only
event log of mutations, background discovery jobs, and pending proposals.

The command vocabulary here is the single mutation language shared by the
HTTP service and the batch CLI; replaying a session's log against the same
upload reproduces the identical taxonomy.
"""

from __future__ import annotations

import secrets
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from . import dataset
from .dataset import Table
from .discovery import ConceptProposal, DiscoveryConfig, discover, resolve_proposal
from .errors import ConflictError, NotFoundError, ValidationError
from .taxonomy import Taxonomy, restriction_to_doc

WRITE_LOCK_TIMEOUT = 10.0

COMMAND_OPS = (
    "add_restriction",
    "combine",
    "merge",
    "find_intersections",
    "relabel",
    "delete",
    "patch_column",
)


@dataclass
class Job:
    id: str
    kind: str
    concept_id: str
    status: str = "queued"  # queued | running | done | failed
    progress: float = 0.0
    result: list[dict[str, Any]] | None = None
    error: str | None = None

    def to_doc(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind,
            "concept": self.concept_id,
            "status": self.status,
            "progress": round(self.progress, 4),
            "result": self.result,
            "error": self.error,
        }

    def advance(self, fraction: float) -> None:
        # progress is monotone nondecreasing
        self.progress = max(self.progress, min(1.0, fraction))


class Session:
    def __init__(self, table: Table, session_id: str | None = None, preview_cap: int = 50):
        self.id = session_id or secrets.token_urlsafe(16)
        self.table = table
        self.taxonomy = Taxonomy(table)
        self.proposals: dict[str, ConceptProposal] = {}
        self.jobs: dict[str, Job] = {}
        self.event_log: list[dict[str, Any]] = []
        self.preview_cap = preview_cap
        self._write_lock = threading.Lock()
        self._job_counter = 0

    # - locking -

    def write(self) -> "_WriteGuard":
        return _WriteGuard(self)

    # - events -

    def _record(self, command: Mapping[str, Any], result: Mapping[str, Any]) -> dict[str, Any]:
        event = {"seq": len(self.event_log), "command": dict(command), "result": dict(result)}
        self.event_log.append(event)
        return event

    # - commands -

    def apply_command(self, command: Mapping[str, Any]) -> dict[str, Any]:
        """Validate and apply one mutation; appends to the event log."""
        op = command.get("op")
        if op not in COMMAND_OPS:
            raise ValidationError(f"unknown command op: {op!r}")
        handler = getattr(self, f"_cmd_{op}")
        result = handler(command)
        self._record(command, result)
        return result

    def _resolve(self, ref: Any) -> str:
        if not isinstance(ref, str):
            raise ValidationError(f"expected a concept reference, got {ref!r}")
        return self.taxonomy.resolve_label(ref)

    def _cmd_add_restriction(self, command: Mapping[str, Any]) -> dict[str, Any]:
        parent = self._resolve(command.get("parent"))
        restrictions = command.get("restrictions")
        if not isinstance(restrictions, list) or not restrictions:
            raise ValidationError("add_restriction needs a nonempty 'restrictions' list")
        label = command.get("label") or "unnamed"
        cid = self.taxonomy.add_restriction_subconcept(parent, restrictions, label)
        concept = self.taxonomy.get(cid)
        return {
            "created": [cid],
            "extension_size": len(concept.extension),
            "empty_warning": concept.empty_warning,
        }

    def _cmd_combine(self, command: Mapping[str, Any]) -> dict[str, Any]:
        ids = [self._resolve(i) for i in command.get("ids", [])]
        kind = command.get("kind")
        label = command.get("label") or "unnamed"
        ref = command.get("reference_parent")
        ref_id = self._resolve(ref) if ref is not None else None
        cid = self.taxonomy.combine(ids, kind, label, reference_parent=ref_id)
        return {"created": [cid], "extension_size": len(self.taxonomy.extension(cid))}

    def _cmd_merge(self, command: Mapping[str, Any]) -> dict[str, Any]:
        ids = [self._resolve(i) for i in command.get("ids", [])]
        label = command.get("label") or "unnamed"
        cid = self.taxonomy.merge_concepts(ids, label)
        return {"created": [cid], "removed": ids, "extension_size": len(self.taxonomy.extension(cid))}

    def _cmd_find_intersections(self, command: Mapping[str, Any]) -> dict[str, Any]:
        ids = [self._resolve(i) for i in command.get("ids", [])]
        created = self.taxonomy.find_intersections(ids)
        return {"created": created}

    def _cmd_relabel(self, command: Mapping[str, Any]) -> dict[str, Any]:
        cid = self._resolve(command.get("concept"))
        label = command.get("label")
        if not label:
            raise ValidationError("relabel needs a nonempty 'label'")
        self.taxonomy.relabel(cid, label)
        return {"relabeled": cid}

    def _cmd_delete(self, command: Mapping[str, Any]) -> dict[str, Any]:
        cid = self._resolve(command.get("concept"))
        self.taxonomy.delete_concept(cid)
        return {"deleted": cid}

    def _cmd_patch_column(self, command: Mapping[str, Any]) -> dict[str, Any]:
        name = command.get("column")
        if not isinstance(name, str):
            raise ValidationError("patch_column needs a 'column' name")
        table = self.table
        if "kind" in command and command["kind"] is not None:
            table = dataset.set_column_kind(table, name, command["kind"])
        if "included" in command and command["included"] is not None:
            table = dataset.set_column_included(table, name, bool(command["included"]))
        # revalidate restrictions against the new kinds before swapping
        self.taxonomy.with_table(table)
        self.table = table
        meta = table.column(name)
        return {"column": name, "kind": meta.kind, "included": meta.included}

    # - discovery jobs -

    def start_discovery(self, concept_ref: str, config: DiscoveryConfig) -> Job:
        """Launch (or return the already-running) discovery job for a concept."""
        cid = self._resolve(concept_ref)
        for job in self.jobs.values():
            if job.concept_id == cid and job.status in ("queued", "running"):
                return job
        self._job_counter += 1
        job = Job(id=f"j{self._job_counter}", kind="discovery", concept_id=cid)
        self.jobs[job.id] = job
        snapshot = self.taxonomy.extension(cid)

        def run() -> None:
            job.status = "running"
            try:
                outcome = discover(
                    self.table,
                    snapshot,
                    config,
                    parent_concept=cid,
                    progress=job.advance,
                )
            except Exception as exc:  # job failures surface via polling
                job.error = str(exc)
                job.status = "failed"
                return
            with self.write():
                for pid in [
                    p.id for p in self.proposals.values()
                    if p.parent_concept == cid and p.status == "pending"
                ]:
                    del self.proposals[pid]
                for proposal in outcome.proposals:
                    self.proposals[proposal.id] = proposal
                job.result = [p.to_doc() for p in outcome.proposals]
                job.advance(1.0)
                job.status = "done"

        threading.Thread(target=run, daemon=True).start()
        return job

    def run_discovery_sync(self, concept_ref: str, config: DiscoveryConfig) -> Job:
        """Blocking variant used by the CLI; same registration semantics."""
        cid = self._resolve(concept_ref)
        self._job_counter += 1
        job = Job(id=f"j{self._job_counter}", kind="discovery", concept_id=cid, status="running")
        self.jobs[job.id] = job
        outcome = discover(
            self.table, self.taxonomy.extension(cid), config, parent_concept=cid, progress=job.advance
        )
        for pid in [
            p.id for p in self.proposals.values()
            if p.parent_concept == cid and p.status == "pending"
        ]:
            del self.proposals[pid]
        for proposal in outcome.proposals:
            self.proposals[proposal.id] = proposal
        job.result = [p.to_doc() for p in outcome.proposals]
        job.advance(1.0)
        job.status = "done"
        return job

    def get_job(self, job_id: str) -> Job:
        job = self.jobs.get(job_id)
        if job is None:
            raise NotFoundError(f"unknown job: {job_id!r}")
        return job

    def resolve(self, proposal_id: str, decision: str) -> str | None:
        """Accept/reject a pending proposal; acceptance is logged as the
        equivalent add_restriction command so replays skip retraining."""
        proposal = self.proposals.get(proposal_id)
        if proposal is None:
            raise NotFoundError(f"unknown proposal: {proposal_id!r}")
        cid = resolve_proposal(self.taxonomy, proposal, decision)
        if cid is not None:
            concept = self.taxonomy.get(cid)
            self._record(
                {
                    "op": "add_restriction",
                    "parent": proposal.parent_concept,
                    "restrictions": [restriction_to_doc(r) for r in proposal.restrictions],
                    "label": concept.label,
                    "origin": "discovery",
                },
                {"created": [cid], "extension_size": len(concept.extension)},
            )
        return cid

    # - views -

    def taxonomy_doc(self) -> dict[str, Any]:
        pending_by_concept: dict[str, int] = {}
        for p in self.proposals.values():
            if p.status == "pending":
                pending_by_concept[p.parent_concept] = pending_by_concept.get(p.parent_concept, 0) + 1
        concepts = []
        for concept in self.taxonomy.concepts.values():
            concepts.append(
                {
                    "id": concept.id,
                    "label": concept.label,
                    "parents": sorted(concept.parents),
                    "children": self.taxonomy.children(concept.id),
                    "extension_size": len(concept.extension),
                    "intension": concept.intension_strings(),
                    "empty_warning": concept.empty_warning,
                    "pending_proposals": pending_by_concept.get(concept.id, 0),
                }
            )
        return {"root": self.taxonomy.root_id, "concepts": concepts}

    def columns_doc(self) -> list[dict[str, Any]]:
        out = []
        for meta in self.table.columns:
            stats = meta.stats
            entry: dict[str, Any] = {
                "name": meta.name,
                "kind": meta.kind,
                "included": meta.included,
                "missing_count": stats.missing_count,
            }
            if meta.kind in ("numerical", "date"):
                entry.update(
                    minimum=dataset.format_cell(stats.minimum) if stats.minimum is not None else None,
                    maximum=dataset.format_cell(stats.maximum) if stats.maximum is not None else None,
                    mean=stats.mean,
                    std=stats.std,
                )
            else:
                entry.update(distinct_count=stats.distinct_count, value_counts=stats.value_counts)
            out.append(entry)
        return out


class _WriteGuard:
    """Serializes mutations; a held lock past the timeout means a writer
    conflict, reported as 409 by the service."""

    def __init__(self, session: Session):
        self.session = session

    def __enter__(self) -> Session:
        if not self.session._write_lock.acquire(timeout=WRITE_LOCK_TIMEOUT):
            raise ConflictError("another mutation is in progress")
        return self.session

    def __exit__(self, *exc_info: Any) -> None:
        self.session._write_lock.release()


class SessionStore:
    def __init__(self) -> None:
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, table: Table, preview_cap: int = 50) -> Session:
        session = Session(table, preview_cap=preview_cap)
        with self._lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise NotFoundError(f"unknown session: {session_id!r}")
        return session


def replay_log(table: Table, event_log: list[Mapping[str, Any]]) -> Session:
    """Rebuild a session by replaying a recorded event log against the same
    upload; discovery acceptances replay as their logged add_restriction."""
    session = Session(table)
    for event in event_log:
        session.apply_command(event["command"])
    return session
