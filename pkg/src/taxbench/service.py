"""HTTP session API: dataset upload, column configuration, taxonomy
mutations, discovery jobs with polling, proposal resolution, export, stats.

Every endpoint is a thin wrapper over the session/taxonomy modules; request
bodies are JSON (the CSV payload travels as a string field). Mutations are
serialized per session; discovery runs in background threads over immutable
extension snapshots and never mutates the taxonomy itself.
"""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse, PlainTextResponse
from pydantic import BaseModel, Field

from . import dataset, owl, stats
from .discovery import DiscoveryConfig
from .errors import ConflictError, NotFoundError, TaxbenchError, ValidationError
from .session import Session, SessionStore

API_VERSION = "1"


class CreateSessionBody(BaseModel):
    content: str
    format: str = "csv"
    name: str | None = None
    columns: dict[str, dict[str, Any]] | None = None
    preview_cap: int = Field(default=50, ge=0, le=1000)


class PatchColumnBody(BaseModel):
    column: str
    kind: str | None = None
    included: bool | None = None


class CommandBody(BaseModel):
    model_config = {"extra": "allow"}
    op: str


class DiscoverBody(BaseModel):
    train: dict[str, Any] = Field(default_factory=dict)
    ignore_columns: list[str] = Field(default_factory=list)
    max_proposals: int = 16


class ResolveBody(BaseModel):
    decision: str


def create_app(store: SessionStore | None = None) -> FastAPI:
    app = FastAPI(title="taxbench", version=API_VERSION)
    app.state.store = store or SessionStore()

    @app.middleware("http")
    async def version_header(request: Request, call_next):
        response: Response = await call_next(request)
        response.headers["X-API-Version"] = API_VERSION
        return response

    @app.exception_handler(TaxbenchError)
    async def taxbench_error(request: Request, exc: TaxbenchError):
        if isinstance(exc, NotFoundError):
            status = 404
        elif isinstance(exc, ConflictError):
            status = 409
        else:
            status = 422
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    def get_session(session_id: str) -> Session:
        return app.state.store.get(session_id)

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> dict[str, Any]:
        options = dataset.LoadOptions(name=body.name, columns=body.columns)
        table = dataset.load_table(body.content.encode("utf-8"), body.format, options)
        session = app.state.store.create(table, preview_cap=body.preview_cap)
        return {
            "session_id": session.id,
            "dataset": table.name,
            "row_count": table.row_count,
            "columns": session.columns_doc(),
            "taxonomy": session.taxonomy_doc(),
        }

    @app.get("/sessions/{session_id}")
    def get_state(session_id: str) -> dict[str, Any]:
        session = get_session(session_id)
        return {
            "session_id": session.id,
            "dataset": session.table.name,
            "row_count": session.table.row_count,
            "columns": session.columns_doc(),
            "taxonomy": session.taxonomy_doc(),
            "proposals": [p.to_doc() for p in session.proposals.values()],
            "jobs": [j.to_doc() for j in session.jobs.values()],
        }

    @app.get("/sessions/{session_id}/columns")
    def get_columns(session_id: str) -> list[dict[str, Any]]:
        return get_session(session_id).columns_doc()

    @app.patch("/sessions/{session_id}/columns")
    def patch_column(session_id: str, body: PatchColumnBody) -> dict[str, Any]:
        session = get_session(session_id)
        command = {"op": "patch_column", "column": body.column}
        if body.kind is not None:
            command["kind"] = body.kind
        if body.included is not None:
            command["included"] = body.included
        with session.write():
            return session.apply_command(command)

    @app.get("/sessions/{session_id}/rows")
    def preview_rows(session_id: str, limit: int = 10) -> dict[str, Any]:
        session = get_session(session_id)
        limit = max(0, min(limit, session.preview_cap))
        names = session.table.column_names
        rows = [
            dict(zip(names, (dataset.format_cell(c) for c in row)))
            for row in session.table.rows[:limit]
        ]
        return {"rows": rows, "limit": limit, "total": session.table.row_count}

    @app.post("/sessions/{session_id}/commands")
    def run_command(session_id: str, body: CommandBody) -> dict[str, Any]:
        session = get_session(session_id)
        with session.write():
            result = session.apply_command(body.model_dump())
        return {"result": result, "taxonomy": session.taxonomy_doc()}

    @app.get("/sessions/{session_id}/concepts/{concept_id}")
    def concept_detail(session_id: str, concept_id: str) -> dict[str, Any]:
        session = get_session(session_id)
        concept = session.taxonomy.get(session.taxonomy.resolve_label(concept_id))
        rows = concept.extension
        column_stats = []
        for meta in session.table.columns:
            st = dataset.column_stats(session.table, meta.name, rows)
            entry: dict[str, Any] = {
                "name": meta.name,
                "kind": meta.kind,
                "missing_count": st.missing_count,
            }
            if meta.kind in ("numerical", "date"):
                entry.update(
                    minimum=dataset.format_cell(st.minimum) if st.minimum is not None else None,
                    maximum=dataset.format_cell(st.maximum) if st.maximum is not None else None,
                    mean=st.mean,
                    std=st.std,
                )
            else:
                entry.update(distinct_count=st.distinct_count, value_counts=st.value_counts)
            column_stats.append(entry)
        return {
            "id": concept.id,
            "label": concept.label,
            "parents": sorted(concept.parents),
            "children": session.taxonomy.children(concept.id),
            "extension_size": len(rows),
            "intension": concept.intension_strings(),
            "empty_warning": concept.empty_warning,
            "column_stats": column_stats,
        }

    @app.post("/sessions/{session_id}/concepts/{concept_id}/discover", status_code=202)
    def start_discovery(session_id: str, concept_id: str, body: DiscoverBody) -> dict[str, Any]:
        session = get_session(session_id)
        config = DiscoveryConfig.from_doc(body.model_dump())
        job = session.start_discovery(concept_id, config)
        return {"job_id": job.id, "status": job.status}

    @app.get("/sessions/{session_id}/jobs/{job_id}")
    def get_job(session_id: str, job_id: str) -> dict[str, Any]:
        return get_session(session_id).get_job(job_id).to_doc()

    @app.post("/sessions/{session_id}/proposals/{proposal_id}")
    def resolve(session_id: str, proposal_id: str, body: ResolveBody) -> dict[str, Any]:
        session = get_session(session_id)
        with session.write():
            cid = session.resolve(proposal_id, body.decision)
            proposal = session.proposals[proposal_id]
            return {
                "concept": cid,
                "proposal": proposal.to_doc(),
                "taxonomy": session.taxonomy_doc(),
            }

    @app.get("/sessions/{session_id}/export")
    def export(
        session_id: str,
        format: str = "turtle",
        include_individuals: bool = True,
        base_iri: str = "http://example.org/taxonomy",
    ) -> PlainTextResponse:
        session = get_session(session_id)
        if format != "turtle":
            raise ValidationError(f"unsupported export format: {format!r}")
        options = owl.ExportOptions(base_iri=base_iri, include_individuals=include_individuals)
        document = owl.export_turtle(session.taxonomy, session.table, options)
        return PlainTextResponse(document, media_type="text/turtle; charset=utf-8")

    @app.get("/sessions/{session_id}/stats")
    def get_stats(session_id: str, format: str = "json") -> Any:
        session = get_session(session_id)
        bundle = stats.compute_stats(owl.skeleton_from_taxonomy(session.taxonomy))
        if format == "csv":
            return PlainTextResponse(bundle.to_csv(), media_type="text/csv; charset=utf-8")
        if format == "text":
            return PlainTextResponse(bundle.to_text(), media_type="text/plain; charset=utf-8")
        if format != "json":
            raise ValidationError(f"unsupported stats format: {format!r}")
        return bundle.as_dict()

    @app.get("/sessions/{session_id}/log")
    def get_log(session_id: str) -> dict[str, Any]:
        return {"events": get_session(session_id).event_log}

    return app


app = create_app()
