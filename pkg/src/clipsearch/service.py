"""HTTP service: voice transcription, caption search, and media playback.

Endpoints (see README for payload examples):

- ``POST /api/transcribe``  audio body -> ``{"transcript": str}``
- ``GET  /api/search?q=&k=`` -> ``[{"clip", "caption", "score", "approx"}]``
- ``POST /api/query``       audio body -> ``{"transcript", "results"}``
- ``GET  /media/<clip>``    video bytes, honoring single byte ranges

The caption index is loaded once and never mutated by requests, so
concurrent searches are consistent; swapping ``app.state.index`` wholesale
is the supported reload path.
"""

from __future__ import annotations

import json
import mimetypes
import os
from dataclasses import dataclass
from pathlib import Path, PurePosixPath
from typing import Protocol

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .captioning import CaptionIndex
from .errors import ClipSearchError, InvalidInputError, InvalidQueryError
from .meteor import DEFAULT_CONFIG, MatcherConfig
from .search import DEFAULT_TOP_K, SearchResult, load_index, rank

MOCK_TRANSCRIPT_HEADER = "x-mock-transcript"


class SpeechToText(Protocol):
    """Voice transcription seam; must be safe for concurrent calls."""

    def transcribe(self, audio: bytes, mime: str) -> str: ...


class EchoSpeechToText:
    """Test/demo backend: ignores the audio and returns a canned transcript.

    When this backend is active, requests may override the canned text with
    the ``X-Mock-Transcript`` header.
    """

    def __init__(self, canned: str = ""):
        self.canned = canned

    def transcribe(self, audio: bytes, mime: str) -> str:
        return self.canned


class RemoteSpeechToText:
    """Forwards audio to an external speech-to-text HTTP service."""

    def __init__(self, url: str, timeout: float = 60.0):
        self.url = url
        self.timeout = timeout

    def transcribe(self, audio: bytes, mime: str) -> str:
        import requests

        resp = requests.post(
            self.url, data=audio, headers={"Content-Type": mime}, timeout=self.timeout
        )
        resp.raise_for_status()
        body = resp.json()
        if not isinstance(body, dict) or not isinstance(body.get("transcript"), str):
            raise ClipSearchError(f"speech service returned malformed body: {body!r}")
        return body["transcript"]


@dataclass
class ServiceConfig:
    index_path: str
    media_root: str
    host: str = "127.0.0.1"
    port: int = 8000
    k_default: int = DEFAULT_TOP_K
    tls_cert: str | None = None
    tls_key: str | None = None
    stt_backend: str = "mock"
    stt_url: str | None = None
    mock_transcript: str = ""
    static_root: str | None = None

    def __post_init__(self) -> None:
        if self.k_default < 1:
            raise InvalidInputError(f"k_default must be >= 1, got {self.k_default}")
        if not Path(self.media_root).is_dir():
            raise InvalidInputError(f"media_root is not a directory: {self.media_root}")
        if self.stt_backend not in ("mock", "remote"):
            raise InvalidInputError(f"unknown STT backend {self.stt_backend!r}")
        if self.stt_backend == "remote" and not self.stt_url:
            raise InvalidInputError("stt_backend 'remote' requires stt_url")

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None) -> "ServiceConfig":
        env = dict(os.environ if env is None else env)
        return cls(
            index_path=env["INDEX_PATH"],
            media_root=env["MEDIA_ROOT"],
            host=env.get("HOST", "127.0.0.1"),
            port=int(env.get("PORT", "8000")),
            k_default=int(env.get("K_DEFAULT", str(DEFAULT_TOP_K))),
            tls_cert=env.get("TLS_CERT"),
            tls_key=env.get("TLS_KEY"),
            stt_backend=env.get("STT_BACKEND", "mock"),
            stt_url=env.get("STT_URL"),
            mock_transcript=env.get("MOCK_TRANSCRIPT", ""),
            static_root=env.get("STATIC_ROOT"),
        )


def build_speech_client(config: ServiceConfig) -> SpeechToText:
    if config.stt_backend == "remote":
        assert config.stt_url is not None
        return RemoteSpeechToText(config.stt_url)
    return EchoSpeechToText(config.mock_transcript)


def results_payload(results: list[SearchResult]) -> list[dict]:
    return [
        {
            "clip": r.clip_path,
            "caption": r.caption,
            "score": r.score,
            "approx": r.breakdown.approx,
        }
        for r in results
    ]


def serialize_results(results: list[SearchResult]) -> bytes:
    """The one search serializer; the endpoint and the CLI both emit these bytes."""
    return json.dumps(results_payload(results), ensure_ascii=False, separators=(",", ":")).encode(
        "utf-8"
    )


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse({"error": message}, status_code=status)


def parse_range(header: str | None, size: int) -> tuple[int, int] | None | str:
    """Interpret a Range header against a file of ``size`` bytes.

    Returns (start, end) inclusive for a satisfiable single range, None when
    the header is absent/malformed/multi-range (serve the full body, per RFC
    7233 a server may ignore such headers), or "unsatisfiable".
    """
    if not header or not header.startswith("bytes="):
        return None
    spec = header[len("bytes=") :].strip()
    if "," in spec or "-" not in spec:
        return None
    first, _, last = spec.partition("-")
    first, last = first.strip(), last.strip()
    try:
        if first == "" and last != "":  # suffix: last N bytes
            n = int(last)
            if n <= 0:
                return "unsatisfiable"
            start = max(0, size - n)
            return (start, size - 1) if size > 0 else "unsatisfiable"
        if first != "":
            start = int(first)
            end = int(last) if last != "" else size - 1
            if start < 0 or (last != "" and end < start):
                return None
            if start >= size:
                return "unsatisfiable"
            return start, min(end, size - 1)
    except ValueError:
        return None
    return None


def create_app(
    config: ServiceConfig,
    index: CaptionIndex | None = None,
    stt: SpeechToText | None = None,
    matcher: MatcherConfig = DEFAULT_CONFIG,
) -> FastAPI:
    """Assemble the application around an immutable caption index."""
    app = FastAPI(title="clipsearch")
    app.state.index = load_index(config.index_path) if index is None else index
    app.state.stt = build_speech_client(config) if stt is None else stt
    app.state.config = config
    media_root = Path(config.media_root).resolve()

    def transcribe_body(request: Request, audio: bytes) -> str:
        stt_client = app.state.stt
        override = request.headers.get(MOCK_TRANSCRIPT_HEADER)
        if override is not None and isinstance(stt_client, EchoSpeechToText):
            return override
        mime = request.headers.get("content-type", "application/octet-stream")
        return stt_client.transcribe(audio, mime)

    @app.post("/api/transcribe")
    async def api_transcribe(request: Request):
        audio = await request.body()
        if not audio:
            return _error(400, "empty audio body")
        try:
            transcript = transcribe_body(request, audio)
        except Exception as exc:
            return _error(502, f"speech-to-text failed: {exc}")
        return {"transcript": transcript}

    @app.get("/api/search")
    def api_search(q: str | None = None, k: int | None = None):
        if q is None:
            return _error(400, "missing query parameter 'q'")
        k = config.k_default if k is None else k
        try:
            results = rank(q, app.state.index, k=k, config=matcher)
        except InvalidQueryError:
            return _error(400, "query is empty after tokenization")
        except InvalidInputError as exc:
            return _error(400, str(exc))
        return Response(content=serialize_results(results), media_type="application/json")

    @app.post("/api/query")
    async def api_query(request: Request):
        audio = await request.body()
        if not audio:
            return _error(400, "empty audio body")
        try:
            transcript = transcribe_body(request, audio)
        except Exception as exc:
            return _error(502, f"speech-to-text failed: {exc}")
        try:
            results = rank(transcript, app.state.index, k=config.k_default, config=matcher)
        except InvalidQueryError:
            results = []
        return {"transcript": transcript, "results": results_payload(results)}

    @app.get("/media/{clip_path:path}")
    def media(clip_path: str, request: Request):
        if clip_path.startswith("/") or ".." in PurePosixPath(clip_path).parts:
            return _error(403, "path traversal rejected")
        target = (media_root / clip_path).resolve()
        if not target.is_relative_to(media_root):
            return _error(403, "path traversal rejected")
        if not target.is_file():
            return _error(404, "no such clip")
        size = target.stat().st_size
        content_type = mimetypes.guess_type(target.name)[0] or "application/octet-stream"
        headers = {"Accept-Ranges": "bytes"}

        span = parse_range(request.headers.get("range"), size)
        if span == "unsatisfiable":
            headers["Content-Range"] = f"bytes */{size}"
            return Response(status_code=416, headers=headers)
        with open(target, "rb") as f:
            if span is None:
                body = f.read()
                return Response(content=body, media_type=content_type, headers=headers)
            start, end = span
            f.seek(start)
            body = f.read(end - start + 1)
        headers["Content-Range"] = f"bytes {start}-{end}/{size}"
        return Response(status_code=206, content=body, media_type=content_type, headers=headers)

    if config.static_root:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=config.static_root, html=True), name="static")
    else:

        @app.get("/")
        def root():
            return {
                "service": "clipsearch",
                "endpoints": ["/api/transcribe", "/api/search", "/api/query", "/media/{clip}"],
            }

    return app


def run_server(config: ServiceConfig, app: FastAPI | None = None) -> None:
    """Serve with uvicorn; TLS is enabled when cert and key paths are set."""
    import uvicorn

    uvicorn.run(
        create_app(config) if app is None else app,
        host=config.host,
        port=config.port,
        ssl_certfile=config.tls_cert,
        ssl_keyfile=config.tls_key,
    )
