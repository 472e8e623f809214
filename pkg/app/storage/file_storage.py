import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError

from app.core.config import Settings, caps_fingerprint, get_settings
from app.models.schemas import CacheEnvelope

logger = logging.getLogger(__name__)


class FileStorage:
    """以內容定址的 JSON 結果快取：一個鍵一個檔案，寫入採暫存檔再改名。"""

    def __init__(self, base_dir: Optional[str | Path] = None, settings: Optional[Settings] = None) -> None:
        self.settings = settings or get_settings()
        self.base_dir = Path(base_dir or self.settings.cache_dir)

    def make_key(self, kind: str, expr: str, item: str, settings: Optional[Settings] = None) -> str:
        cfg = settings or self.settings
        raw = json.dumps(
            {"kind": kind, "expr": expr, "item": item, "caps": caps_fingerprint(cfg)},
            sort_keys=True,
        )
        return hashlib.sha256(raw.encode("utf-8")).hexdigest()

    def path_for(self, key: str) -> Path:
        return self.base_dir / key[:2] / f"{key}.json"

    def store(self, kind: str, key: str, payload: Dict[str, Any], settings: Optional[Settings] = None) -> Path:
        cfg = settings or self.settings
        envelope = CacheEnvelope(
            key=key,
            kind=kind,
            engine_version=cfg.engine_version,
            caps_hash=caps_fingerprint(cfg),
            payload=payload,
        )
        path = self.path_for(key)
        path.parent.mkdir(parents=True, exist_ok=True)

        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=".json")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(envelope.model_dump_json(indent=2))
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        logger.debug("Cached %s entry %s", kind, key[:12])
        return path

    def load(self, kind: str, key: str, settings: Optional[Settings] = None) -> Optional[Dict[str, Any]]:
        cfg = settings or self.settings
        path = self.path_for(key)
        if not path.exists():
            return None
        try:
            envelope = CacheEnvelope.model_validate_json(path.read_text(encoding="utf-8"))
        except (ValidationError, ValueError, OSError) as e:
            logger.warning("Ignoring corrupt cache file %s: %s", path, e)
            return None

        if envelope.kind != kind or envelope.key != key:
            return None
        if envelope.caps_hash != caps_fingerprint(cfg) or envelope.engine_version != cfg.engine_version:
            return None
        return envelope.payload


_storage: FileStorage | None = None


def get_storage(base_dir: Optional[str | Path] = None) -> FileStorage:
    global _storage
    if base_dir is not None:
        return FileStorage(base_dir)
    if _storage is None:
        _storage = FileStorage()
    return _storage
