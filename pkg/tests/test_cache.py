import logging
from concurrent.futures import ThreadPoolExecutor

from app.storage.file_storage import FileStorage, get_storage


def test_store_then_load(tmp_path, settings):
    storage = FileStorage(tmp_path, settings)
    key = storage.make_key("property", "Z4", "prime||oracle=False")
    path = storage.store("property", key, {"value": False})
    assert path.parent.name == key[:2]
    assert storage.load("property", key) == {"value": False}


def test_missing_key_is_a_miss(tmp_path):
    storage = FileStorage(tmp_path)
    assert storage.load("property", "ab" * 32) is None


def test_cap_change_changes_key_and_invalidates(tmp_path, settings):
    storage = FileStorage(tmp_path, settings)
    tighter = settings.model_copy(update={"max_oracle_size": 64})
    key = storage.make_key("grid", "digest", "[]")
    assert key != storage.make_key("grid", "digest", "[]", tighter)
    storage.store("grid", key, {"ok": True})
    assert storage.load("grid", key, tighter) is None


def test_engine_version_mismatch_is_a_miss(tmp_path, settings):
    storage = FileStorage(tmp_path, settings)
    key = storage.make_key("grid", "digest", "[]")
    storage.store("grid", key, {"ok": True})
    newer = settings.model_copy(update={"engine_version": "9.9.9"})
    assert storage.load("grid", key, newer) is None


def test_kind_mismatch_is_a_miss(tmp_path):
    storage = FileStorage(tmp_path)
    key = storage.make_key("grid", "digest", "[]")
    storage.store("grid", key, {"ok": True})
    assert storage.load("property", key) is None


def test_corrupt_file_is_ignored_with_warning(tmp_path, caplog):
    storage = FileStorage(tmp_path)
    key = storage.make_key("property", "Z6", "prime")
    path = storage.store("property", key, {"value": False})
    path.write_text("{not json", encoding="utf-8")
    with caplog.at_level(logging.WARNING, logger="app.storage.file_storage"):
        assert storage.load("property", key) is None
    assert "corrupt cache file" in caplog.text


def test_concurrent_stores_leave_one_valid_file(tmp_path):
    storage = FileStorage(tmp_path)
    key = storage.make_key("property", "Z8", "nilary")

    def write(i):
        return storage.store("property", key, {"value": True, "writer": i % 2})

    with ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(write, range(32)))

    files = list(tmp_path.rglob("*.json"))
    assert len(files) == 1
    assert storage.load("property", key)["value"] is True


def test_get_storage(tmp_path):
    assert get_storage() is get_storage()
    assert get_storage(tmp_path).base_dir == tmp_path
