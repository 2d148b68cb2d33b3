import json

import pytest

from natbound import cache
from natbound.cache import CacheCorruptError
from natbound.zeros import locate_zeros


def test_warm_verify_purge(tmp_path):
    d = tmp_path / "c"
    assert cache.warm(60.0, d)["zeros"] == 13
    assert cache.verify(d)["status"] == "ok"
    assert cache.purge(d)["removed"] == 2
    assert cache.purge(d)["removed"] == 0
    assert cache.verify(d)["status"] == "empty"


def test_fresh_and_cached_tables_identical(tmp_path):
    fresh = locate_zeros(80.0)
    cache.save_table(fresh, tmp_path)
    loaded = cache.load_table(tmp_path)
    assert loaded.ordinates == fresh.ordinates
    assert cache.zeros_csv_text(loaded) == cache.zeros_csv_text(fresh)


def test_restricts_larger_cache(tmp_path):
    cache.warm(80.0, tmp_path)
    small = cache.get_zero_table(40.0, tmp_path)
    assert small.t_max == 40.0 and len(small) == 6
    # the certificate past the new top survives the cut
    assert small.certified_at[-1][0] > 40.0


def test_truncated_csv_is_quarantined(tmp_path):
    cache.warm(80.0, tmp_path)
    csv = tmp_path / cache.ZEROS_FILE
    csv.write_text("\n".join(csv.read_text().splitlines()[:8]) + "\n")
    with pytest.raises(CacheCorruptError):
        cache.verify(tmp_path)
    assert not csv.exists()
    assert any(p.name.startswith("zeros.csv.quarantine") for p in tmp_path.iterdir())


def test_perturbed_ordinate_detected(tmp_path):
    cache.warm(80.0, tmp_path)
    csv = tmp_path / cache.ZEROS_FILE
    lines = csv.read_text().splitlines()
    idx, val = lines[3].split(",")
    lines[3] = f"{idx},{float(val) + 0.01:.12f}"
    csv.write_text("\n".join(lines) + "\n")
    with pytest.raises(CacheCorruptError):
        cache.load_table(tmp_path)


def test_bad_metadata(tmp_path):
    cache.warm(40.0, tmp_path)
    (tmp_path / cache.META_FILE).write_text(json.dumps({"schema": 99}))
    with pytest.raises(CacheCorruptError):
        cache.load_table(tmp_path)


def test_no_silent_rebuild(tmp_path):
    cache.warm(40.0, tmp_path)
    (tmp_path / cache.ZEROS_FILE).write_text("index,ordinate\n1,14.0\n")
    with pytest.raises(CacheCorruptError):
        cache.get_zero_table(40.0, tmp_path)
