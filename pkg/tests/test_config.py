from app.config import get_output_dir, get_settings
from app.simulation import takeoff_threshold


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("SEIRKIT_TAKEOFF_MIN", "5")
    monkeypatch.setenv("PORT", "9001")
    get_settings.cache_clear()
    settings = get_settings()
    assert settings.takeoff_min == 5
    assert settings.port == 9001
    assert takeoff_threshold(16) == 5


def test_worker_count_comes_from_threads():
    assert get_settings().worker_count == 1


def test_output_dir_is_created(tmp_path):
    target = tmp_path / "nested" / "runs"
    assert get_output_dir(str(target)) == target
    assert target.is_dir()
    assert get_output_dir() == tmp_path / "runs"
