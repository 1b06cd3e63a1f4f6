from __future__ import annotations

import json

import pytest

from termmapper import ConfigError, PipelineOptions
from termmapper.config import (
    ServiceConfig,
    build_backend,
    build_deps,
    build_embedder,
    options_from_dict,
)
from termmapper.llm import RemoteBackend, StubBackend
from termmapper.vectors import HashingEmbedder, RemoteEmbedder


def test_options_overlay_keeps_unset_defaults():
    options = options_from_dict({"k": 3, "mode": "db_search"})
    assert options.k == 3
    assert options.mode == "db_search"
    assert options.exact_match_threshold == 0.95


def test_options_unknown_key_rejected():
    with pytest.raises(ConfigError):
        options_from_dict({"mystery_knob": 1})


def test_options_fetch_details_mapping():
    options = options_from_dict({"fetch_details": {"synonyms": True}})
    assert options.fetch_details.synonyms is True
    assert options.fetch_details.ancestors is False
    with pytest.raises(ConfigError):
        options_from_dict({"fetch_details": {"bogus": True}})


def test_options_vocabulary_filter_none_disables():
    options = options_from_dict({"vocabulary_filter": None})
    assert options.vocabulary_filter is None


def test_options_validation_applies_after_merge():
    with pytest.raises(Exception):
        options_from_dict({"k": 0})


def test_options_overlay_on_custom_base():
    base = PipelineOptions(k=9)
    merged = options_from_dict({"mode": "llm"}, base=base)
    assert merged.k == 9
    assert merged.mode == "llm"


def test_config_from_file_and_env(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"port": 9000, "cors_origins": ["http://a"]}))
    config = ServiceConfig.from_file(path)
    assert config.port == 9000
    overridden = config.with_env_overrides(
        {"TERMMAPPER_PORT": "9100", "TERMMAPPER_CORS_ORIGINS": "http://b, http://c"}
    )
    assert overridden.port == 9100
    assert overridden.cors_origins == ["http://b", "http://c"]


def test_config_unknown_keys_rejected(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"prot": 1}))
    with pytest.raises(ConfigError):
        ServiceConfig.from_file(path)


def test_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        ServiceConfig.from_file(tmp_path / "absent.json")


def test_build_embedder_variants():
    assert isinstance(build_embedder({}), HashingEmbedder)
    remote = build_embedder(
        {"provider": "remote", "endpoint": "http://e/embed", "dimension": 384}
    )
    assert isinstance(remote, RemoteEmbedder)
    with pytest.raises(ConfigError):
        build_embedder({"provider": "remote"})
    with pytest.raises(ConfigError):
        build_embedder({"provider": "mystery"})


def test_build_backend_variants(tmp_path):
    assert isinstance(build_backend({}), StubBackend)
    replies = tmp_path / "replies.json"
    replies.write_text(json.dumps({"a": "b"}))
    stub = build_backend({"backend": "stub", "replies_path": str(replies)})
    assert stub.mapping == {"a": "b"}
    remote = build_backend({"backend": "remote", "endpoint": "http://llm/v1"})
    assert isinstance(remote, RemoteBackend)
    with pytest.raises(ConfigError):
        build_backend({"backend": "remote"})


def test_build_deps_loads_store_and_index(tmp_path, fixture_store, fixture_index):
    store_path = tmp_path / "store.jsonl"
    index_path = tmp_path / "index.bin"
    fixture_store.save(store_path)
    fixture_index.save(index_path)
    deps = build_deps(
        ServiceConfig(store_path=str(store_path), index_path=str(index_path))
    )
    assert len(deps.store) == 3
    assert len(deps.index) == 3
    assert deps.embedder is not None
    assert deps.backend is not None


def test_build_deps_missing_paths_raise(tmp_path):
    with pytest.raises(ConfigError):
        build_deps(ServiceConfig(store_path=str(tmp_path / "absent.jsonl")))
