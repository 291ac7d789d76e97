"""Shared fixtures: the fast nano network and the shipped tiny preset."""

import pytest

from telewound.model import (
    build_model,
    load_preset,
    random_bundle,
    zero_bundle,
)

SMALL_CONFIG = load_preset("topformer-nano")


@pytest.fixture(scope="session")
def tiny_config():
    return load_preset("topformer-tiny")


@pytest.fixture(scope="session")
def tiny_model(tiny_config):
    return build_model(tiny_config, random_bundle(tiny_config, seed=7))


@pytest.fixture(scope="session")
def small_config():
    return SMALL_CONFIG


@pytest.fixture(scope="session")
def small_model():
    return build_model(SMALL_CONFIG, random_bundle(SMALL_CONFIG, seed=3))


@pytest.fixture(scope="session")
def small_zero_model():
    return build_model(SMALL_CONFIG, zero_bundle(SMALL_CONFIG))
