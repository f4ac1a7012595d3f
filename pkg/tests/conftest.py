"""Shared fixtures for the test suite."""

import json

import pytest

from app.services.fintop import discrete_space, sierpinski_space


@pytest.fixture
def sierpinski():
    """Points a, b with opens ∅, {a}, {a, b}."""
    return sierpinski_space()


@pytest.fixture
def two_points():
    return discrete_space(["a", "b"])


@pytest.fixture
def three_points():
    return discrete_space([0, 1, 2])


@pytest.fixture
def write_json(tmp_path):
    """Write a JSON document under tmp_path and return its path as a string."""

    def _write(name, data):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    return _write
