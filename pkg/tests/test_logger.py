"""Tests for the structured logging helpers."""

import json
import logging
from pathlib import Path

from app.utils.logger import JSONFormatter, _sanitize_details, log_suite_result


class TestSanitizeDetails:
    def test_paths_become_file_names(self):
        data = {"family": Path("/tmp/instances/family.json"), "max_size": 3, "nested": {"seed": None}}
        assert _sanitize_details(data) == {"family": "family.json", "max_size": 3, "nested": {"seed": None}}

    def test_string_paths_become_file_names(self):
        data = {"groupoid": "/tmp/instances/groupoid.json", "ring": "Z/3", "map": "map.json"}
        assert _sanitize_details(data) == {"groupoid": "groupoid.json", "ring": "Z/3", "map": "map.json"}

    def test_other_values_become_strings(self):
        assert _sanitize_details({"only": ["REL-1"]}) == {"only": "['REL-1']"}


class TestJSONFormatter:
    def test_extra_fields_are_kept(self):
        record = logging.LogRecord("app.suites", logging.INFO, __file__, 1, "Event: %s", ("suite_result",), None)
        record.suite_id = "STE-1"
        entry = json.loads(JSONFormatter().format(record))
        assert entry["message"] == "Event: suite_result"
        assert entry["suite_id"] == "STE-1"
        assert entry["level"] == "INFO"


class TestEvents:
    def test_failing_suite_logs_an_error(self, caplog):
        with caplog.at_level(logging.INFO, logger="app.suites"):
            log_suite_result("CLA-2", cases=10, failures=1, processing_time=0.5)
        (record,) = caplog.records
        assert record.levelno == logging.ERROR
        assert record.failures == 1
