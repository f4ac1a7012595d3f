"""End-to-end tests of the command line."""

import json

import pytest

from app.main import run

TWO_POINT_FAMILY = {
    "points": ["a", "b"],
    "codomain": [0, 1],
    "members": [[0, 0], [0, 1], [1, 0], [1, 1]],
    "theta": [0, 0],
}
SIERPINSKI_FAMILY = {
    "space": {"points": ["a", "b"], "opens": [[], ["a"], ["a", "b"]]},
    "codomain": [0, 1],
    "members": [[0, 0], [1, 0], [1, 1]],
}
PAIR = {"kind": "pair", "points": [1, 2]}


def report_of(capsys):
    return json.loads(capsys.readouterr().out)


class TestReconstruct:
    def test_two_point_family(self, write_json, capsys):
        code = run(["reconstruct", "--family", write_json("family.json", TWO_POINT_FAMILY)])
        report = report_of(capsys)
        assert code == 0
        assert report["status"] == "verified"
        assert len(report["artifacts"]["space"]["points"]) == 2

    def test_swap_map(self, write_json, capsys):
        family = write_json("family.json", TWO_POINT_FAMILY)
        swap = write_json("map.json", {"mapping": [0, 2, 1, 3]})
        assert run(["reconstruct", "--family", family, "--map", swap]) == 0
        assert report_of(capsys)["artifacts"]["phi"] == {"a": "b", "b": "a"}


class TestVerifyRelations:
    def test_equivalence(self, write_json, capsys):
        assert run(["verify-relations", "--family", write_json("family.json", TWO_POINT_FAMILY)]) == 0
        assert report_of(capsys)["artifacts"]["pairs_checked"] == 16

    def test_regularity_refuted(self, write_json, capsys):
        family = write_json("family.json", SIERPINSKI_FAMILY)
        assert run(["verify-relations", "--family", family, "--theorem", "regularity"]) == 1
        report = report_of(capsys)
        assert report["status"] == "refuted"
        assert report["witnesses"]

    def test_unknown_item(self, write_json, capsys):
        family = write_json("family.json", TWO_POINT_FAMILY)
        assert run(["verify-relations", "--family", family, "--items", "az"]) == 2


class TestInputErrors:
    def test_malformed_json(self, tmp_path, capsys):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        assert run(["reconstruct", "--family", str(path)]) == 2
        assert report_of(capsys)["status"] == "error"

    def test_missing_file(self, tmp_path, capsys):
        assert run(["reconstruct", "--family", str(tmp_path / "absent.json")]) == 2

    def test_unknown_key(self, write_json, capsys):
        family = write_json("family.json", {**TWO_POINT_FAMILY, "colour": "red"})
        assert run(["reconstruct", "--family", family]) == 2

    def test_unknown_command(self, capsys):
        assert run(["frobnicate"]) == 2


class TestSteinbergCommands:
    @pytest.mark.parametrize("ring, expected", [("Z/3", 0), ("Z/5", 1)])
    def test_condition_s(self, write_json, capsys, ring, expected):
        groupoid = write_json("c2.json", {"kind": "cyclic", "order": 2})
        code = run(["steinberg-decompose", "--groupoid", groupoid, "--ring", ring, "--property", "condition-s"])
        assert code == expected

    def test_decompose_identity(self, write_json, capsys):
        images = [{"arrow": [x, y], "image": [[[x, y], 1]]} for x in (1, 2) for y in (1, 2)]
        groupoid = write_json("pair.json", PAIR)
        algebra_map = write_json("map.json", {"images": images})
        assert run(["steinberg-decompose", "--groupoid", groupoid, "--ring", "Z/5", "--map", algebra_map]) == 0
        assert report_of(capsys)["artifacts"]["phi"]["(1, 2)"] == "(1, 2)"

    def test_automorphisms_need_local_bisection(self, write_json, capsys):
        groupoid = write_json("c2.json", {"kind": "cyclic", "order": 2})
        assert run(["enumerate-automorphisms", "--groupoid", groupoid, "--ring", "Z/5"]) == 1
        assert report_of(capsys)["status"] == "refuted"

    def test_declared_local_bisection(self, write_json, capsys):
        groupoid = write_json("c2.json", {"kind": "cyclic", "order": 2})
        args = ["enumerate-automorphisms", "--groupoid", groupoid, "--ring", "Z/5", "--assume-local-bisection", "--no-cross-check"]
        assert run(args) == 0
        assert report_of(capsys)["artifacts"]["local_bisection"] == "declared"

    def test_ring_from_file(self, write_json, capsys):
        groupoid = write_json("pair.json", PAIR)
        ring = write_json("ring.json", {"kind": "modular", "modulus": 3})
        assert run(["enumerate-automorphisms", "--groupoid", groupoid, "--ring", ring]) == 0
        assert report_of(capsys)["artifacts"]["order"] == 4


class TestOtherCommands:
    def test_haar_ir(self, write_json, capsys):
        images = [{"arrow": [x, y], "image": [[[x, y], 1]]} for x in (1, 2) for y in (1, 2)]
        groupoid = write_json("pair.json", PAIR)
        conv = write_json("conv.json", {"images": images})
        assert run(["haar-verify", "--groupoid", groupoid, "--map", conv, "--norm", "ir"]) == 0

    def test_haar_l1_needs_measure(self, write_json, capsys):
        images = [{"arrow": [x, y], "image": [[[x, y], 1]]} for x in (1, 2) for y in (1, 2)]
        groupoid = write_json("pair.json", PAIR)
        conv = write_json("conv.json", {"images": images})
        assert run(["haar-verify", "--groupoid", groupoid, "--map", conv]) == 2

    def test_kaplansky(self, write_json, capsys):
        family = write_json("family.json", TWO_POINT_FAMILY)
        swap = write_json("map.json", {"mapping": [0, 2, 1, 3]})
        assert run(["classify-decompose", "--family", family, "--map", swap, "--mode", "kaplansky"]) == 0
        assert report_of(capsys)["artifacts"]["phi"] == {"a": "b", "b": "a"}

    def test_stone_space(self, write_json, capsys):
        space = write_json("space.json", {"points": [0, 1, 2]})
        assert run(["stone-duality", "--space", space]) == 0

    def test_stone_needs_one_input(self, capsys):
        assert run(["stone-duality"]) == 2


class TestReporting:
    def test_suite_with_json_out(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = run(["suite", "--max-size", "2", "--only", "STO-1", "STE-1", "--json-out", str(out)])
        assert code == 0
        saved = json.loads(out.read_text(encoding="utf-8"))
        assert [s["suite_id"] for s in saved["artifacts"]["suites"]] == ["STO-1", "STE-1"]
        assert "timing" not in saved

    def test_timing_flag(self, write_json, capsys):
        run(["reconstruct", "--family", write_json("family.json", TWO_POINT_FAMILY), "--timing"])
        assert report_of(capsys)["timing"] >= 0
