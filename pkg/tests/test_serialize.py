import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_snapshot, random_stg, random_template
from stgminer import serialize as sio
from stgminer.bench import BenchRow
from stgminer.errors import ParseError, SchemaVersionError, ValidationError
from stgminer.evolution import classify_changes, mine_frequent
from stgminer.fixtures import DEMO_TIMES, DEMO_TRACKING, demo_snapshots, demo_stg, demo_template
from stgminer.graph import construct_stg
from stgminer.matching import match_all_anchors
from stgminer.patterns import catalog, catalog_by_name
from stgminer.relations import Region, Snapshot


class TestSnapshots:
    def test_round_trip(self, tmp_path):
        for s in demo_snapshots():
            sio.save_snapshot(s, tmp_path / "s.json")
            back = sio.load_snapshot(tmp_path / "s.json")
            assert back.time == s.time
            assert sorted(back.regions, key=lambda r: r.region_id) == sorted(s.regions, key=lambda r: r.region_id)

    def test_series_labels_and_layers(self, tmp_path):
        sio.save_snapshot_series(demo_snapshots(), tmp_path / "series")
        snaps = sio.load_snapshot_series(tmp_path / "series")
        assert [s.time for s in snaps] == ["2015", "2017", "2019"] == list(DEMO_TIMES)
        g = construct_stg(snaps, [dict(a) for a in DEMO_TRACKING])
        assert [(t.index, t.label) for t in g.timestamps] == [(0, "2015"), (1, "2017"), (2, "2019")]

    def test_series_file(self, tmp_path):
        data = {"schema_version": 1,
                "snapshots": [{k: v for k, v in sio.snapshot_to_dict(s).items() if k != "schema_version"}
                              for s in demo_snapshots()]}
        (tmp_path / "series.json").write_text(json.dumps(data))
        assert [s.time for s in sio.load_snapshot_series(tmp_path / "series.json")] == list(DEMO_TIMES)

    def test_overlapping_cells(self, tmp_path):
        s = {"schema_version": 1, "time": "2015", "regions": [
            {"region_id": 11, "class_label": "a", "cells": [[0, 0], [0, 1]]},
            {"region_id": 42, "class_label": "b", "cells": [[0, 1], [0, 2]]}]}
        (tmp_path / "s.json").write_text(json.dumps(s))
        with pytest.raises(ParseError) as err:
            sio.load_snapshot(tmp_path / "s.json")
        assert "11" in str(err.value) and "42" in str(err.value)

    def test_duplicate_region_id(self, tmp_path):
        s = {"schema_version": 1, "time": "t", "regions": [
            {"region_id": 1, "class_label": "a", "cells": [[0, 0]]},
            {"region_id": 1, "class_label": "b", "cells": [[5, 5]]}]}
        (tmp_path / "s.json").write_text(json.dumps(s))
        with pytest.raises(ParseError):
            sio.load_snapshot(tmp_path / "s.json")

    def test_empty_directory(self, tmp_path):
        with pytest.raises(ParseError):
            sio.load_snapshot_series(tmp_path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ParseError):
            sio.load_snapshot(tmp_path / "nope.json")

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10**6))
    def test_fuzzed_round_trip(self, seed):
        s = random_snapshot(random.Random(seed), "t0")
        back = sio.snapshot_from_dict(json.loads(sio.dumps(sio.snapshot_to_dict(s))))
        assert sio.snapshot_to_dict(back) == sio.snapshot_to_dict(s)


class TestSTG:
    def test_round_trip_demo(self, tmp_path):
        g = demo_stg()
        sio.save_stg(g, tmp_path / "g.json")
        assert sio.load_stg(tmp_path / "g.json") == g

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 10**6))
    def test_fuzzed_round_trip(self, seed):
        g = random_stg(random.Random(seed), max_nodes=12)
        assert sio.stg_from_dict(json.loads(sio.dumps(sio.stg_to_dict(g)))) == g

    def test_byte_deterministic(self, tmp_path):
        sio.save_stg(demo_stg(), tmp_path / "a.json")
        sio.save_stg(demo_stg(), tmp_path / "b.json")
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()

    def test_top_level_keys(self):
        assert set(sio.stg_to_dict(demo_stg())) == {"schema_version", "timestamps", "nodes", "edges"}

    def corrupt(self, tmp_path):
        data = sio.stg_to_dict(demo_stg())
        data["edges"].append({"src": 0, "dst": 7, "kind": "spatial", "relation": "meets"})
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(data))
        return path

    def test_corrupt_checked(self, tmp_path):
        with pytest.raises(ValidationError) as err:
            sio.load_stg(self.corrupt(tmp_path))
        assert "LayerViolation" in str(err.value)

    def test_corrupt_unchecked(self, tmp_path):
        g = sio.load_stg(self.corrupt(tmp_path), check=False)
        problems = g.validate()
        assert len(problems) == 1 and problems[0].startswith("LayerViolation")

    def test_schema_version(self, tmp_path):
        data = sio.stg_to_dict(demo_stg())
        data["schema_version"] = 3
        (tmp_path / "g.json").write_text(json.dumps(data))
        with pytest.raises(SchemaVersionError):
            sio.load_stg(tmp_path / "g.json")

    def test_unknown_kind(self, tmp_path):
        data = sio.stg_to_dict(demo_stg())
        data["edges"][0]["kind"] = "teleport"
        (tmp_path / "g.json").write_text(json.dumps(data))
        with pytest.raises(ParseError):
            sio.load_stg(tmp_path / "g.json")

    def test_bad_json_line(self, tmp_path):
        (tmp_path / "g.json").write_text('{\n"schema_version": 1,\n,}')
        with pytest.raises(ParseError) as err:
            sio.load_stg(tmp_path / "g.json")
        assert err.value.line == 3


class TestOtherTypes:
    @pytest.mark.parametrize("p", catalog(), ids=lambda p: p.name)
    def test_pattern(self, tmp_path, p):
        sio.save_pattern(p, tmp_path / "p.json")
        assert sio.load_pattern(tmp_path / "p.json") == p

    def test_template(self, tmp_path):
        t = demo_template()
        sio.save_template(t, tmp_path / "t.json")
        assert sio.load_template(tmp_path / "t.json") == t

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_fuzzed_template(self, seed):
        t = random_template(random.Random(seed))
        assert sio.template_from_dict(json.loads(sio.dumps(sio.template_to_dict(t)))) == t

    def test_assignments(self, tmp_path):
        sio.save_assignments(list(DEMO_TIMES), list(DEMO_TRACKING), tmp_path / "a.json")
        times, got = sio.load_assignments(tmp_path / "a.json")
        assert times == list(DEMO_TIMES)
        assert got == list(DEMO_TRACKING)

    def test_matches_all_anchors(self, tmp_path):
        g = demo_stg()
        p = catalog_by_name()["merge"]
        found = match_all_anchors(g, p)
        sio.save_matches(p.name, found, tmp_path / "m.json")
        name, back = sio.load_matches(tmp_path / "m.json", p.var_names)
        assert name == "merge" and back == found

    def test_matches_single_anchor(self, tmp_path):
        g = demo_stg()
        p = catalog_by_name()["spatial-edge"]
        found = match_all_anchors(g, p)[(1,)]
        sio.save_matches(p.name, found, tmp_path / "m.json", anchor=(1,))
        data = json.loads((tmp_path / "m.json").read_text())
        assert set(data) == {"schema_version", "pattern", "anchor", "assignments"}
        assert sio.load_matches(tmp_path / "m.json", p.var_names) == (p.name, {(1,): found})

    def test_events(self, tmp_path):
        events = classify_changes(demo_stg())
        sio.save_events(events, tmp_path / "e.json")
        assert sio.load_events(tmp_path / "e.json") == events

    def test_frequency_csv(self, tmp_path):
        table = mine_frequent(demo_stg(), catalog())
        sio.save_frequency_csv(table, tmp_path / "f.csv")
        assert sio.load_frequency_csv(tmp_path / "f.csv").rows == table.rows
        header = (tmp_path / "f.csv").read_text().splitlines()[0]
        assert header == "pattern,anchor,match_count,support"

    def test_bench_csv(self, tmp_path):
        rows = [BenchRow(50, 120, "spatial-triangle", 3, 40, 1.25), BenchRow(100, 260, "spatial-triangle", 3, 90, 0.1)]
        sio.save_bench_csv(rows, tmp_path / "b.csv")
        assert sio.load_bench_csv(tmp_path / "b.csv") == rows
        header = (tmp_path / "b.csv").read_text().splitlines()[0]
        assert header == "nodes,edges,pattern,anchor_count,match_count,time_ms"

    def test_csv_wrong_columns(self, tmp_path):
        (tmp_path / "b.csv").write_text("a,b\n1,2\n")
        with pytest.raises(ParseError):
            sio.load_bench_csv(tmp_path / "b.csv")

    def test_region_attrs_survive(self, tmp_path):
        s = Snapshot("t", [Region(1, "x", frozenset({(0, 0)}), {"height": 3.5})])
        sio.save_snapshot(s, tmp_path / "s.json")
        assert sio.load_snapshot(tmp_path / "s.json").regions[0].attrs == {"height": 3.5}
