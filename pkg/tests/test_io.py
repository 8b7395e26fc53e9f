import io
import json

import numpy as np
import pytest

from hybridloc import (MalformedLine, ParseError, RssRecord, TdoaRecord,
                       ValidationError, parse_config, read_log, write_log)
from hybridloc.config import DEFAULTS, preset_config, with_overrides
from hybridloc.measlog import log_text


MINIMAL = json.dumps({
    "layout": {
        "reference": "B1",
        "anchors": [
            {"id": "B1", "position": [0.0, 0.0], "uwb": True},
            {"id": "B2", "position": [5.0, 0.0], "uwb": True},
            {"id": "B3", "position": [2.5, 4.0], "uwb": True},
        ],
    },
    "path": {"waypoints": [[1.0, 1.0], [4.0, 3.0]], "speed_mps": 0.8},
})


def test_minimal_config_gets_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.ukf.alpha == 0.5
    assert cfg.ukf.beta == 2.0
    assert cfg.ukf.kappa == 0.0
    assert cfg.sigma_ax2 == 0.35
    assert cfg.schedule.ble_rate == 3.0
    assert cfg.layout.reference_id == "B1"
    assert cfg.path.speed == 0.8
    # Every default is echoed in the resolved document.
    assert set(cfg.resolved) == set(DEFAULTS)
    assert cfg.resolved["noise"]["rss_sigma_db"] == 4.0


def test_alpha_bound_rejected():
    doc = json.loads(MINIMAL)
    doc["ukf"] = {"alpha": 0.0}
    with pytest.raises(ValidationError):
        parse_config(json.dumps(doc))


def test_duplicate_anchor_rejected():
    doc = json.loads(MINIMAL)
    doc["layout"]["anchors"].append({"id": "B1", "position": [9.0, 9.0]})
    with pytest.raises(ValidationError):
        parse_config(json.dumps(doc))


def test_unknown_key_rejected():
    doc = json.loads(MINIMAL)
    doc["tyop"] = 1
    with pytest.raises(ValidationError, match="tyop"):
        parse_config(json.dumps(doc))
    doc = json.loads(MINIMAL)
    doc["schedule"] = {"ble_rate_hz": 3.0, "uwb_hz": 1.0}
    with pytest.raises(ValidationError, match="uwb_hz"):
        parse_config(json.dumps(doc))


def test_parse_error_reports_position():
    with pytest.raises(ParseError, match="line"):
        parse_config("{not json")


def test_preset_lowrate():
    cfg = preset_config("paper-lowrate")
    assert cfg.schedule.decimation == 6
    assert cfg.noise.rss_sigma == 6.0
    assert cfg.noise.toa_sigma == 2e-9
    with pytest.raises(ValidationError):
        parse_config(json.dumps({"preset": "nope"}))


def test_with_overrides_validates():
    cfg = preset_config("paper-highrate")
    cfg2 = with_overrides(cfg, {"seed": 99, "schedule": {"decimation": 6}})
    assert cfg2.seed == 99
    assert cfg2.schedule.decimation == 6
    assert cfg.schedule.decimation == 1  # original untouched
    with pytest.raises(ValidationError):
        with_overrides(cfg, {"nonsense": 1})


def test_filters_validated():
    doc = json.loads(MINIMAL)
    doc["filters"] = ["ekf", "imposter"]
    with pytest.raises(ValidationError):
        parse_config(json.dumps(doc))
    doc["filters"] = []
    with pytest.raises(ValidationError):
        parse_config(json.dumps(doc))


def test_log_rss_line():
    records = read_log(io.StringIO(
        "timestamp_s,kind,anchor_id,anchor_id2,value,variance\n"
        "0.333,RSS,A3,-61.25,16.0\n"))
    assert records == [RssRecord(0.333, "A3", -61.25, 16.0)]


def test_log_tdoa_line():
    records = read_log(io.StringIO(
        "timestamp_s,kind,anchor_id,anchor_id2,value,variance\n"
        "1.000,TDOA,A5,A1,1.2e-9,2e-18\n"))
    assert records == [TdoaRecord(1.0, "A5", "A1", 1.2e-9, 2e-18)]


def test_log_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    records = []
    for k in range(50):
        t = k / 3.0
        records.append(RssRecord(t, f"A{k % 9 + 1}", float(rng.normal(-60, 4)), 16.0))
        records.append(TdoaRecord(t, "A5", "A1", float(rng.normal(0, 1e-9)), 2e-18))
    path = tmp_path / "log.csv"
    write_log(records, path)
    back = read_log(path)
    assert back == records
    # Re-writing a read log reproduces the file byte for byte.
    text = path.read_text()
    assert log_text(back) == text


def test_log_requires_header():
    with pytest.raises(MalformedLine):
        read_log(io.StringIO("0.333,RSS,A3,-61.25,16.0\n"))


def test_log_malformed_line_number():
    stream = io.StringIO(
        "timestamp_s,kind,anchor_id,anchor_id2,value,variance\n"
        "0.333,RSS,A3,-61.25,16.0\n"
        "0.666,WAT,A3,-61.25,16.0\n")
    with pytest.raises(MalformedLine) as err:
        read_log(stream)
    assert err.value.line_number == 3
    stream = io.StringIO(
        "timestamp_s,kind,anchor_id,anchor_id2,value,variance\n"
        "oops,RSS,A3,-61.25,16.0\n")
    with pytest.raises(MalformedLine) as err:
        read_log(stream)
    assert err.value.line_number == 2
    stream = io.StringIO(
        "timestamp_s,kind,anchor_id,anchor_id2,value,variance\n"
        "0.333,RSS,A3,-61.25\n")
    with pytest.raises(MalformedLine):
        read_log(stream)


def test_log_floats_survive_17_digits(tmp_path):
    value = -60.123456789012345
    t = 1.0 / 3.0
    path = tmp_path / "log.csv"
    write_log([RssRecord(t, "A1", value, 16.0)], path)
    rec = read_log(path)[0]
    assert rec.timestamp == t
    assert rec.value == value
