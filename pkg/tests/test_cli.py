import csv
import io
import json

import pytest

from ncsurface import AuditConfig, ConfigError, SurfacePreset, run_audit
from ncsurface.audit import parse_chain, resolve_element, resolve_with_report
from ncsurface.cli import main

FAST = {"surface": {"kind": "sphere"}, "truncations": [8, 16], "summability_terms": 20000,
        "random_elements": 1}


def _run(argv):
    out = io.StringIO()
    code = main(argv, out)
    return code, out.getvalue()


@pytest.fixture
def fast_config(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(FAST))
    return str(p)


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        AuditConfig.from_dict({})
    with pytest.raises(ConfigError):
        AuditConfig.from_dict({"surface": {"kind": "sphere"}, "bogus": 1})
    with pytest.raises(ConfigError):
        AuditConfig.from_dict({"surface": {"kind": "klein"}})
    with pytest.raises(ConfigError):
        AuditConfig.from_dict({"surface": {"kind": "sphere"}, "truncations": [2]})
    with pytest.raises(ConfigError):
        AuditConfig.from_dict({"surface": {"kind": "sphere"}, "tolerances": {"nope": 1}})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert _run(["axioms", "--config", str(bad)])[0] == 2
    assert _run(["axioms", "--config", str(tmp_path / "missing.json")])[0] == 2


def test_config_round_trip():
    cfg = AuditConfig.from_dict(FAST)
    assert AuditConfig.from_dict(cfg.to_dict()) == cfg


def test_audit_is_deterministic_and_passes():
    cfg = AuditConfig.from_dict(FAST)
    a, b = run_audit(cfg), run_audit(cfg)
    assert a.ok
    assert a.to_dict()["canonical_hash"] == b.to_dict()["canonical_hash"]
    statuses = {r.status for r in a.records}
    assert statuses <= {"pass", "obstructed-as-predicted"}
    assert "obstructed-as-predicted" in statuses
    assert all(r.paper_anchor for r in a.records)


def test_seed_changes_the_random_battery():
    h = [run_audit(AuditConfig.from_dict({**FAST, "seed": s})).to_dict()["canonical_hash"] for s in (1, 2)]
    assert h[0] != h[1]


def test_axioms_cli_json_and_csv(fast_config, tmp_path):
    code, text = _run(["axioms", "--config", fast_config])
    assert code == 0
    report = json.loads(text)
    assert {"config", "records", "canonical_hash", "timestamp"} <= set(report)
    cfg = dict(FAST, output={"format": "csv"})
    p = tmp_path / "csv.json"
    p.write_text(json.dumps(cfg))
    dest = tmp_path / "out.csv"
    code, _ = _run(["axioms", "--config", str(p), "--output", str(dest)])
    assert code == 0
    rows = list(csv.reader(dest.open()))
    assert rows[0] == ["name", "status", "n", "tolerance", "paper_anchor"]


def test_failed_check_sets_exit_code(tmp_path):
    cfg = dict(FAST, tolerances={"summability": 1e-12})
    p = tmp_path / "strict.json"
    p.write_text(json.dumps(cfg))
    assert _run(["axioms", "--config", str(p)])[0] == 1


def test_spectrum_cli():
    code, text = _run(["spectrum", "--n", "3"])
    rows = list(csv.reader(io.StringIO(text)))
    assert code == 0 and rows[0] == ["n", "eigenvalue", "multiplicity", "boundary_flag"]
    assert len(rows) == 1 + 6
    with pytest.raises(SystemExit):
        main(["spectrum", "--n", "1"], io.StringIO())


def test_commutator_index_orientation_decay_cli():
    code, text = _run(["commutator", "--element", "T_u", "--n", "16"])
    assert code == 0 and json.loads(text)["matches_symbolic"]
    assert _run(["index", "--p", "one", "--q", "one", "--n", "8"]) == (0, "1\n")
    assert _run(["index", "--p", "p_e0", "--q", "one", "--n", "8"]) == (0, "0\n")
    assert _run(["index", "--p", "nope", "--q", "one"])[0] == 2
    code, text = _run(["orientation", "--chain", "one,one,T_u,T_ubar", "--n", "16"])
    assert code == 0 and json.loads(text)["status"] == "obstructed-as-predicted"
    code, text = _run(["orientation", "--chain", "one,T_u,T_ubar"])
    assert code == 0 and json.loads(text)["obstruction"] == "parity"
    code, text = _run(["decay", "--element", "loop(0,1,1)"])
    assert code == 0 and json.loads(text)["verdict"] == "rapid"
    assert json.loads(_run(["decay", "--element", "T_u"])[1])["verdict"] == "finite-support"


def test_element_and_chain_parsing():
    assert resolve_element("p_e2") == resolve_element("p_e2")
    with pytest.raises(ConfigError):
        resolve_element("T_q")
    with pytest.raises(ConfigError):
        resolve_with_report("loop(0,2,1)", SurfacePreset.sphere())
    chain = parse_chain("one,one,T_u,T_ubar + -p_e0,T_u,T_u,T_ubar")
    assert chain.degree == 2 and len(chain) == 2
    assert parse_chain("").degree == 0
    with pytest.raises(ConfigError):
        parse_chain("one")
    with pytest.raises(ConfigError):
        parse_chain("one,T_u + one,T_u,T_ubar")
